//! Concentration (input/action clamping), loop detection on the mind-state
//! stream and the reset that lets the stream escape its loop.

use std::collections::{BTreeSet, HashMap};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::dynamics::{run_with_hooks, AgentSpec, TickHook, WorldSpec};
use crate::error::{Error, Result};
use crate::model::{
    factor, BodyInput, Ceta, FeelingTone, Intensity, MentalInput, MindState, Trace, WorldState,
};
use crate::rng::{Party, RandomnessSource};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationConfig {
    pub body: BodyInput,
    pub mental: MentalInput,
    pub action: BTreeSet<String>,
    /// First clamped tick.
    pub start_tick: i64,
    pub drift_rate: f64,
    /// Re-clamp on the tick after a drift; otherwise a drift persists.
    pub recovery: bool,
}

impl ConcentrationConfig {
    pub fn new(body: BodyInput, mental: MentalInput, action: BTreeSet<String>) -> Self {
        ConcentrationConfig {
            body,
            mental,
            action,
            start_tick: 0,
            drift_rate: 0.0,
            recovery: true,
        }
    }

    pub fn validate(&self, agent: &AgentSpec) -> Result<()> {
        if !(0.0..=1.0).contains(&self.drift_rate) {
            return Err(Error::InvalidParameter(format!(
                "drift rate {} not in [0,1]",
                self.drift_rate
            )));
        }
        let probe = Ceta {
            body: self.body.clone(),
            action: crate::model::Action {
                menu: agent.registry.actions.clone(),
                selected: self.action.clone(),
            },
            ..Ceta::default()
        };
        agent.registry.validate(&probe)
    }

    fn clamp(&self, mut c: Ceta) -> Ceta {
        c.body = self.body.clone();
        c.mental = self.mental.clone();
        c.action.selected = self.action.clone();
        c
    }
}

/// Clamps inputs and action from `start_tick` on; logs drift ticks.
#[derive(Debug, Clone)]
pub struct ConcentrationHook {
    cfg: ConcentrationConfig,
    wandering: bool,
    drift_ticks: Vec<i64>,
}

impl ConcentrationHook {
    pub fn new(cfg: ConcentrationConfig) -> Self {
        ConcentrationHook {
            cfg,
            wandering: false,
            drift_ticks: Vec::new(),
        }
    }

    pub fn drift_ticks(&self) -> &[i64] {
        &self.drift_ticks
    }
}

impl TickHook for ConcentrationHook {
    fn adjust(&mut self, _history: &Trace, next: Ceta, rng: &RandomnessSource) -> Result<Ceta> {
        if next.t < self.cfg.start_tick {
            return Ok(next);
        }
        if !(self.wandering && !self.cfg.recovery) {
            self.wandering = self.cfg.drift_rate > 0.0
                && rng.fork(next.t, Party::Meta).bernoulli(self.cfg.drift_rate);
        }
        if self.wandering {
            self.drift_ticks.push(next.t);
            let mut c = next;
            c.action.selected = self.cfg.action.clone();
            return Ok(c);
        }
        Ok(self.cfg.clamp(next))
    }
}

/// Runs with inputs and action clamped from `cfg.start_tick`. A clamp that
/// covers `c0` itself is applied to it as well.
pub fn concentrate_run(
    agent: &mut AgentSpec,
    world: &WorldSpec,
    c0: Ceta,
    w0: WorldState,
    seed: u64,
    n_steps: usize,
    cfg: &ConcentrationConfig,
) -> Result<Trace> {
    cfg.validate(agent)?;
    let c0 = if c0.t >= cfg.start_tick {
        cfg.clamp(c0)
    } else {
        c0
    };
    let mut hook = ConcentrationHook::new(cfg.clone());
    run_with_hooks(agent, world, c0, w0, seed, n_steps, &mut [&mut hook])
}

/// A detected cycle: `stream[start + period] == stream[start]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopReport {
    pub start: i64,
    pub period: usize,
    pub witness: MindState,
}

/// Earliest repeat in `stream`, found by hashing. The returned `start` is
/// the index of the first occurrence of the first value to recur.
pub fn detect_loop(stream: &[MindState]) -> Option<LoopReport> {
    first_repeat(stream).map(|(start, period)| LoopReport {
        start: start as i64,
        period,
        witness: stream[start].clone(),
    })
}

pub fn first_repeat<T: Eq + Hash>(stream: &[T]) -> Option<(usize, usize)> {
    let mut seen: HashMap<&T, usize> = HashMap::with_capacity(stream.len());
    for (j, s) in stream.iter().enumerate() {
        if let Some(&i) = seen.get(s) {
            return Some((i, j - i));
        }
        seen.insert(s, j);
    }
    None
}

/// Loop detection on the mind-state substream from tick `from` on, with
/// `start` reported as an absolute tick.
pub fn detect_trace_loop(tr: &Trace, from: i64) -> Option<LoopReport> {
    let k = tr.offset_of(from)?;
    let stream: Vec<MindState> = tr.entries()[k..]
        .iter()
        .map(|e| e.ceta.mind.clone())
        .collect();
    detect_loop(&stream).map(|mut r| {
        r.start += from;
        r
    })
}

/// Brent's cycle finding on the sequence `x0, f(x0), f(f(x0)), ...`.
/// Returns `(start, period)`.
pub fn brent<T: Clone + PartialEq>(x0: T, f: impl Fn(&T) -> T) -> (usize, usize) {
    let mut power = 1;
    let mut period = 1;
    let mut tortoise = x0.clone();
    let mut hare = f(&x0);
    while tortoise != hare {
        if power == period {
            tortoise = hare.clone();
            power *= 2;
            period = 0;
        }
        hare = f(&hare);
        period += 1;
    }
    let mut tortoise = x0.clone();
    let mut hare = (0..period).fold(x0, |x, _| f(&x));
    let mut start = 0;
    while tortoise != hare {
        tortoise = f(&tortoise);
        hare = f(&hare);
        start += 1;
    }
    (start, period)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResetConfig {
    /// Consecutive aware cycles needed.
    pub cycles: usize,
    /// Fraction of a cycle's ticks that must be mindful for it to count.
    pub coverage: f64,
}

impl Default for ResetConfig {
    fn default() -> Self {
        ResetConfig {
            cycles: 2,
            coverage: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResetEvent {
    pub tick: i64,
    pub loop_start: i64,
    pub period: usize,
    pub cycles: usize,
    pub ceta: Ceta,
}

/// The object-less moment following `prev`: nothing attended, no mental
/// objects, neutral feeling, Wrong View dropped.
pub fn reset_ceta(prev: &Ceta) -> Ceta {
    let mut c = prev.successor();
    c.body.focus.clear();
    c.mental = MentalInput::default();
    c.mind.feeling = FeelingTone::Neutral;
    c.mind.set(factor::WRONG_VIEW, Intensity::ZERO);
    c
}

/// Fires when `cfg.cycles` consecutive passes through `lp` each had at
/// least `cfg.coverage` of their ticks mindful. `awareness` is indexed by
/// trace offset. The event sits on the tick right after those cycles.
pub fn nibbana_reset(
    tr: &Trace,
    lp: &LoopReport,
    awareness: &[bool],
    cfg: &ResetConfig,
) -> Result<Option<ResetEvent>> {
    let p = lp.period;
    let start = tr
        .offset_of(lp.start)
        .ok_or_else(|| Error::LoopMismatch(format!("start {} outside trace", lp.start)))?;
    if p == 0 {
        return Err(Error::LoopMismatch("period must be ≥ 1".into()));
    }
    let mind = |k: usize| &tr.entries()[k].ceta.mind;
    if start + p >= tr.len() || mind(start + p) != mind(start) || *mind(start) != lp.witness {
        return Err(Error::LoopMismatch(format!(
            "no repeat at {} + {p}",
            lp.start
        )));
    }
    if cfg.cycles == 0 {
        return Err(Error::InvalidParameter(
            "reset needs at least one cycle".into(),
        ));
    }

    let cycle_ok = |j: usize| {
        let base = start + j * p;
        if base + p > tr.len() || base + p > awareness.len() {
            return None;
        }
        let on_loop = (0..p).all(|i| mind(base + i) == mind(start + i));
        let aware = (0..p).filter(|&i| awareness[base + i]).count();
        Some(on_loop && aware as f64 >= cfg.coverage * p as f64)
    };

    let mut run = 0;
    let mut j = 0;
    while let Some(ok) = cycle_ok(j) {
        run = if ok { run + 1 } else { 0 };
        j += 1;
        if run == cfg.cycles {
            let last = start + j * p - 1;
            let prev = &tr.entries()[last].ceta;
            return Ok(Some(ResetEvent {
                tick: prev.t + 1,
                loop_start: lp.start,
                period: p,
                cycles: cfg.cycles,
                ceta: reset_ceta(prev),
            }));
        }
    }
    Ok(None)
}

/// Mind-states visited by the loop.
pub fn cycle_states(tr: &Trace, lp: &LoopReport) -> BTreeSet<MindState> {
    (0..lp.period as i64)
        .filter_map(|i| tr.at(lp.start + i))
        .map(|e| e.ceta.mind.clone())
        .collect()
}

/// Whether some mind-state in `[tick, tick + period]` lies outside the loop.
pub fn escaped_within_period(tr: &Trace, lp: &LoopReport, tick: i64) -> bool {
    let states = cycle_states(tr, lp);
    (0..=lp.period as i64)
        .filter_map(|i| tr.at(tick + i))
        .any(|e| !states.contains(&e.ceta.mind))
}

/// Watches the mind-state stream from `from_tick` for a loop and swaps in
/// the reset moment once the awareness condition is met. Fires at most once.
#[derive(Debug, Clone)]
pub struct ResetHook {
    cfg: ResetConfig,
    awareness: Vec<bool>,
    from_tick: i64,
    seen: HashMap<MindState, i64>,
    scanned: usize,
    found: Option<LoopReport>,
    event: Option<ResetEvent>,
}

impl ResetHook {
    pub fn new(cfg: ResetConfig, awareness: Vec<bool>, from_tick: i64) -> Self {
        ResetHook {
            cfg,
            awareness,
            from_tick,
            seen: HashMap::new(),
            scanned: 0,
            found: None,
            event: None,
        }
    }

    pub fn loop_report(&self) -> Option<&LoopReport> {
        self.found.as_ref()
    }

    pub fn event(&self) -> Option<&ResetEvent> {
        self.event.as_ref()
    }

    fn scan(&mut self, history: &Trace) {
        while self.found.is_none() && self.scanned < history.len() {
            let c = &history.entries()[self.scanned].ceta;
            self.scanned += 1;
            if c.t < self.from_tick {
                continue;
            }
            if let Some(&first) = self.seen.get(&c.mind) {
                self.found = Some(LoopReport {
                    start: first,
                    period: (c.t - first) as usize,
                    witness: c.mind.clone(),
                });
            } else {
                self.seen.insert(c.mind.clone(), c.t);
            }
        }
    }
}

impl TickHook for ResetHook {
    fn adjust(&mut self, history: &Trace, next: Ceta, _rng: &RandomnessSource) -> Result<Ceta> {
        if self.event.is_some() {
            return Ok(next);
        }
        self.scan(history);
        let extended;
        let tr = match &self.found {
            Some(_) => history,
            None => {
                // the first repeat may be `next` itself, which is also the
                // reset tick when a single cycle suffices
                let first = match self.seen.get(&next.mind) {
                    Some(&first) if next.t >= self.from_tick => first,
                    _ => return Ok(next),
                };
                let Some(last) = history.last() else {
                    return Ok(next);
                };
                let mut t = history.clone();
                t.push(next.clone(), last.world.clone())?;
                extended = t;
                self.found = Some(LoopReport {
                    start: first,
                    period: (next.t - first) as usize,
                    witness: next.mind.clone(),
                });
                &extended
            }
        };
        let lp = self.found.as_ref().expect("set above");
        match nibbana_reset(tr, lp, &self.awareness, &self.cfg)? {
            Some(ev) if ev.tick == next.t => {
                let c = ev.ceta.clone();
                self.event = Some(ev);
                Ok(c)
            }
            _ => Ok(next),
        }
    }
}
