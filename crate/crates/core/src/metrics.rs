//! Trace statistics: suffering measures, action wholesomeness, and the
//! compound/fluctuating/impersonal exposure statistics.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{run, step, AgentSpec, WorldSpec};
use crate::error::{Error, Result};
use crate::model::{
    factor, Ceta, GroupSelector, MentalObject, MindState, QuoteContent, Trace, TraceEntry,
    WorldState,
};
use crate::rng::RandomnessSource;

/// Half-open tick range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: i64,
    pub end: i64,
}

impl Window {
    pub fn new(start: i64, end: i64) -> Self {
        Window { start, end }
    }

    pub fn all(tr: &Trace) -> Self {
        Window {
            start: tr.t0,
            end: tr.t0 + tr.len() as i64,
        }
    }

    pub fn len(&self) -> usize {
        (self.end - self.start).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn entries<'a>(&self, tr: &'a Trace) -> Result<&'a [TraceEntry]> {
        if self.is_empty() {
            return Err(Error::EmptyWindow);
        }
        match (tr.offset_of(self.start), tr.offset_of(self.end - 1)) {
            (Some(a), Some(b)) => Ok(&tr.entries()[a..=b]),
            _ => Err(Error::OutOfRange(format!(
                "window {}..{} outside trace",
                self.start, self.end
            ))),
        }
    }
}

impl std::str::FromStr for Window {
    type Err = Error;
    /// `a..b`
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("window `{s}`, expected a..b"));
        let (a, b) = s.split_once("..").ok_or_else(bad)?;
        Ok(Window::new(
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        ))
    }
}

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

fn tick_pain(c: &Ceta) -> f64 {
    f64::from((-c.mind.feeling.value()).max(0))
}

/// Mean negative feeling magnitude per tick.
pub fn pain_metric(tr: &Trace, window: Window) -> Result<f64> {
    let entries = window.entries(tr)?;
    Ok(entries.iter().map(|e| tick_pain(&e.ceta)).sum::<f64>() / entries.len() as f64)
}

/// One minus the normalised entropy of action use; 1 when only one action
/// (or none) is ever taken, 0 when use is uniform over the menu.
pub fn rigidity_metric(tr: &Trace, window: Window) -> Result<f64> {
    let entries = window.entries(tr)?;
    if entries.len() < 2 {
        return Err(Error::EmptyWindow);
    }
    let mut menu: BTreeSet<&str> = BTreeSet::new();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for e in entries {
        menu.extend(e.ceta.action.menu.iter().map(String::as_str));
        for a in &e.ceta.action.selected {
            *counts.entry(a.as_str()).or_default() += 1;
        }
    }
    let total: usize = counts.values().sum();
    if total == 0 || counts.len() == 1 || menu.len() <= 1 {
        return Ok(1.0);
    }
    let first = *counts.values().next().expect("non-empty");
    if counts.len() == menu.len() && counts.values().all(|&n| n == first) {
        return Ok(0.0);
    }
    let entropy: f64 = counts
        .values()
        .map(|&n| {
            let p = n as f64 / total as f64;
            -p * p.ln()
        })
        .sum();
    Ok((1.0 - entropy / (menu.len() as f64).ln()).clamp(0.0, 1.0))
}

/// Exposure to the mind-state as such while mindful and afraid.
pub fn is_lack_tick(c: &Ceta) -> bool {
    c.mind.is_present(factor::MINDFULNESS)
        && c.mental
            .quotes()
            .any(|q| q.content == QuoteContent::Group(GroupSelector::MindState))
        && c.mind.intensity(factor::FEAR) >= 0.5
}

/// Number of maximal runs of Lack ticks.
pub fn lack_events(tr: &Trace, window: Window) -> Result<usize> {
    if window.is_empty() {
        return Ok(0);
    }
    let entries = window.entries(tr)?;
    let mut episodes = 0;
    let mut inside = false;
    for e in entries {
        let lack = is_lack_tick(&e.ceta);
        if lack && !inside {
            episodes += 1;
        }
        inside = lack;
    }
    Ok(episodes)
}

/// Mean number of self-tagged concepts in the mental input per tick.
pub fn selfing_score(tr: &Trace, window: Window, self_concepts: &BTreeSet<String>) -> Result<f64> {
    if window.is_empty() {
        return Ok(0.0);
    }
    let entries = window.entries(tr)?;
    let hits: usize = entries
        .iter()
        .map(|e| {
            e.ceta
                .mental
                .objects
                .iter()
                .filter(|o| matches!(o, MentalObject::Concept(id) if self_concepts.contains(id)))
                .count()
        })
        .sum();
    Ok(hits as f64 / entries.len() as f64)
}

/// Number of mind-state components that differ: the feeling tone plus each
/// factor whose intensity changed.
pub fn mind_change(a: &MindState, b: &MindState) -> usize {
    let names: BTreeSet<&String> = a.factors.keys().chain(b.factors.keys()).collect();
    usize::from(a.feeling != b.feeling)
        + names
            .into_iter()
            .filter(|n| a.factors.get(*n) != b.factors.get(*n))
            .count()
}

/// How many of the five groups carry non-default content.
pub fn active_groups(c: &Ceta) -> usize {
    [
        !c.body.pixels.is_empty(),
        !c.mental.is_empty(),
        c.mind.feeling != Default::default(),
        c.mind.present_factors().next().is_some(),
        !c.action.selected.is_empty(),
    ]
    .iter()
    .filter(|b| **b)
    .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeCharacteristics {
    pub compoundness: f64,
    pub fluctuation: f64,
    pub impersonality: f64,
}

pub fn three_characteristics(
    tr: &Trace,
    window: Window,
    self_concepts: &BTreeSet<String>,
) -> Result<ThreeCharacteristics> {
    let entries = window.entries(tr)?;
    if entries.len() < 2 {
        return Err(Error::EmptyWindow);
    }
    let n = entries.len() as f64;
    let compoundness = entries
        .iter()
        .map(|e| active_groups(&e.ceta))
        .sum::<usize>() as f64
        / n;
    let fluctuation = entries
        .windows(2)
        .map(|w| mind_change(&w[0].ceta.mind, &w[1].ceta.mind))
        .sum::<usize>() as f64
        / (n - 1.0);
    let selfing = selfing_score(tr, window, self_concepts)?;
    Ok(ThreeCharacteristics {
        compoundness,
        fluctuation,
        impersonality: 1.0 - selfing.clamp(0.0, 1.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufferingReport {
    pub pain: f64,
    pub rigidity: f64,
    pub lack_events: usize,
    pub window: Window,
}

pub fn suffering_report(tr: &Trace, window: Window) -> Result<SufferingReport> {
    Ok(SufferingReport {
        pain: pain_metric(tr, window)?,
        rigidity: rigidity_metric(tr, window)?,
        lack_events: lack_events(tr, window)?,
        window,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Wholesomeness {
    Wholesome,
    Unwholesome,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WholesomeVerdict {
    pub action: String,
    pub class: Wholesomeness,
    /// Forced minus baseline expected pain; positive means more suffering.
    pub score: f64,
    pub forced_pain: f64,
    pub baseline_pain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RolloutParams {
    pub horizon: usize,
    pub rollouts: usize,
    pub seed: u64,
    pub epsilon: f64,
}

impl Default for RolloutParams {
    fn default() -> Self {
        RolloutParams {
            horizon: 5,
            rollouts: 200,
            seed: 0,
            epsilon: 0.05,
        }
    }
}

/// Pain over the `horizon` ticks after the agent's next decision from
/// `(c, w)`, optionally overriding that decision with `force`.
fn rollout_pain(
    c: &Ceta,
    w: &WorldState,
    agent: &AgentSpec,
    world: &WorldSpec,
    force: Option<&str>,
    horizon: usize,
    seed: u64,
) -> Result<f64> {
    let mut agent = agent.clone();
    let rng = RandomnessSource::new(seed);
    let (mut decision, w1) = step(c, w, &rng, &mut agent, world)?;
    if let Some(a) = force {
        decision.action.selected = [a.to_string()].into();
    }
    let t = decision.t;
    let tr = run(&mut agent, world, decision, w1, seed, horizon)?;
    pain_metric(&tr, Window::new(t + 1, t + 1 + horizon as i64))
}

/// Compares forcing `action` at the agent's next decision against letting
/// the agent choose, by paired seeded rollouts (`seed + i` for rollout i).
pub fn wholesome_classify(
    action: &str,
    c: &Ceta,
    w: &WorldState,
    agent: &AgentSpec,
    world: &WorldSpec,
    params: &RolloutParams,
) -> Result<WholesomeVerdict> {
    if params.horizon == 0 || params.rollouts == 0 {
        return Err(Error::InvalidParameter(
            "horizon and rollouts must be ≥ 1".into(),
        ));
    }
    if !c.action.menu.contains(action) {
        return Err(Error::OutOfRange(format!("action `{action}` not on menu")));
    }
    let pairs: Vec<(f64, f64)> = (0..params.rollouts)
        .into_par_iter()
        .map(|i| {
            let seed = params.seed.wrapping_add(i as u64);
            let forced = rollout_pain(c, w, agent, world, Some(action), params.horizon, seed)?;
            let base = rollout_pain(c, w, agent, world, None, params.horizon, seed)?;
            Ok((forced, base))
        })
        .collect::<Result<_>>()?;
    let n = params.rollouts as f64;
    let forced_pain = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let baseline_pain = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let score = forced_pain - baseline_pain;
    let class = if score > params.epsilon {
        Wholesomeness::Unwholesome
    } else if score < -params.epsilon {
        Wholesomeness::Wholesome
    } else {
        Wholesomeness::Neutral
    };
    Ok(WholesomeVerdict {
        action: action.to_string(),
        class,
        score,
        forced_pain,
        baseline_pain,
    })
}
