//! Built-in agent rules.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{
    factor, Ceta, FeelingTone, GroupSelector, Intensity, MentalInput, MentalObject, MindState,
    QuoteContent, PRESENCE_THRESHOLD,
};
use crate::rng::pick_weighted;

use super::{AgentContext, AgentRule, Params, Percept};

/// Body pixels come from the percept; focus keeps whatever indices still exist.
fn perceive_into(c: &Ceta, percept: &Percept) -> Ceta {
    let mut next = c.successor();
    let len = percept.pixels.len();
    next.body.pixels = percept.pixels.clone();
    next.body.focus.retain(|&i| i < len);
    next.mental = MentalInput::default();
    next
}

fn decay(mind: &mut MindState, name: &str, rate: f64) {
    let v = mind.intensity(name) * rate;
    let v = if v < PRESENCE_THRESHOLD { 0.0 } else { v };
    mind.set(name, Intensity::saturating(v));
}

/// Pixel object id used for memory cues and recalled images.
pub fn pixel_object(v: u32) -> String {
    format!("px:{v}")
}

/// Returns its input advanced one tick; nothing else changes.
#[derive(Debug, Clone, Copy)]
pub struct ConstantRule;

impl ConstantRule {
    pub const NAME: &'static str = "constant";
}

impl AgentRule for ConstantRule {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn transition(
        &self,
        c: &Ceta,
        _percept: &Percept,
        _ctx: &mut AgentContext<'_>,
    ) -> Result<Ceta> {
        Ok(c.successor())
    }
}

/// Takes in the world and never acts.
#[derive(Debug, Clone, Copy)]
pub struct ObserverRule;

impl ObserverRule {
    pub const NAME: &'static str = "observer";
}

impl AgentRule for ObserverRule {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn transition(&self, c: &Ceta, percept: &Percept, _ctx: &mut AgentContext<'_>) -> Result<Ceta> {
        let mut next = perceive_into(c, percept);
        next.mind.feeling = percept.feeling.unwrap_or_default();
        next.action.selected.clear();
        Ok(next)
    }
}

/// Acts out its current input: each pixel value with a decoding becomes a
/// selected action.
#[derive(Debug, Clone)]
pub struct EchoRule {
    pub decode: BTreeMap<u32, String>,
}

impl EchoRule {
    pub const NAME: &'static str = "echo";
    pub const KEYS: &'static [&'static str] = &["decode"];

    pub fn from_params(p: &Params) -> Result<Self> {
        let decode = p
            .pairs::<u32>("decode")?
            .into_iter()
            .map(|(action, px)| (px, action))
            .collect();
        Ok(EchoRule { decode })
    }
}

impl AgentRule for EchoRule {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn transition(&self, c: &Ceta, percept: &Percept, ctx: &mut AgentContext<'_>) -> Result<Ceta> {
        let mut next = perceive_into(c, percept);
        next.mind.feeling = percept.feeling.unwrap_or_default();
        next.action.selected = percept
            .pixels
            .iter()
            .filter_map(|px| self.decode.get(px))
            .filter(|a| next.action.menu.contains(*a))
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .take(ctx.registry.action_capacity)
            .collect();
        Ok(next)
    }
}

/// Plays a fixed cyclic action script indexed by the successor's tick.
#[derive(Debug, Clone)]
pub struct ScriptRule {
    pub script: Vec<BTreeSet<String>>,
}

impl ScriptRule {
    pub const NAME: &'static str = "script";
    pub const KEYS: &'static [&'static str] = &["script"];

    /// `script = a1, -, a2+a3` : one entry per tick, `-` for no action,
    /// `+` joining simultaneous actions.
    pub fn from_params(p: &Params) -> Result<Self> {
        let raw = p
            .raw("script")
            .ok_or_else(|| Error::InvalidParameter("script rule needs `script`".into()))?;
        let script: Vec<BTreeSet<String>> = raw
            .split(',')
            .map(str::trim)
            .map(|entry| match entry {
                "-" | "" => BTreeSet::new(),
                e => e.split('+').map(|a| a.trim().to_string()).collect(),
            })
            .collect();
        Ok(ScriptRule { script })
    }
}

impl AgentRule for ScriptRule {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn transition(&self, c: &Ceta, percept: &Percept, _ctx: &mut AgentContext<'_>) -> Result<Ceta> {
        let mut next = perceive_into(c, percept);
        next.mind.feeling = percept.feeling.unwrap_or_default();
        next.action.selected = if self.script.is_empty() {
            BTreeSet::new()
        } else {
            self.script[next.t.rem_euclid(self.script.len() as i64) as usize].clone()
        };
        Ok(next)
    }
}

/// Feeling-driven agent with a stochastic policy.
///
/// Negative feeling feeds anger; while angry the agent tends to take its
/// `angry_action`. A mindful moment that quotes the mind-state itself can be
/// answered with fear (`exposure_fear`). Attended pixels are paired across
/// consecutive ticks in associative memory and recalled as images, which
/// raise desire. Every tick draws exactly three uniforms before touching
/// memory, so runs that differ only in factor levels stay paired.
#[derive(Debug, Clone)]
pub struct ReactiveRule {
    pub policy: Vec<(String, f64)>,
    pub angry_action: Option<String>,
    pub anger_gain: f64,
    pub decay: f64,
    pub exposure_fear: f64,
    pub self_concept: Option<String>,
    pub self_rate: f64,
    pub use_memory: bool,
}

impl Default for ReactiveRule {
    fn default() -> Self {
        ReactiveRule {
            policy: Vec::new(),
            angry_action: None,
            anger_gain: 0.5,
            decay: 0.8,
            exposure_fear: 0.0,
            self_concept: None,
            self_rate: 0.0,
            use_memory: false,
        }
    }
}

impl ReactiveRule {
    pub const NAME: &'static str = "reactive";
    pub const KEYS: &'static [&'static str] = &[
        "policy",
        "angry_action",
        "anger_gain",
        "decay",
        "exposure_fear",
        "self_concept",
        "self_rate",
        "use_memory",
    ];

    pub fn from_params(p: &Params, actions: &BTreeSet<String>) -> Result<Self> {
        let d = ReactiveRule::default();
        let policy = p.pairs::<f64>("policy")?;
        for (a, w) in &policy {
            if !actions.contains(a) {
                return Err(Error::InvalidParameter(format!(
                    "policy action `{a}` not declared"
                )));
            }
            if w.is_nan() || *w < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "policy weight for `{a}` negative"
                )));
            }
        }
        let angry_action: Option<String> = p.parse("angry_action")?;
        if let Some(a) = &angry_action {
            if !actions.contains(a) {
                return Err(Error::InvalidParameter(format!(
                    "angry_action `{a}` not declared"
                )));
            }
        }
        Ok(ReactiveRule {
            policy,
            angry_action,
            anger_gain: p.probability("anger_gain", d.anger_gain)?,
            decay: p.probability("decay", d.decay)?,
            exposure_fear: p.probability("exposure_fear", d.exposure_fear)?,
            self_concept: p.parse("self_concept")?,
            self_rate: p.probability("self_rate", d.self_rate)?,
            use_memory: p.parse_or("use_memory", d.use_memory)?,
        })
    }

    fn exposed(c: &Ceta) -> bool {
        c.mind.is_present(factor::MINDFULNESS)
            && c.mental
                .quotes()
                .any(|q| q.content == QuoteContent::Group(GroupSelector::MindState))
    }
}

impl AgentRule for ReactiveRule {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn transition(&self, c: &Ceta, percept: &Percept, ctx: &mut AgentContext<'_>) -> Result<Ceta> {
        let u_anger = ctx.rng.uniform();
        let u_policy = ctx.rng.uniform();
        let u_self = ctx.rng.uniform();

        let mut next = perceive_into(c, percept);
        let feeling = percept.feeling.unwrap_or_default();
        next.mind.feeling = feeling;

        let mut recalled = false;
        if self.use_memory {
            let prev: BTreeSet<u32> = c.body.attended_values().collect();
            let cur: BTreeSet<u32> = next.body.attended_values().collect();
            for p in &prev {
                for q in &cur {
                    ctx.memory
                        .observe_pair(&pixel_object(*p), &pixel_object(*q), next.t);
                }
            }
            for q in &cur {
                if let Some(target) = ctx.memory.recall(&pixel_object(*q), ctx.rng, next.t) {
                    next.mental.objects.insert(MentalObject::Image(target));
                    recalled = true;
                }
            }
        }

        let mind = &mut next.mind;
        for f in [
            factor::ANGER,
            factor::DESIRE,
            factor::FEAR,
            factor::MINDFULNESS,
            factor::EQUANIMITY,
            factor::FRIENDLINESS,
        ] {
            decay(mind, f, self.decay);
        }
        if feeling.is_negative() {
            let push = self.anger_gain * f64::from(-feeling.value()) / 2.0;
            mind.set(
                factor::ANGER,
                Intensity::saturating(mind.intensity(factor::ANGER) + push),
            );
        }
        if recalled {
            let d = mind.intensity(factor::DESIRE).max(0.5);
            mind.set(factor::DESIRE, Intensity::saturating(d));
        }
        if self.exposure_fear > 0.0 && ReactiveRule::exposed(c) {
            let f = mind.intensity(factor::FEAR).max(self.exposure_fear);
            mind.set(factor::FEAR, Intensity::saturating(f));
        }

        let anger = next.mind.intensity(factor::ANGER);
        next.action.selected = match &self.angry_action {
            Some(a) if u_anger < anger => [a.clone()].into(),
            _ => {
                let weights: Vec<f64> = self.policy.iter().map(|(_, w)| *w).collect();
                pick_weighted(&weights, u_policy)
                    .map(|i| [self.policy[i].0.clone()].into())
                    .unwrap_or_default()
            }
        };

        if let Some(me) = &self.self_concept {
            if u_self < self.self_rate {
                next.mental
                    .objects
                    .insert(MentalObject::Concept(me.clone()));
            }
        }
        Ok(next)
    }
}

/// Deterministic finite mind: the state index is carried in the presence
/// bits `s0, s1, ...` and advanced through a lookup table. Wrong View is
/// carried over unchanged; every other factor is rebuilt each tick.
#[derive(Debug, Clone)]
pub struct TableRule {
    pub table: Vec<usize>,
    bits: usize,
}

impl TableRule {
    pub const NAME: &'static str = "table";
    pub const KEYS: &'static [&'static str] = &["table"];

    pub fn new(table: Vec<usize>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidParameter("table must be non-empty".into()));
        }
        if let Some(&bad) = table.iter().find(|&&x| x >= n) {
            return Err(Error::InvalidParameter(format!("table entry {bad} ≥ {n}")));
        }
        let bits = (usize::BITS - (n - 1).leading_zeros()).max(1) as usize;
        Ok(TableRule { table, bits })
    }

    pub fn from_params(p: &Params) -> Result<Self> {
        TableRule::new(p.list("table")?)
    }

    pub fn bit_factor(i: usize) -> String {
        format!("s{i}")
    }

    pub fn state_count(&self) -> usize {
        self.table.len()
    }

    pub fn index_of(&self, mind: &MindState) -> usize {
        (0..self.bits)
            .filter(|&i| mind.is_present(&TableRule::bit_factor(i)))
            .fold(0, |acc, i| acc | (1 << i))
    }

    /// Mind-state encoding state `index`, keeping `wrong_view`.
    pub fn encode(&self, index: usize, wrong_view: f64) -> MindState {
        let mut m = MindState::default();
        for i in 0..self.bits {
            if index & (1 << i) != 0 {
                m.set(&TableRule::bit_factor(i), Intensity::FULL);
            }
        }
        m.set(factor::WRONG_VIEW, Intensity::saturating(wrong_view));
        m
    }
}

impl AgentRule for TableRule {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn factors(&self) -> Vec<String> {
        (0..self.bits).map(TableRule::bit_factor).collect()
    }

    fn transition(&self, c: &Ceta, percept: &Percept, _ctx: &mut AgentContext<'_>) -> Result<Ceta> {
        let idx = self.index_of(&c.mind);
        let target = *self
            .table
            .get(idx)
            .ok_or_else(|| Error::OutOfRange(format!("state index {idx} outside table")))?;
        let mut next = perceive_into(c, percept);
        next.mind = self.encode(target, c.mind.intensity(factor::WRONG_VIEW));
        next.mind.feeling = FeelingTone::Neutral;
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Registry;
    use crate::memory::AssocMemory;
    use crate::model::{Action, BodyInput};
    use crate::rng::RandomnessSource;

    fn ctx_parts() -> (AssocMemory, RandomnessSource, Registry) {
        (
            AssocMemory::default(),
            RandomnessSource::new(3),
            Registry::new([], ["a".to_string(), "b".to_string()], 8, 2),
        )
    }

    #[test]
    fn table_rule_walks_its_table() {
        let rule = TableRule::new(vec![1, 2, 0, 3]).unwrap();
        assert_eq!(rule.factors(), vec!["s0", "s1"]);
        let (mut mem, mut rng, reg) = ctx_parts();
        let mut ctx = AgentContext {
            memory: &mut mem,
            rng: &mut rng,
            registry: &reg,
        };
        let mut c = Ceta {
            mind: rule.encode(0, 1.0),
            ..Ceta::default()
        };
        let mut seen = vec![];
        for _ in 0..4 {
            c = rule.transition(&c, &Percept::default(), &mut ctx).unwrap();
            seen.push(rule.index_of(&c.mind));
            assert_eq!(c.mind.intensity(factor::WRONG_VIEW), 1.0);
        }
        assert_eq!(seen, vec![1, 2, 0, 1]);
        assert!(TableRule::new(vec![0, 5]).is_err());
    }

    #[test]
    fn echo_acts_out_decoded_pixels() {
        let rule = EchoRule::from_params(&Params::new().with("decode", "a:7, b:8")).unwrap();
        let (mut mem, mut rng, reg) = ctx_parts();
        let mut ctx = AgentContext {
            memory: &mut mem,
            rng: &mut rng,
            registry: &reg,
        };
        let c = Ceta {
            action: Action::idle(["a".to_string(), "b".to_string()].into()),
            ..Ceta::default()
        };
        let p = Percept {
            pixels: vec![8, 3],
            feeling: None,
        };
        let next = rule.transition(&c, &p, &mut ctx).unwrap();
        assert_eq!(next.action.selected, ["b".to_string()].into());
        assert_eq!(next.body.pixels, vec![8, 3]);
    }

    #[test]
    fn reactive_anger_rises_on_pain_and_decays() {
        let rule = ReactiveRule {
            policy: vec![("a".into(), 1.0)],
            anger_gain: 0.5,
            decay: 0.5,
            ..ReactiveRule::default()
        };
        let (mut mem, mut rng, reg) = ctx_parts();
        let mut ctx = AgentContext {
            memory: &mut mem,
            rng: &mut rng,
            registry: &reg,
        };
        let c = Ceta {
            action: Action::idle(["a".to_string(), "b".to_string()].into()),
            ..Ceta::default()
        };
        let hurt = Percept {
            pixels: vec![],
            feeling: Some(FeelingTone::VeryUnpleasant),
        };
        let c1 = rule.transition(&c, &hurt, &mut ctx).unwrap();
        assert_eq!(c1.mind.intensity(factor::ANGER), 0.5);
        assert_eq!(c1.action.selected, ["a".to_string()].into());
        let c2 = rule.transition(&c1, &Percept::default(), &mut ctx).unwrap();
        assert_eq!(c2.mind.intensity(factor::ANGER), 0.25);
        assert_eq!(ctx.rng.draws(), 6);
    }

    #[test]
    fn reactive_memory_recalls_paired_pixels() {
        let rule = ReactiveRule {
            use_memory: true,
            ..ReactiveRule::default()
        };
        let (mut mem, mut rng, reg) = ctx_parts();
        let mut ctx = AgentContext {
            memory: &mut mem,
            rng: &mut rng,
            registry: &reg,
        };
        let mut c = Ceta {
            body: BodyInput::fully_attended(vec![1]),
            ..Ceta::default()
        };
        let mut last = c.clone();
        // bell (1) always followed by food (2)
        for k in 0..8 {
            let px = if k % 2 == 0 { 2 } else { 1 };
            c = rule
                .transition(
                    &c,
                    &Percept {
                        pixels: vec![px],
                        feeling: None,
                    },
                    &mut ctx,
                )
                .unwrap();
            c.body.focus = [0].into();
            last = c.clone();
        }
        assert!(ctx.memory.strength("px:1", "px:2") >= 3);
        assert!(last
            .mental
            .objects
            .contains(&MentalObject::Image("px:2".into())));
        assert!(last.mind.is_present(factor::DESIRE));
    }
}
