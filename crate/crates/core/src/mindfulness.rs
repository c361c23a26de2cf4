//! The mindfulness operator, its training mask, attention and the
//! pre/proto/full consciousness classifier.
//!
//! A mindful moment takes part of the previous moment as its object: the
//! strongest unwholesome factor (or the mind-state as such) is quoted into
//! the mental input, that factor is damped by `rho`, and equanimity is
//! raised to a floor.

use std::cmp::Reverse;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Registry, TickHook};
use crate::error::{Error, Result};
use crate::model::{
    factor, Ceta, GroupSelector, Intensity, MentalObject, QuoteContent, QuotedObject, Trace,
};
use crate::rng::RandomnessSource;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MindfulnessConfig {
    pub enabled: bool,
    /// Length in ticks of each training session; `None` is unbounded.
    pub strength: Option<u64>,
    /// Apply on every n-th tick of a session.
    pub sharpness: u64,
    /// "Right" mindfulness also raises friendliness.
    pub right: bool,
    /// Multiplier applied to the regulated factor.
    pub rho: f64,
    pub equanimity_floor: f64,
    pub unwholesome: BTreeSet<String>,
    /// Also quote the attended body objects of the previous moment.
    pub quote_focus: bool,
}

impl Default for MindfulnessConfig {
    fn default() -> Self {
        MindfulnessConfig {
            enabled: false,
            strength: None,
            sharpness: 1,
            right: false,
            rho: 0.5,
            equanimity_floor: 0.5,
            unwholesome: default_unwholesome(),
            quote_focus: true,
        }
    }
}

pub fn default_unwholesome() -> BTreeSet<String> {
    [
        factor::ANGER,
        factor::AVERSION,
        factor::DESIRE,
        factor::FEAR,
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

impl MindfulnessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sharpness == 0 {
            return Err(Error::InvalidParameter("sharpness must be ≥ 1".into()));
        }
        for (name, v) in [
            ("rho", self.rho),
            ("equanimity_floor", self.equanimity_floor),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} not in [0,1]"
                )));
            }
        }
        Ok(())
    }
}

/// When training sessions start: the first at `start`, then every
/// `period` ticks if set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Schedule {
    pub start: usize,
    pub period: Option<usize>,
}

/// Per-tick mask (index = trace offset) of when to apply mindfulness.
pub fn train_mindfulness(
    cfg: &MindfulnessConfig,
    schedule: &Schedule,
    n_ticks: usize,
) -> Result<Vec<bool>> {
    cfg.validate()?;
    if let Some(period) = schedule.period {
        if period == 0 {
            return Err(Error::InvalidParameter("session period must be ≥ 1".into()));
        }
        if cfg.strength.is_none_or(|s| s > period as u64) {
            return Err(Error::InvalidParameter(
                "session length exceeds the session period".into(),
            ));
        }
    }
    Ok((0..n_ticks)
        .map(|k| {
            if !cfg.enabled || k < schedule.start {
                return false;
            }
            let into = k - schedule.start;
            let r = schedule.period.map_or(into, |p| into % p) as u64;
            cfg.strength.is_none_or(|s| r < s) && r.is_multiple_of(cfg.sharpness)
        })
        .collect())
}

/// Applies the mindfulness transition to `next`, the moment after `prev`.
pub fn apply_mindfulness(prev: &Ceta, next: &Ceta, cfg: &MindfulnessConfig) -> Result<Ceta> {
    if next.t != prev.t + 1 {
        return Err(Error::TimeMismatch {
            expected: prev.t + 1,
            found: next.t,
        });
    }
    let mut out = next.clone();
    let quote = |content| {
        MentalObject::Quote(QuotedObject {
            source: prev.t,
            content,
        })
    };

    // ties go to the lexicographically first name
    let strongest = prev
        .mind
        .present_factors()
        .filter(|(name, _)| cfg.unwholesome.contains(*name))
        .max_by(|a, b| {
            a.1.total_cmp(&b.1)
                .then_with(|| Reverse(a.0).cmp(&Reverse(b.0)))
        })
        .map(|(name, _)| name.to_string());

    match strongest {
        Some(name) => {
            let damped = out.mind.intensity(&name) * cfg.rho;
            out.mind.set(&name, Intensity::saturating(damped));
            out.mental.objects.insert(quote(QuoteContent::Factor(name)));
        }
        None => {
            out.mental
                .objects
                .insert(quote(QuoteContent::Group(GroupSelector::MindState)));
        }
    }
    if cfg.quote_focus {
        for v in prev.body.attended_values() {
            out.mental.objects.insert(quote(QuoteContent::Object(v)));
        }
    }

    let raise = |out: &mut Ceta, name: &str, floor: f64| {
        let v = out.mind.intensity(name).max(floor);
        out.mind.set(name, Intensity::saturating(v));
    };
    raise(&mut out, factor::EQUANIMITY, cfg.equanimity_floor);
    if cfg.right {
        raise(&mut out, factor::FRIENDLINESS, cfg.equanimity_floor);
    }
    raise(&mut out, factor::MINDFULNESS, 1.0);
    Ok(out)
}

/// Run-loop hook applying mindfulness wherever the mask is set. Records
/// which offsets it actually applied to.
#[derive(Debug, Clone)]
pub struct MindfulnessHook {
    pub cfg: MindfulnessConfig,
    pub mask: Vec<bool>,
    applied: Vec<bool>,
}

impl MindfulnessHook {
    pub fn new(cfg: MindfulnessConfig, mask: Vec<bool>) -> Self {
        MindfulnessHook {
            cfg,
            mask,
            applied: vec![false],
        }
    }

    /// Awareness log indexed by trace offset.
    pub fn applied(&self) -> &[bool] {
        &self.applied
    }
}

impl TickHook for MindfulnessHook {
    fn adjust(&mut self, history: &Trace, next: Ceta, _rng: &RandomnessSource) -> Result<Ceta> {
        let offset = history.len();
        self.applied.resize(offset, false);
        let on = self.mask.get(offset).copied().unwrap_or(false);
        self.applied.push(on);
        if !on {
            return Ok(next);
        }
        let prev = &history.last().expect("history is never empty").ceta;
        apply_mindfulness(prev, &next, &self.cfg)
    }
}

/// Replaces the attended pixel set and the selected actions.
pub fn set_focus(
    c: &Ceta,
    focus: BTreeSet<usize>,
    selected: BTreeSet<String>,
    registry: &Registry,
) -> Result<Ceta> {
    if focus.len() > registry.attention_capacity {
        return Err(Error::CapacityExceeded {
            requested: focus.len(),
            capacity: registry.attention_capacity,
        });
    }
    if selected.len() > registry.action_capacity {
        return Err(Error::CapacityExceeded {
            requested: selected.len(),
            capacity: registry.action_capacity,
        });
    }
    if let Some(i) = focus.iter().find(|&&i| i >= c.body.pixels.len()) {
        return Err(Error::OutOfRange(format!("focus index {i}")));
    }
    if let Some(a) = selected.iter().find(|a| !c.action.menu.contains(*a)) {
        return Err(Error::OutOfRange(format!("action `{a}` not on menu")));
    }
    let mut out = c.clone();
    out.body.focus = focus;
    out.action.selected = selected;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConsciousnessLayer {
    Pre,
    Proto,
    Full,
}

impl ConsciousnessLayer {
    pub fn as_str(self) -> &'static str {
        match self {
            ConsciousnessLayer::Pre => "pre",
            ConsciousnessLayer::Proto => "proto",
            ConsciousnessLayer::Full => "full",
        }
    }
}

/// Layer at which body object `object` is conscious at tick `t`; `None`
/// when it is not among the pixels at all.
pub fn classify_layer(tr: &Trace, object: u32, t: i64) -> Result<Option<ConsciousnessLayer>> {
    let k = tr.offset_of(t).ok_or(Error::IndexOutOfTrace(t))?;
    let next = tr
        .entries()
        .get(k + 1)
        .ok_or(Error::IndexOutOfTrace(t + 1))?;
    let c = &tr.entries()[k].ceta;
    let mut indices = c
        .body
        .pixels
        .iter()
        .enumerate()
        .filter(|(_, v)| **v == object)
        .map(|(i, _)| i)
        .peekable();
    if indices.peek().is_none() {
        return Ok(None);
    }
    if !indices.any(|i| c.body.focus.contains(&i)) {
        return Ok(Some(ConsciousnessLayer::Pre));
    }
    let known = next.ceta.mind.is_present(factor::MINDFULNESS)
        && next.ceta.mental.has_quote(t, &QuoteContent::Object(object));
    Ok(Some(if known {
        ConsciousnessLayer::Full
    } else {
        ConsciousnessLayer::Proto
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Action, BodyInput, MindState};

    fn angry(t: i64, anger: f64) -> Ceta {
        let mut mind = MindState::default();
        mind.set(factor::ANGER, Intensity::new(anger).unwrap());
        Ceta {
            t,
            body: BodyInput::fully_attended(vec![3]),
            mind,
            ..Ceta::default()
        }
    }

    fn on() -> MindfulnessConfig {
        MindfulnessConfig {
            enabled: true,
            ..MindfulnessConfig::default()
        }
    }

    #[test]
    fn seeing_anger() {
        let out = apply_mindfulness(&angry(4, 0.8), &angry(5, 0.8), &on()).unwrap();
        assert!(out
            .mental
            .has_quote(4, &QuoteContent::Factor("anger".into())));
        assert!(out.mind.intensity(factor::ANGER) <= 0.4);
        assert!(out.mind.intensity(factor::EQUANIMITY) >= 0.5);
        assert!(out.mind.is_present(factor::MINDFULNESS));
        assert!(!out.mind.is_present(factor::FRIENDLINESS));
    }

    #[test]
    fn right_mindfulness_adds_friendliness() {
        let cfg = MindfulnessConfig {
            right: true,
            ..on()
        };
        let out = apply_mindfulness(&angry(0, 0.8), &angry(1, 0.8), &cfg).unwrap();
        assert!(out.mind.intensity(factor::FRIENDLINESS) >= 0.5);
    }

    #[test]
    fn calm_moment_quotes_the_mind_state() {
        let mut prev = angry(0, 0.8);
        prev.mind = MindState::default();
        let mut next = prev.successor();
        next.mind.set("compassion", Intensity::new(0.3).unwrap());
        let out = apply_mindfulness(&prev, &next, &on()).unwrap();
        assert!(out
            .mental
            .has_quote(0, &QuoteContent::Group(GroupSelector::MindState)));
        assert_eq!(out.mind.intensity("compassion"), 0.3);
    }

    #[test]
    fn twice_in_a_row_matches_closed_form() {
        let cfg = on();
        let c0 = angry(0, 0.8);
        let c1 = apply_mindfulness(&c0, &angry(1, 0.8), &cfg).unwrap();
        // anger persists into the next moment before regulation
        let c2 = apply_mindfulness(&c1, &c1.successor(), &cfg).unwrap();
        let closed = 0.8 * cfg.rho * cfg.rho;
        assert!((c2.mind.intensity(factor::ANGER) - closed).abs() < 1e-12);
        assert!((closed - 0.2).abs() < 1e-12);
    }

    #[test]
    fn ties_break_by_name() {
        let mut prev = angry(0, 0.6);
        prev.mind
            .set(factor::AVERSION, Intensity::new(0.6).unwrap());
        let out = apply_mindfulness(&prev, &prev.successor(), &on()).unwrap();
        assert!(out
            .mental
            .has_quote(0, &QuoteContent::Factor("anger".into())));
        assert_eq!(out.mind.intensity(factor::AVERSION), 0.6);
    }

    #[test]
    fn wrong_successor_is_a_time_mismatch() {
        assert!(matches!(
            apply_mindfulness(&angry(0, 0.8), &angry(2, 0.8), &on()),
            Err(Error::TimeMismatch {
                expected: 1,
                found: 2
            })
        ));
    }

    #[test]
    fn masks() {
        let all = train_mindfulness(&on(), &Schedule::default(), 5).unwrap();
        assert_eq!(all, vec![true; 5]);
        let sharp3 = MindfulnessConfig {
            sharpness: 3,
            ..on()
        };
        let m = train_mindfulness(&sharp3, &Schedule::default(), 9).unwrap();
        let ticks: Vec<usize> = m
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(ticks, vec![0, 3, 6]);
        let off =
            train_mindfulness(&MindfulnessConfig::default(), &Schedule::default(), 4).unwrap();
        assert_eq!(off, vec![false; 4]);
        let short = MindfulnessConfig {
            strength: Some(2),
            ..on()
        };
        let sessions = Schedule {
            start: 1,
            period: Some(4),
        };
        let m = train_mindfulness(&short, &sessions, 10).unwrap();
        assert_eq!(
            m,
            vec![false, true, true, false, false, true, true, false, false, true]
        );
        assert!(train_mindfulness(&on(), &sessions, 3).is_err());
    }

    #[test]
    fn focus_limits() {
        let reg = Registry::new([], ["a".to_string()], 4, 1);
        let c = Ceta {
            body: BodyInput::new(vec![0; 6], BTreeSet::new()).unwrap(),
            action: Action::idle(["a".to_string()].into()),
            ..Ceta::default()
        };
        let empty = set_focus(&c, BTreeSet::new(), BTreeSet::new(), &reg).unwrap();
        assert!(empty.body.focus.is_empty());
        let four = set_focus(&c, (0..4).collect(), ["a".to_string()].into(), &reg).unwrap();
        assert_eq!(four.body.focus.len(), 4);
        assert!(matches!(
            set_focus(&c, (0..5).collect(), BTreeSet::new(), &reg),
            Err(Error::CapacityExceeded {
                requested: 5,
                capacity: 4
            })
        ));
        assert!(matches!(
            set_focus(&c, [7].into(), BTreeSet::new(), &reg),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            set_focus(&c, BTreeSet::new(), ["b".to_string()].into(), &reg),
            Err(Error::OutOfRange(_))
        ));
    }
}
