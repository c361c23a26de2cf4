//! Generators and small builders shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use cetana_core::composition::Encoder;
use cetana_core::contemplative::ResetConfig;
use cetana_core::dynamics::agents::{ReactiveRule, TableRule};
use cetana_core::dynamics::worlds::{Arm, BanditWorld};
use cetana_core::dynamics::{AgentSpec, Params, Registry, WorldSpec};
use cetana_core::memory::{AssocMemory, MemoryParams};
use cetana_core::model::{
    Action, BodyInput, Ceta, FeelingTone, GroupSelector, Intensity, MentalInput, MentalObject,
    MindState, QuoteContent, QuotedObject, WorldState,
};
use cetana_core::scenario::{
    AgentSection, ConcentrationSection, MetricsSection, PartnerSection, Scenario, WorldSection,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn set<const N: usize>(items: [&str; N]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

const FACTOR_POOL: [&str; 8] = [
    "anger",
    "desire",
    "fear",
    "mindfulness",
    "equanimity",
    "friendliness",
    "wrongView",
    "curiosity",
];
const ACTION_POOL: [&str; 5] = ["a", "b", "c", "lash", "wait"];

fn subset<T: Clone>(r: &mut ChaCha8Rng, pool: &[T], p: f64) -> Vec<T> {
    pool.iter().filter(|_| r.gen_bool(p)).cloned().collect()
}

pub fn random_feeling(r: &mut ChaCha8Rng) -> FeelingTone {
    *FeelingTone::ALL.choose(r).unwrap()
}

/// Intensities mix exact grid values with full-precision draws.
pub fn random_intensity(r: &mut ChaCha8Rng) -> Intensity {
    let v = match r.gen_range(0..4) {
        0 => 1.0,
        1 => r.gen_range(0..=20) as f64 / 20.0,
        _ => r.gen::<f64>(),
    };
    Intensity::new(v).unwrap()
}

pub fn random_mental(r: &mut ChaCha8Rng, t: i64) -> MentalInput {
    let mut objects = BTreeSet::new();
    for _ in 0..r.gen_range(0..4) {
        let id = format!("o{}", r.gen_range(0..5));
        let o = match r.gen_range(0..7) {
            0 => MentalObject::Concept(id),
            1 => MentalObject::Image(id),
            2 => MentalObject::Intention(id),
            k => MentalObject::Quote(QuotedObject {
                source: t - r.gen_range(1..3),
                content: match k {
                    3 => QuoteContent::Factor(FACTOR_POOL.choose(r).unwrap().to_string()),
                    4 => QuoteContent::Feeling(random_feeling(r)),
                    5 => QuoteContent::Group(GroupSelector::MindState),
                    _ => QuoteContent::Object(r.gen_range(0..6)),
                },
            }),
        };
        objects.insert(o);
    }
    MentalInput { objects }
}

pub fn random_ceta(r: &mut ChaCha8Rng, t: i64) -> Ceta {
    let n = r.gen_range(0..7);
    let pixels: Vec<u32> = (0..n).map(|_| r.gen_range(0..6)).collect();
    let focus: BTreeSet<usize> = (0..n).filter(|_| r.gen_bool(0.5)).collect();
    let mut mind = MindState::new(random_feeling(r), BTreeMap::new());
    for f in subset(r, &FACTOR_POOL, 0.4) {
        mind.set(f, random_intensity(r));
    }
    let menu: BTreeSet<String> = subset(r, &ACTION_POOL, 0.5)
        .into_iter()
        .map(String::from)
        .collect();
    let selected = menu.iter().filter(|_| r.gen_bool(0.4)).cloned().collect();
    Ceta {
        t,
        body: BodyInput::new(pixels, focus).unwrap(),
        mental: random_mental(r, t),
        mind,
        action: Action::new(menu, selected).unwrap(),
    }
}

pub fn bandit(arms: &[(&str, &[(i8, f64)])]) -> WorldSpec {
    let arms = arms
        .iter()
        .map(|(name, outcomes)| {
            let outcomes = outcomes
                .iter()
                .map(|&(v, p)| (FeelingTone::from_value(v).unwrap(), p))
                .collect();
            (name.to_string(), Arm { outcomes })
        })
        .collect();
    WorldSpec {
        rule: Arc::new(BanditWorld::new(arms).unwrap()),
        initial: WorldState::cells("rewardBandit", vec![0]),
    }
}

pub fn reactive(params: Params, actions: &BTreeSet<String>) -> AgentSpec {
    let rule = ReactiveRule::from_params(&params, actions).unwrap();
    AgentSpec::new(
        Arc::new(rule),
        Registry::new([], actions.iter().cloned(), usize::MAX, 1),
        AssocMemory::new(MemoryParams::default()).unwrap(),
    )
}

pub fn table_agent(table: Vec<usize>) -> AgentSpec {
    AgentSpec::new(
        Arc::new(TableRule::new(table).unwrap()),
        Registry::new([], [], usize::MAX, 1),
        AssocMemory::default(),
    )
}

/// A moment with the given pixels fully attended and nothing else.
pub fn plain_ceta(t: i64, pixels: Vec<u32>, menu: &BTreeSet<String>, selected: &[&str]) -> Ceta {
    Ceta {
        t,
        body: BodyInput::fully_attended(pixels),
        mental: MentalInput::default(),
        mind: MindState::default(),
        action: Action::new(
            menu.clone(),
            selected.iter().map(|s| s.to_string()).collect(),
        )
        .unwrap(),
    }
}

fn weights(r: &mut ChaCha8Rng, actions: &[String]) -> String {
    actions
        .iter()
        .map(|a| format!("{a}:{}", r.gen_range(1..10)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn outcomes(r: &mut ChaCha8Rng) -> String {
    let tones: Vec<i8> = {
        let mut all = vec![-2, -1, 0, 1, 2];
        all.shuffle(r);
        all.truncate(r.gen_range(1..=3));
        all
    };
    // tenths keep the probabilities summing to one
    let mut left = 10;
    let mut parts = Vec::new();
    for (i, v) in tones.iter().enumerate() {
        let share = if i + 1 == tones.len() {
            left
        } else {
            r.gen_range(0..=left)
        };
        left -= share;
        parts.push(format!("{v}:{}", share as f64 / 10.0));
    }
    parts.join(", ")
}

fn random_agent(r: &mut ChaCha8Rng, actions: Vec<String>, pixel_values: u32) -> AgentSection {
    let mut a = AgentSection::new("observer");
    a.actions = actions.iter().cloned().collect();
    let p = &mut a.params;
    match r.gen_range(0..5) {
        0 => {}
        1 => {
            a.rule = "reactive".into();
            p.0.insert("policy".into(), weights(r, &actions));
            if r.gen_bool(0.5) && !actions.is_empty() {
                p.0.insert("angry_action".into(), actions.choose(r).unwrap().clone());
            }
            p.0.insert("anger_gain".into(), r.gen::<f64>().to_string());
            p.0.insert("decay".into(), r.gen::<f64>().to_string());
            if r.gen_bool(0.3) {
                p.0.insert("exposure_fear".into(), r.gen::<f64>().to_string());
            }
            if r.gen_bool(0.3) {
                p.0.insert("self_concept".into(), "me".into());
                p.0.insert("self_rate".into(), r.gen::<f64>().to_string());
            }
            p.0.insert("use_memory".into(), r.gen_bool(0.5).to_string());
        }
        2 => {
            a.rule = "script".into();
            let steps: Vec<String> = (0..r.gen_range(1..5))
                .map(|_| actions.choose(r).cloned().unwrap_or_else(|| "-".into()))
                .collect();
            p.0.insert("script".into(), steps.join(", "));
        }
        3 => {
            a.rule = "table".into();
            let n = r.gen_range(1..9);
            let table: Vec<String> = (0..n).map(|_| r.gen_range(0..n).to_string()).collect();
            p.0.insert("table".into(), table.join(", "));
            a.initial.insert(
                "wrongView".into(),
                Intensity::new(r.gen_range(0..2) as f64).unwrap(),
            );
        }
        _ => {
            a.rule = "echo".into();
            let decode: Vec<String> = actions
                .iter()
                .map(|x| format!("{x}:{}", r.gen_range(0..pixel_values)))
                .collect();
            p.0.insert("decode".into(), decode.join(", "));
        }
    }
    if r.gen_bool(0.3) {
        a.feeling = random_feeling(r);
    }
    if r.gen_bool(0.3) {
        a.initial.insert("anger".into(), random_intensity(r));
    }
    if let Some(first) = actions.first() {
        if r.gen_bool(0.5) {
            a.selected.insert(first.clone());
        }
    }
    a
}

/// A runnable scenario exercising a random mix of worlds, rules and
/// meta operators.
pub fn random_scenario(r: &mut ChaCha8Rng, index: usize) -> Scenario {
    let t0 = r.gen_range(-3..3);
    let steps = r.gen_range(10..120);
    let mut s = Scenario::parse(&format!(
        "[scenario]\nid = gen-{index}\nseed = {}\nsteps = {steps}\nt0 = {t0}\n[world]\nkind = rewardBandit\n",
        r.gen::<u64>()
    ))
    .unwrap();

    let composed = r.gen_bool(0.15);
    let (actions, pixel_values, pixel_count) = if composed {
        s.world = None;
        (vec!["ping".to_string(), "poke".to_string()], 4, 0)
    } else if r.gen_bool(0.5) {
        let (w, h) = (r.gen_range(2..6), r.gen_range(2..6));
        let live: Vec<String> = (0..w * h)
            .filter(|_| r.gen_bool(0.3))
            .map(|i: usize| i.to_string())
            .collect();
        let mut params = Params::new()
            .with("width", w)
            .with("height", h)
            .with("live", live.join(", "));
        if r.gen_bool(0.5) {
            params = params.with("agent_cell", r.gen_range(0..w * h));
        }
        s.world = Some(WorldSection {
            kind: "grid".into(),
            params,
        });
        (vec!["flip".to_string(), "rest".to_string()], 2, w * h)
    } else {
        let actions: Vec<String> = subset(r, &["a", "b", "c"], 0.7)
            .into_iter()
            .map(String::from)
            .collect();
        let actions = if actions.is_empty() {
            vec!["a".to_string()]
        } else {
            actions
        };
        let mut params = Params::new();
        for a in &actions {
            params.0.insert(format!("arm.{a}"), outcomes(r));
        }
        s.world = Some(WorldSection {
            kind: "rewardBandit".into(),
            params,
        });
        (actions, 15, 2)
    };

    s.agent = random_agent(r, actions.clone(), pixel_values);
    if r.gen_bool(0.3) && pixel_count > 0 {
        s.agent.attention = Some(r.gen_range(1..=pixel_count));
    }
    s.memory = MemoryParams {
        capacity: r.gen_range(1..20),
        reliability: r.gen::<f64>(),
        activation: r.gen_range(1..4),
    };

    if composed {
        let mut b = random_agent(r, vec!["pong".to_string()], pixel_values);
        b.rule = "echo".into();
        b.params = Params::new().with("decode", format!("pong:{}", r.gen_range(0..4)));
        s.partner = Some(PartnerSection {
            agent: b,
            seed: r.gen(),
            host_to_partner: Encoder::new([("ping".to_string(), 0), ("poke".to_string(), 1)]),
            partner_to_host: Encoder::new([("pong".to_string(), r.gen_range(0..4))]),
        });
        return s;
    }

    if r.gen_bool(0.5) {
        let m = &mut s.mindfulness;
        m.enabled = true;
        m.strength = r.gen_bool(0.5).then(|| r.gen_range(1..20));
        m.sharpness = r.gen_range(1..4);
        m.right = r.gen_bool(0.5);
        m.rho = r.gen::<f64>();
        m.equanimity_floor = r.gen::<f64>();
        m.quote_focus = r.gen_bool(0.5);
        s.schedule.start = r.gen_range(0..10);
        if let Some(n) = m.strength {
            let n = n as usize;
            s.schedule.period = r.gen_bool(0.5).then(|| r.gen_range(n..n + 30));
        }
    }
    if r.gen_bool(0.3) {
        let n = r.gen_range(1..3);
        let cap = s.agent.attention.unwrap_or(usize::MAX);
        s.concentration = Some(ConcentrationSection {
            start: t0 + r.gen_range(0..10),
            drift_rate: if r.gen_bool(0.5) { 0.0 } else { r.gen::<f64>() },
            recovery: r.gen_bool(0.5),
            pixels: (0..n).map(|_| r.gen_range(0..pixel_values)).collect(),
            focus: (0..n.min(cap)).collect(),
            mental: [MentalObject::Concept("breath".into())].into(),
            action: actions.first().cloned().into_iter().collect(),
        });
    }
    if r.gen_bool(0.3) {
        s.reset = Some(ResetConfig {
            cycles: r.gen_range(1..4),
            coverage: r.gen_range(0..=10) as f64 / 10.0,
        });
    }
    s.metrics = MetricsSection {
        track: subset(r, &[0, 1, 3, 10], 0.3),
        self_concepts: set(["me"]),
        tick_columns: r.gen_bool(0.5),
        ..MetricsSection::default()
    };
    s
}
