//! Scenario files: a strict `[section]` / `key = value` format, its
//! canonical writer, and the builder that turns a scenario into runnable
//! agent and world specs.
//!
//! ```text
//! [scenario]
//! id = pavlov
//! seed = 42
//! steps = 200
//!
//! [world]
//! kind = rewardBandit
//! arm.press = 1:0.9, 0:0.1
//!
//! [agent]
//! rule = reactive
//! actions = press, wait
//! policy = press:0.5, wait:0.5
//! ```

mod build;
mod document;
mod write;

use std::collections::BTreeSet;
use std::fmt::Display;
use std::str::FromStr;

use thiserror::Error;

use crate::composition::Encoder;
use crate::contemplative::ResetConfig;
use crate::dynamics::params::parse_pairs;
use crate::dynamics::{AgentRegistry, Params, WorldRegistry};
use crate::memory::MemoryParams;
use crate::metrics::Window;
use crate::mindfulness::{MindfulnessConfig, Schedule};
use crate::model::{FactorMap, FeelingTone, Intensity, MentalObject};

pub use build::{Composed, Setup};
pub use document::{parse_document, Document, Entry, Section};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("line {line}: {} key `{key}` in [{section}]", if *duplicate { "duplicate" } else { "unknown" })]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
        duplicate: bool,
    },
    #[error("line {line}: [{section}] is missing required key `{key}`")]
    MissingRequired {
        line: usize,
        section: String,
        key: String,
    },
    #[error("missing section [{0}]")]
    MissingSection(String),
    #[error("line {line}: `{key}`: {msg}")]
    Range {
        line: usize,
        key: String,
        msg: String,
    },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: crate::Error,
    },
    #[error(transparent)]
    Build(#[from] crate::Error),
    #[error("warning treated as error: {0}")]
    Strict(String),
}

pub type ScenarioResult<T> = std::result::Result<T, ScenarioError>;

#[derive(Debug, Clone, PartialEq)]
pub struct WorldSection {
    pub kind: String,
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSection {
    pub rule: String,
    pub actions: BTreeSet<String>,
    /// Factors beyond the built-in set.
    pub factors: BTreeSet<String>,
    /// `None` is unbounded.
    pub attention: Option<usize>,
    pub action_attention: usize,
    /// Initial pixels; derived from the world when absent.
    pub pixels: Option<Vec<u32>>,
    /// Initial focus; every pixel up to capacity when absent.
    pub focus: Option<BTreeSet<usize>>,
    pub feeling: FeelingTone,
    pub initial: FactorMap,
    pub selected: BTreeSet<String>,
    pub params: Params,
}

impl AgentSection {
    pub fn new(rule: impl Into<String>) -> Self {
        AgentSection {
            rule: rule.into(),
            actions: BTreeSet::new(),
            factors: BTreeSet::new(),
            attention: None,
            action_attention: 1,
            pixels: None,
            focus: None,
            feeling: FeelingTone::Neutral,
            initial: FactorMap::new(),
            selected: BTreeSet::new(),
            params: Params::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationSection {
    pub start: i64,
    pub drift_rate: f64,
    pub recovery: bool,
    pub pixels: Vec<u32>,
    pub focus: BTreeSet<usize>,
    pub mental: BTreeSet<MentalObject>,
    pub action: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSection {
    pub window: Option<Window>,
    /// Pixel values whose consciousness layer is reported per tick.
    pub track: Vec<u32>,
    pub self_concepts: BTreeSet<String>,
    pub classify: bool,
    pub horizon: usize,
    pub rollouts: usize,
    pub epsilon: f64,
    /// Adds per-tick `pain` and `lack` columns to the trace.
    pub tick_columns: bool,
}

impl Default for MetricsSection {
    fn default() -> Self {
        MetricsSection {
            window: None,
            track: Vec::new(),
            self_concepts: BTreeSet::new(),
            classify: false,
            horizon: 5,
            rollouts: 200,
            epsilon: 0.05,
            tick_columns: false,
        }
    }
}

/// A second agent standing in for the world.
#[derive(Debug, Clone, PartialEq)]
pub struct PartnerSection {
    pub agent: AgentSection,
    pub seed: u64,
    pub host_to_partner: Encoder,
    pub partner_to_host: Encoder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub seed: u64,
    pub steps: usize,
    pub t0: i64,
    pub world: Option<WorldSection>,
    pub agent: AgentSection,
    pub memory: MemoryParams,
    pub mindfulness: MindfulnessConfig,
    pub schedule: Schedule,
    pub concentration: Option<ConcentrationSection>,
    pub reset: Option<ResetConfig>,
    pub metrics: MetricsSection,
    pub partner: Option<PartnerSection>,
}

impl Scenario {
    /// Parses and checks a scenario against the built-in registries.
    pub fn parse(text: &str) -> ScenarioResult<Self> {
        Self::parse_with(text, &AgentRegistry::builtin(), &WorldRegistry::builtin())
    }

    pub fn parse_with(
        text: &str,
        agents: &AgentRegistry,
        worlds: &WorldRegistry,
    ) -> ScenarioResult<Self> {
        let doc = parse_document(text)?;
        from_document(&doc, agents, worlds)
    }

    /// Canonical text; `Scenario::parse(&s.to_text()) == Ok(s)`.
    pub fn to_text(&self) -> String {
        write::write_scenario(self)
    }
}

pub const DEFAULT_ID: &str = "scenario";
/// Rule used when the file has no `[agent]` section.
pub const DEFAULT_RULE: &str = "observer";

const SECTIONS: &[&str] = &[
    "scenario",
    "world",
    "agent",
    "memory",
    "mindfulness",
    "concentration",
    "reset",
    "metrics",
    "partner",
];

/// Typed access to one section; every key must be consumed.
struct Reader<'a> {
    section: &'a Section,
    used: BTreeSet<&'a str>,
}

impl<'a> Reader<'a> {
    fn new(section: &'a Section) -> Self {
        Reader {
            section,
            used: BTreeSet::new(),
        }
    }

    fn entry(&mut self, key: &str) -> Option<&'a Entry> {
        let e = self.section.get(key)?;
        self.used.insert(e.key.as_str());
        Some(e)
    }

    fn range(e: &Entry, msg: impl Display) -> ScenarioError {
        ScenarioError::Range {
            line: e.line,
            key: e.key.clone(),
            msg: msg.to_string(),
        }
    }

    fn opt<T: FromStr>(&mut self, key: &str) -> ScenarioResult<Option<T>> {
        let Some(e) = self.entry(key) else {
            return Ok(None);
        };
        e.value
            .parse()
            .map(Some)
            .map_err(|_| Self::range(e, format!("cannot read `{}`", e.value)))
    }

    fn or<T: FromStr>(&mut self, key: &str, default: T) -> ScenarioResult<T> {
        Ok(self.opt(key)?.unwrap_or(default))
    }

    fn req<T: FromStr>(&mut self, key: &str) -> ScenarioResult<T> {
        self.opt(key)?
            .ok_or_else(|| ScenarioError::MissingRequired {
                line: self.section.line,
                section: self.section.name.clone(),
                key: key.to_string(),
            })
    }

    fn list<T: FromStr, C: FromIterator<T>>(&mut self, key: &str) -> ScenarioResult<Option<C>> {
        let Some(e) = self.entry(key) else {
            return Ok(None);
        };
        e.value
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|_| Self::range(e, format!("bad item `{s}`")))
            })
            .collect::<ScenarioResult<C>>()
            .map(Some)
    }

    fn pairs<T: FromStr>(&mut self, key: &str) -> ScenarioResult<Option<Vec<(String, T)>>> {
        let Some(e) = self.entry(key) else {
            return Ok(None);
        };
        parse_pairs(key, &e.value)
            .map(Some)
            .map_err(|err| Self::range(e, err))
    }

    /// `[0, 1]` valued key.
    fn unit(&mut self, key: &str, default: f64) -> ScenarioResult<f64> {
        let v = self.or(key, default)?;
        if !(0.0..=1.0).contains(&v) {
            let e = self.section.get(key).expect("present when out of range");
            return Err(Self::range(e, format!("{v} not in [0, 1]")));
        }
        Ok(v)
    }

    fn check(&self, key: &str, ok: bool, msg: impl Display) -> ScenarioResult<()> {
        match (ok, self.section.get(key)) {
            (false, Some(e)) => Err(Self::range(e, msg)),
            _ => Ok(()),
        }
    }

    /// Remaining keys the predicate accepts, as rule parameters.
    fn rest(&mut self, accept: impl Fn(&str) -> bool) -> Params {
        let mut params = Params::new();
        for e in &self.section.entries {
            if !self.used.contains(e.key.as_str()) && accept(&e.key) {
                self.used.insert(e.key.as_str());
                params.0.insert(e.key.clone(), e.value.clone());
            }
        }
        params
    }

    fn finish(self) -> ScenarioResult<()> {
        match self
            .section
            .entries
            .iter()
            .find(|e| !self.used.contains(e.key.as_str()))
        {
            Some(e) => Err(ScenarioError::UnknownKey {
                line: e.line,
                section: self.section.name.clone(),
                key: e.key.clone(),
                duplicate: false,
            }),
            None => Ok(()),
        }
    }
}

fn read_feeling(r: &mut Reader<'_>) -> ScenarioResult<FeelingTone> {
    let v: i8 = r.or("feeling", 0)?;
    FeelingTone::from_value(v).map_err(|_| {
        let e = r
            .section
            .get("feeling")
            .expect("non-default feeling was read");
        Reader::range(e, format!("{v} not in -2..=2"))
    })
}

fn read_agent(
    r: &mut Reader<'_>,
    agents: &AgentRegistry,
    reserved: &[&str],
) -> ScenarioResult<AgentSection> {
    let rule: String = r.req("rule")?;
    let entry = agents.get(&rule).map_err(|source| ScenarioError::Invalid {
        line: r.section.get("rule").map_or(r.section.line, |e| e.line),
        source,
    })?;
    let mut a = AgentSection::new(rule);
    a.actions = r.list("actions")?.unwrap_or_default();
    a.factors = r.list("factors")?.unwrap_or_default();
    a.attention = r.opt("attention")?;
    a.action_attention = r.or("action_attention", 1)?;
    a.pixels = r.list("pixels")?;
    a.focus = r.list("focus")?;
    a.feeling = read_feeling(r)?;
    if let Some(pairs) = r.pairs::<f64>("initial")? {
        for (name, v) in pairs {
            let i = Intensity::new(v)
                .map_err(|err| Reader::range(r.section.get("initial").expect("read above"), err))?;
            a.initial.insert(name, i);
        }
    }
    a.selected = r.list("selected")?.unwrap_or_default();
    r.check(
        "selected",
        a.selected.is_subset(&a.actions),
        "selected actions must be listed in `actions`",
    )?;
    r.check(
        "selected",
        a.selected.len() <= a.action_attention,
        "more actions selected than `action_attention` allows",
    )?;
    a.params = r.rest(|k| !reserved.contains(&k) && entry.accepts(k));
    Ok(a)
}

fn from_document(
    doc: &Document,
    agents: &AgentRegistry,
    worlds: &WorldRegistry,
) -> ScenarioResult<Scenario> {
    if let Some(s) = doc
        .sections
        .iter()
        .find(|s| !SECTIONS.contains(&s.name.as_str()))
    {
        return Err(ScenarioError::Syntax {
            line: s.line,
            col: 2,
            msg: format!("unknown section [{}]", s.name),
        });
    }
    let need = |name: &str| {
        doc.section(name)
            .ok_or_else(|| ScenarioError::MissingSection(name.to_string()))
    };

    let mut r = Reader::new(need("scenario")?);
    let id: String = r.or("id", DEFAULT_ID.to_string())?;
    let seed = r.req("seed")?;
    let steps = r.req("steps")?;
    let t0 = r.or("t0", 0)?;
    r.finish()?;

    let partner_section = doc.section("partner");
    let world = match (doc.section("world"), partner_section) {
        (Some(s), None) => {
            let mut r = Reader::new(s);
            let kind: String = r.req("kind")?;
            let entry = worlds.get(&kind).map_err(|source| ScenarioError::Invalid {
                line: s.get("kind").map_or(s.line, |e| e.line),
                source,
            })?;
            let params = r.rest(|k| entry.accepts(k));
            r.finish()?;
            Some(WorldSection { kind, params })
        }
        (Some(s), Some(_)) => {
            return Err(ScenarioError::Syntax {
                line: s.line,
                col: 1,
                msg: "[world] and [partner] are exclusive".into(),
            })
        }
        (None, Some(_)) => None,
        (None, None) => return Err(ScenarioError::MissingSection("world".into())),
    };

    let agent = match doc.section("agent") {
        Some(s) => {
            let mut r = Reader::new(s);
            let agent = read_agent(&mut r, agents, &[])?;
            r.finish()?;
            agent
        }
        None => AgentSection::new(DEFAULT_RULE),
    };

    let mut memory = MemoryParams::default();
    if let Some(s) = doc.section("memory") {
        let mut r = Reader::new(s);
        memory.capacity = r.or("capacity", memory.capacity)?;
        r.check("capacity", memory.capacity >= 1, "must be at least 1")?;
        memory.reliability = r.unit("reliability", memory.reliability)?;
        memory.activation = r.or("threshold", memory.activation)?;
        r.finish()?;
    }

    let mut mindfulness = MindfulnessConfig::default();
    let mut schedule = Schedule::default();
    if let Some(s) = doc.section("mindfulness") {
        let mut r = Reader::new(s);
        let m = &mut mindfulness;
        m.enabled = r.or("enabled", true)?;
        m.strength = r.opt("strength")?;
        m.sharpness = r.or("sharpness", m.sharpness)?;
        r.check("sharpness", m.sharpness >= 1, "must be at least 1")?;
        m.right = r.or("right", m.right)?;
        m.rho = r.unit("rho", m.rho)?;
        m.equanimity_floor = r.unit("equanimity_floor", m.equanimity_floor)?;
        if let Some(u) = r.list("unwholesome")? {
            m.unwholesome = u;
        }
        m.quote_focus = r.or("quote_focus", m.quote_focus)?;
        schedule.start = r.or("start", 0)?;
        schedule.period = r.opt("period")?;
        r.check("period", schedule.period != Some(0), "must be at least 1")?;
        if let Some(period) = schedule.period {
            r.check(
                "period",
                m.strength.is_some_and(|n| n <= period as u64),
                "a repeating schedule needs a `strength` no longer than `period`",
            )?;
        }
        r.finish()?;
    }

    let concentration = match doc.section("concentration") {
        Some(s) => {
            let mut r = Reader::new(s);
            let c = ConcentrationSection {
                start: r.or("start", t0)?,
                drift_rate: r.unit("drift_rate", 0.0)?,
                recovery: r.or("recovery", true)?,
                pixels: r.list("pixels")?.unwrap_or_default(),
                focus: r.list("focus")?.unwrap_or_default(),
                mental: r.list("mental")?.unwrap_or_default(),
                action: r.list("action")?.unwrap_or_default(),
            };
            r.check(
                "focus",
                c.focus.iter().all(|&i| i < c.pixels.len()),
                "focus index beyond `pixels`",
            )?;
            r.finish()?;
            Some(c)
        }
        None => None,
    };

    let reset = match doc.section("reset") {
        Some(s) => {
            let mut r = Reader::new(s);
            let d = ResetConfig::default();
            let cycles = r.or("cycles", d.cycles)?;
            r.check("cycles", cycles >= 1, "must be at least 1")?;
            let coverage = r.unit("coverage", d.coverage)?;
            r.finish()?;
            Some(ResetConfig { cycles, coverage })
        }
        None => None,
    };

    let mut metrics = MetricsSection::default();
    if let Some(s) = doc.section("metrics") {
        let mut r = Reader::new(s);
        let m = &mut metrics;
        m.window = r.opt("window")?;
        m.track = r.list("track")?.unwrap_or_default();
        m.self_concepts = r.list("self_concepts")?.unwrap_or_default();
        m.classify = r.or("classify", m.classify)?;
        m.horizon = r.or("horizon", m.horizon)?;
        m.rollouts = r.or("rollouts", m.rollouts)?;
        r.check("rollouts", m.rollouts >= 1, "must be at least 1")?;
        m.epsilon = r.or("epsilon", m.epsilon)?;
        r.check("epsilon", m.epsilon >= 0.0, "must be non-negative")?;
        m.tick_columns = r.or("tick_columns", m.tick_columns)?;
        r.finish()?;
    }

    let partner = match partner_section {
        Some(s) => {
            const RESERVED: &[&str] = &["seed", "host_to_partner", "partner_to_host"];
            let mut r = Reader::new(s);
            let seed = r.or("seed", seed)?;
            let host_to_partner = Encoder::new(r.pairs("host_to_partner")?.unwrap_or_default());
            let partner_to_host = Encoder::new(r.pairs("partner_to_host")?.unwrap_or_default());
            let agent = read_agent(&mut r, agents, RESERVED)?;
            r.finish()?;
            Some(PartnerSection {
                agent,
                seed,
                host_to_partner,
                partner_to_host,
            })
        }
        None => None,
    };

    Ok(Scenario {
        id,
        seed,
        steps,
        t0,
        world,
        agent,
        memory,
        mindfulness,
        schedule,
        concentration,
        reset,
        metrics,
        partner,
    })
}

/// `name:value` pairs in canonical order.
pub(crate) fn join_pairs<V: Display>(pairs: impl IntoIterator<Item = (impl Display, V)>) -> String {
    pairs
        .into_iter()
        .map(|(k, v)| format!("{k}:{v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub(crate) fn join_list<T: Display>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
