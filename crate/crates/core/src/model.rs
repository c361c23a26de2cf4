//! Configuration types: the mind-moment quintuple, world states and traces.
//!
//! A [`Ceta`] is one configuration of the agent, split into five groups:
//! body input, mental input, feeling tone, the remaining mind-state factors
//! and action. Every value here is immutable once built and hashes
//! consistently with its equality, which loop detection and replay rely on.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::memory::AssocMemory;

/// A factor counts as present once its intensity reaches this level.
pub const PRESENCE_THRESHOLD: f64 = 0.05;

pub mod factor {
    pub const ANGER: &str = "anger";
    pub const DESIRE: &str = "desire";
    pub const AVERSION: &str = "aversion";
    pub const MINDFULNESS: &str = "mindfulness";
    pub const FRIENDLINESS: &str = "friendliness";
    pub const COMPASSION: &str = "compassion";
    pub const EQUANIMITY: &str = "equanimity";
    pub const FEAR: &str = "fear";
    pub const WRONG_VIEW: &str = "wrongView";

    /// Factors every registry knows about.
    pub const BUILTIN: [&str; 9] = [
        ANGER,
        DESIRE,
        AVERSION,
        MINDFULNESS,
        FRIENDLINESS,
        COMPASSION,
        EQUANIMITY,
        FEAR,
        WRONG_VIEW,
    ];
}

/// Five-level valuation attached to every mind-moment, encoded as -2..=2.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(try_from = "i8", into = "i8")]
pub enum FeelingTone {
    VeryUnpleasant,
    Unpleasant,
    #[default]
    Neutral,
    Pleasant,
    VeryPleasant,
}

impl FeelingTone {
    pub const ALL: [FeelingTone; 5] = [
        FeelingTone::VeryUnpleasant,
        FeelingTone::Unpleasant,
        FeelingTone::Neutral,
        FeelingTone::Pleasant,
        FeelingTone::VeryPleasant,
    ];

    pub fn value(self) -> i8 {
        match self {
            FeelingTone::VeryUnpleasant => -2,
            FeelingTone::Unpleasant => -1,
            FeelingTone::Neutral => 0,
            FeelingTone::Pleasant => 1,
            FeelingTone::VeryPleasant => 2,
        }
    }

    pub fn from_value(v: i8) -> Result<Self> {
        match v {
            -2 => Ok(FeelingTone::VeryUnpleasant),
            -1 => Ok(FeelingTone::Unpleasant),
            0 => Ok(FeelingTone::Neutral),
            1 => Ok(FeelingTone::Pleasant),
            2 => Ok(FeelingTone::VeryPleasant),
            other => Err(Error::OutOfRange(format!(
                "feeling tone {other} not in -2..=2"
            ))),
        }
    }

    pub fn is_negative(self) -> bool {
        self.value() < 0
    }
}

impl From<FeelingTone> for i8 {
    fn from(f: FeelingTone) -> i8 {
        f.value()
    }
}

impl TryFrom<i8> for FeelingTone {
    type Error = Error;
    fn try_from(v: i8) -> Result<Self> {
        FeelingTone::from_value(v)
    }
}

/// Factor intensity in `[0, 1]`. Compared and hashed by bit pattern, so it is
/// usable as part of a hashable mind-state.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Intensity(f64);

impl Intensity {
    pub const ZERO: Intensity = Intensity(0.0);
    pub const FULL: Intensity = Intensity(1.0);

    pub fn new(v: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange(format!("intensity {v} not in [0,1]")));
        }
        // -0.0 and 0.0 must hash alike
        Ok(Intensity(if v == 0.0 { 0.0 } else { v }))
    }

    /// Clamps into range; NaN maps to zero.
    pub fn saturating(v: f64) -> Self {
        if v.is_nan() {
            return Intensity::ZERO;
        }
        Intensity::new(v.clamp(0.0, 1.0)).expect("clamped")
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_present(self) -> bool {
        self.0 >= PRESENCE_THRESHOLD
    }
}

impl PartialEq for Intensity {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}
impl Eq for Intensity {}

impl Hash for Intensity {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl PartialOrd for Intensity {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Intensity {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl From<Intensity> for f64 {
    fn from(i: Intensity) -> f64 {
        i.0
    }
}

impl TryFrom<f64> for Intensity {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Intensity::new(v)
    }
}

pub type FactorMap = BTreeMap<String, Intensity>;

/// Feeling tone plus the array of mental factors. Zero-intensity factors are
/// never stored, so equal states have equal maps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct MindState {
    pub feeling: FeelingTone,
    pub factors: FactorMap,
}

impl MindState {
    pub fn new(feeling: FeelingTone, factors: FactorMap) -> Self {
        let factors = factors
            .into_iter()
            .filter(|(_, v)| v.get() != 0.0)
            .collect();
        MindState { feeling, factors }
    }

    pub fn intensity(&self, name: &str) -> f64 {
        self.factors.get(name).map_or(0.0, |v| v.get())
    }

    pub fn is_present(&self, name: &str) -> bool {
        self.intensity(name) >= PRESENCE_THRESHOLD
    }

    pub fn set(&mut self, name: &str, value: Intensity) {
        if value.get() == 0.0 {
            self.factors.remove(name);
        } else {
            self.factors.insert(name.to_string(), value);
        }
    }

    pub fn present_factors(&self) -> impl Iterator<Item = (&str, f64)> {
        self.factors
            .iter()
            .filter(|(_, v)| v.is_present())
            .map(|(k, v)| (k.as_str(), v.get()))
    }
}

/// Sense values together with the attended index subset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BodyInput {
    pub pixels: Vec<u32>,
    pub focus: BTreeSet<usize>,
}

impl BodyInput {
    pub fn new(pixels: Vec<u32>, focus: BTreeSet<usize>) -> Result<Self> {
        if let Some(&i) = focus.iter().find(|&&i| i >= pixels.len()) {
            return Err(Error::OutOfRange(format!(
                "focus index {i} outside {} pixels",
                pixels.len()
            )));
        }
        Ok(BodyInput { pixels, focus })
    }

    /// Everything in view is attended.
    pub fn fully_attended(pixels: Vec<u32>) -> Self {
        let focus = (0..pixels.len()).collect();
        BodyInput { pixels, focus }
    }

    pub fn attended_values(&self) -> impl Iterator<Item = u32> + '_ {
        self.focus
            .iter()
            .filter_map(|&i| self.pixels.get(i).copied())
    }
}

/// Where an object of experience came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Origin {
    Body,
    Mental,
    Action,
}

/// Selects one of the five groups, or the combined mind-state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum GroupSelector {
    BodyInput,
    MentalInput,
    Feeling,
    Factors,
    Action,
    MindState,
}

impl GroupSelector {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupSelector::BodyInput => "bodyInput",
            GroupSelector::MentalInput => "mentalInput",
            GroupSelector::Feeling => "feeling",
            GroupSelector::Factors => "factors",
            GroupSelector::Action => "action",
            GroupSelector::MindState => "mindState",
        }
    }
}

impl FromStr for GroupSelector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bodyInput" => GroupSelector::BodyInput,
            "mentalInput" => GroupSelector::MentalInput,
            "feeling" => GroupSelector::Feeling,
            "factors" => GroupSelector::Factors,
            "action" => GroupSelector::Action,
            "mindState" => GroupSelector::MindState,
            other => return Err(Error::InvalidParameter(format!("unknown group `{other}`"))),
        })
    }
}

/// The fragment of an earlier mind-moment carried by a quote.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum QuoteContent {
    Factor(String),
    Feeling(FeelingTone),
    Group(GroupSelector),
    /// A body object (pixel value) that was attended.
    Object(u32),
}

/// A reified piece of the ceta at tick `source`, appearing as mental input.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuotedObject {
    pub source: i64,
    pub content: QuoteContent,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MentalObject {
    Concept(String),
    Image(String),
    Intention(String),
    Quote(QuotedObject),
}

impl MentalObject {
    /// Mental objects are always told apart from body input and executed action.
    pub fn origin(&self) -> Origin {
        Origin::Mental
    }

    pub fn as_quote(&self) -> Option<&QuotedObject> {
        match self {
            MentalObject::Quote(q) => Some(q),
            _ => None,
        }
    }
}

fn check_token(s: &str) -> Result<&str> {
    if s.is_empty() || s.contains([';', ',', '\n', '\r']) {
        return Err(Error::InvalidParameter(format!("bad object id `{s}`")));
    }
    Ok(s)
}

impl fmt::Display for MentalObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MentalObject::Concept(id) => write!(f, "concept:{id}"),
            MentalObject::Image(id) => write!(f, "image:{id}"),
            MentalObject::Intention(id) => write!(f, "intention:{id}"),
            MentalObject::Quote(q) => {
                write!(f, "quote:{}:", q.source)?;
                match &q.content {
                    QuoteContent::Factor(n) => write!(f, "factor:{n}"),
                    QuoteContent::Feeling(t) => write!(f, "feeling:{}", t.value()),
                    QuoteContent::Group(g) => write!(f, "group:{}", g.as_str()),
                    QuoteContent::Object(o) => write!(f, "object:{o}"),
                }
            }
        }
    }
}

impl FromStr for MentalObject {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::TraceFormat(format!("bad mental object `{s}`"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        Ok(match kind {
            "concept" => MentalObject::Concept(check_token(rest)?.to_string()),
            "image" => MentalObject::Image(check_token(rest)?.to_string()),
            "intention" => MentalObject::Intention(check_token(rest)?.to_string()),
            "quote" => {
                let (source, rest) = rest.split_once(':').ok_or_else(bad)?;
                let source: i64 = source.parse().map_err(|_| bad())?;
                let (ck, cv) = rest.split_once(':').ok_or_else(bad)?;
                let content = match ck {
                    "factor" => QuoteContent::Factor(check_token(cv)?.to_string()),
                    "feeling" => QuoteContent::Feeling(FeelingTone::from_value(
                        cv.parse().map_err(|_| bad())?,
                    )?),
                    "group" => QuoteContent::Group(cv.parse()?),
                    "object" => QuoteContent::Object(cv.parse().map_err(|_| bad())?),
                    _ => return Err(bad()),
                };
                MentalObject::Quote(QuotedObject { source, content })
            }
            _ => return Err(bad()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct MentalInput {
    pub objects: BTreeSet<MentalObject>,
}

impl MentalInput {
    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn quotes(&self) -> impl Iterator<Item = &QuotedObject> {
        self.objects.iter().filter_map(MentalObject::as_quote)
    }

    pub fn has_quote(&self, source: i64, content: &QuoteContent) -> bool {
        self.quotes()
            .any(|q| q.source == source && &q.content == content)
    }
}

/// Available actions and the attended (executed) subset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Action {
    pub menu: BTreeSet<String>,
    pub selected: BTreeSet<String>,
}

impl Action {
    pub fn new(menu: BTreeSet<String>, selected: BTreeSet<String>) -> Result<Self> {
        if let Some(a) = selected.iter().find(|a| !menu.contains(*a)) {
            return Err(Error::OutOfRange(format!(
                "selected action `{a}` not in menu"
            )));
        }
        Ok(Action { menu, selected })
    }

    pub fn idle(menu: BTreeSet<String>) -> Self {
        Action {
            menu,
            selected: BTreeSet::new(),
        }
    }
}

/// One mind-moment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Ceta {
    pub t: i64,
    pub body: BodyInput,
    pub mental: MentalInput,
    pub mind: MindState,
    pub action: Action,
}

/// The quintuple split of a ceta, in body/mental/feeling/factors/action order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiveGroups {
    pub body: BodyInput,
    pub mental: MentalInput,
    pub feeling: FeelingTone,
    pub factors: FactorMap,
    pub action: Action,
}

impl FiveGroups {
    pub fn into_tuple(self) -> (BodyInput, MentalInput, FeelingTone, FactorMap, Action) {
        (
            self.body,
            self.mental,
            self.feeling,
            self.factors,
            self.action,
        )
    }
}

impl Ceta {
    pub fn decompose(&self) -> FiveGroups {
        FiveGroups {
            body: self.body.clone(),
            mental: self.mental.clone(),
            feeling: self.mind.feeling,
            factors: self.mind.factors.clone(),
            action: self.action.clone(),
        }
    }

    pub fn recompose(t: i64, groups: FiveGroups) -> Ceta {
        Ceta {
            t,
            body: groups.body,
            mental: groups.mental,
            mind: MindState::new(groups.feeling, groups.factors),
            action: groups.action,
        }
    }

    /// Copy of this ceta advanced to the next tick.
    pub fn successor(&self) -> Ceta {
        Ceta {
            t: self.t + 1,
            ..self.clone()
        }
    }

    pub fn group(&self, selector: GroupSelector) -> GroupValue {
        match selector {
            GroupSelector::BodyInput => GroupValue::BodyInput(self.body.clone()),
            GroupSelector::MentalInput => GroupValue::MentalInput(self.mental.clone()),
            GroupSelector::Feeling => GroupValue::Feeling(self.mind.feeling),
            GroupSelector::Factors => GroupValue::Factors(self.mind.factors.clone()),
            GroupSelector::Action => GroupValue::Action(self.action.clone()),
            GroupSelector::MindState => GroupValue::MindState(self.mind.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum GroupValue {
    BodyInput(BodyInput),
    MentalInput(MentalInput),
    Feeling(FeelingTone),
    Factors(FactorMap),
    Action(Action),
    MindState(MindState),
}

/// World-specific content; opaque to everything but the owning world rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum WorldPayload {
    Cells(Vec<i64>),
    /// Another agent acting as this one's world.
    Agent {
        ceta: Box<Ceta>,
        memory: AssocMemory,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WorldState {
    pub kind: String,
    pub payload: WorldPayload,
}

impl WorldState {
    pub fn cells(kind: impl Into<String>, cells: Vec<i64>) -> Self {
        WorldState {
            kind: kind.into(),
            payload: WorldPayload::Cells(cells),
        }
    }

    pub fn cell_values(&self) -> &[i64] {
        match &self.payload {
            WorldPayload::Cells(c) => c,
            WorldPayload::Agent { .. } => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraceEntry {
    pub ceta: Ceta,
    pub world: WorldState,
}

/// A contiguous window of the combined stream, starting at `t0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub scenario_id: String,
    pub seed: u64,
    pub t0: i64,
    entries: Vec<TraceEntry>,
}

impl Trace {
    pub fn new(scenario_id: impl Into<String>, seed: u64, t0: i64) -> Self {
        Trace {
            scenario_id: scenario_id.into(),
            seed,
            t0,
            entries: Vec::new(),
        }
    }

    pub fn from_entries(
        scenario_id: impl Into<String>,
        seed: u64,
        entries: Vec<TraceEntry>,
    ) -> Result<Self> {
        let t0 = entries.first().map_or(0, |e| e.ceta.t);
        let mut tr = Trace::new(scenario_id, seed, t0);
        for e in entries {
            tr.push(e.ceta, e.world)?;
        }
        Ok(tr)
    }

    /// Appends the next tick; its time index must follow the last one.
    pub fn push(&mut self, ceta: Ceta, world: WorldState) -> Result<()> {
        let expected = self.t0 + self.entries.len() as i64;
        if ceta.t != expected {
            return Err(Error::TimeMismatch {
                expected,
                found: ceta.t,
            });
        }
        self.entries.push(TraceEntry { ceta, world });
        Ok(())
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&TraceEntry> {
        self.entries.last()
    }

    pub fn offset_of(&self, t: i64) -> Option<usize> {
        let k = t.checked_sub(self.t0)?;
        (k >= 0 && (k as usize) < self.entries.len()).then_some(k as usize)
    }

    pub fn at(&self, t: i64) -> Option<&TraceEntry> {
        self.offset_of(t).map(|k| &self.entries[k])
    }

    pub fn cetas(&self) -> impl Iterator<Item = &Ceta> {
        self.entries.iter().map(|e| &e.ceta)
    }

    pub fn mind_states(&self) -> Vec<MindState> {
        self.cetas().map(|c| c.mind.clone()).collect()
    }

    pub fn substream(&self, group: GroupSelector) -> Vec<GroupValue> {
        self.cetas().map(|c| c.group(group)).collect()
    }

    /// First `len` entries as a trace of its own.
    pub fn prefix(&self, len: usize) -> Trace {
        Trace {
            scenario_id: self.scenario_id.clone(),
            seed: self.seed,
            t0: self.t0,
            entries: self.entries[..len.min(self.entries.len())].to_vec(),
        }
    }
}

/// Deterministic JSON rendering with object keys sorted at every level.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("model types always serialize");
    serde_json::to_string(&v).expect("json value always serializes")
}
