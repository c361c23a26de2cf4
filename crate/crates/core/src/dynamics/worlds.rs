//! Built-in toy worlds.
//!
//! `grid` is a two-state cellular automaton on a torus (Conway's rule) with
//! one cell the agent may flip. `rewardBandit` gives each action a fixed
//! distribution over feeling tones, delivered to the agent on the next tick.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Ceta, FeelingTone, WorldState};
use crate::rng::{pick_weighted, RandomnessSource};

use super::{Params, Percept, WorldRule};

pub const GRID: &str = "grid";
pub const REWARD_BANDIT: &str = "rewardBandit";

/// Action that toggles the agent-writable grid cell.
pub const FLIP_ACTION: &str = "flip";

/// Bandit pixel for "no action taken"; actions are coded from `ACTION_CODE_BASE`.
pub const NO_ACTION_CODE: u32 = 0;
pub const ACTION_CODE_BASE: u32 = 10;
/// Bandit pixel for "no consequence"; tones are coded as `value + 2`.
pub const NO_FEELING_CODE: u32 = 5;

fn cells_of<'a>(w: &'a WorldState, kind: &str) -> Result<&'a [i64]> {
    if w.kind != kind {
        return Err(Error::InvalidParameter(format!(
            "world state of kind `{}` given to `{kind}`",
            w.kind
        )));
    }
    Ok(w.cell_values())
}

/// A world that never changes and shows its cells verbatim.
#[derive(Debug, Clone)]
pub struct StaticWorld {
    kind: String,
}

impl StaticWorld {
    pub fn new(kind: impl Into<String>) -> Self {
        StaticWorld { kind: kind.into() }
    }
}

impl WorldRule for StaticWorld {
    fn kind(&self) -> &str {
        &self.kind
    }

    fn perceive(&self, _c: &Ceta, w: &WorldState, _rng: &mut RandomnessSource) -> Result<Percept> {
        Ok(Percept {
            pixels: w.cell_values().iter().map(|&v| v.max(0) as u32).collect(),
            feeling: None,
        })
    }

    fn transition(
        &self,
        _c: &Ceta,
        w: &WorldState,
        _rng: &mut RandomnessSource,
    ) -> Result<WorldState> {
        Ok(w.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridWorld {
    pub width: usize,
    pub height: usize,
    pub agent_cell: Option<usize>,
}

impl GridWorld {
    pub const KEYS: &'static [&'static str] = &["width", "height", "live", "agent_cell"];

    pub fn from_params(p: &Params) -> Result<(Self, WorldState)> {
        let width: usize = p.require("width")?;
        let height: usize = p.require("height")?;
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(
                "grid dimensions must be positive".into(),
            ));
        }
        let n = width * height;
        let agent_cell: Option<usize> = p.parse("agent_cell")?;
        if agent_cell.is_some_and(|i| i >= n) {
            return Err(Error::InvalidParameter("agent_cell outside grid".into()));
        }
        let mut cells = vec![0i64; n];
        for i in p.list::<usize>("live")? {
            *cells
                .get_mut(i)
                .ok_or_else(|| Error::InvalidParameter(format!("live cell {i} outside grid")))? = 1;
        }
        Ok((
            GridWorld {
                width,
                height,
                agent_cell,
            },
            WorldState::cells(GRID, cells),
        ))
    }

    fn live_neighbours(&self, cells: &[i64], idx: usize) -> usize {
        let (x, y) = ((idx % self.width) as isize, (idx / self.width) as isize);
        let (w, h) = (self.width as isize, self.height as isize);
        let mut n = 0;
        for dy in -1..=1 {
            for dx in -1..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let nx = (x + dx).rem_euclid(w);
                let ny = (y + dy).rem_euclid(h);
                if cells[(ny * w + nx) as usize] != 0 {
                    n += 1;
                }
            }
        }
        n
    }

    /// One generation of the life rule, without the agent's write.
    pub fn evolve(&self, cells: &[i64]) -> Vec<i64> {
        (0..cells.len())
            .map(|i| {
                let n = self.live_neighbours(cells, i);
                let alive = cells[i] != 0;
                i64::from(matches!((alive, n), (true, 2) | (_, 3)))
            })
            .collect()
    }
}

impl WorldRule for GridWorld {
    fn kind(&self) -> &str {
        GRID
    }

    fn perceive(&self, _c: &Ceta, w: &WorldState, _rng: &mut RandomnessSource) -> Result<Percept> {
        Ok(Percept {
            pixels: cells_of(w, GRID)?.iter().map(|&v| v as u32).collect(),
            feeling: None,
        })
    }

    fn transition(
        &self,
        c: &Ceta,
        w: &WorldState,
        _rng: &mut RandomnessSource,
    ) -> Result<WorldState> {
        let cells = cells_of(w, GRID)?;
        if cells.len() != self.width * self.height {
            return Err(Error::InvalidParameter("grid state has wrong size".into()));
        }
        let mut next = self.evolve(cells);
        if let Some(i) = self.agent_cell {
            if c.action.selected.contains(FLIP_ACTION) {
                next[i] = 1 - next[i];
            }
        }
        Ok(WorldState::cells(GRID, next))
    }
}

/// Outcome distribution of one bandit arm.
#[derive(Debug, Clone, PartialEq)]
pub struct Arm {
    pub outcomes: Vec<(FeelingTone, f64)>,
}

impl Arm {
    pub fn deterministic(tone: FeelingTone) -> Self {
        Arm {
            outcomes: vec![(tone, 1.0)],
        }
    }

    pub fn sample(&self, u: f64) -> FeelingTone {
        let weights: Vec<f64> = self.outcomes.iter().map(|(_, p)| *p).collect();
        let i = pick_weighted(&weights, u).expect("arm probabilities sum to one");
        self.outcomes[i].0
    }

    pub fn expected_value(&self) -> f64 {
        self.outcomes
            .iter()
            .map(|(t, p)| f64::from(t.value()) * p)
            .sum()
    }
}

/// Stateless K-armed world. The consequence of the action selected at `t`
/// is felt at `t + 1`. Its state records the last action code.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditWorld {
    arms: BTreeMap<String, Arm>,
}

impl BanditWorld {
    pub const ARM_PREFIX: &'static str = "arm.";

    pub fn new(arms: BTreeMap<String, Arm>) -> Result<Self> {
        for (name, arm) in &arms {
            let total: f64 = arm.outcomes.iter().map(|(_, p)| p).sum();
            if arm.outcomes.iter().any(|(_, p)| !(0.0..=1.0).contains(p))
                || (total - 1.0).abs() > 1e-9
            {
                return Err(Error::InvalidParameter(format!(
                    "arm `{name}`: probabilities must be in [0,1] and sum to 1"
                )));
            }
        }
        Ok(BanditWorld { arms })
    }

    pub fn from_params(p: &Params) -> Result<(Self, WorldState)> {
        let mut arms = BTreeMap::new();
        for key in p.keys() {
            let Some(action) = key.strip_prefix(Self::ARM_PREFIX) else {
                return Err(Error::InvalidParameter(format!(
                    "unknown bandit key `{key}`"
                )));
            };
            let outcomes = p
                .pairs::<f64>(key)?
                .into_iter()
                .map(|(tone, prob)| {
                    let v: i8 = tone.parse().map_err(|_| {
                        Error::InvalidParameter(format!("{key}: bad tone `{tone}`"))
                    })?;
                    Ok((FeelingTone::from_value(v)?, prob))
                })
                .collect::<Result<Vec<_>>>()?;
            arms.insert(action.to_string(), Arm { outcomes });
        }
        Ok((
            BanditWorld::new(arms)?,
            WorldState::cells(REWARD_BANDIT, vec![0]),
        ))
    }

    pub fn arms(&self) -> &BTreeMap<String, Arm> {
        &self.arms
    }

    pub fn arm(&self, action: &str) -> Option<&Arm> {
        self.arms.get(action)
    }

    /// Pixel code of the first selected action, by menu position.
    pub fn action_code(c: &Ceta) -> u32 {
        c.action
            .selected
            .iter()
            .next()
            .and_then(|a| c.action.menu.iter().position(|m| m == a))
            .map_or(NO_ACTION_CODE, |i| ACTION_CODE_BASE + i as u32)
    }
}

impl WorldRule for BanditWorld {
    fn kind(&self) -> &str {
        REWARD_BANDIT
    }

    fn perceive(&self, c: &Ceta, w: &WorldState, rng: &mut RandomnessSource) -> Result<Percept> {
        cells_of(w, REWARD_BANDIT)?;
        // one draw per tick whatever was chosen, so paired runs stay aligned
        let u = rng.uniform();
        let feeling = c
            .action
            .selected
            .iter()
            .next()
            .and_then(|a| self.arms.get(a))
            .map(|arm| arm.sample(u));
        let feeling_code = feeling.map_or(NO_FEELING_CODE, |f| (f.value() + 2) as u32);
        Ok(Percept {
            pixels: vec![BanditWorld::action_code(c), feeling_code],
            feeling,
        })
    }

    fn transition(
        &self,
        c: &Ceta,
        w: &WorldState,
        _rng: &mut RandomnessSource,
    ) -> Result<WorldState> {
        cells_of(w, REWARD_BANDIT)?;
        Ok(WorldState::cells(
            REWARD_BANDIT,
            vec![i64::from(BanditWorld::action_code(c))],
        ))
    }
}
