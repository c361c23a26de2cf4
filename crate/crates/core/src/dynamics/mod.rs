//! Transition contracts, the interaction step and the run loop.
//!
//! Agents and worlds are strategies behind [`AgentRule`] and [`WorldRule`].
//! A step reads only the pre-step pair `(c, w)`: the world first turns it
//! into a percept for the agent, then the agent's successor and the world's
//! successor are computed independently from the same pre-step values.

use std::collections::BTreeSet;
use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::memory::AssocMemory;
use crate::model::{factor, Ceta, FeelingTone, Trace, WorldState};
use crate::rng::{Party, RandomnessSource};

pub mod agents;
pub mod params;
pub mod registry;
pub mod worlds;

pub use params::Params;
pub use registry::{builtin_world, AgentRegistry, WorldRegistry};

/// Declared vocabulary of an agent; cetas outside it are rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    pub factors: BTreeSet<String>,
    pub actions: BTreeSet<String>,
    pub attention_capacity: usize,
    pub action_capacity: usize,
}

impl Registry {
    /// Built-in factors plus `extra_factors`.
    pub fn new(
        extra_factors: impl IntoIterator<Item = String>,
        actions: impl IntoIterator<Item = String>,
        attention_capacity: usize,
        action_capacity: usize,
    ) -> Self {
        let mut factors: BTreeSet<String> = factor::BUILTIN.iter().map(|s| s.to_string()).collect();
        factors.extend(extra_factors);
        Registry {
            factors,
            actions: actions.into_iter().collect(),
            attention_capacity,
            action_capacity,
        }
    }

    pub fn validate(&self, c: &Ceta) -> Result<()> {
        if let Some(f) = c.mind.factors.keys().find(|f| !self.factors.contains(*f)) {
            return Err(Error::RegistryMismatch(format!("undeclared factor `{f}`")));
        }
        if let Some(a) = c.action.menu.iter().find(|a| !self.actions.contains(*a)) {
            return Err(Error::RegistryMismatch(format!("undeclared action `{a}`")));
        }
        if let Some(a) = c
            .action
            .selected
            .iter()
            .find(|a| !c.action.menu.contains(*a))
        {
            return Err(Error::RegistryMismatch(format!(
                "selected action `{a}` not on menu"
            )));
        }
        if c.action.selected.len() > self.action_capacity {
            return Err(Error::RegistryMismatch(format!(
                "{} actions selected, capacity {}",
                c.action.selected.len(),
                self.action_capacity
            )));
        }
        if c.body.focus.len() > self.attention_capacity {
            return Err(Error::RegistryMismatch(format!(
                "{} pixels attended, capacity {}",
                c.body.focus.len(),
                self.attention_capacity
            )));
        }
        if let Some(i) = c.body.focus.iter().find(|&&i| i >= c.body.pixels.len()) {
            return Err(Error::RegistryMismatch(format!(
                "focus index {i} out of range"
            )));
        }
        Ok(())
    }
}

/// What the world delivers to the agent for the next tick.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Percept {
    pub pixels: Vec<u32>,
    /// Consequence felt for the previous action, if the world assigns one.
    pub feeling: Option<FeelingTone>,
}

/// Mutable context an agent transition may consult.
pub struct AgentContext<'a> {
    pub memory: &'a mut AssocMemory,
    pub rng: &'a mut RandomnessSource,
    pub registry: &'a Registry,
}

/// The agent's transition `A(c, w)`, seen through the world's percept.
/// Must be a function of its arguments alone, including the rng draws.
pub trait AgentRule: Debug + Send + Sync {
    fn name(&self) -> &str;

    /// Factors this rule writes beyond the built-in set.
    fn factors(&self) -> Vec<String> {
        Vec::new()
    }

    fn transition(&self, c: &Ceta, percept: &Percept, ctx: &mut AgentContext<'_>) -> Result<Ceta>;
}

/// The world's transition `W(c, w)` plus what it shows the agent.
pub trait WorldRule: Debug + Send + Sync {
    fn kind(&self) -> &str;

    fn perceive(&self, c: &Ceta, w: &WorldState, rng: &mut RandomnessSource) -> Result<Percept>;

    fn transition(
        &self,
        c: &Ceta,
        w: &WorldState,
        rng: &mut RandomnessSource,
    ) -> Result<WorldState>;
}

#[derive(Debug, Clone)]
pub struct AgentSpec {
    pub rule: Arc<dyn AgentRule>,
    pub registry: Registry,
    pub memory: AssocMemory,
}

impl AgentSpec {
    pub fn new(rule: Arc<dyn AgentRule>, mut registry: Registry, memory: AssocMemory) -> Self {
        registry.factors.extend(rule.factors());
        AgentSpec {
            rule,
            registry,
            memory,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WorldSpec {
    pub rule: Arc<dyn WorldRule>,
    pub initial: WorldState,
}

impl WorldSpec {
    pub fn kind(&self) -> &str {
        self.rule.kind()
    }
}

/// Post-processes the agent's proposed successor before it is recorded.
/// `history` holds every entry up to and including the pre-step tick.
pub trait TickHook {
    fn adjust(&mut self, history: &Trace, next: Ceta, rng: &RandomnessSource) -> Result<Ceta>;
}

/// One interaction step `(c, w) ↦ (A(c,w), W(c,w))`.
pub fn step(
    c: &Ceta,
    w: &WorldState,
    rng: &RandomnessSource,
    agent: &mut AgentSpec,
    world: &WorldSpec,
) -> Result<(Ceta, WorldState)> {
    agent.registry.validate(c)?;
    let tick = c.t;
    let mut agent_rng = rng.fork(tick, Party::Agent);
    let mut percept_rng = rng.fork(tick, Party::Percept);
    let mut world_rng = rng.fork(tick, Party::World);

    let percept = world.rule.perceive(c, w, &mut percept_rng)?;
    let next_c = {
        let mut ctx = AgentContext {
            memory: &mut agent.memory,
            rng: &mut agent_rng,
            registry: &agent.registry,
        };
        agent.rule.transition(c, &percept, &mut ctx)?
    };
    if next_c.t != tick + 1 {
        return Err(Error::TimeMismatch {
            expected: tick + 1,
            found: next_c.t,
        });
    }
    let next_w = world.rule.transition(c, w, &mut world_rng)?;
    Ok((next_c, next_w))
}

/// Runs `n_steps` ticks from `(c0, w0)`; the trace has `n_steps + 1` entries.
pub fn run(
    agent: &mut AgentSpec,
    world: &WorldSpec,
    c0: Ceta,
    w0: WorldState,
    seed: u64,
    n_steps: usize,
) -> Result<Trace> {
    run_with_hooks(agent, world, c0, w0, seed, n_steps, &mut [])
}

pub fn run_with_hooks(
    agent: &mut AgentSpec,
    world: &WorldSpec,
    c0: Ceta,
    w0: WorldState,
    seed: u64,
    n_steps: usize,
    hooks: &mut [&mut dyn TickHook],
) -> Result<Trace> {
    agent.registry.validate(&c0).map_err(|e| e.at_tick(c0.t))?;
    let mut trace = Trace::new("", seed, c0.t);
    trace.push(c0, w0)?;
    extend(&mut trace, agent, world, n_steps, hooks)?;
    Ok(trace)
}

/// Continues `trace` by `n_steps` more ticks with the trace's own seed.
pub fn extend(
    trace: &mut Trace,
    agent: &mut AgentSpec,
    world: &WorldSpec,
    n_steps: usize,
    hooks: &mut [&mut dyn TickHook],
) -> Result<()> {
    let rng = RandomnessSource::new(trace.seed);
    for _ in 0..n_steps {
        let last = trace.last().expect("trace is never empty here");
        let tick = last.ceta.t;
        let (mut c, w) =
            step(&last.ceta, &last.world, &rng, agent, world).map_err(|e| e.at_tick(tick))?;
        for hook in hooks.iter_mut() {
            c = hook
                .adjust(trace, c, &rng)
                .map_err(|e| e.at_tick(tick + 1))?;
        }
        trace.push(c, w)?;
    }
    Ok(())
}
