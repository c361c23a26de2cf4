//! Pairwise agent composition: each agent's actions become the other's
//! body input, one tick per hop.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::dynamics::{
    AgentContext, AgentRule, AgentSpec, Percept, Registry, WorldRule, WorldSpec,
};
use crate::error::{Error, Result};
use crate::memory::AssocMemory;
use crate::model::{Action, Ceta, Trace, WorldPayload, WorldState};
use crate::rng::{Party, RandomnessSource};

pub const AGENT_WORLD: &str = "agent";

/// Maps action ids onto pixel values of the receiving agent.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Encoder(pub BTreeMap<String, u32>);

impl Encoder {
    pub fn new(pairs: impl IntoIterator<Item = (String, u32)>) -> Self {
        Encoder(pairs.into_iter().collect())
    }

    /// Pixels for the selected actions, in action-id order.
    pub fn encode(&self, action: &Action) -> Result<Vec<u32>> {
        action
            .selected
            .iter()
            .map(|a| {
                self.0
                    .get(a)
                    .copied()
                    .ok_or_else(|| Error::EncoderMismatch(a.clone()))
            })
            .collect()
    }

    pub fn covers<'a>(&self, actions: impl IntoIterator<Item = &'a String>) -> Result<()> {
        for a in actions {
            if !self.0.contains_key(a) {
                return Err(Error::EncoderMismatch(a.clone()));
            }
        }
        Ok(())
    }
}

fn partner_step(
    rule: &dyn AgentRule,
    registry: &Registry,
    memory: &mut AssocMemory,
    seed: u64,
    own: &Ceta,
    pixels: Vec<u32>,
) -> Result<Ceta> {
    registry.validate(own)?;
    let mut rng = RandomnessSource::derive(seed, own.t, Party::Agent);
    let mut ctx = AgentContext {
        memory,
        rng: &mut rng,
        registry,
    };
    let next = rule.transition(
        own,
        &Percept {
            pixels,
            feeling: None,
        },
        &mut ctx,
    )?;
    if next.t != own.t + 1 {
        return Err(Error::TimeMismatch {
            expected: own.t + 1,
            found: next.t,
        });
    }
    Ok(next)
}

fn agent_state(ceta: Ceta, memory: AssocMemory) -> WorldState {
    WorldState {
        kind: AGENT_WORLD.to_string(),
        payload: WorldPayload::Agent {
            ceta: Box::new(ceta),
            memory,
        },
    }
}

fn unpack(w: &WorldState) -> Result<(&Ceta, &AssocMemory)> {
    match &w.payload {
        WorldPayload::Agent { ceta, memory } => Ok((ceta, memory)),
        WorldPayload::Cells(_) => Err(Error::InvalidParameter(
            "agent world given a cell state".into(),
        )),
    }
}

/// Another agent wrapped as a world. It draws from its own seed, so it
/// behaves identically whatever run it is embedded in.
#[derive(Debug, Clone)]
pub struct AgentWorld {
    pub partner: Arc<dyn AgentRule>,
    pub registry: Registry,
    /// Host action → partner pixels.
    pub to_partner: Encoder,
    /// Partner action → host pixels.
    pub from_partner: Encoder,
    pub partner_seed: u64,
}

impl WorldRule for AgentWorld {
    fn kind(&self) -> &str {
        AGENT_WORLD
    }

    fn perceive(&self, _c: &Ceta, w: &WorldState, _rng: &mut RandomnessSource) -> Result<Percept> {
        let (partner, _) = unpack(w)?;
        Ok(Percept {
            pixels: self.from_partner.encode(&partner.action)?,
            feeling: None,
        })
    }

    fn transition(
        &self,
        c: &Ceta,
        w: &WorldState,
        _rng: &mut RandomnessSource,
    ) -> Result<WorldState> {
        let (partner, memory) = unpack(w)?;
        let mut memory = memory.clone();
        let next = partner_step(
            self.partner.as_ref(),
            &self.registry,
            &mut memory,
            self.partner_seed,
            partner,
            self.to_partner.encode(&c.action)?,
        )?;
        Ok(agent_state(next, memory))
    }
}

/// Wraps `b` as the world of `a`. `a_to_b` encodes a's actions as b's
/// pixels, `b_to_a` the reverse.
pub fn compose_agents(
    a: AgentSpec,
    b: AgentSpec,
    a_to_b: Encoder,
    b_to_a: Encoder,
    b0: Ceta,
    seed_b: u64,
) -> Result<(AgentSpec, WorldSpec)> {
    a_to_b.covers(&a.registry.actions)?;
    b_to_a.covers(&b.registry.actions)?;
    let world = WorldSpec {
        rule: Arc::new(AgentWorld {
            partner: b.rule.clone(),
            registry: b.registry.clone(),
            to_partner: a_to_b,
            from_partner: b_to_a,
            partner_seed: seed_b,
        }),
        initial: agent_state(b0, b.memory),
    };
    Ok((a, world))
}

/// Two agents stepped side by side, each reading the other's pre-step action.
#[derive(Debug, Clone)]
pub struct ComposedSystem {
    pub a: AgentSpec,
    pub b: AgentSpec,
    pub a_to_b: Encoder,
    pub b_to_a: Encoder,
}

impl ComposedSystem {
    pub fn new(a: AgentSpec, b: AgentSpec, a_to_b: Encoder, b_to_a: Encoder) -> Result<Self> {
        a_to_b.covers(&a.registry.actions)?;
        b_to_a.covers(&b.registry.actions)?;
        Ok(ComposedSystem {
            a,
            b,
            a_to_b,
            b_to_a,
        })
    }

    /// Runs `n_steps` ticks. Each trace records the other agent as its world.
    pub fn run(
        &mut self,
        a0: Ceta,
        b0: Ceta,
        seed_a: u64,
        seed_b: u64,
        n_steps: usize,
    ) -> Result<(Trace, Trace)> {
        if a0.t != b0.t {
            return Err(Error::TimeMismatch {
                expected: a0.t,
                found: b0.t,
            });
        }
        let mut ta = Trace::new("", seed_a, a0.t);
        let mut tb = Trace::new("", seed_b, b0.t);
        ta.push(a0.clone(), agent_state(b0.clone(), self.b.memory.clone()))?;
        tb.push(b0.clone(), agent_state(a0.clone(), self.a.memory.clone()))?;
        let (mut ca, mut cb) = (a0, b0);
        for _ in 0..n_steps {
            let tick = ca.t;
            let to_a = self
                .b_to_a
                .encode(&cb.action)
                .map_err(|e| e.at_tick(tick))?;
            let to_b = self
                .a_to_b
                .encode(&ca.action)
                .map_err(|e| e.at_tick(tick))?;
            let next_a = partner_step(
                self.a.rule.as_ref(),
                &self.a.registry,
                &mut self.a.memory,
                seed_a,
                &ca,
                to_a,
            )
            .map_err(|e| e.at_tick(tick))?;
            let next_b = partner_step(
                self.b.rule.as_ref(),
                &self.b.registry,
                &mut self.b.memory,
                seed_b,
                &cb,
                to_b,
            )
            .map_err(|e| e.at_tick(tick))?;
            ta.push(
                next_a.clone(),
                agent_state(next_b.clone(), self.b.memory.clone()),
            )?;
            tb.push(
                next_b.clone(),
                agent_state(next_a.clone(), self.a.memory.clone()),
            )?;
            ca = next_a;
            cb = next_b;
        }
        Ok((ta, tb))
    }
}

/// The partner's stream as recorded in a host trace's world column.
pub fn partner_stream(host: &Trace) -> Result<Vec<Ceta>> {
    host.entries()
        .iter()
        .map(|e| unpack(&e.world).map(|(c, _)| c.clone()))
        .collect()
}
