use std::collections::BTreeSet;

use super::{AgentSection, Scenario, ScenarioError, ScenarioResult};
use crate::composition::{compose_agents, ComposedSystem, Encoder};
use crate::contemplative::ConcentrationConfig;
use crate::dynamics::worlds::{BanditWorld, REWARD_BANDIT};
use crate::dynamics::{AgentRegistry, AgentSpec, Registry, WorldRegistry, WorldSpec};
use crate::memory::AssocMemory;
use crate::metrics::RolloutParams;
use crate::model::{Action, BodyInput, Ceta, MentalInput, MindState, WorldState};
use crate::rng::{Party, RandomnessSource};
use crate::session::SessionConfig;

/// Two agents wired to each other.
#[derive(Debug, Clone)]
pub struct Composed {
    pub system: ComposedSystem,
    pub b0: Ceta,
    pub seed_b: u64,
}

/// Everything needed to run a scenario.
#[derive(Debug, Clone)]
pub struct Setup {
    pub agent: AgentSpec,
    /// For a composed scenario, the partner wrapped as a world.
    pub world: WorldSpec,
    pub c0: Ceta,
    pub w0: WorldState,
    pub session: SessionConfig,
    pub rollout: RolloutParams,
    pub composed: Option<Composed>,
    pub warnings: Vec<String>,
}

fn agent_spec(a: &AgentSection, s: &Scenario, agents: &AgentRegistry) -> crate::Result<AgentSpec> {
    let rule = agents.build(&a.rule, &a.params, &a.actions)?;
    let registry = Registry::new(
        a.factors.iter().cloned(),
        a.actions.iter().cloned(),
        a.attention.unwrap_or(usize::MAX),
        a.action_attention,
    );
    Ok(AgentSpec::new(rule, registry, AssocMemory::new(s.memory)?))
}

fn initial_ceta(a: &AgentSection, t0: i64, derived: Vec<u32>) -> crate::Result<Ceta> {
    let pixels = a.pixels.clone().unwrap_or(derived);
    let focus = match &a.focus {
        Some(f) => f.clone(),
        None => (0..pixels.len())
            .take(a.attention.unwrap_or(usize::MAX))
            .collect(),
    };
    Ok(Ceta {
        t: t0,
        body: BodyInput::new(pixels, focus)?,
        mental: MentalInput::default(),
        mind: MindState::new(a.feeling, a.initial.clone()),
        action: Action::new(a.actions.clone(), a.selected.clone())?,
    })
}

impl Scenario {
    pub fn build(&self) -> ScenarioResult<Setup> {
        self.build_with(&AgentRegistry::builtin(), &WorldRegistry::builtin())
    }

    pub fn build_with(
        &self,
        agents: &AgentRegistry,
        worlds: &WorldRegistry,
    ) -> ScenarioResult<Setup> {
        let mut warnings = Vec::new();
        let agent = agent_spec(&self.agent, self, agents)?;

        let (world, c0, composed) = match (&self.world, &self.partner) {
            (Some(ws), _) => {
                let world = worlds.build(&ws.kind, &ws.params)?;
                // what the world shows before the first moment, to an idle agent
                let idle = Ceta {
                    t: self.t0,
                    body: BodyInput::default(),
                    mental: MentalInput::default(),
                    mind: MindState::default(),
                    action: Action::idle(self.agent.actions.clone()),
                };
                let mut rng = RandomnessSource::derive(self.seed, self.t0 - 1, Party::Percept);
                let probe = world.rule.perceive(&idle, &world.initial, &mut rng)?;
                let c0 = initial_ceta(&self.agent, self.t0, probe.pixels)?;
                if ws.kind == REWARD_BANDIT {
                    bandit_warnings(ws, &self.agent.actions, &mut warnings);
                }
                (world, c0, None)
            }
            (None, Some(p)) => {
                if self.mindfulness.enabled || self.concentration.is_some() || self.reset.is_some()
                {
                    return Err(crate::Error::InvalidParameter(
                        "[partner] runs take no mindfulness, concentration or reset".into(),
                    )
                    .into());
                }
                let b = agent_spec(&p.agent, self, agents)?;
                let a_probe = Action::new(self.agent.actions.clone(), self.agent.selected.clone())?;
                let b_probe = Action::new(p.agent.actions.clone(), p.agent.selected.clone())?;
                let encode = |e: &Encoder, a: &Action| e.encode(a);
                let c0 = initial_ceta(&self.agent, self.t0, encode(&p.partner_to_host, &b_probe)?)?;
                let b0 = initial_ceta(&p.agent, self.t0, encode(&p.host_to_partner, &a_probe)?)?;
                let system = ComposedSystem::new(
                    agent.clone(),
                    b.clone(),
                    p.host_to_partner.clone(),
                    p.partner_to_host.clone(),
                )?;
                let (_, world) = compose_agents(
                    agent.clone(),
                    b,
                    p.host_to_partner.clone(),
                    p.partner_to_host.clone(),
                    b0.clone(),
                    p.seed,
                )?;
                (
                    world,
                    c0,
                    Some(Composed {
                        system,
                        b0,
                        seed_b: p.seed,
                    }),
                )
            }
            (None, None) => return Err(ScenarioError::MissingSection("world".into())),
        };
        agent.registry.validate(&c0)?;

        let session = SessionConfig {
            mindfulness: self
                .mindfulness
                .enabled
                .then(|| (self.mindfulness.clone(), self.schedule)),
            concentration: match &self.concentration {
                Some(c) => {
                    let body = BodyInput::new(c.pixels.clone(), c.focus.clone())?;
                    let mut cc = ConcentrationConfig::new(
                        body,
                        MentalInput {
                            objects: c.mental.clone(),
                        },
                        c.action.clone(),
                    );
                    cc.start_tick = c.start;
                    cc.drift_rate = c.drift_rate;
                    cc.recovery = c.recovery;
                    cc.validate(&agent)?;
                    if c.start > self.t0 + self.steps as i64 {
                        warnings.push(format!(
                            "concentration starts at {} after the run ends at {}",
                            c.start,
                            self.t0 + self.steps as i64
                        ));
                    }
                    Some(cc)
                }
                None => None,
            },
            reset: self.reset,
        };
        if let Some(w) = self.metrics.window {
            let end = self.t0 + self.steps as i64 + 1;
            if w.is_empty() || w.start < self.t0 || w.end > end {
                warnings.push(format!(
                    "metrics window {w} is not inside {}..{end}",
                    self.t0
                ));
            }
        }
        Ok(Setup {
            w0: world.initial.clone(),
            agent,
            world,
            c0,
            session,
            rollout: RolloutParams {
                horizon: self.metrics.horizon,
                rollouts: self.metrics.rollouts,
                seed: self.seed,
                epsilon: self.metrics.epsilon,
            },
            composed,
            warnings,
        })
    }
}

fn bandit_warnings(ws: &super::WorldSection, actions: &BTreeSet<String>, out: &mut Vec<String>) {
    let arms: BTreeSet<&str> = ws
        .params
        .keys()
        .filter_map(|k| k.strip_prefix(BanditWorld::ARM_PREFIX))
        .collect();
    for a in actions {
        if !arms.contains(a.as_str()) {
            out.push(format!("action `{a}` has no arm and always feels neutral"));
        }
    }
    for a in arms {
        if !actions.contains(a) {
            out.push(format!("arm `{a}` belongs to no action"));
        }
    }
}
