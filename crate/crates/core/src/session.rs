//! A run with the meta operators switched on: concentration clamping,
//! scheduled mindfulness and the loop reset, applied in that order.

use crate::contemplative::{
    detect_trace_loop, ConcentrationConfig, ConcentrationHook, LoopReport, ResetConfig, ResetEvent,
    ResetHook,
};
use crate::dynamics::{run_with_hooks, AgentSpec, TickHook, WorldSpec};
use crate::error::Result;
use crate::mindfulness::{train_mindfulness, MindfulnessConfig, MindfulnessHook, Schedule};
use crate::model::{Ceta, Trace, WorldState};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SessionConfig {
    pub mindfulness: Option<(MindfulnessConfig, Schedule)>,
    pub concentration: Option<ConcentrationConfig>,
    pub reset: Option<ResetConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutput {
    pub trace: Trace,
    /// Offsets at which mindfulness was applied.
    pub awareness: Vec<bool>,
    pub drift_ticks: Vec<i64>,
    pub loop_report: Option<LoopReport>,
    pub reset: Option<ResetEvent>,
}

pub fn run_session(
    agent: &mut AgentSpec,
    world: &WorldSpec,
    c0: Ceta,
    w0: WorldState,
    seed: u64,
    n_steps: usize,
    cfg: &SessionConfig,
) -> Result<SessionOutput> {
    let t0 = c0.t;
    let mut mask = match &cfg.mindfulness {
        Some((m, schedule)) => train_mindfulness(m, schedule, n_steps + 1)?,
        None => vec![false; n_steps + 1],
    };
    // nothing precedes the first moment
    mask[0] = false;

    let mut concentration = match &cfg.concentration {
        Some(cc) => {
            cc.validate(agent)?;
            Some(ConcentrationHook::new(cc.clone()))
        }
        None => None,
    };
    let c0 = match &cfg.concentration {
        Some(cc) if c0.t >= cc.start_tick => {
            let mut c = c0;
            c.body = cc.body.clone();
            c.mental = cc.mental.clone();
            c.action.selected = cc.action.clone();
            c
        }
        _ => c0,
    };
    let mut mindful = cfg
        .mindfulness
        .as_ref()
        .map(|(m, _)| MindfulnessHook::new(m.clone(), mask.clone()));
    let loop_from = cfg
        .concentration
        .as_ref()
        .map_or(t0, |cc| cc.start_tick.max(t0));
    let mut reset = cfg
        .reset
        .map(|rc| ResetHook::new(rc, mask.clone(), loop_from));

    let mut hooks: Vec<&mut dyn TickHook> = Vec::new();
    if let Some(h) = concentration.as_mut() {
        hooks.push(h);
    }
    if let Some(h) = mindful.as_mut() {
        hooks.push(h);
    }
    if let Some(h) = reset.as_mut() {
        hooks.push(h);
    }
    let trace = run_with_hooks(agent, world, c0, w0, seed, n_steps, &mut hooks)?;

    let (loop_report, event) = match &reset {
        Some(h) => (h.loop_report().cloned(), h.event().cloned()),
        None => (detect_trace_loop(&trace, loop_from), None),
    };
    Ok(SessionOutput {
        awareness: mask,
        drift_ticks: concentration
            .map(|h| h.drift_ticks().to_vec())
            .unwrap_or_default(),
        loop_report: loop_report.or_else(|| detect_trace_loop(&trace, loop_from)),
        reset: event,
        trace,
    })
}
