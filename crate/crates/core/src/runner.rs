//! Running scenario files end to end: simulation, derived reports, the
//! on-disk artifacts and replay verification.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::contemplative::{detect_trace_loop, LoopReport, ResetEvent};
use crate::error::Error;
use crate::metrics::{
    lack_events, pain_metric, rigidity_metric, selfing_score, three_characteristics,
    wholesome_classify, Window,
};
use crate::model::Trace;
use crate::scenario::{Scenario, ScenarioError, Setup};
use crate::session::run_session;
use crate::trace_csv::{read_trace, write_trace_csv, ExtraColumns};

pub const TRACE_FILE: &str = "trace.csv";
pub const PARTNER_TRACE_FILE: &str = "trace.partner.csv";
pub const REPORT_FILE: &str = "report.json";
pub const META_FILE: &str = "run.meta";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("scenario: {0}")]
    Scenario(#[from] ScenarioError),
    #[error("trace file: {0}")]
    TraceFile(Error),
    #[error("run failed: {0}")]
    Runtime(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// 1 for bad input files, 2 for failures while running or writing.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Scenario(_) | RunError::TraceFile(_) => 1,
            RunError::Runtime(_) | RunError::Io { .. } => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Command-line overrides applied on top of the scenario file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    /// Treat build warnings as errors.
    pub strict: bool,
}

/// A parsed scenario with overrides applied, ready to run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub scenario: Scenario,
    pub setup: Setup,
}

pub fn prepare(text: &str, opts: &RunOptions) -> Result<Prepared, RunError> {
    let mut scenario = Scenario::parse(text)?;
    if let Some(seed) = opts.seed {
        scenario.seed = seed;
    }
    if let Some(steps) = opts.steps {
        scenario.steps = steps;
    }
    let setup = scenario.build()?;
    if opts.strict {
        if let Some(w) = setup.warnings.first() {
            return Err(ScenarioError::Strict(w.clone()).into());
        }
    }
    Ok(Prepared { scenario, setup })
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub trace: Trace,
    pub partner: Option<Trace>,
    pub awareness: Vec<bool>,
    pub drift_ticks: Vec<i64>,
    pub loop_report: Option<LoopReport>,
    pub reset: Option<ResetEvent>,
}

pub fn simulate(p: &Prepared) -> Result<Simulation, RunError> {
    let s = &p.scenario;
    let setup = p.setup.clone();
    let mut sim = match setup.composed {
        Some(mut composed) => {
            let (ta, tb) =
                composed
                    .system
                    .run(setup.c0, composed.b0, s.seed, composed.seed_b, s.steps)?;
            Simulation {
                loop_report: detect_trace_loop(&ta, ta.t0),
                awareness: vec![false; ta.len()],
                trace: ta,
                partner: Some(tb),
                drift_ticks: Vec::new(),
                reset: None,
            }
        }
        None => {
            let mut agent = setup.agent;
            let out = run_session(
                &mut agent,
                &setup.world,
                setup.c0,
                setup.w0,
                s.seed,
                s.steps,
                &setup.session,
            )?;
            Simulation {
                trace: out.trace,
                partner: None,
                awareness: out.awareness,
                drift_ticks: out.drift_ticks,
                loop_report: out.loop_report,
                reset: out.reset,
            }
        }
    };
    sim.trace.scenario_id = s.id.clone();
    if let Some(tb) = sim.partner.as_mut() {
        tb.scenario_id = format!("{}.partner", s.id);
    }
    Ok(sim)
}

fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Statistics over one trace window; measures that need two ticks are
/// `null` on shorter windows.
pub fn trace_metrics(
    tr: &Trace,
    window: Window,
    self_concepts: &BTreeSet<String>,
) -> Result<Value, Error> {
    let two = window.len() >= 2;
    let rigidity = if two {
        json!(rigidity_metric(tr, window)?)
    } else {
        Value::Null
    };
    let three = if two {
        let tc = three_characteristics(tr, window, self_concepts)?;
        json!({
            "compoundness": tc.compoundness,
            "fluctuation": tc.fluctuation,
            "impersonality": tc.impersonality,
        })
    } else {
        Value::Null
    };
    Ok(json!({
        "window": window.to_string(),
        "pain": pain_metric(tr, window)?,
        "rigidity": rigidity,
        "lackEvents": lack_events(tr, window)?,
        "selfing": selfing_score(tr, window, self_concepts)?,
        "threeCharacteristics": three,
    }))
}

fn loop_json(lp: &Option<LoopReport>) -> Value {
    match lp {
        Some(lp) => json!({ "start": lp.start, "period": lp.period }),
        None => Value::Null,
    }
}

/// Everything a run writes, rendered but not yet on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub run_id: String,
    pub trace_csv: String,
    pub partner_csv: Option<String>,
    pub report: Value,
    pub meta: String,
    /// One-line summary for stdout.
    pub summary: Value,
}

impl Artifacts {
    pub fn files(&self) -> Vec<(&'static str, String)> {
        let mut files = vec![(TRACE_FILE, self.trace_csv.clone())];
        if let Some(p) = &self.partner_csv {
            files.push((PARTNER_TRACE_FILE, p.clone()));
        }
        let mut report = serde_json::to_string_pretty(&self.report).expect("json values serialize");
        report.push('\n');
        files.push((REPORT_FILE, report));
        files.push((META_FILE, self.meta.clone()));
        files
    }
}

pub fn render(p: &Prepared, sim: &Simulation) -> Result<Artifacts, RunError> {
    let s = &p.scenario;
    let canonical = s.to_text();
    let digest = sha256_hex(&canonical);
    let run_id = digest[..16].to_string();

    let extra = ExtraColumns {
        track: s.metrics.track.clone(),
        tick_columns: s.metrics.tick_columns,
    };
    let trace_csv = write_trace_csv(&sim.trace, &extra)?;
    let partner_csv = match &sim.partner {
        Some(tb) => Some(write_trace_csv(tb, &ExtraColumns::default())?),
        None => None,
    };

    let window = s.metrics.window.unwrap_or_else(|| Window::all(&sim.trace));
    let metrics = trace_metrics(&sim.trace, window, &s.metrics.self_concepts)?;

    let wholesomeness = if s.metrics.classify {
        let setup = &p.setup;
        let verdicts = setup
            .c0
            .action
            .menu
            .iter()
            .map(|a| {
                let v = wholesome_classify(
                    a,
                    &setup.c0,
                    &setup.w0,
                    &setup.agent,
                    &setup.world,
                    &setup.rollout,
                )?;
                Ok(json!({
                    "action": v.action,
                    "class": v.class,
                    "score": v.score,
                    "forcedPain": v.forced_pain,
                    "baselinePain": v.baseline_pain,
                }))
            })
            .collect::<Result<Vec<_>, Error>>()?;
        Value::Array(verdicts)
    } else {
        Value::Null
    };

    let reset = match &sim.reset {
        Some(e) => json!({
            "tick": e.tick,
            "loopStart": e.loop_start,
            "period": e.period,
            "cycles": e.cycles,
        }),
        None => Value::Null,
    };
    let report = json!({
        "scenario": s.id,
        "runId": run_id,
        "seed": s.seed,
        "steps": s.steps,
        "t0": s.t0,
        "metrics": metrics,
        "loop": loop_json(&sim.loop_report),
        "reset": reset,
        "mindfulTicks": sim.awareness.iter().filter(|&&b| b).count(),
        "driftTicks": sim.drift_ticks,
        "wholesomeness": wholesomeness,
        "warnings": p.setup.warnings,
    });
    let summary = json!({
        "runId": run_id,
        "scenario": s.id,
        "seed": s.seed,
        "steps": s.steps,
        "pain": metrics["pain"],
        "rigidity": metrics["rigidity"],
        "lackEvents": metrics["lackEvents"],
        "loopPeriod": sim.loop_report.as_ref().map(|l| l.period),
        "resetTick": sim.reset.as_ref().map(|e| e.tick),
    });
    let meta = format!(
        "run_id = {run_id}\nscenario = {}\nseed = {}\nsteps = {}\nscenario_sha256 = {digest}\nengine = cetana-core {}\n",
        s.id,
        s.seed,
        s.steps,
        env!("CARGO_PKG_VERSION"),
    );
    Ok(Artifacts {
        run_id,
        trace_csv,
        partner_csv,
        report,
        meta,
        summary,
    })
}

/// Parses, runs and renders a scenario without touching the disk.
pub fn run_text(text: &str, opts: &RunOptions) -> Result<Artifacts, RunError> {
    let p = prepare(text, opts)?;
    let sim = simulate(&p)?;
    render(&p, &sim)
}

/// Writes each file to a temporary name first, then renames it into place.
pub fn write_artifacts(dir: &Path, artifacts: &Artifacts) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (name, content) in artifacts.files() {
        let path = dir.join(name);
        let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
        fs::write(&tmp, content).map_err(io_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(io_err(&path))?;
    }
    Ok(())
}

/// Runs the scenario file at `path` and writes its artifacts to `out`.
/// Nothing is written unless the whole run succeeds.
pub fn run_scenario(path: &Path, out: &Path, opts: &RunOptions) -> Result<Artifacts, RunError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let artifacts = run_text(&text, opts)?;
    write_artifacts(out, &artifacts)?;
    Ok(artifacts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Replay {
    Ok {
        ticks: usize,
    },
    /// First tick whose recorded row differs from the regenerated one.
    Mismatch {
        tick: i64,
    },
}

/// Regenerates the run behind a recorded trace and compares it row by row.
/// The recorded length decides how many steps are regenerated.
pub fn replay_verify(
    trace_text: &str,
    scenario_text: &str,
    opts: &RunOptions,
) -> Result<Replay, RunError> {
    let mut scenario = Scenario::parse(scenario_text)?;
    if let Some(seed) = opts.seed {
        scenario.seed = seed;
    }
    let recorded =
        read_trace(trace_text, &scenario.id, scenario.seed).map_err(RunError::TraceFile)?;
    if recorded.is_empty() {
        return Ok(Replay::Mismatch { tick: scenario.t0 });
    }
    let opts = RunOptions {
        seed: Some(scenario.seed),
        steps: Some(recorded.len() - 1),
        strict: opts.strict,
    };
    let p = prepare(&scenario.to_text(), &opts)?;
    let sim = simulate(&p)?;
    let regenerated = sim.trace.entries();
    for (i, rec) in recorded.entries().iter().enumerate() {
        if regenerated.get(i) != Some(rec) {
            return Ok(Replay::Mismatch {
                tick: regenerated.get(i).map_or(rec.ceta.t, |e| e.ceta.t),
            });
        }
    }
    Ok(Replay::Ok {
        ticks: recorded.len(),
    })
}

/// Statistics of a recorded trace file.
pub fn metrics_text(
    trace_text: &str,
    window: Option<Window>,
    self_concepts: &BTreeSet<String>,
) -> Result<Value, RunError> {
    let tr = read_trace(trace_text, "", 0).map_err(RunError::TraceFile)?;
    let window = window.unwrap_or_else(|| Window::all(&tr));
    let mut v = trace_metrics(&tr, window, self_concepts)?;
    v["loop"] = loop_json(&detect_trace_loop(&tr, tr.t0));
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BANDIT: &str = "\
[scenario]
id = b
seed = 7
steps = 30

[world]
kind = rewardBandit
arm.a = -1:0.5, 1:0.5
arm.b = 0:1

[agent]
rule = reactive
actions = a, b
policy = a:0.5, b:0.5
";

    #[test]
    fn same_input_same_bytes() {
        let x = run_text(BANDIT, &RunOptions::default()).unwrap();
        let y = run_text(BANDIT, &RunOptions::default()).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.trace_csv.lines().count(), 32);
    }

    #[test]
    fn overrides_change_the_run_id() {
        let x = run_text(BANDIT, &RunOptions::default()).unwrap();
        let opts = RunOptions {
            seed: Some(8),
            ..Default::default()
        };
        let y = run_text(BANDIT, &opts).unwrap();
        assert_ne!(x.run_id, y.run_id);
        assert!(y.meta.contains("seed = 8"));
    }

    #[test]
    fn replay_detects_edits() {
        let x = run_text(BANDIT, &RunOptions::default()).unwrap();
        assert_eq!(
            replay_verify(&x.trace_csv, BANDIT, &RunOptions::default()).unwrap(),
            Replay::Ok { ticks: 31 }
        );
        let mut lines: Vec<String> = x.trace_csv.lines().map(String::from).collect();
        let mut fields: Vec<String> = lines[6].split(',').map(String::from).collect();
        fields[4] = if fields[4] == "2" {
            "1".into()
        } else {
            "2".into()
        };
        lines[6] = fields.join(",");
        let edited = lines.join("\n") + "\n";
        assert_eq!(
            replay_verify(&edited, BANDIT, &RunOptions::default()).unwrap(),
            Replay::Mismatch { tick: 5 }
        );
    }

    #[test]
    fn strict_promotes_warnings() {
        let text = BANDIT.replace("arm.b = 0:1\n", "");
        assert!(run_text(&text, &RunOptions::default()).is_ok());
        let strict = RunOptions {
            strict: true,
            ..Default::default()
        };
        let err = run_text(&text, &strict).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
