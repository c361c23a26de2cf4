use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cetana_core::metrics::Window;
use cetana_core::runner::{
    metrics_text, prepare, render, replay_verify, simulate, write_artifacts, Replay, RunError,
    RunOptions,
};
use clap::{Parser, Subcommand};

/// Output directory when neither `--out` nor `CETANA_OUT` is given.
const DEFAULT_OUT: &str = "out";
const OUT_ENV: &str = "CETANA_OUT";
/// Exit status of `replay` when the trace diverges.
const MISMATCH_EXIT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "cetana",
    version,
    about = "Run and check mind-moment stream simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trace.csv, report.json and run.meta.
    Run {
        file: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Output directory [default: $CETANA_OUT, then ./out]
        #[arg(long)]
        out: Option<PathBuf>,
        /// Treat scenario warnings as errors.
        #[arg(long)]
        strict: bool,
    },
    /// Regenerate the run behind a trace and compare it tick by tick.
    Replay {
        trace: PathBuf,
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the statistics of a recorded trace.
    Metrics {
        trace: PathBuf,
        #[arg(long, value_parser = parse_window)]
        window: Option<Window>,
        /// Concept ids counted as self-tagged.
        #[arg(long = "self", value_delimiter = ',')]
        self_concepts: Vec<String>,
    },
}

fn parse_window(s: &str) -> Result<Window, String> {
    s.parse().map_err(|e: cetana_core::Error| e.to_string())
}

fn read(path: &Path) -> Result<String, RunError> {
    fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Unreadable input files count as input errors.
fn input_error(e: RunError) -> u8 {
    match e {
        RunError::Io { .. } => 1,
        e => e.exit_code() as u8,
    }
}

fn fail(e: RunError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(input_error(e))
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn run(file: &Path, opts: RunOptions, out: PathBuf) -> ExitCode {
    let text = match read(file) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let prepared = match prepare(&text, &opts) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    for w in &prepared.setup.warnings {
        eprintln!("warning: {w}");
    }
    let artifacts = match simulate(&prepared).and_then(|sim| render(&prepared, &sim)) {
        Ok(a) => a,
        Err(e) => return fail(e),
    };
    if let Err(e) = write_artifacts(&out, &artifacts) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let mut summary = artifacts.summary;
    summary["out"] = out.display().to_string().into();
    println!("{summary}");
    ExitCode::SUCCESS
}

fn replay(trace: &Path, scenario: &Path, seed: Option<u64>) -> ExitCode {
    let texts = read(trace).and_then(|t| Ok((t, read(scenario)?)));
    let (trace_text, scenario_text) = match texts {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let opts = RunOptions {
        seed,
        ..Default::default()
    };
    match replay_verify(&trace_text, &scenario_text, &opts) {
        Ok(Replay::Ok { ticks }) => {
            println!("ok ({ticks} ticks)");
            ExitCode::SUCCESS
        }
        Ok(Replay::Mismatch { tick }) => {
            println!("mismatch at tick {tick}");
            ExitCode::from(MISMATCH_EXIT)
        }
        Err(e) => fail(e),
    }
}

fn metrics(trace: &Path, window: Option<Window>, self_concepts: Vec<String>) -> ExitCode {
    let text = match read(trace) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let concepts: BTreeSet<String> = self_concepts.into_iter().collect();
    match metrics_text(&text, window, &concepts) {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            file,
            seed,
            steps,
            out,
            strict,
        } => run(
            &file,
            RunOptions {
                seed,
                steps,
                strict,
            },
            out_dir(out),
        ),
        Command::Replay {
            trace,
            scenario,
            seed,
        } => replay(&trace, &scenario, seed),
        Command::Metrics {
            trace,
            window,
            self_concepts,
        } => metrics(&trace, window, self_concepts),
    }
}
