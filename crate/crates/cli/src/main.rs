#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use copeland_core::harness::{
    condorcet_probability, gap_ratio, run_experiment_to_csv, sample_submatrices, structure_stats,
    winner_overlap,
};
use copeland_core::prefmat::{cyclic_copeland, fixtures, read_matrix_csv};
use copeland_core::{BoundReport, Error, ExperimentConfig, Matrix};
use serde_json::json;

/// Copeland dueling-bandit simulator.
#[derive(Parser)]
#[command(name = "copeland", version)]
struct Cli {
    /// Worker threads for replicate runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Master seed; overrides the config file's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write its regret traces as CSV.
    Run { config: PathBuf },
    /// Sampling studies over random submatrices of a master matrix.
    Analyze {
        #[arg(value_enum)]
        study: Study,
        /// Fixture name, CSV path, or `cyclic:K:GAMMA`.
        #[arg(long, default_value = "pcond5")]
        matrix: String,
        /// Arms per sampled submatrix (default: all arms).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Regret-bound quantities for a matrix as JSON.
    Bounds {
        matrix: String,
        #[arg(long, default_value_t = 0.51)]
        alpha: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 1e5)]
        horizon: f64,
    },
    /// Copeland, Borda, random-walk and Condorcet winners of a matrix.
    Winners { matrix: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Study {
    Condorcet,
    Stats,
    Gaps,
    Overlap,
}

enum Failure {
    /// Exit status 1: bad arguments, config or input files.
    Input(String),
    /// Exit status 2: failure while computing.
    Runtime(String),
}

fn input(e: impl ToString) -> Failure {
    Failure::Input(e.to_string())
}

fn runtime(e: impl ToString) -> Failure {
    Failure::Runtime(e.to_string())
}

fn load_matrix(spec: &str) -> Result<Matrix, Failure> {
    if let Some(m) = fixtures::by_name(spec) {
        return Ok(m);
    }
    if let Some(rest) = spec.strip_prefix("cyclic:") {
        let (k, gamma) = rest
            .split_once(':')
            .ok_or_else(|| input(format!("expected cyclic:K:GAMMA, got {spec}")))?;
        let k: usize = k.parse().map_err(|_| input(format!("bad K in {spec}")))?;
        let gamma: f64 = gamma
            .parse()
            .map_err(|_| input(format!("bad gamma in {spec}")))?;
        return cyclic_copeland(k, gamma).map_err(input);
    }
    read_matrix_csv(spec).map_err(input)
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<(), Failure> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(runtime(e)),
        _ => Ok(()),
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(runtime)?;
    emit(&(text + "\n"))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Run { config } => {
            let mut config = ExperimentConfig::from_path(&config).map_err(input)?;
            if let Some(s) = cli.seed {
                config.seed = s;
            }
            config.load_matrix().map_err(input)?;
            let csv = run_experiment_to_csv(&config).map_err(runtime)?;
            if config.output.is_none() {
                emit(&csv)?;
            }
        }
        Command::Analyze {
            study,
            matrix,
            k,
            samples,
        } => {
            let master = load_matrix(&matrix)?;
            let k = k.unwrap_or(master.k());
            if k < 2 || k > master.k() {
                return Err(input(format!("--k must lie in 2..={}", master.k())));
            }
            match study {
                Study::Condorcet => {
                    let p = condorcet_probability(&master, k, samples, seed).map_err(runtime)?;
                    print_json(&json!({ "k": k, "samples": samples, "condorcetProbability": p }))?;
                }
                Study::Stats => {
                    print_json(&structure_stats(&master, k, samples, seed).map_err(runtime)?)?
                }
                Study::Gaps => print_json(&gap_ratio(&master, k, samples, seed).map_err(runtime)?)?,
                Study::Overlap => {
                    let subs = sample_submatrices(&master, k, samples, seed).map_err(runtime)?;
                    print_json(&winner_overlap(&subs).map_err(runtime)?)?;
                }
            }
        }
        Command::Bounds {
            matrix,
            alpha,
            delta,
            horizon,
        } => {
            let m = load_matrix(&matrix)?;
            if !(horizon > 1.0) {
                return Err(input("--horizon must exceed 1"));
            }
            let report = BoundReport::new(&m, alpha, delta, horizon).map_err(|e| match e {
                Error::Domain(_) | Error::Tie(..) => input(e),
                other => runtime(other),
            })?;
            print_json(&report)?;
        }
        Command::Winners { matrix } => {
            let m = load_matrix(&matrix)?;
            print_json(&json!({
                "copeland": m.copeland_winners(),
                "copelandScores": m.copeland_scores(),
                "borda": m.borda_winners(),
                "randomWalk": m.random_walk_winners().map_err(runtime)?,
                "condorcet": m.condorcet_winner(),
            }))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
