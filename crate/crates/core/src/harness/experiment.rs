use rayon::prelude::*;

use super::config::{AlgorithmSpec, ExperimentConfig};
use super::traces::{traces_to_csv, write_traces};
use crate::ccb::CcbState;
use crate::error::Result;
use crate::oracle::{derive_seed, final_decade_start, ComparisonOracle, RegretTrace};
use crate::prefmat::PreferenceMatrix;
use crate::rucb::RucbState;
use crate::scb;

/// One run of `spec` for `horizon` duels.
pub fn run_algorithm(
    m: &PreferenceMatrix<f64>,
    spec: &AlgorithmSpec,
    horizon: u64,
    seed: u64,
    checkpoint_ratio: f64,
) -> Result<RegretTrace> {
    let mut oracle = ComparisonOracle::with_checkpoint_ratio(m, seed, checkpoint_ratio)
        .with_marks(&[final_decade_start(horizon)]);
    match spec {
        AlgorithmSpec::Ccb { alpha, .. } => {
            let mut learner = CcbState::new(m.k(), *alpha);
            for _ in 0..horizon {
                learner.step(&mut oracle);
            }
        }
        AlgorithmSpec::Rucb { alpha, .. } => {
            let mut learner = RucbState::new(m.k(), *alpha);
            for _ in 0..horizon {
                learner.step(&mut oracle);
            }
        }
        AlgorithmSpec::Scb { .. } => {
            scb::run_on(&mut oracle, horizon)?;
        }
    }
    debug_assert_eq!(oracle.t(), horizon);
    Ok(oracle.into_trace(spec.label(), 0, seed, ""))
}

/// Runs every algorithm on every replicate, in parallel, and returns the traces
/// ordered by algorithm label, then replicate.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RegretTrace>> {
    config.validate()?;
    let m = config.load_matrix()?;
    let matrix_id = config.matrix.id();
    let jobs: Vec<(&AlgorithmSpec, u32)> = config
        .algorithms
        .iter()
        .flat_map(|spec| (0..config.replicates).map(move |r| (spec, r)))
        .collect();
    let mut traces = jobs
        .into_par_iter()
        .map(|(spec, replicate)| {
            let seed = derive_seed(config.seed, u64::from(replicate));
            let mut trace = run_algorithm(&m, spec, config.horizon, seed, config.checkpoint_ratio)?;
            trace.replicate = replicate;
            trace.matrix_id = matrix_id.clone();
            Ok(trace)
        })
        .collect::<Result<Vec<_>>>()?;
    traces.sort_by(|a, b| (&a.algorithm, a.replicate).cmp(&(&b.algorithm, b.replicate)));
    Ok(traces)
}

/// Runs the experiment, writes `config.output` when set, and returns the CSV text.
pub fn run_experiment_to_csv(config: &ExperimentConfig) -> Result<String> {
    let traces = run_experiment(config)?;
    if let Some(path) = &config.output {
        write_traces(&traces, path)?;
    }
    Ok(traces_to_csv(&traces))
}
