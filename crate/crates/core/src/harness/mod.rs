//! Experiment configs, replicate orchestration, CSV traces and sampling studies.

mod analysis;
mod config;
mod experiment;
mod traces;

pub use analysis::{
    condorcet_probability, gap_ratio, sample_submatrices, structure_stats, winner_overlap,
    GapRatio, OverlapTable, StructureStats, WINNER_NOTIONS,
};
pub use config::{AlgorithmSpec, ExperimentConfig, Generated, MatrixSource};
pub use experiment::{run_algorithm, run_experiment, run_experiment_to_csv};
pub use traces::{
    parse_traces, read_traces, traces_to_csv, write_traces, TRACE_DIGITS, TRACE_HEADER,
};
