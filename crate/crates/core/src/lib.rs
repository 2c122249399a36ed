//! Copeland dueling bandits.
//!
//! * [`prefmat`]: preference matrices, Copeland/Borda/random-walk winners, gap quantities.
//! * [`oracle`]: seeded duel simulator accumulating Copeland regret.
//! * [`ccb`]: Copeland Confidence Bound learner.
//! * [`klbandit`]: KL-divergence elimination for best-arm identification.
//! * [`scb`]: Scalable Copeland Bandits built on the KL eliminator.
//! * [`rucb`]: Condorcet-assuming baseline.
//! * [`bounds`]: closed-form regret-bound calculators.
//! * [`harness`]: experiment configs, CSV traces and sampling studies.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix it to `f64`, which is what the harness and CLI use.

// `!(x > y)` is used on purpose so NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod ccb;
pub mod error;
pub mod harness;
pub mod klbandit;
pub mod numfmt;
pub mod oracle;
pub mod prefmat;
pub mod rucb;
pub mod scalar;
pub mod scb;
pub mod square;

pub use bounds::{BoundInputs, BoundReport};
pub use error::{Error, Result};
pub use harness::{AlgorithmSpec, ExperimentConfig, MatrixSource};
pub use oracle::{ComparisonOracle, RegretTrace};
pub use prefmat::{GapSummary, PreferenceMatrix, ScbQuantities};
pub use scalar::Scalar;
pub use square::Square;

pub type Matrix = PreferenceMatrix<f64>;
pub type MatrixF32 = PreferenceMatrix<f32>;
pub type Gaps = GapSummary<f64>;
pub type Ccb = ccb::CcbState<f64>;
pub type Rucb = rucb::RucbState<f64>;
pub type KlRace = klbandit::KlBandit<f64>;
