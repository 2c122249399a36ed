//! Stochastic comparison environment.
//!
//! Every run draws all of its randomness (duel outcomes and the learner's own
//! coin flips) from one [`SimRng`], a ChaCha8 stream seeded from a `u64`, so a
//! run is reproducible from its seed alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prefmat::PreferenceMatrix;
use crate::scalar::Scalar;
use crate::square::Square;

pub type SimRng = ChaCha8Rng;

/// Default growth factor between consecutive checkpoints.
pub const DEFAULT_CHECKPOINT_RATIO: f64 = 1.2;

pub fn seeded_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Mixes a master seed with a stream index (SplitMix64 finalizer over both words).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Regret of dueling `i` against `j`: `2 cpld(best) - cpld(i) - cpld(j)`.
pub fn regret_of_pair<T: Scalar>(m: &PreferenceMatrix<T>, i: usize, j: usize) -> f64 {
    let shares = regret_shares(m);
    shares[i] + shares[j]
}

/// Per-arm shortfall `cpld(best) - cpld(i)`; the regret of a duel is the sum of two shares.
pub fn regret_shares<T: Scalar>(m: &PreferenceMatrix<T>) -> Vec<f64> {
    let scores = m.copeland_scores();
    let best = *scores.iter().max().expect("k >= 2");
    let denom = (m.k() - 1) as f64;
    scores.iter().map(|&s| (best - s) as f64 / denom).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub step: u64,
    pub cumulative_regret: f64,
}

/// Cumulative regret sampled at geometrically spaced steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub algorithm: String,
    pub replicate: u32,
    pub seed: u64,
    pub matrix_id: String,
    pub checkpoints: Vec<Checkpoint>,
}

/// First step of the final decade, the last tenth of a run of `horizon` duels.
pub fn final_decade_start(horizon: u64) -> u64 {
    horizon - horizon / 10
}

impl RegretTrace {
    /// Mean per-step regret after checkpoint `from`, or `None` if `from` was not recorded.
    pub fn rate_after(&self, from: u64) -> Option<f64> {
        let start = self.checkpoints.iter().find(|c| c.step == from)?;
        let span = self.horizon().checked_sub(from).filter(|&s| s > 0)?;
        Some((self.final_regret() - start.cumulative_regret) / span as f64)
    }

    /// Mean per-step regret over the final decade; needs the trace to be marked there.
    pub fn final_decade_rate(&self) -> Option<f64> {
        self.rate_after(final_decade_start(self.horizon()))
    }

    pub fn final_regret(&self) -> f64 {
        self.checkpoints.last().map_or(0.0, |c| c.cumulative_regret)
    }

    pub fn horizon(&self) -> u64 {
        self.checkpoints.last().map_or(0, |c| c.step)
    }

    /// Cumulative regret at the last checkpoint not after `step`.
    ///
    /// Exact only when `step` is a checkpoint; see [`ComparisonOracle::with_marks`].
    pub fn regret_at(&self, step: u64) -> f64 {
        self.checkpoints
            .iter()
            .take_while(|c| c.step <= step)
            .last()
            .map_or(0.0, |c| c.cumulative_regret)
    }
}

/// Bookkeeping for when to record a checkpoint.
#[derive(Clone, Debug)]
pub struct TraceRecorder {
    ratio: f64,
    marks: Vec<u64>,
    checkpoints: Vec<Checkpoint>,
}

impl TraceRecorder {
    pub fn new(ratio: f64) -> Self {
        assert!(ratio > 1.0, "checkpoint ratio must exceed 1");
        Self {
            ratio,
            marks: Vec::new(),
            checkpoints: Vec::new(),
        }
    }

    /// Also records at each step in `marks`, in addition to the geometric grid.
    pub fn with_marks(mut self, marks: &[u64]) -> Self {
        self.marks = marks.to_vec();
        self.marks.sort_unstable();
        self
    }

    /// Records at the first step, at every mark, and whenever `step >= ratio * previous step`.
    pub fn observe(&mut self, step: u64, cumulative_regret: f64) {
        let due = match self.checkpoints.last() {
            None => true,
            Some(last) => step as f64 >= self.ratio * last.step as f64,
        } || self.marks.binary_search(&step).is_ok();
        if due {
            self.checkpoints.push(Checkpoint {
                step,
                cumulative_regret,
            });
        }
    }

    /// Ensures the final step is recorded.
    pub fn finish(&mut self, step: u64, cumulative_regret: f64) {
        if step > 0 && self.checkpoints.last().map(|c| c.step) != Some(step) {
            self.checkpoints.push(Checkpoint {
                step,
                cumulative_regret,
            });
        }
    }

    pub fn checkpoints(&self) -> &[Checkpoint] {
        &self.checkpoints
    }
}

/// Simulated duels against a fixed preference matrix.
pub struct ComparisonOracle<'a, T> {
    matrix: &'a PreferenceMatrix<T>,
    rng: SimRng,
    wins: Square<u64>,
    t: u64,
    cumulative_regret: f64,
    shares: Vec<f64>,
    recorder: TraceRecorder,
}

impl<'a, T: Scalar> ComparisonOracle<'a, T> {
    pub fn new(matrix: &'a PreferenceMatrix<T>, seed: u64) -> Self {
        Self::with_checkpoint_ratio(matrix, seed, DEFAULT_CHECKPOINT_RATIO)
    }

    pub fn with_checkpoint_ratio(matrix: &'a PreferenceMatrix<T>, seed: u64, ratio: f64) -> Self {
        Self {
            matrix,
            rng: seeded_rng(seed),
            wins: Square::filled(matrix.k(), 0),
            t: 0,
            cumulative_regret: 0.0,
            shares: regret_shares(matrix),
            recorder: TraceRecorder::new(ratio),
        }
    }

    /// Forces checkpoints at the given steps (e.g. the start of a final window).
    pub fn with_marks(mut self, marks: &[u64]) -> Self {
        self.recorder = self.recorder.with_marks(marks);
        self
    }

    pub fn k(&self) -> usize {
        self.matrix.k()
    }

    pub fn matrix(&self) -> &'a PreferenceMatrix<T> {
        self.matrix
    }

    /// Total duels issued so far.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn cumulative_regret(&self) -> f64 {
        self.cumulative_regret
    }

    /// `wins[(i, j)]` counts the duels `i` won against `j`; self-duels land on the diagonal.
    pub fn wins(&self) -> &Square<u64> {
        &self.wins
    }

    pub fn rng(&mut self) -> &mut SimRng {
        &mut self.rng
    }

    pub fn checkpoints(&self) -> &[Checkpoint] {
        self.recorder.checkpoints()
    }

    /// Duels `i` against `j` and returns the winner. `i == j` is a fair coin.
    pub fn compare(&mut self, i: usize, j: usize) -> Result<usize> {
        let k = self.k();
        for index in [i, j] {
            if index >= k {
                return Err(Error::IndexOutOfRange { index, k });
            }
        }
        Ok(self.duel(i, j))
    }

    pub(crate) fn duel(&mut self, i: usize, j: usize) -> usize {
        let p = self.matrix.p(i, j).as_f64();
        let (winner, loser) = if self.rng.gen::<f64>() < p {
            (i, j)
        } else {
            (j, i)
        };
        self.wins[(winner, loser)] += 1;
        self.t += 1;
        self.cumulative_regret += self.shares[i] + self.shares[j];
        self.recorder.observe(self.t, self.cumulative_regret);
        winner
    }

    pub fn into_trace(
        mut self,
        algorithm: impl Into<String>,
        replicate: u32,
        seed: u64,
        matrix_id: impl Into<String>,
    ) -> RegretTrace {
        self.recorder.finish(self.t, self.cumulative_regret);
        RegretTrace {
            algorithm: algorithm.into(),
            replicate,
            seed,
            matrix_id: matrix_id.into(),
            checkpoints: self.recorder.checkpoints,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prefmat::fixtures::{p4, pcond5};

    #[test]
    fn regret_of_p4_pairs() {
        let m = p4::<f64>();
        assert_eq!(regret_of_pair(&m, 0, 1), 0.0);
        assert!((regret_of_pair(&m, 0, 2) - 1.0 / 3.0).abs() < 1e-15);
        assert!((regret_of_pair(&m, 2, 3) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn self_duel_on_winner_is_free() {
        let m = p4::<f64>();
        let mut o = ComparisonOracle::new(&m, 1);
        for _ in 0..100 {
            o.compare(0, 0).unwrap();
        }
        assert_eq!(o.cumulative_regret(), 0.0);
        assert_eq!(o.wins()[(0, 0)], 100);
    }

    #[test]
    fn self_duel_on_worst_arm_is_max_for_that_arm() {
        let m = pcond5::<f64>();
        let worst = 4;
        let own = regret_of_pair(&m, worst, worst);
        for j in 0..5 {
            assert!(regret_of_pair(&m, worst, j) <= own);
        }
    }

    #[test]
    fn regret_increment_is_outcome_independent() {
        let m = p4::<f64>();
        let mut o = ComparisonOracle::new(&m, 9);
        for n in 1..=50 {
            o.compare(2, 3).unwrap();
            assert!((o.cumulative_regret() - n as f64 * 2.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn empirical_win_rate() {
        let m = p4::<f64>();
        let mut o = ComparisonOracle::new(&m, 42);
        let n = 100_000;
        let won = (0..n).filter(|_| o.compare(0, 1).unwrap() == 0).count();
        assert!((won as f64 / n as f64 - 0.6).abs() < 0.01);
        assert_eq!(o.wins()[(0, 1)] + o.wins()[(1, 0)], n as u64);
    }

    #[test]
    fn out_of_range_is_an_error() {
        let m = p4::<f64>();
        let mut o = ComparisonOracle::new(&m, 0);
        assert!(matches!(
            o.compare(0, 4),
            Err(Error::IndexOutOfRange { index: 4, k: 4 })
        ));
        assert_eq!(o.t(), 0);
    }

    #[test]
    fn replay_is_bit_identical() {
        let m = p4::<f64>();
        let run = |seed| {
            let mut o = ComparisonOracle::new(&m, seed);
            let outcomes: Vec<usize> = (0..500)
                .map(|s| o.compare(s % 4, (s / 4) % 4).unwrap())
                .collect();
            (outcomes, o.wins().clone(), o.cumulative_regret().to_bits())
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5).0, run(6).0);
    }

    #[test]
    fn checkpoints_are_geometric() {
        let m = p4::<f64>();
        let mut o = ComparisonOracle::new(&m, 3);
        for s in 0..1000 {
            o.compare(s % 4, 3).unwrap();
        }
        let trace = o.into_trace("test", 0, 3, "p4");
        let steps: Vec<u64> = trace.checkpoints.iter().map(|c| c.step).collect();
        assert_eq!(&steps[..6], &[1, 2, 3, 4, 5, 6]);
        assert_eq!(*steps.last().unwrap(), 1000);
        for w in trace.checkpoints.windows(2) {
            assert!(w[1].step > w[0].step);
            assert!(w[1].cumulative_regret >= w[0].cumulative_regret);
        }
        for w in steps.windows(2).take(steps.len() - 2) {
            assert!(w[1] as f64 >= 1.2 * w[0] as f64);
        }
        assert!(steps.len() < 50);
    }

    #[test]
    fn derived_seeds_differ() {
        let a: Vec<u64> = (0..100).map(|i| derive_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(a.len(), b.len());
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }
}
