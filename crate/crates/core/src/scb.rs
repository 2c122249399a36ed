//! Scalable Copeland Bandits (SCB).
//!
//! Copeland winner identification is reduced to best-arm identification: the
//! reward of arm `i` is whether it beats a uniformly drawn opponent, certified by a
//! sequential test, so its mean is the normalized Copeland score. The identifier runs
//! inside a squaring-budget loop that commits to its answer for the rest of each round.

use rand::Rng;

use crate::error::Result;
use crate::klbandit::KlBandit;
use crate::oracle::{final_decade_start, ComparisonOracle, RegretTrace, SimRng};
use crate::prefmat::PreferenceMatrix;
use crate::scalar::Scalar;

/// Raised when a duel would exceed the caller's budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Exhausted;

/// A source of duels: returns whether `i` beat `j`.
pub trait Duels {
    fn k(&self) -> usize;
    fn duel(&mut self, i: usize, j: usize) -> Result<bool, Exhausted>;
    fn rng(&mut self) -> &mut SimRng;
}

impl<T: Scalar> Duels for ComparisonOracle<'_, T> {
    fn k(&self) -> usize {
        ComparisonOracle::k(self)
    }

    fn duel(&mut self, i: usize, j: usize) -> Result<bool, Exhausted> {
        Ok(ComparisonOracle::duel(self, i, j) == i)
    }

    fn rng(&mut self) -> &mut SimRng {
        ComparisonOracle::rng(self)
    }
}

/// An oracle that refuses duels once its step counter reaches `end`.
pub struct Budgeted<'o, 'a, T> {
    oracle: &'o mut ComparisonOracle<'a, T>,
    end: u64,
}

impl<'o, 'a, T: Scalar> Budgeted<'o, 'a, T> {
    pub fn new(oracle: &'o mut ComparisonOracle<'a, T>, end: u64) -> Self {
        Self { oracle, end }
    }
}

impl<T: Scalar> Duels for Budgeted<'_, '_, T> {
    fn k(&self) -> usize {
        self.oracle.k()
    }

    fn duel(&mut self, i: usize, j: usize) -> Result<bool, Exhausted> {
        if self.oracle.t() >= self.end {
            return Err(Exhausted);
        }
        Ok(self.oracle.duel(i, j) == i)
    }

    fn rng(&mut self) -> &mut SimRng {
        self.oracle.rng()
    }
}

/// Anytime radius of the sign test after `n` duels.
pub fn certification_radius(n: u64, k: usize, delta: f64) -> f64 {
    let n = n as f64;
    let k2 = (k * k) as f64;
    ((4.0 * n * (n + 1.0) * k2 / delta).ln() / (2.0 * n)).sqrt()
}

/// Draws an opponent `j != i` and duels until the sign of `p_ij - 1/2` is certified.
///
/// Returns `true` when `i` is certified to win.
pub fn copeland_reward<D: Duels>(duels: &mut D, i: usize, delta: f64) -> Result<bool, Exhausted> {
    let k = duels.k();
    assert!(k >= 2, "need at least two arms");
    let mut j = duels.rng().gen_range(0..k - 1);
    if j >= i {
        j += 1;
    }
    let (mut n, mut won) = (0u64, 0u64);
    loop {
        won += u64::from(duels.duel(i, j)?);
        n += 1;
        let mean = won as f64 / n as f64;
        if (mean - 0.5).abs() > certification_radius(n, k, delta) {
            return Ok(mean > 0.5);
        }
    }
}

/// A fresh identifier over the Copeland reward means, which live on the `1/(K-1)` grid.
fn copeland_race(k: usize, delta: f64, eps: f64) -> Result<KlBandit<f64>> {
    Ok(KlBandit::new(k, delta, eps)?.with_lattice(k as u64 - 1))
}

/// Identifies an (approximate) Copeland winner with confidence `1 - delta`.
pub fn find_copeland_winner<D: Duels>(duels: &mut D, delta: f64, eps: f64) -> Result<usize> {
    let mut race = copeland_race(duels.k(), delta, eps)?;
    let arm = race
        .run(|i| copeland_reward(duels, i, delta))
        .expect("unbudgeted duels never run out");
    Ok(arm)
}

/// Budget of round `r`, saturating at `u64::MAX`.
pub fn round_budget(r: u32) -> u64 {
    if r >= 6 {
        u64::MAX
    } else {
        1u64 << (1u32 << r)
    }
}

/// Failure probability of round `r`: `min(ln T / T, 1/2)`.
pub fn round_delta(r: u32) -> f64 {
    let ln_t = f64::from(1u32 << r.min(31)) * std::f64::consts::LN_2;
    (ln_t / ln_t.exp()).min(0.5)
}

/// Summary of one squaring round.
#[derive(Clone, Debug, PartialEq)]
pub struct ScbRound {
    pub r: u32,
    pub budget: u64,
    pub delta: f64,
    /// Duels spent identifying the candidate.
    pub search_duels: u64,
    pub candidate: usize,
    /// `false` when the identifier was cut off by the budget or the horizon.
    pub identified: bool,
    /// Duels of the round actually played before the horizon.
    pub played: u64,
}

pub struct ScbRun {
    pub trace: RegretTrace,
    pub rounds: Vec<ScbRound>,
}

pub fn run<T: Scalar>(m: &PreferenceMatrix<T>, horizon: u64, seed: u64) -> Result<ScbRun> {
    let mut oracle = ComparisonOracle::new(m, seed).with_marks(&[final_decade_start(horizon)]);
    let rounds = run_on(&mut oracle, horizon)?;
    Ok(ScbRun {
        trace: oracle.into_trace("scb", 0, seed, ""),
        rounds,
    })
}

/// Plays squaring rounds on `oracle` until it has issued `horizon` duels in total.
pub fn run_on<T: Scalar>(
    oracle: &mut ComparisonOracle<'_, T>,
    horizon: u64,
) -> Result<Vec<ScbRound>> {
    assert!(horizon >= 4, "horizon must be at least 4");
    let k = oracle.k();
    let mut rounds = Vec::new();
    let mut r = 1;
    while oracle.t() < horizon {
        let budget = round_budget(r);
        let delta = round_delta(r);
        assert!(delta > 0.0 && delta < 1.0);
        let start = oracle.t();
        let round_end = start.saturating_add(budget).min(horizon);

        let mut race = copeland_race(k, delta, 0.0)?;
        let outcome = {
            let mut capped = Budgeted::new(oracle, round_end);
            race.run(|i| copeland_reward(&mut capped, i, delta))
        };
        assert!(oracle.t() <= round_end, "round overran its budget");
        let search_duels = oracle.t() - start;
        let (candidate, identified) = match outcome {
            Ok(arm) => (arm, true),
            Err(Exhausted) => (race.leader(), false),
        };
        while oracle.t() < round_end {
            oracle.duel(candidate, candidate);
        }
        rounds.push(ScbRound {
            r,
            budget,
            delta,
            search_duels,
            candidate,
            identified,
            played: oracle.t() - start,
        });
        r += 1;
    }
    Ok(rounds)
}
