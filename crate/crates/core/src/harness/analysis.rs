use std::collections::BTreeMap;

use rand::seq::index;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::seeded_rng;
use crate::prefmat::{GapSummary, PreferenceMatrix};
use crate::scalar::Scalar;

/// Draws `n_samples` uniformly random `k`-arm submatrices of `master`.
pub fn sample_submatrices<T: Scalar>(
    master: &PreferenceMatrix<T>,
    k: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<PreferenceMatrix<T>>> {
    if k < 2 || k > master.k() {
        return Err(Error::Domain(format!(
            "subset size {k} must lie in 2..={}",
            master.k()
        )));
    }
    let mut rng = seeded_rng(seed);
    (0..n_samples)
        .map(|_| {
            let mut picked = index::sample(&mut rng, master.k(), k).into_vec();
            picked.sort_unstable();
            master.submatrix(&picked)
        })
        .collect()
}

/// Fraction of sampled submatrices that have a Condorcet winner.
pub fn condorcet_probability<T: Scalar>(
    master: &PreferenceMatrix<T>,
    k: usize,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    let subs = sample_submatrices(master, k, n_samples, seed)?;
    if subs.is_empty() {
        return Ok(0.0);
    }
    let hits = subs
        .iter()
        .filter(|m| m.condorcet_winner().is_some())
        .count();
    Ok(hits as f64 / subs.len() as f64)
}

/// Histograms of the number of Copeland winners `C` and their loss count `L_C`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StructureStats {
    pub samples: usize,
    pub c_histogram: BTreeMap<usize, usize>,
    pub l_c_histogram: BTreeMap<usize, usize>,
    /// Samples skipped because the submatrix has a tie.
    pub skipped: usize,
}

impl StructureStats {
    pub fn mean_c(&self) -> f64 {
        mean_of(&self.c_histogram)
    }

    pub fn mean_l_c(&self) -> f64 {
        mean_of(&self.l_c_histogram)
    }
}

fn mean_of(h: &BTreeMap<usize, usize>) -> f64 {
    let n: usize = h.values().sum();
    if n == 0 {
        return f64::NAN;
    }
    h.iter().map(|(&v, &c)| (v * c) as f64).sum::<f64>() / n as f64
}

pub fn structure_stats<T: Scalar>(
    master: &PreferenceMatrix<T>,
    k: usize,
    n_samples: usize,
    seed: u64,
) -> Result<StructureStats> {
    let mut stats = StructureStats {
        samples: n_samples,
        ..Default::default()
    };
    for sub in sample_submatrices(master, k, n_samples, seed)? {
        match GapSummary::new(&sub) {
            Ok(g) => {
                *stats.c_histogram.entry(g.c).or_default() += 1;
                *stats.l_c_histogram.entry(g.l_c).or_default() += 1;
            }
            Err(Error::Tie(..)) => stats.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(stats)
}

/// Mean of `(Δ / Δ_min)^2` over sampled submatrices.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GapRatio {
    /// `NaN` when no sample contributed.
    pub mean: f64,
    pub used: usize,
    /// Submatrices with a tie.
    pub skipped_ties: usize,
    /// Submatrices in which every arm is a Copeland winner, so `Δ` is undefined.
    pub skipped_all_winners: usize,
}

pub fn gap_ratio<T: Scalar>(
    master: &PreferenceMatrix<T>,
    k: usize,
    n_samples: usize,
    seed: u64,
) -> Result<GapRatio> {
    let (mut sum, mut used, mut ties, mut all_winners) = (0.0, 0, 0, 0);
    for sub in sample_submatrices(master, k, n_samples, seed)? {
        match GapSummary::new(&sub) {
            Ok(g) => match g.big_delta {
                Some(d) => {
                    let r = d.as_f64() / g.delta_min.as_f64();
                    sum += r * r;
                    used += 1;
                }
                None => all_winners += 1,
            },
            Err(Error::Tie(..)) => ties += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(GapRatio {
        mean: if used == 0 {
            f64::NAN
        } else {
            sum / used as f64
        },
        used,
        skipped_ties: ties,
        skipped_all_winners: all_winners,
    })
}

pub const WINNER_NOTIONS: [&str; 3] = ["copeland", "borda", "randomWalk"];

/// Percentage of matrices on which two winner notions share at least one arm.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OverlapTable {
    pub notions: [&'static str; 3],
    pub matrices: usize,
    pub percent: [[f64; 3]; 3],
}

pub fn winner_overlap<T: Scalar>(matrices: &[PreferenceMatrix<T>]) -> Result<OverlapTable> {
    if matrices.is_empty() {
        return Err(Error::Domain(
            "winner overlap needs at least one matrix".into(),
        ));
    }
    let mut counts = [[0usize; 3]; 3];
    for m in matrices {
        let sets = [
            m.copeland_winners(),
            m.borda_winners(),
            m.random_walk_winners()?,
        ];
        for a in 0..3 {
            for b in 0..3 {
                if sets[a].iter().any(|x| sets[b].contains(x)) {
                    counts[a][b] += 1;
                }
            }
        }
    }
    let n = matrices.len() as f64;
    Ok(OverlapTable {
        notions: WINNER_NOTIONS,
        matrices: matrices.len(),
        percent: counts.map(|row| row.map(|c| 100.0 * c as f64 / n)),
    })
}
