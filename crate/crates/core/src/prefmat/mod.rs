//! Preference matrices: the problem instance of a dueling bandit.
//!
//! Entry `p(i, j)` is the probability that arm `i` wins a duel against arm `j`.
//! Arms are 0-indexed throughout the crate.
//!
//! Canonical fixtures (see [`fixtures`]):
//!
//! * `p3cycle` (K=3): `p(0,1) = p(1,2) = p(2,0) = 0.6`, every arm a Copeland winner.
//! * `p4` (K=4): rows `[.5 .6 .6 .4] [.4 .5 .6 .6] [.4 .4 .5 .6] [.6 .4 .4 .5]`;
//!   Copeland winners {0, 1}, no Condorcet winner.
//! * `pcond5` (K=5): `p(i,j) = 0.6` for `i < j`; arm 0 is a Condorcet winner.

mod gaps;
mod generate;
mod io;

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::square::Square;

pub use gaps::{GapSummary, ScbQuantities};
pub use generate::{cyclic_copeland, fixtures, random_matrix};
pub use io::{matrix_to_csv, parse_matrix_csv, read_matrix_csv, write_matrix_csv};

/// Residual at which the random-walk power iteration stops.
pub const RANDOM_WALK_TOLERANCE: f64 = 1e-10;
/// Step cap for the random-walk power iteration.
pub const RANDOM_WALK_MAX_STEPS: usize = 1_000_000;

/// A broken invariant found by [`PreferenceMatrix::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    OutOfRange { i: usize, j: usize, value: f64 },
    Diagonal { i: usize, value: f64 },
    Complement { i: usize, j: usize, sum: f64 },
    Tie { i: usize, j: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::OutOfRange { i, j, value } => {
                write!(f, "entry ({i},{j}) = {value} outside [0,1]")
            }
            Violation::Diagonal { i, value } => {
                write!(f, "diagonal ({i},{i}) = {value}, expected 0.5")
            }
            Violation::Complement { i, j, sum } => {
                write!(f, "row/column complement at ({i},{j}): p_ij + p_ji = {sum}")
            }
            Violation::Tie { i, j } => write!(f, "tie at ({i},{j}): p_ij = 0.5"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreferenceMatrix<T> {
    p: Square<T>,
}

impl<T: Scalar> PreferenceMatrix<T> {
    /// Builds a matrix from rows, checking only the shape (square, at least two arms).
    ///
    /// Use [`validate`](Self::validate) or [`from_rows_validated`](Self::from_rows_validated)
    /// to check the probabilistic invariants.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let k = rows.len();
        if k < 2 {
            return Err(Error::Shape(format!("need at least 2 arms, got {k}")));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != k) {
            return Err(Error::Shape(format!(
                "row {i} has {} entries, expected {k}",
                r.len()
            )));
        }
        let flat: Vec<T> = rows.into_iter().flatten().collect();
        Ok(Self {
            p: Square::from_fn(k, |i, j| flat[i * k + j]),
        })
    }

    pub fn from_rows_validated(rows: Vec<Vec<T>>, require_no_ties: bool) -> Result<Self> {
        let m = Self::from_rows(rows)?;
        let violations = m.validate(require_no_ties);
        if violations.is_empty() {
            Ok(m)
        } else {
            Err(Error::Invalid(violations))
        }
    }

    /// Builds a matrix from the strict upper triangle; the rest is filled in by complement.
    pub fn from_upper(k: usize, mut upper: impl FnMut(usize, usize) -> T) -> Self {
        let mut p = Square::filled(k, T::half());
        for i in 0..k {
            for j in i + 1..k {
                let v = upper(i, j);
                p[(i, j)] = v;
                p[(j, i)] = T::one() - v;
            }
        }
        Self { p }
    }

    pub fn k(&self) -> usize {
        self.p.k()
    }

    #[inline]
    pub fn p(&self, i: usize, j: usize) -> T {
        self.p[(i, j)]
    }

    pub fn as_square(&self) -> &Square<T> {
        &self.p
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.p.rows().map(<[T]>::to_vec).collect()
    }

    /// Reports every violated invariant; an empty list means the matrix is valid.
    pub fn validate(&self, require_no_ties: bool) -> Vec<Violation> {
        let k = self.k();
        let tol = T::validation_tolerance();
        let mut out = Vec::new();
        for i in 0..k {
            for j in 0..k {
                let v = self.p(i, j);
                if !(v >= T::zero() && v <= T::one()) {
                    out.push(Violation::OutOfRange {
                        i,
                        j,
                        value: v.as_f64(),
                    });
                }
            }
        }
        for i in 0..k {
            let d = self.p(i, i);
            if (d - T::half()).abs() > tol {
                out.push(Violation::Diagonal {
                    i,
                    value: d.as_f64(),
                });
            }
            for j in i + 1..k {
                let sum = self.p(i, j) + self.p(j, i);
                if !((sum - T::one()).abs() <= tol) {
                    out.push(Violation::Complement {
                        i,
                        j,
                        sum: sum.as_f64(),
                    });
                }
                if require_no_ties && self.p(i, j) == T::half() {
                    out.push(Violation::Tie { i, j });
                }
            }
        }
        out
    }

    /// Fails on the first off-diagonal entry equal to one half.
    pub fn require_no_ties(&self) -> Result<()> {
        let k = self.k();
        for i in 0..k {
            for j in 0..k {
                if i != j && self.p(i, j) == T::half() {
                    return Err(Error::Tie(i, j));
                }
            }
        }
        Ok(())
    }

    /// `true` when arm `i` beats arm `j`, i.e. `p(i, j) > 0.5` strictly.
    #[inline]
    pub fn beats(&self, i: usize, j: usize) -> bool {
        self.p(i, j) > T::half()
    }

    /// Number of arms each arm beats.
    pub fn copeland_scores(&self) -> Vec<usize> {
        let k = self.k();
        (0..k)
            .map(|i| (0..k).filter(|&j| j != i && self.beats(i, j)).count())
            .collect()
    }

    /// Copeland scores divided by `K - 1`.
    pub fn normalized_scores(&self) -> Vec<T> {
        let denom = T::count(self.k() as u64 - 1);
        self.copeland_scores()
            .into_iter()
            .map(|s| T::count(s as u64) / denom)
            .collect()
    }

    /// Arms of maximal Copeland score, ascending.
    pub fn copeland_winners(&self) -> Vec<usize> {
        let scores = self.copeland_scores();
        let best = scores.iter().copied().max().unwrap_or(0);
        (0..self.k()).filter(|&i| scores[i] == best).collect()
    }

    /// Arms each arm loses to.
    pub fn loss_sets(&self) -> Vec<Vec<usize>> {
        let k = self.k();
        (0..k)
            .map(|i| (0..k).filter(|&j| self.p(i, j) < T::half()).collect())
            .collect()
    }

    /// The arm beating every other arm, if any.
    pub fn condorcet_winner(&self) -> Option<usize> {
        let k = self.k();
        (0..k).find(|&i| (0..k).all(|j| j == i || self.beats(i, j)))
    }

    pub fn borda_scores(&self) -> Vec<T> {
        let k = self.k();
        (0..k)
            .map(|i| {
                (0..k)
                    .filter(|&j| j != i)
                    .fold(T::zero(), |acc, j| acc + self.p(i, j))
            })
            .collect()
    }

    /// Arms maximizing the row sum, ties within floating point rounding included.
    pub fn borda_winners(&self) -> Vec<usize> {
        let scores: Vec<f64> = self
            .borda_scores()
            .into_iter()
            .map(Scalar::as_f64)
            .collect();
        argmax_set(&scores, 1e-9)
    }

    /// Stationary distribution of the comparison random walk.
    ///
    /// From arm `i` the walk moves to `j != i` with probability `p(j, i) / K` and
    /// stays put with the remaining mass, so it drifts toward arms that win.
    pub fn random_walk_distribution(&self) -> Result<Vec<f64>> {
        let k = self.k();
        let kf = k as f64;
        let mut trans = Square::filled(k, 0.0f64);
        for i in 0..k {
            let mut out = 0.0;
            for j in 0..k {
                if j != i {
                    let m = self.p(j, i).as_f64() / kf;
                    trans[(i, j)] = m;
                    out += m;
                }
            }
            trans[(i, i)] = 1.0 - out;
        }
        let mut pi = vec![1.0 / kf; k];
        let mut next = vec![0.0; k];
        for _ in 0..RANDOM_WALK_MAX_STEPS {
            next.iter_mut().for_each(|x| *x = 0.0);
            for i in 0..k {
                let w = pi[i];
                for (j, n) in next.iter_mut().enumerate() {
                    *n += w * trans[(i, j)];
                }
            }
            let total: f64 = next.iter().sum();
            next.iter_mut().for_each(|x| *x /= total);
            let residual: f64 = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
            std::mem::swap(&mut pi, &mut next);
            if residual < RANDOM_WALK_TOLERANCE {
                return Ok(pi);
            }
        }
        Err(Error::NonConvergence(RANDOM_WALK_MAX_STEPS))
    }

    pub fn random_walk_winners(&self) -> Result<Vec<usize>> {
        Ok(argmax_set(&self.random_walk_distribution()?, 1e-7))
    }

    /// Restriction to `indices`, keeping their order.
    pub fn submatrix(&self, indices: &[usize]) -> Result<Self> {
        let k = self.k();
        let mut seen = vec![false; k];
        for &i in indices {
            if i >= k {
                return Err(Error::IndexOutOfRange { index: i, k });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::DuplicateIndex(i));
            }
        }
        if indices.len() < 2 {
            return Err(Error::Shape(format!(
                "need at least 2 arms, got {}",
                indices.len()
            )));
        }
        Ok(Self {
            p: Square::from_fn(indices.len(), |a, b| self.p(indices[a], indices[b])),
        })
    }

    pub fn map<U: Scalar>(&self, mut f: impl FnMut(T) -> U) -> PreferenceMatrix<U> {
        PreferenceMatrix {
            p: Square::from_fn(self.k(), |i, j| f(self.p(i, j))),
        }
    }
}

/// Indices whose value is within `rel_tol` (relative to the maximum magnitude) of the maximum.
fn argmax_set(values: &[f64], rel_tol: f64) -> Vec<usize> {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = rel_tol * best.abs().max(1.0);
    (0..values.len())
        .filter(|&i| values[i] >= best - tol)
        .collect()
}
