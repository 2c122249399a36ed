//! Gap quantities that drive the CCB and SCB regret bounds.

use std::cmp::Ordering;

use serde::Serialize;

use super::PreferenceMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::square::Square;

/// Structural summary of a tie-free preference matrix.
///
/// Winners are the Copeland winners; every other arm is a non-winner. `l_c` is
/// the number of arms a Copeland winner loses to.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapSummary<T> {
    pub cpld_scores: Vec<usize>,
    pub winners: Vec<usize>,
    /// Number of Copeland winners.
    pub c: usize,
    pub loss_sets: Vec<Vec<usize>>,
    pub l_c: usize,
    /// `|p_ij - 1/2|`, zero on the diagonal.
    pub delta: Square<T>,
    pub delta_min: T,
    /// For each non-winner, the opponent realizing its `(l_c + 1)`-th largest loss gap.
    pub i_star: Vec<Option<usize>>,
    /// `delta[i][i_star]` for non-winners, zero for winners.
    pub delta_star_i: Vec<T>,
    pub delta_star_ij: Square<T>,
    /// Smallest `delta_star_i` over non-winners; `None` when every arm is a winner.
    pub delta_star_min: Option<T>,
    /// Minimum of the winner/non-winner gaps and `delta_star_min`; `None` when
    /// every arm is a winner.
    pub big_delta: Option<T>,
}

impl<T: Scalar> GapSummary<T> {
    pub fn new(m: &PreferenceMatrix<T>) -> Result<Self> {
        m.require_no_ties()?;
        let k = m.k();
        let half = T::half();
        let cpld_scores = m.copeland_scores();
        let best = *cpld_scores.iter().max().expect("k >= 2");
        let winners: Vec<usize> = (0..k).filter(|&i| cpld_scores[i] == best).collect();
        let is_winner: Vec<bool> = (0..k).map(|i| cpld_scores[i] == best).collect();
        let loss_sets = m.loss_sets();
        let l_c = k - 1 - best;

        let delta = Square::from_fn(k, |i, j| {
            if i == j {
                T::zero()
            } else {
                (m.p(i, j) - half).abs()
            }
        });
        let delta_min = off_diagonal(k)
            .map(|(i, j)| delta[(i, j)])
            .fold(T::infinity(), T::min);

        let mut i_star = vec![None; k];
        let mut delta_star_i = vec![T::zero(); k];
        for i in (0..k).filter(|&i| !is_winner[i]) {
            let mut losses = loss_sets[i].clone();
            if losses.len() <= l_c {
                return Err(Error::Inconsistent(format!(
                    "non-winner {i} has {} losses but winners have {l_c}",
                    losses.len()
                )));
            }
            losses.sort_by(|&a, &b| {
                delta[(i, b)]
                    .partial_cmp(&delta[(i, a)])
                    .unwrap_or(Ordering::Equal)
                    .then(a.cmp(&b))
            });
            let gap = delta[(i, losses[l_c])];
            let star = *losses
                .iter()
                .filter(|&&j| delta[(i, j)] == gap)
                .min()
                .expect("position l_c realizes the gap");
            i_star[i] = Some(star);
            delta_star_i[i] = delta[(i, star)];
        }

        let delta_star_ij = Square::from_fn(k, |i, j| {
            if m.p(i, j) >= half {
                delta_star_i[i] + delta[(i, j)]
            } else {
                delta_star_i[i].max(delta[(i, j)])
            }
        });

        let delta_star_min = (0..k)
            .filter(|&i| !is_winner[i])
            .map(|i| delta_star_i[i])
            .reduce(T::min);
        let cross_min = winners
            .iter()
            .flat_map(|&i| (0..k).filter(|&j| !is_winner[j]).map(move |j| (i, j)))
            .map(|(i, j)| delta[(i, j)])
            .reduce(T::min);
        let big_delta = match (cross_min, delta_star_min) {
            (Some(a), Some(b)) => Some(a.min(b)),
            _ => None,
        };

        Ok(Self {
            c: winners.len(),
            cpld_scores,
            winners,
            loss_sets,
            l_c,
            delta,
            delta_min,
            i_star,
            delta_star_i,
            delta_star_ij,
            delta_star_min,
            big_delta,
        })
    }

    pub fn k(&self) -> usize {
        self.cpld_scores.len()
    }

    pub fn is_winner(&self, i: usize) -> bool {
        self.i_star[i].is_none()
    }

    pub fn non_winners(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.k()).filter(|&i| !self.is_winner(i))
    }
}

/// Quantities of the SCB analysis, built from normalized Copeland scores.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScbQuantities<T> {
    pub cpld: Vec<T>,
    /// `max(cpld_best - cpld_i, 1/(K-1))`.
    pub delta_i: Vec<T>,
    /// `sum_{j != i} 1 / delta_ij^2`.
    pub h_i: Vec<T>,
    pub h_inf: T,
    /// `max(delta_i, eps * (1 - cpld_best))`.
    pub delta_i_eps: Vec<T>,
}

impl<T: Scalar> ScbQuantities<T> {
    pub fn new(m: &PreferenceMatrix<T>, eps: T) -> Result<Self> {
        m.require_no_ties()?;
        if !(eps >= T::zero()) {
            return Err(Error::Domain(format!("eps must be >= 0, got {eps}")));
        }
        let k = m.k();
        let cpld = m.normalized_scores();
        let best = cpld.iter().copied().fold(T::zero(), T::max);
        let floor = T::one() / T::count(k as u64 - 1);
        let delta_i: Vec<T> = cpld.iter().map(|&c| (best - c).max(floor)).collect();
        let h_i: Vec<T> = (0..k)
            .map(|i| {
                (0..k).filter(|&j| j != i).fold(T::zero(), |acc, j| {
                    let d = (m.p(i, j) - T::half()).abs();
                    acc + T::one() / (d * d)
                })
            })
            .collect();
        let h_inf = h_i.iter().copied().fold(T::zero(), T::max);
        let slack = eps * (T::one() - best);
        let delta_i_eps = delta_i.iter().map(|&d| d.max(slack)).collect();
        Ok(Self {
            cpld,
            delta_i,
            h_i,
            h_inf,
            delta_i_eps,
        })
    }
}

fn off_diagonal(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..k).flat_map(move |i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::{p3cycle, p4, pcond5};
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn p4_gap_summary() {
        let g = GapSummary::new(&p4::<f64>()).unwrap();
        assert_eq!(g.winners, vec![0, 1]);
        assert_eq!(g.c, 2);
        assert_eq!(g.l_c, 1);
        assert!(close(g.delta_star_i[2], 0.1));
        assert!(close(g.delta_star_i[3], 0.1));
        // lowest index among the tied loss gaps
        assert_eq!(g.i_star[2], Some(0));
        assert!(close(g.delta_star_ij[(2, 3)], 0.2));
        assert!(close(g.delta_star_ij[(2, 0)], 0.1));
        assert!(close(g.big_delta.unwrap(), 0.1));
        assert!(close(g.delta_min, 0.1));
    }

    #[test]
    fn pcond5_gap_summary() {
        let g = GapSummary::new(&pcond5::<f64>()).unwrap();
        assert_eq!((g.l_c, g.c), (0, 1));
        assert!(close(g.delta_star_i[1], 0.1));
        assert_eq!(g.i_star[1], Some(0));
        assert!(close(g.big_delta.unwrap(), 0.1));
    }

    #[test]
    fn winners_have_zero_star_gap() {
        for m in [p4::<f64>(), pcond5(), p3cycle()] {
            let g = GapSummary::new(&m).unwrap();
            for &w in &g.winners {
                assert_eq!(g.delta_star_i[w], 0.0);
                assert_eq!(g.i_star[w], None);
            }
        }
    }

    #[test]
    fn all_winners_leave_big_delta_undefined() {
        let g = GapSummary::new(&p3cycle::<f64>()).unwrap();
        assert_eq!(g.c, 3);
        assert_eq!(g.big_delta, None);
        assert_eq!(g.delta_star_min, None);
    }

    #[test]
    fn ties_are_rejected() {
        let m = PreferenceMatrix::from_upper(3, |i, _| if i == 0 { 0.5 } else { 0.7 });
        assert!(matches!(GapSummary::new(&m), Err(Error::Tie(0, 1))));
        assert!(ScbQuantities::new(&m, 0.0).is_err());
    }

    #[test]
    fn p4_scb_quantities() {
        let q = ScbQuantities::new(&p4::<f64>(), 0.0).unwrap();
        let third = 1.0 / 3.0;
        for (a, b) in q.cpld.iter().zip([2.0 * third, 2.0 * third, third, third]) {
            assert!(close(*a, b));
        }
        assert!(close(q.delta_i[0], third));
        assert!(close(q.delta_i[2], third));
        assert!((q.h_i[0] - 300.0).abs() < 1e-9);
        assert!((q.h_inf - 300.0).abs() < 1e-9);

        let q1 = ScbQuantities::new(&p4::<f64>(), 1.0).unwrap();
        assert!(close(q1.delta_i_eps[0], third));
    }

    #[test]
    fn pcond5_scb_floor() {
        let q = ScbQuantities::new(&pcond5::<f64>(), 0.0).unwrap();
        assert_eq!(q.cpld[0], 1.0);
        assert_eq!(q.delta_i[0], 0.25);
    }

    #[test]
    fn works_in_f32() {
        let g = GapSummary::new(&p4::<f32>()).unwrap();
        assert_eq!(g.l_c, 1);
        assert!((g.delta_star_ij[(2, 3)] - 0.2).abs() < 1e-6);
    }
}
