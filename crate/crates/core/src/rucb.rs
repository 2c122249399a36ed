//! Relative Upper Confidence Bound, a Condorcet-assuming baseline.
//!
//! When no Condorcet winner exists it keeps chasing arms that look unbeaten,
//! which is what gives it linear regret on instances such as P4.

use rand::Rng;

use crate::ccb::{choose_opponent, fill_confidence};
use crate::oracle::{final_decade_start, ComparisonOracle, RegretTrace};
use crate::prefmat::PreferenceMatrix;
use crate::scalar::Scalar;
use crate::square::Square;

#[derive(Clone, Debug)]
pub struct RucbState<T> {
    k: usize,
    alpha: T,
    champion: Option<usize>,
    u: Square<T>,
    l: Square<T>,
    candidates: Vec<usize>,
}

impl<T: Scalar> RucbState<T> {
    pub fn new(k: usize, alpha: T) -> Self {
        assert!(k >= 2, "need at least two arms");
        assert!(alpha > T::half(), "alpha must exceed 1/2");
        Self {
            k,
            alpha,
            champion: None,
            u: Square::filled(k, T::zero()),
            l: Square::filled(k, T::zero()),
            candidates: Vec::with_capacity(k),
        }
    }

    pub fn champion(&self) -> Option<usize> {
        self.champion
    }

    /// Arms not yet confidently beaten by anyone, as of the last step.
    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn step(&mut self, oracle: &mut ComparisonOracle<'_, T>) -> (usize, usize) {
        assert_eq!(oracle.k(), self.k, "oracle and learner disagree on K");
        let k = self.k;
        let half = T::half();
        fill_confidence(
            oracle.wins(),
            oracle.t() + 1,
            self.alpha,
            &mut self.u,
            &mut self.l,
        );

        self.candidates.clear();
        for i in 0..k {
            if (0..k).all(|j| self.u[(i, j)] >= half) {
                self.candidates.push(i);
            }
        }
        if self.champion.is_some_and(|b| !self.candidates.contains(&b)) {
            self.champion = None;
        }
        if self.candidates.len() == 1 {
            self.champion = Some(self.candidates[0]);
        }

        let rng = oracle.rng();
        let c = if self.candidates.is_empty() {
            rng.gen_range(0..k)
        } else {
            match self.champion {
                Some(b) if self.candidates.len() == 1 || rng.gen_bool(0.5) => b,
                Some(b) => {
                    let others: Vec<usize> = self
                        .candidates
                        .iter()
                        .copied()
                        .filter(|&i| i != b)
                        .collect();
                    others[rng.gen_range(0..others.len())]
                }
                None => self.candidates[rng.gen_range(0..self.candidates.len())],
            }
        };
        // no lower-bound filter: every arm stays eligible as an opponent
        let l_open = Square::filled(k, T::zero());
        let d = choose_opponent(&self.u, &l_open, c, 0..k);
        oracle.duel(c, d);
        (c, d)
    }
}

pub fn run<T: Scalar>(m: &PreferenceMatrix<T>, alpha: T, horizon: u64, seed: u64) -> RegretTrace {
    let mut oracle = ComparisonOracle::new(m, seed).with_marks(&[final_decade_start(horizon)]);
    let mut state = RucbState::new(m.k(), alpha);
    for _ in 0..horizon {
        state.step(&mut oracle);
    }
    oracle.into_trace("rucb", 0, seed, "")
}
