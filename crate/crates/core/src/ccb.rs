//! Copeland Confidence Bound (CCB).
//!
//! Each round builds optimistic and pessimistic preference estimates `U` and `L`,
//! picks an optimistic Copeland winner `c` (favoring the shortlist `B` of arms that
//! have held up so far) and then an opponent `d` that is most likely to refute `c`,
//! favoring `c`'s own shortlist `B^c` of arms that have confidently beaten it.

use rand::seq::index;
use rand::Rng;

use crate::oracle::{final_decade_start, ComparisonOracle, RegretTrace};
use crate::prefmat::PreferenceMatrix;
use crate::scalar::Scalar;
use crate::square::Square;

/// Fills `u` and `l` with the confidence bounds of every pair at round `t`.
///
/// `u_ij = w_ij/n + sqrt(alpha ln t / n)` and `l_ij = w_ij/n - sqrt(alpha ln t / n)`
/// with `n = w_ij + w_ji`, clipped to `[0, 1]`. Pairs never compared get `[0, 1]`;
/// the diagonal is fixed at one half.
pub fn fill_confidence<T: Scalar>(
    wins: &Square<u64>,
    t: u64,
    alpha: T,
    u: &mut Square<T>,
    l: &mut Square<T>,
) {
    let k = wins.k();
    let scale = alpha * T::count(t.max(1)).ln();
    let one = T::one();
    for i in 0..k {
        u[(i, i)] = T::half();
        l[(i, i)] = T::half();
        for j in i + 1..k {
            let n = wins[(i, j)] + wins[(j, i)];
            let (uij, lij) = if n == 0 {
                (one, T::zero())
            } else {
                let nf = T::count(n);
                let mean = T::count(wins[(i, j)]) / nf;
                let radius = (scale / nf).sqrt();
                ((mean + radius).min(one), (mean - radius).max(T::zero()))
            };
            u[(i, j)] = uij;
            l[(i, j)] = lij;
            u[(j, i)] = one - lij;
            l[(j, i)] = one - uij;
        }
    }
}

/// Allocating wrapper around [`fill_confidence`].
pub fn confidence_matrices<T: Scalar>(
    wins: &Square<u64>,
    t: u64,
    alpha: T,
) -> (Square<T>, Square<T>) {
    let k = wins.k();
    let mut u = Square::filled(k, T::zero());
    let mut l = Square::filled(k, T::zero());
    fill_confidence(wins, t, alpha, &mut u, &mut l);
    (u, l)
}

/// Opponent choice: the arm in `pool ∪ {c}` with `l_jc <= 1/2` maximizing `u_jc`.
///
/// `c` itself is always eligible (`l_cc = u_cc = 1/2`) and is returned only when it
/// is the unique maximizer; other ties go to the lowest index.
pub fn choose_opponent<T: Scalar>(
    u: &Square<T>,
    l: &Square<T>,
    c: usize,
    pool: impl IntoIterator<Item = usize>,
) -> usize {
    let mut best = c;
    let mut best_u = u[(c, c)];
    for j in pool {
        if j == c || l[(j, c)] > T::half() {
            continue;
        }
        let v = u[(j, c)];
        if v > best_u || (v == best_u && (best == c || j < best)) {
            best = j;
            best_u = v;
        }
    }
    best
}

/// What happened during the most recent [`CcbState::step`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepLog {
    pub pair: (usize, usize),
    /// A shortlisted opponent was confidently beaten and all hypotheses were reset.
    pub disproven_reset: bool,
    /// `B` emptied during removal and was restored.
    pub emptied_reset: bool,
    /// Arms promoted into `B` as confirmed winners, in processing order.
    pub promoted: Vec<usize>,
    /// The pair came from the shortlist exploration draw.
    pub from_shortlist_draw: bool,
}

#[derive(Clone, Debug)]
pub struct CcbState<T> {
    k: usize,
    alpha: T,
    in_best: Vec<bool>,
    shortlists: Vec<Vec<usize>>,
    l_bar: usize,
    u: Square<T>,
    l: Square<T>,
    optimistic: Vec<usize>,
    pessimistic: Vec<usize>,
    log: StepLog,
}

impl<T: Scalar> CcbState<T> {
    pub fn new(k: usize, alpha: T) -> Self {
        assert!(k >= 2, "need at least two arms");
        assert!(alpha > T::half(), "alpha must exceed 1/2");
        Self {
            k,
            alpha,
            in_best: vec![true; k],
            shortlists: vec![Vec::new(); k],
            l_bar: k,
            u: Square::filled(k, T::zero()),
            l: Square::filled(k, T::zero()),
            optimistic: vec![0; k],
            pessimistic: vec![0; k],
            log: StepLog::default(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Current candidate-best set `B`, ascending.
    pub fn best_set(&self) -> Vec<usize> {
        (0..self.k).filter(|&i| self.in_best[i]).collect()
    }

    /// Shortlist `B^i` of arms thought to beat `i`, ascending.
    pub fn shortlist(&self, i: usize) -> &[usize] {
        &self.shortlists[i]
    }

    /// Current estimate of the number of losses of a Copeland winner.
    pub fn l_bar(&self) -> usize {
        self.l_bar
    }

    pub fn upper(&self) -> &Square<T> {
        &self.u
    }

    pub fn lower(&self) -> &Square<T> {
        &self.l
    }

    pub fn optimistic_scores(&self) -> &[usize] {
        &self.optimistic
    }

    pub fn pessimistic_scores(&self) -> &[usize] {
        &self.pessimistic
    }

    pub fn last_step(&self) -> &StepLog {
        &self.log
    }

    /// Overrides the shortlists and `B`; for constructing specific situations in tests.
    pub fn set_hypotheses(&mut self, best: &[usize], shortlists: Vec<Vec<usize>>, l_bar: usize) {
        assert_eq!(shortlists.len(), self.k);
        self.in_best = vec![false; self.k];
        for &i in best {
            self.in_best[i] = true;
        }
        self.shortlists = shortlists
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s
            })
            .collect();
        self.l_bar = l_bar;
    }

    fn reset(&mut self) {
        self.in_best.iter_mut().for_each(|b| *b = true);
        self.shortlists.iter_mut().for_each(Vec::clear);
        self.l_bar = self.k;
    }

    /// Plays one round against `oracle` and returns the dueled pair `(c, d)`.
    pub fn step(&mut self, oracle: &mut ComparisonOracle<'_, T>) -> (usize, usize) {
        assert_eq!(oracle.k(), self.k, "oracle and learner disagree on K");
        let k = self.k;
        let half = T::half();
        let t = oracle.t() + 1;
        self.log = StepLog::default();

        fill_confidence(oracle.wins(), t, self.alpha, &mut self.u, &mut self.l);
        for i in 0..k {
            let (mut up, mut down) = (0, 0);
            for j in (0..k).filter(|&j| j != i) {
                up += usize::from(self.u[(i, j)] >= half);
                down += usize::from(self.l[(i, j)] >= half);
            }
            self.optimistic[i] = up;
            self.pessimistic[i] = down;
        }
        let top = *self.optimistic.iter().max().expect("k >= 2");
        let mut candidates: Vec<usize> = (0..k).filter(|&i| self.optimistic[i] == top).collect();

        // Reset hypotheses refuted by a shortlisted opponent the arm now beats.
        let refuted = (0..k).any(|i| self.shortlists[i].iter().any(|&j| self.l[(i, j)] > half));
        if refuted {
            self.reset();
            self.log.disproven_reset = true;
        }

        // Drop arms whose optimistic score trails someone's pessimistic score.
        let floor = *self.pessimistic.iter().max().expect("k >= 2");
        for i in 0..k {
            if self.in_best[i] && self.optimistic[i] < floor {
                self.in_best[i] = false;
                if self.shortlists[i].len() != self.l_bar + 1 {
                    self.shortlists[i] = (0..k).filter(|&j| self.u[(i, j)] < half).collect();
                }
            }
        }
        if !self.in_best.iter().any(|&b| b) {
            self.reset();
            self.log.emptied_reset = true;
        }

        // Promote candidates whose score is pinned down.
        for &i in &candidates {
            if self.optimistic[i] != self.pessimistic[i] {
                continue;
            }
            self.in_best[i] = true;
            self.shortlists[i].clear();
            self.l_bar = k - 1 - self.optimistic[i];
            let keep = self.l_bar + 1;
            for j in (0..k).filter(|&j| j != i) {
                let len = self.shortlists[j].len();
                if len < keep {
                    self.shortlists[j].clear();
                } else if len > keep {
                    let mut picked = index::sample(oracle.rng(), len, keep).into_vec();
                    picked.sort_unstable();
                    let old = std::mem::take(&mut self.shortlists[j]);
                    self.shortlists[j] = picked.into_iter().map(|p| old[p]).collect();
                }
            }
            self.log.promoted.push(i);
        }

        // Occasionally test a shortlisted pair whose interval still straddles 1/2.
        if oracle.rng().gen_bool(0.25) {
            let open: Vec<(usize, usize)> = (0..k)
                .flat_map(|i| self.shortlists[i].iter().map(move |&j| (i, j)))
                .filter(|&(i, j)| self.l[(i, j)] <= half && half <= self.u[(i, j)])
                .collect();
            if !open.is_empty() {
                let pick = open[oracle.rng().gen_range(0..open.len())];
                self.log.from_shortlist_draw = true;
                return self.duel(oracle, pick);
            }
        }

        let favored: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&i| self.in_best[i])
            .collect();
        if !favored.is_empty() && oracle.rng().gen_bool(2.0 / 3.0) {
            candidates = favored;
        }
        let c = candidates[oracle.rng().gen_range(0..candidates.len())];

        let use_shortlist = oracle.rng().gen_bool(0.5);
        let d = if use_shortlist && !self.shortlists[c].is_empty() {
            choose_opponent(&self.u, &self.l, c, self.shortlists[c].iter().copied())
        } else {
            choose_opponent(&self.u, &self.l, c, 0..k)
        };
        self.duel(oracle, (c, d))
    }

    fn duel(
        &mut self,
        oracle: &mut ComparisonOracle<'_, T>,
        (c, d): (usize, usize),
    ) -> (usize, usize) {
        assert!(
            self.l[(d, c)] <= T::half(),
            "opponent {d} is already known to beat {c}"
        );
        oracle.duel(c, d);
        self.log.pair = (c, d);
        (c, d)
    }
}

/// Runs CCB for `horizon` duels on a fresh oracle.
pub fn run<T: Scalar>(m: &PreferenceMatrix<T>, alpha: T, horizon: u64, seed: u64) -> RegretTrace {
    let mut oracle = ComparisonOracle::new(m, seed).with_marks(&[final_decade_start(horizon)]);
    let mut state = CcbState::new(m.k(), alpha);
    for _ in 0..horizon {
        state.step(&mut oracle);
    }
    oracle.into_trace("ccb", 0, seed, "")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prefmat::fixtures::{p4, pcond5};

    fn wins_from(k: usize, entries: &[((usize, usize), u64)]) -> Square<u64> {
        let mut w = Square::filled(k, 0);
        for &((i, j), n) in entries {
            w[(i, j)] = n;
        }
        w
    }

    #[test]
    fn zero_counts_give_unit_interval() {
        let (u, l) = confidence_matrices::<f64>(&Square::filled(3, 0), 57, 0.51);
        assert_eq!((u[(0, 1)], l[(0, 1)]), (1.0, 0.0));
        assert_eq!((u[(2, 2)], l[(2, 2)]), (0.5, 0.5));
    }

    #[test]
    fn confidence_values() {
        let w = wins_from(2, &[((0, 1), 6), ((1, 0), 4)]);
        let (u, l) = confidence_matrices::<f64>(&w, 100, 0.5);
        let r = (0.5 * 100f64.ln() / 10.0).sqrt();
        assert!((r - 0.47985).abs() < 1e-5);
        assert_eq!(u[(0, 1)], 1.0);
        assert!((l[(0, 1)] - (0.6 - r)).abs() < 1e-12);
        assert!((l[(0, 1)] - 0.12015).abs() < 1e-5);
        assert!((u[(1, 0)] - (0.4 + r)).abs() < 1e-12);
    }

    #[test]
    fn upper_and_mirrored_lower_sum_to_one() {
        let w = wins_from(
            4,
            &[
                ((0, 1), 30),
                ((1, 0), 11),
                ((2, 3), 5),
                ((3, 2), 9),
                ((0, 3), 1),
            ],
        );
        let (u, l) = confidence_matrices::<f64>(&w, 400, 0.6);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!((u[(i, j)] + l[(j, i)] - 1.0).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn first_step_is_symmetric() {
        let m = p4::<f64>();
        let mut o = ComparisonOracle::new(&m, 1);
        let mut s = CcbState::new(4, 0.51);
        let (c, d) = s.step(&mut o);
        assert_eq!(s.optimistic_scores(), &[3, 3, 3, 3]);
        assert_ne!(c, d);
    }

    #[test]
    fn opponent_choice_depends_only_on_ordering() {
        let k = 5;
        let c = 2;
        let mut u = Square::filled(k, 0.0f64);
        let mut l = Square::filled(k, 0.0f64);
        u[(c, c)] = 0.5;
        l[(c, c)] = 0.5;
        let uvals = [0.7, 0.9, 0.5, 0.8, 0.95];
        let lvals = [0.1, 0.3, 0.5, 0.2, 0.6];
        for j in 0..k {
            if j != c {
                u[(j, c)] = uvals[j];
                l[(j, c)] = lvals[j];
            }
        }
        // arm 4 is excluded by l > 1/2; arm 1 has the largest remaining upper bound
        assert_eq!(choose_opponent(&u, &l, c, 0..k), 1);
        // a monotone transform of the upper bounds leaves the choice unchanged
        let mut u2 = u.clone();
        for j in 0..k {
            if j != c {
                u2[(j, c)] = 0.5 + (uvals[j] - 0.5).powi(3);
            }
        }
        assert_eq!(choose_opponent(&u2, &l, c, 0..k), 1);
    }

    #[test]
    fn opponent_ties_avoid_self() {
        let mut u = Square::filled(3, 0.5f64);
        let l = Square::filled(3, 0.2f64);
        u[(0, 0)] = 0.5;
        // all tied at 0.5: c=0 must not be chosen
        assert_eq!(choose_opponent(&u, &l, 0, 0..3), 1);
        // c alone is the unique maximizer
        u[(1, 0)] = 0.3;
        u[(2, 0)] = 0.4;
        assert_eq!(choose_opponent(&u, &l, 0, 0..3), 0);
        // empty pool still yields c
        assert_eq!(choose_opponent(&u, &l, 0, std::iter::empty()), 0);
    }

    #[test]
    fn pinned_winner_is_promoted_and_self_played() {
        let m = pcond5::<f64>();
        let mut o = ComparisonOracle::new(&m, 3);
        // make arm 0 confidently beat everybody and the others clearly ordered
        for i in 0..5 {
            for j in i + 1..5 {
                for _ in 0..4000 {
                    o.compare(i, j).unwrap();
                }
            }
        }
        let (_, l) = confidence_matrices::<f64>(o.wins(), o.t() + 1, 0.51);
        for j in 1..5 {
            assert!(l[(0, j)] > 0.5);
        }
        let mut s = CcbState::new(5, 0.51);
        s.step(&mut o);
        assert_eq!(s.optimistic_scores()[0], 4);
        assert_eq!(s.pessimistic_scores()[0], 4);
        assert!(s.last_step().promoted.contains(&0));
        assert_eq!(s.l_bar(), 0);
        let mut selfplay = 0;
        for _ in 0..200 {
            if s.step(&mut o) == (0, 0) {
                selfplay += 1;
            }
        }
        assert!(selfplay >= 190, "self-play {selfplay}/200");
    }

    #[test]
    fn refuted_shortlist_resets_everything() {
        let m = p4::<f64>();
        let mut o = ComparisonOracle::new(&m, 4);
        for _ in 0..3000 {
            o.compare(0, 1).unwrap();
        }
        let mut s = CcbState::new(4, 0.51);
        // claim arm 1 beats arm 0, which the data refutes (l_01 > 1/2)
        s.set_hypotheses(&[0], vec![vec![1], vec![], vec![0, 1], vec![]], 1);
        s.step(&mut o);
        assert!(s.last_step().disproven_reset);
        assert!(s.shortlist(0).is_empty() || s.last_step().promoted.is_empty());
    }

    #[test]
    fn reset_restores_initial_values() {
        let mut s = CcbState::<f64>::new(4, 0.51);
        s.set_hypotheses(&[1], vec![vec![0], vec![], vec![], vec![1, 2]], 1);
        s.reset();
        assert_eq!(s.best_set(), vec![0, 1, 2, 3]);
        assert_eq!(s.l_bar(), 4);
        assert!((0..4).all(|i| s.shortlist(i).is_empty()));
    }

    #[test]
    fn promotion_caps_shortlists() {
        let m = p4::<f64>();
        let mut o = ComparisonOracle::new(&m, 10);
        let mut s = CcbState::new(4, 0.51);
        for _ in 0..20_000 {
            s.step(&mut o);
            if !s.last_step().promoted.is_empty() {
                for i in 0..4 {
                    assert!(s.shortlist(i).len() <= s.l_bar() + 1);
                }
            }
            assert!(!s.best_set().is_empty());
        }
    }

    #[test]
    fn same_seed_same_trace() {
        let m = p4::<f64>();
        assert_eq!(run(&m, 0.51, 3000, 17), run(&m, 0.51, 3000, 17));
    }

    #[test]
    fn condorcet_instance_converges() {
        let m = pcond5::<f64>();
        let horizon = 10_000;
        let trace = run(&m, 0.51, horizon, 5);
        let rate = trace.final_decade_rate().unwrap();
        assert!(rate <= 0.05, "tail per-step regret {rate}");
    }

    #[test]
    fn runs_in_f32() {
        let m = p4::<f32>();
        let trace = run(&m, 0.51f32, 2000, 1);
        assert_eq!(trace.horizon(), 2000);
    }
}
