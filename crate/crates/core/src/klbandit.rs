//! Best-arm identification by elimination with KL-divergence confidence sets.
//!
//! Every surviving arm is sampled once per round. After `t` rounds arm `i` has the
//! confidence set `{q : t d(S_i/t, q) <= ln(4tK/delta) + 2 ln ln t}`, where `d` is the
//! Bernoulli KL divergence. An arm leaves the race when its upper end falls below
//! another survivor's lower end; the race stops once
//! `(1 - max lo) / (1 - max hi) <= 1 + eps` or one survivor remains.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Absolute tolerance of the interval bisection.
pub const BISECTION_TOLERANCE: f64 = 1e-10;

/// Bernoulli KL divergence `d(p, q)` with `0 ln 0 = 0`.
///
/// Returns `+inf` when `q` is 0 or 1 and `p` differs from it.
pub fn kl_div<T: Scalar>(p: T, q: T) -> T {
    if q <= T::zero() || q >= T::one() {
        return if p == q { T::zero() } else { T::infinity() };
    }
    let one = T::one();
    let head = if p > T::zero() {
        p * (p / q).ln()
    } else {
        T::zero()
    };
    let tail = if p < one {
        (one - p) * ((one - p) / (one - q)).ln()
    } else {
        T::zero()
    };
    (head + tail).max(T::zero())
}

/// Exploration threshold `ln(4 t K / delta) + 2 max(ln ln t, 0)`.
pub fn kl_threshold<T: Scalar>(t: u64, k: usize, delta: T) -> T {
    let tf = T::count(t);
    let lnln = tf.ln().ln();
    let lnln = if lnln > T::zero() { lnln } else { T::zero() };
    (T::lit(4.0) * tf * T::count(k as u64) / delta).ln() + T::lit(2.0) * lnln
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn unit() -> Self {
        Self {
            lo: T::zero(),
            hi: T::one(),
        }
    }

    pub fn contains(&self, x: T) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Tightens the interval to the grid `{0, 1/n, ..., 1}`; unchanged if no grid
    /// point remains inside.
    pub fn snap(self, n: u64) -> Self {
        let nf = T::count(n);
        let slack = T::lit(1e-9);
        let lo = ((self.lo * nf - slack).ceil() / nf).max(T::zero());
        let hi = ((self.hi * nf + slack).floor() / nf).min(T::one());
        if lo <= hi {
            Self { lo, hi }
        } else {
            self
        }
    }
}

/// Confidence set for a Bernoulli mean after `s` successes in `t` samples.
///
/// Endpoints are located by bisection on each side of `s/t` and reported on the
/// outer side of the boundary, so the returned interval contains the exact set.
pub fn kl_interval<T: Scalar>(s: u64, t: u64, k: usize, delta: T) -> Interval<T> {
    assert!(t >= 1 && s <= t, "need 0 <= s <= t and t >= 1");
    let beta = kl_threshold(t, k, delta);
    let tf = T::count(t);
    let mean = T::count(s) / tf;
    let inside = |q: T| tf * kl_div(mean, q) <= beta;
    let tol = T::lit(BISECTION_TOLERANCE).max(T::epsilon() * T::lit(4.0));

    let lo = if mean <= T::zero() {
        T::zero()
    } else {
        let (mut out, mut inn) = (T::zero(), mean);
        while inn - out > tol {
            let mid = (out + inn) * T::half();
            if mid <= out || mid >= inn {
                break;
            }
            if inside(mid) {
                inn = mid;
            } else {
                out = mid;
            }
        }
        out
    };
    let hi = if mean >= T::one() {
        T::one()
    } else {
        let (mut inn, mut out) = (mean, T::one());
        while out - inn > tol {
            let mid = (out + inn) * T::half();
            if mid <= inn || mid >= out {
                break;
            }
            if inside(mid) {
                inn = mid;
            } else {
                out = mid;
            }
        }
        out
    };
    Interval { lo, hi }
}

/// Outcome of a completed identification.
#[derive(Clone, Debug, PartialEq)]
pub struct Identification {
    pub arm: usize,
    /// Reward draws spent on each arm.
    pub samples: Vec<u64>,
    pub rounds: u64,
}

/// Mutable state of the elimination race.
#[derive(Clone, Debug)]
pub struct KlBandit<T> {
    k: usize,
    delta: T,
    eps: T,
    lattice: Option<u64>,
    survivors: Vec<bool>,
    sums: Vec<u64>,
    samples: Vec<u64>,
    /// Completed rounds, counting the initial draw of every arm.
    t: u64,
    intervals: Vec<Interval<T>>,
}

impl<T: Scalar> KlBandit<T> {
    pub fn new(k: usize, delta: T, eps: T) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("need at least one arm".into()));
        }
        if !(delta > T::zero() && delta < T::one()) {
            return Err(Error::Domain(format!(
                "delta must lie in (0,1), got {delta}"
            )));
        }
        if !(eps >= T::zero()) {
            return Err(Error::Domain(format!("eps must be >= 0, got {eps}")));
        }
        Ok(Self {
            k,
            delta,
            eps,
            lattice: None,
            survivors: vec![true; k],
            sums: vec![0; k],
            samples: vec![0; k],
            t: 0,
            intervals: vec![Interval::unit(); k],
        })
    }

    /// Declares that every mean is a multiple of `1/n`, letting decisions use
    /// intervals rounded inward to that grid.
    pub fn with_lattice(mut self, n: u64) -> Self {
        assert!(n >= 1);
        self.lattice = Some(n);
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rounds(&self) -> u64 {
        self.t
    }

    pub fn survivors(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.k).filter(|&i| self.survivors[i])
    }

    pub fn is_survivor(&self, i: usize) -> bool {
        self.survivors[i]
    }

    pub fn sums(&self) -> &[u64] {
        &self.sums
    }

    pub fn samples(&self) -> &[u64] {
        &self.samples
    }

    /// Raw confidence intervals; eliminated arms keep their last value.
    pub fn intervals(&self) -> &[Interval<T>] {
        &self.intervals
    }

    /// The interval used for decisions (snapped to the lattice when one is set).
    pub fn decision_interval(&self, i: usize) -> Interval<T> {
        match self.lattice {
            Some(n) => self.intervals[i].snap(n),
            None => self.intervals[i],
        }
    }

    /// Survivor with the largest lower bound; ties go to the larger empirical
    /// mean, then the lower index.
    pub fn leader(&self) -> usize {
        let mut best = None::<(usize, T, u64)>;
        for i in self.survivors() {
            let lo = self.decision_interval(i).lo;
            best = match best {
                None => Some((i, lo, self.sums[i])),
                Some((b, blo, bs)) => {
                    if lo > blo || (lo == blo && self.sums[i] > bs) {
                        Some((i, lo, self.sums[i]))
                    } else {
                        Some((b, blo, bs))
                    }
                }
            };
        }
        best.expect("at least one survivor").0
    }

    pub fn is_finished(&self) -> bool {
        if self.t == 0 {
            return false;
        }
        if self.survivors().count() == 1 {
            return true;
        }
        let (max_lo, max_hi) = self
            .survivors()
            .map(|i| self.decision_interval(i))
            .fold((T::neg_infinity(), T::neg_infinity()), |(l, h), iv| {
                (l.max(iv.lo), h.max(iv.hi))
            });
        let denom = T::one() - max_hi;
        if denom <= T::zero() {
            return false;
        }
        (T::one() - max_lo) / denom <= T::one() + self.eps
    }

    /// Draws one reward from every survivor and updates intervals and survivors.
    ///
    /// If `reward` fails part-way the round is discarded and the state is unchanged.
    pub fn round<E>(&mut self, mut reward: impl FnMut(usize) -> Result<bool, E>) -> Result<(), E> {
        let active: Vec<usize> = self.survivors().collect();
        let mut draws = Vec::with_capacity(active.len());
        for &i in &active {
            draws.push(reward(i)?);
        }
        for (&i, won) in active.iter().zip(draws) {
            self.sums[i] += u64::from(won);
            self.samples[i] += 1;
        }
        self.t += 1;
        if self.t == 1 {
            // the initial draw only seeds the sums
            return Ok(());
        }
        let t = self.t;
        let mut cache: HashMap<u64, Interval<T>> = HashMap::new();
        for &i in &active {
            let s = self.sums[i];
            let iv = *cache
                .entry(s)
                .or_insert_with(|| kl_interval(s, t, self.k, self.delta));
            self.intervals[i] = iv;
        }
        let decision: Vec<Interval<T>> =
            active.iter().map(|&i| self.decision_interval(i)).collect();
        let best_lo = decision
            .iter()
            .map(|iv| iv.lo)
            .fold(T::neg_infinity(), T::max);
        for (&i, iv) in active.iter().zip(&decision) {
            if iv.hi < best_lo {
                self.survivors[i] = false;
            }
        }
        Ok(())
    }

    /// Runs rounds until the stopping rule fires and returns the leader.
    pub fn run<E>(&mut self, mut reward: impl FnMut(usize) -> Result<bool, E>) -> Result<usize, E> {
        while !self.is_finished() {
            self.round(&mut reward)?;
        }
        Ok(self.leader())
    }
}

/// Identifies an approximately best arm among `k` Bernoulli reward sources.
pub fn identify<T: Scalar>(
    k: usize,
    delta: T,
    eps: T,
    mut reward: impl FnMut(usize) -> bool,
) -> Result<Identification> {
    let mut race = KlBandit::new(k, delta, eps)?;
    let arm = race
        .run(|i| Ok::<_, std::convert::Infallible>(reward(i)))
        .unwrap_or_else(|never| match never {});
    Ok(Identification {
        arm,
        samples: race.samples.clone(),
        rounds: race.t,
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    /// Independent closed form of the divergence used as a cross-check.
    fn kl_reference(p: f64, q: f64) -> f64 {
        let mut d = 0.0;
        if p > 0.0 {
            d += p * p.ln() - p * q.ln();
        }
        if p < 1.0 {
            d += (1.0 - p) * (1.0 - p).ln() - (1.0 - p) * (1.0 - q).ln();
        }
        d
    }

    #[test]
    fn kl_div_values() {
        assert_eq!(kl_div(0.5, 0.5), 0.0);
        let expect = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        assert!((kl_div(0.25, 0.5) - expect).abs() < 1e-15);
        assert!((kl_div(0.25f64, 0.5) - 0.130812).abs() < 1e-6);
        assert!((kl_div(0.0, 0.5) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(kl_div(0.3, 0.0), f64::INFINITY);
        assert_eq!(kl_div(0.3, 1.0), f64::INFINITY);
        assert_eq!(kl_div(1.0, 1.0), 0.0);
        for &(p, q) in &[(0.1, 0.9), (0.9, 0.1), (1.0, 0.3), (0.0, 0.7), (0.42, 0.43)] {
            assert!((kl_div(p, q) - kl_reference(p, q)).abs() < 1e-12);
        }
    }

    #[test]
    fn threshold_clamps_lnln() {
        // ln ln 2 < 0 is clamped
        assert!((kl_threshold(2, 3, 0.1) - (80.0f64 * 3.0).ln()).abs() < 1e-12);
        let b: f64 = kl_threshold(100, 2, 0.1);
        let expect = 8000f64.ln() + 2.0 * 100f64.ln().ln();
        assert!((b - expect).abs() < 1e-12);
        assert!((b - 12.04).abs() < 0.01);
    }

    #[test]
    fn interval_with_huge_threshold_is_unit() {
        let iv = kl_interval(1, 2, 1_000_000, 1e-300f64);
        assert!(iv.lo < 1e-9 && iv.hi > 1.0 - 1e-9);
    }

    #[test]
    fn interval_endpoints_solve_the_boundary_equation() {
        let iv = kl_interval(50, 100, 2, 0.1f64);
        let beta = kl_threshold(100, 2, 0.1f64);
        assert!((100.0 * kl_div(0.5, iv.lo) - beta).abs() < 1e-6);
        assert!((100.0 * kl_div(0.5, iv.hi) - beta).abs() < 1e-6);
        // symmetric around 1/2
        assert!((0.5 - iv.lo - (iv.hi - 0.5)).abs() < 1e-9);
        // independent bracket: the half-width solves -ln(1 - 4w^2)/2 = beta/100
        let w = ((1.0 - (-2.0 * beta / 100.0).exp()) / 4.0).sqrt();
        assert!((iv.hi - 0.5 - w).abs() < 1e-8, "{} vs {w}", iv.hi - 0.5);
    }

    #[test]
    fn interval_contains_mean_and_handles_extremes() {
        for t in 1..60u64 {
            for s in 0..=t {
                let iv = kl_interval(s, t, 5, 0.05f64);
                assert!(iv.contains(s as f64 / t as f64), "s={s} t={t} {iv:?}");
                assert!(iv.lo >= 0.0 && iv.hi <= 1.0);
            }
        }
        assert_eq!(kl_interval(0, 10, 2, 0.1f64).lo, 0.0);
        assert_eq!(kl_interval(10, 10, 2, 0.1f64).hi, 1.0);
    }

    #[test]
    fn threshold_per_sample_shrinks() {
        let mut prev = f64::INFINITY;
        for t in 3..5000u64 {
            let r = kl_threshold(t, 4, 0.05f64) / t as f64;
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn snap_to_grid() {
        let iv = Interval {
            lo: 0.40f64,
            hi: 0.99,
        }
        .snap(3);
        assert!((iv.lo - 2.0 / 3.0).abs() < 1e-12);
        assert!((iv.hi - 2.0 / 3.0).abs() < 1e-12);
        let empty = Interval { lo: 0.4, hi: 0.6 };
        assert_eq!(empty.snap(3), empty);
    }

    #[test]
    fn single_arm_returns_immediately() {
        let mut calls = 0;
        let id = identify(1, 0.1, 0.0, |_| {
            calls += 1;
            true
        })
        .unwrap();
        assert_eq!(id.arm, 0);
        assert_eq!(calls, 1);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(KlBandit::new(0, 0.1, 0.0).is_err());
        assert!(KlBandit::new(3, 1.0, 0.0).is_err());
        assert!(KlBandit::new(3, 0.1, -1.0).is_err());
    }

    fn bernoulli_arms(means: &[f64], seed: u64) -> (Identification, ChaCha8Rng) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let id = identify(means.len(), 0.05, 0.0, |i| rng.gen::<f64>() < means[i]).unwrap();
        (id, rng)
    }

    #[test]
    fn separates_two_arms() {
        let (id, _) = bernoulli_arms(&[0.9, 0.1], 1);
        assert_eq!(id.arm, 0);
        assert!(id.samples[1] <= id.samples[0]);
    }

    #[test]
    fn leader_has_maximal_lower_bound() {
        let means = [0.3, 0.8, 0.5, 0.75];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut race = KlBandit::new(4, 0.05f64, 0.0).unwrap();
        let arm = race
            .run(|i| Ok::<_, ()>(rng.gen::<f64>() < means[i]))
            .unwrap();
        let lo = race.decision_interval(arm).lo;
        for i in race.survivors() {
            assert!(race.decision_interval(i).lo <= lo);
        }
        assert_eq!(arm, 1);
    }

    #[test]
    fn interrupted_round_leaves_state_untouched() {
        let mut race = KlBandit::new(3, 0.1f64, 0.0).unwrap();
        race.round(|_| Ok::<_, ()>(true)).unwrap();
        race.round(|_| Ok::<_, ()>(true)).unwrap();
        let before = (race.sums().to_vec(), race.rounds());
        let mut n = 0;
        let r = race.round(|_| {
            n += 1;
            if n == 2 {
                Err("budget")
            } else {
                Ok(false)
            }
        });
        assert_eq!(r, Err("budget"));
        assert_eq!((race.sums().to_vec(), race.rounds()), before);
    }

    #[test]
    fn lattice_resolves_tied_means() {
        // two arms with identical mean 2/3 never separate without the grid
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut race = KlBandit::new(3, 0.05f64, 0.0).unwrap().with_lattice(3);
        let means = [2.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0];
        let arm = race
            .run(|i| Ok::<_, ()>(rng.gen::<f64>() < means[i]))
            .unwrap();
        assert!(arm < 2);
        assert!(race.decision_interval(arm).lo >= 2.0 / 3.0 - 1e-12);
    }

    #[test]
    fn eliminated_arms_are_never_sampled_again() {
        let means = [0.9, 0.2, 0.5];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut race = KlBandit::new(3, 0.05f64, 0.0).unwrap();
        let mut gone: Vec<bool> = vec![false; 3];
        while !race.is_finished() {
            let snapshot = gone.clone();
            race.round(|i| {
                assert!(!snapshot[i], "sampled eliminated arm {i}");
                Ok::<_, ()>(rng.gen::<f64>() < means[i])
            })
            .unwrap();
            for (i, g) in gone.iter_mut().enumerate() {
                *g = !race.is_survivor(i);
            }
        }
        assert_eq!(race.leader(), 0);
    }
}
