//! Closed-form regret-bound quantities for CCB and the SCB bound shape.
//!
//! Everything is evaluated in `f64` whatever the matrix scalar: the constants reach
//! magnitudes like `1e200` for `alpha` near 1/2, far outside `f32` range. Values that
//! overflow even `f64` come back as `inf`, meaning the bound is vacuous.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::prefmat::{GapSummary, PreferenceMatrix, ScbQuantities};
use crate::scalar::Scalar;

/// Largest `T_delta` reported as an integer.
pub const T_DELTA_INTEGER_LIMIT: f64 = 4_611_686_018_427_387_904.0; // 2^62
const FIXED_POINT_MAX_ITERATIONS: usize = 10_000;

fn check_params(alpha: f64, delta: f64) -> Result<()> {
    if !(alpha > 0.5) || !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha must exceed 0.5, got {alpha}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    Ok(())
}

/// `C(delta) = ((4 alpha - 1) K^2 / ((2 alpha - 1) delta))^(1 / (2 alpha - 1))`.
pub fn c_delta(k: usize, alpha: f64, delta: f64) -> Result<f64> {
    check_params(alpha, delta)?;
    let k2 = (k * k) as f64;
    Ok(((4.0 * alpha - 1.0) * k2 / ((2.0 * alpha - 1.0) * delta)).powf(1.0 / (2.0 * alpha - 1.0)))
}

/// Gap data converted to `f64`.
#[derive(Clone, Debug)]
pub struct BoundInputs {
    k: usize,
    is_winner: Vec<bool>,
    c: usize,
    l_c: usize,
    delta: Vec<Vec<f64>>,
    delta_star: Vec<Vec<f64>>,
    delta_star_i: Vec<f64>,
    delta_min: f64,
    big_delta: Option<f64>,
    h_i: Vec<f64>,
    cpld: Vec<f64>,
    scb_delta_i: Vec<f64>,
}

impl BoundInputs {
    pub fn new<T: Scalar>(m: &PreferenceMatrix<T>) -> Result<Self> {
        let g = GapSummary::new(m)?;
        let q = ScbQuantities::new(m, T::zero())?;
        let k = m.k();
        let table = |s: &crate::square::Square<T>| -> Vec<Vec<f64>> {
            (0..k)
                .map(|i| (0..k).map(|j| s[(i, j)].as_f64()).collect())
                .collect()
        };
        let delta_star = table(&g.delta_star_ij);
        for (i, row) in delta_star.iter().enumerate() {
            for j in (0..k).filter(|&j| j != i) {
                if row[j] <= 0.0 {
                    return Err(Error::Inconsistent(format!(
                        "zero gap between arms {i} and {j}"
                    )));
                }
            }
        }
        Ok(Self {
            k,
            is_winner: (0..k).map(|i| g.is_winner(i)).collect(),
            c: g.c,
            l_c: g.l_c,
            delta: table(&g.delta),
            delta_star,
            delta_star_i: g.delta_star_i.iter().map(|d| d.as_f64()).collect(),
            delta_min: g.delta_min.as_f64(),
            big_delta: g.big_delta.map(Scalar::as_f64),
            h_i: q.h_i.iter().map(|h| h.as_f64()).collect(),
            cpld: q.cpld.iter().map(|c| c.as_f64()).collect(),
            scb_delta_i: q.delta_i.iter().map(|d| d.as_f64()).collect(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn non_winners(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.k).filter(|&i| !self.is_winner[i])
    }

    /// `N̂_ij(t) = 4 alpha ln t / (Δ*_ij)^2` off the diagonal; the diagonal is `t` for
    /// winners and 0 otherwise.
    pub fn n_hat_matrix(&self, alpha: f64, t: f64) -> Vec<Vec<f64>> {
        let scale = 4.0 * alpha * t.ln();
        (0..self.k)
            .map(|i| {
                (0..self.k)
                    .map(|j| match (i == j, self.is_winner[i]) {
                        (true, true) => t,
                        (true, false) => 0.0,
                        _ => scale / self.delta_star[i][j].powi(2),
                    })
                    .collect()
            })
            .collect()
    }

    /// `N̂(t) = sum_{i != j} N̂_ij(t) + 1`.
    pub fn n_hat_total(&self, alpha: f64, t: f64) -> f64 {
        let scale = 4.0 * alpha * t.ln();
        let mut sum = 0.0;
        for i in 0..self.k {
            for j in (0..self.k).filter(|&j| j != i) {
                sum += scale / self.delta_star[i][j].powi(2);
            }
        }
        sum + 1.0
    }

    /// Row sum `N̂_i(t)`, diagonal included.
    pub fn n_hat_row(&self, alpha: f64, t: f64, i: usize) -> f64 {
        self.n_hat_matrix(alpha, t)[i].iter().sum()
    }

    fn max_non_winner_row(&self, alpha: f64, t: f64) -> f64 {
        let scale = 4.0 * alpha * t.ln();
        self.non_winners()
            .map(|i| {
                (0..self.k)
                    .filter(|&j| j != i)
                    .map(|j| scale / self.delta_star[i][j].powi(2))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Right-hand side of the inequality defining `T_delta`, evaluated at `t`.
    pub fn t_delta_rhs(&self, alpha: f64, delta: f64, t: f64) -> Result<f64> {
        let k = self.k as f64;
        let lc1 = (self.l_c + 1) as f64;
        Ok(c_delta(self.k, alpha, delta / 2.0)?
            + 8.0 * k * k * lc1 * lc1 * (6.0 * k * k / delta).ln()
            + k * k * (6.0 * k / delta).ln()
            + 32.0 * alpha * k * lc1 / self.delta_min.powi(2) * t.ln()
            + self.n_hat_total(alpha, t)
            + 4.0 * k * self.max_non_winner_row(alpha, t))
    }

    /// `T_delta` as a real number: the fixed point of `t <- rhs(t)` from `C(delta/2) + 2`.
    pub fn t_delta_real(&self, alpha: f64, delta: f64) -> Result<f64> {
        let mut t = c_delta(self.k, alpha, delta / 2.0)? + 2.0;
        for _ in 0..FIXED_POINT_MAX_ITERATIONS {
            if !t.is_finite() {
                return Err(Error::Divergence(format!(
                    "T_delta overflows f64 (alpha={alpha}, delta={delta})"
                )));
            }
            let next = self.t_delta_rhs(alpha, delta, t)?;
            debug_assert!(
                next >= t - 1e-9 * t,
                "fixed-point iterates must not decrease"
            );
            if (next - t).abs() < 1.0_f64.max(t * 1e-15) {
                return Ok(next);
            }
            t = next;
        }
        Err(Error::NonConvergence(FIXED_POINT_MAX_ITERATIONS))
    }

    /// Smallest integer `t` with `t >= rhs(t)`.
    pub fn t_delta(&self, alpha: f64, delta: f64) -> Result<u64> {
        let real = self.t_delta_real(alpha, delta)?;
        if real > T_DELTA_INTEGER_LIMIT {
            return Err(Error::Divergence(format!(
                "T_delta ~ {real:e} exceeds 2^62; the bound is vacuous at this scale"
            )));
        }
        let holds =
            |n: u64| -> Result<bool> { Ok(n as f64 >= self.t_delta_rhs(alpha, delta, n as f64)?) };
        let mut n = real.ceil() as u64;
        while !holds(n)? {
            n += 1;
        }
        while n > 2 && holds(n - 1)? {
            n -= 1;
        }
        Ok(n)
    }

    /// `A1 = C(delta/4) + N̂(T_{delta/2})`.
    pub fn a1(&self, alpha: f64, delta: f64) -> Result<f64> {
        let t = self.t_delta_real(alpha, delta / 2.0)?;
        Ok(c_delta(self.k, alpha, delta / 4.0)? + self.n_hat_total(alpha, t))
    }

    /// `A2 = sum_{i > C} sqrt(L_C + 1) / Δ*_i ln(2K / delta)`.
    pub fn a2(&self, delta: f64) -> f64 {
        let root = ((self.l_c + 1) as f64).sqrt();
        let log = (2.0 * self.k as f64 / delta).ln();
        self.non_winners()
            .map(|i| root / self.delta_star_i[i] * log)
            .sum()
    }

    /// `A3 = sum_{i <= C < j} 1/Δ_ij^2 + 2 sum_{i > C} (L_C + 1) / (Δ*_i)^2`.
    pub fn a3(&self) -> f64 {
        let lc1 = (self.l_c + 1) as f64;
        let cross: f64 = (0..self.k)
            .filter(|&i| self.is_winner[i])
            .flat_map(|i| self.non_winners().map(move |j| (i, j)))
            .map(|(i, j)| 1.0 / self.delta[i][j].powi(2))
            .sum();
        let own: f64 = self
            .non_winners()
            .map(|i| lc1 / self.delta_star_i[i].powi(2))
            .sum();
        cross + 2.0 * own
    }

    /// Coarse form `2K(C + L_C + 1) / Δ^2` that dominates `A3`; `None` when all arms win.
    pub fn a3_ceiling(&self) -> Option<f64> {
        self.big_delta
            .map(|d| 2.0 * self.k as f64 * (self.c + self.l_c + 1) as f64 / (d * d))
    }

    /// `A1 + A2 sqrt(ln T) + A3 ln T`.
    pub fn theorem1_bound(&self, alpha: f64, delta: f64, horizon: f64) -> Result<f64> {
        let ln_t = horizon.ln();
        Ok(self.a1(alpha, delta)? + self.a2(delta) * ln_t.sqrt() + self.a3() * ln_t)
    }

    /// `(1/K) sum_i H_i (1 - cpld_i) / Δ_i^2 ln T`; a shape, not a calibrated bound.
    pub fn theorem2_shape(&self, horizon: f64) -> f64 {
        let sum: f64 = (0..self.k)
            .map(|i| self.h_i[i] * (1.0 - self.cpld[i]) / self.scb_delta_i[i].powi(2))
            .sum();
        sum / self.k as f64 * horizon.ln()
    }
}

/// Every bound quantity for one `(alpha, delta, horizon)` setting.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundReport {
    pub alpha: f64,
    pub delta: f64,
    pub horizon: f64,
    pub c_delta: f64,
    pub n_hat: Vec<Vec<f64>>,
    pub n_hat_total: f64,
    /// Real-valued `T_delta`; see [`BoundInputs::t_delta`] for the integer.
    pub t_delta: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub ccb_bound: f64,
    pub scb_shape: f64,
}

impl BoundReport {
    pub fn new<T: Scalar>(
        m: &PreferenceMatrix<T>,
        alpha: f64,
        delta: f64,
        horizon: f64,
    ) -> Result<Self> {
        let inputs = BoundInputs::new(m)?;
        let t_delta = match inputs.t_delta(alpha, delta) {
            Ok(n) => n as f64,
            Err(Error::Divergence(_)) => inputs.t_delta_real(alpha, delta).unwrap_or(f64::INFINITY),
            Err(e) => return Err(e),
        };
        let a1 = inputs.a1(alpha, delta).unwrap_or(f64::INFINITY);
        let (a2, a3) = (inputs.a2(delta), inputs.a3());
        let ln_t = horizon.ln();
        Ok(Self {
            alpha,
            delta,
            horizon,
            c_delta: c_delta(inputs.k, alpha, delta)?,
            n_hat: inputs.n_hat_matrix(alpha, horizon),
            n_hat_total: inputs.n_hat_total(alpha, horizon),
            t_delta,
            a1,
            a2,
            a3,
            ccb_bound: a1 + a2 * ln_t.sqrt() + a3 * ln_t,
            scb_shape: inputs.theorem2_shape(horizon),
        })
    }
}
