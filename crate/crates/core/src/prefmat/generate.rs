use rand::Rng;

use super::PreferenceMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Named problem instances used across tests, docs and the CLI.
pub mod fixtures {
    use super::*;

    /// Three arms in a 0.6 cycle: 0 beats 1, 1 beats 2, 2 beats 0.
    pub fn p3cycle<T: Scalar>() -> PreferenceMatrix<T> {
        PreferenceMatrix::from_upper(3, |i, j| match (i, j) {
            (0, 2) => T::lit(0.4),
            _ => T::lit(0.6),
        })
    }

    /// Four arms, Copeland winners {0, 1}, no Condorcet winner.
    pub fn p4<T: Scalar>() -> PreferenceMatrix<T> {
        PreferenceMatrix::from_upper(4, |i, j| match (i, j) {
            (0, 3) => T::lit(0.4),
            _ => T::lit(0.6),
        })
    }

    /// Five totally ordered arms; arm 0 is the Condorcet winner.
    pub fn pcond5<T: Scalar>() -> PreferenceMatrix<T> {
        PreferenceMatrix::from_upper(5, |_, _| T::lit(0.6))
    }

    pub const NAMES: [&str; 3] = ["p3cycle", "p4", "pcond5"];

    pub fn by_name<T: Scalar>(name: &str) -> Option<PreferenceMatrix<T>> {
        let name = name.to_ascii_lowercase();
        match name.as_str() {
            "p3cycle" => Some(p3cycle()),
            "p4" => Some(p4()),
            "pcond5" => Some(pcond5()),
            _ => None,
        }
    }
}

/// Arms 0, 1, 2 form a cycle and beat every other arm; arms `3..K` are totally
/// ordered by index. Every off-diagonal entry is `0.5 ± gamma`.
///
/// The three cycle arms are the Copeland winners with score `K - 2`; arm `m >= 3`
/// scores `K - 1 - m`.
pub fn cyclic_copeland<T: Scalar>(k: usize, gamma: T) -> Result<PreferenceMatrix<T>> {
    if k < 4 {
        return Err(Error::Domain(format!(
            "cyclic construction needs K >= 4, got {k}"
        )));
    }
    if !(gamma > T::zero() && gamma < T::half()) {
        return Err(Error::Domain(format!(
            "gamma must lie in (0, 0.5), got {gamma}"
        )));
    }
    let win = T::half() + gamma;
    let lose = T::half() - gamma;
    Ok(PreferenceMatrix::from_upper(k, |i, j| match (i, j) {
        (0, 2) => lose,
        _ => win,
    }))
}

/// Random tie-free matrix: each upper entry is uniform on `[0, 1)`, redrawn until it
/// sits at least `min_margin` away from one half.
pub fn random_matrix<T: Scalar, R: Rng + ?Sized>(
    k: usize,
    rng: &mut R,
    min_margin: T,
) -> Result<PreferenceMatrix<T>> {
    if k < 2 {
        return Err(Error::Shape(format!("need at least 2 arms, got {k}")));
    }
    if !(min_margin > T::zero() && min_margin < T::half()) {
        return Err(Error::Domain(format!(
            "min_margin must lie in (0, 0.5), got {min_margin}"
        )));
    }
    Ok(PreferenceMatrix::from_upper(k, |_, _| loop {
        let v = T::lit(rng.gen::<f64>());
        if (v - T::half()).abs() >= min_margin {
            break v;
        }
    }))
}
