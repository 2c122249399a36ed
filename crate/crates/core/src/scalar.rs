//! Scalar abstraction shared by the matrix analytics, learners and bound calculators.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type a preference matrix can be stored in: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts an integer count into `Self`.
    fn count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable")
    }

    fn half() -> Self {
        Self::lit(0.5)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    /// Absolute tolerance for the complement and diagonal invariants.
    fn validation_tolerance() -> Self {
        let eps = Self::epsilon() * Self::lit(4.0);
        eps.max(Self::lit(1e-12))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_is_1e12_for_f64() {
        assert_eq!(f64::validation_tolerance(), 1e-12);
        assert!(f32::validation_tolerance() > 1e-7);
    }

    #[test]
    fn literals_round_trip() {
        assert_eq!(f32::lit(0.5), 0.5f32);
        assert_eq!(f64::count(7), 7.0);
        assert_eq!(f32::half().as_f64(), 0.5);
    }
}
