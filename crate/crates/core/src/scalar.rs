//! Numeric abstraction shared by the expression evaluator and interval logic.
//!
//! Measurement functions run in IEEE double precision by default. The same code
//! paths can be instantiated over `f32` or over exact big rationals, which the
//! test suites use to cross-check float results and band partitions.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};

/// A number type the engine can compute with.
pub trait Scalar: Num + Neg<Output = Self> + Clone + PartialOrd + Debug {
    /// Converts a decimal literal's double value. Returns `None` when the value
    /// has no representation (non-finite input).
    fn from_f64(value: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// Whether the value is a finite real. Exact types are always finite.
    fn is_finite_value(&self) -> bool {
        true
    }
}

impl Scalar for f64 {
    fn from_f64(value: f64) -> Option<Self> {
        value.is_finite().then_some(value)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f32 {
    fn from_f64(value: f64) -> Option<Self> {
        let narrowed = value as f32;
        (value.is_finite() && narrowed.is_finite()).then_some(narrowed)
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for BigRational {
    fn from_f64(value: f64) -> Option<Self> {
        if value.is_finite() && value.is_zero() {
            return Some(BigRational::zero());
        }
        // Exact: every finite double is a dyadic rational.
        BigRational::from_float(value)
    }

    fn to_f64(&self) -> f64 {
        self.to_f64_lossy()
    }
}

trait LossyF64 {
    fn to_f64_lossy(&self) -> f64;
}

impl LossyF64 for BigRational {
    fn to_f64_lossy(&self) -> f64 {
        if let Some(v) = ToPrimitive::to_f64(self) {
            return v;
        }
        let numer = self.numer().to_f64().unwrap_or(f64::NAN);
        let denom = self.denom().to_f64().unwrap_or(f64::NAN);
        numer / denom
    }
}

/// Builds an exact rational `numer / denom`.
pub fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_from_decimal_double_is_exact() {
        let half = BigRational::from_f64(0.5).unwrap();
        assert_eq!(half, ratio(1, 2));
        let hundred = BigRational::from_f64(100.0).unwrap();
        assert_eq!(hundred, ratio(100, 1));
        assert_eq!(BigRational::from_f64(-0.0).unwrap(), ratio(0, 1));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(<f64 as Scalar>::from_f64(f64::INFINITY).is_none());
        assert!(<f32 as Scalar>::from_f64(1e300).is_none());
        assert!(BigRational::from_f64(f64::NAN).is_none());
    }

    #[test]
    fn rational_to_f64() {
        assert_eq!(Scalar::to_f64(&ratio(7, 10)), 0.7);
    }
}
