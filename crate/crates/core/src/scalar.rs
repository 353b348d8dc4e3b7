//! Numeric abstraction shared by the statistics and scoring code.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real-valued scalar used for indicator values and relatedness scores.
///
/// Implemented for `f32` and `f64`. Everything in this crate that does
/// arithmetic on values is generic over it; the crate root exposes `f64`
/// aliases for the common case.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Display
    + Debug
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from a hit count.
    fn from_count(count: u64) -> Self {
        Self::from_u64(count).unwrap_or_else(Self::infinity)
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half() -> Self {
        Self::one() / Self::two()
    }

    /// Clamp into `[lo, hi]`. NaN maps to `lo`.
    fn clamp_to(self, lo: Self, hi: Self) -> Self {
        if self.is_nan() || self < lo {
            lo
        } else if self > hi {
            hi
        } else {
            self
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_handles_nan_and_bounds() {
        assert_eq!(f64::NAN.clamp_to(0.0, 1.0), 0.0);
        assert_eq!((-0.5f64).clamp_to(0.0, 1.0), 0.0);
        assert_eq!(1.5f32.clamp_to(0.0, 1.0), 1.0);
        assert_eq!(0.25f32.clamp_to(0.0, 1.0), 0.25);
    }

    #[test]
    fn counts_convert() {
        assert_eq!(f64::from_count(4_000_000), 4_000_000.0);
        assert_eq!(f32::from_count(12), 12.0);
        assert_eq!(f64::half(), 0.5);
    }
}
