//! Scalar abstraction for the numeric core.
//!
//! All signal-processing and training math is generic over [`Real`], so the
//! same code runs in `f32` or `f64`. The reference pipeline instantiates
//! everything at `f64` (see [`crate::Scalar`]); `f32` is available for
//! callers that trade precision for memory.

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar usable throughout the numeric core.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::NumCast
    + num_traits::NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from `f64` literals and precomputed
    /// constants. Panics only for non-finite inputs, which never occur for
    /// the constants used in this crate.
    fn from_f64c(v: f64) -> Self {
        Self::from_f64(v).expect("finite constant")
    }

    /// Widen to `f64` for serialization and reporting.
    fn to_f64c(self) -> f64 {
        num_traits::NumCast::from(self).expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_round_trip() {
        assert_eq!(f64::from_f64c(2595.0), 2595.0);
        assert_eq!(f32::from_f64c(0.5), 0.5f32);
        assert_eq!(1.25f32.to_f64c(), 1.25);
    }
}
