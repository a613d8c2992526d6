//! Scalar abstraction so the probability math runs in f32 or f64.

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar used for probabilities, log-ratios and modeled times.
///
/// Token and tree machinery is integer-based and unaffected by the choice;
/// corpus and noise generation always draw f64 internally so that generated
/// data is bit-identical across instantiations.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from f64 (used for pinned constants like the 1e-12 floor).
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Probability floor applied before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

/// Numerator probabilities are capped at `1 - PROB_CAP_MARGIN` before logging
/// so the log stays strictly negative.
pub const PROB_CAP_MARGIN: f64 = 1e-12;

/// `ln(max(p, floor))` in the scalar's own precision.
pub fn ln_floored<S: Scalar>(p: S) -> S {
    let floor = S::from_f64_lossy(PROB_FLOOR);
    p.max(floor).ln()
}

/// `ln(min(p, cap))` where the cap is the largest representable value
/// strictly below one for the scalar (at most `1 - 1e-12`).
pub fn ln_capped<S: Scalar>(p: S) -> S {
    let one = S::one();
    let cap = (one - S::from_f64_lossy(PROB_CAP_MARGIN)).min(one - S::epsilon());
    p.max(S::from_f64_lossy(PROB_FLOOR)).min(cap).ln()
}
