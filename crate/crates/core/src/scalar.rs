use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{Num, Signed, Zero};

use crate::rational;

/// Number types the generic payoff and dynamics code runs on: exact
/// rationals, or `f64` for the float flavor.
pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + Send + Sync {
    fn from_rational(r: &BigRational) -> Self;
    fn to_f64(&self) -> f64;
    /// Allowed deviation of a simplex point's coordinate sum from one.
    fn simplex_tolerance() -> Self;
    /// Payoff differences at most this large (relative to `scale`) count as ties.
    fn tie_tolerance(scale: &Self) -> Self;
    const EXACT: bool;
}

impl Scalar for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        rational::to_f64(self)
    }
    fn simplex_tolerance() -> Self {
        BigRational::zero()
    }
    fn tie_tolerance(_scale: &Self) -> Self {
        BigRational::zero()
    }
    const EXACT: bool = true;
}

impl Scalar for f64 {
    fn from_rational(r: &BigRational) -> Self {
        rational::to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn simplex_tolerance() -> Self {
        1e-12
    }
    fn tie_tolerance(scale: &Self) -> Self {
        1e-12 * scale.max(1.0)
    }
    const EXACT: bool = false;
}
