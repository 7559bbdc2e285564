//! Scalar abstractions shared by the tensor algebra and the kernels.

use std::fmt::Debug;
use std::iter::Sum;

use num_rational::Rational64;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed};

/// Field-like scalar usable in the exact tensor algebra (floats or rationals).
pub trait Scalar:
    Num + Signed + Copy + PartialOrd + Debug + Send + Sync + 'static
{
    /// Whether `self` is zero relative to `scale` for this number type:
    /// exact zero for rationals, a relative round-off bound for floats.
    fn negligible_against(self, scale: Self) -> bool;

    fn from_i32(v: i32) -> Self;
}

impl Scalar for f64 {
    fn negligible_against(self, scale: Self) -> bool {
        self.abs() <= 1e-14 * scale.abs().max(f64::MIN_POSITIVE)
    }
    fn from_i32(v: i32) -> Self {
        v as f64
    }
}

impl Scalar for f32 {
    fn negligible_against(self, scale: Self) -> bool {
        self.abs() <= 1e-6 * scale.abs().max(f32::MIN_POSITIVE)
    }
    fn from_i32(v: i32) -> Self {
        v as f32
    }
}

impl Scalar for Rational64 {
    fn negligible_against(self, _scale: Self) -> bool {
        self == Rational64::from_integer(0)
    }
    fn from_i32(v: i32) -> Self {
        Rational64::from_integer(v as i64)
    }
}

/// Floating-point scalar for everything that needs roots, exponentials and `erfc`.
pub trait Real: Scalar + Float + FloatConst + FromPrimitive + Sum {
    fn lit(v: f64) -> Self;
    fn erfc(self) -> Self;
    fn to_f64_lossy(self) -> f64;
}

impl Real for f64 {
    fn lit(v: f64) -> Self {
        v
    }
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Real for f32 {
    fn lit(v: f64) -> Self {
        v as f32
    }
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}
