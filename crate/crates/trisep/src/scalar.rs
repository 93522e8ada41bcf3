//! Scalar abstraction: the whole pipeline is generic over the float width.

use num_complex::Complex;
use num_traits::{Float, FloatConst, NumAssign};
use rustfft::FftNum;
use std::fmt::Display;
use std::iter::Sum;

/// Floating-point scalar (f32 or f64) usable throughout the toolkit.
pub trait Scalar: Float + FloatConst + NumAssign + Sum + Display + FftNum {
    /// Lossy conversion from f64; constants and RNG draws go through here so
    /// f32 and f64 runs consume identical streams.
    fn of(v: f64) -> Self;

    /// Widening conversion for reporting.
    fn to_f64(self) -> f64;
}

impl Scalar for f32 {
    #[inline]
    fn of(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    #[inline]
    fn of(v: f64) -> Self {
        v
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}

/// Complex number over the pipeline scalar.
pub type Cx<T> = Complex<T>;

/// Zero complex value.
#[inline]
pub fn czero<T: Scalar>() -> Cx<T> {
    Complex::new(T::zero(), T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip() {
        assert_eq!(f32::of(0.5).to_f64(), 0.5);
        assert_eq!(f64::of(0.5), 0.5);
        let z: Cx<f32> = czero();
        assert_eq!(z.norm_sqr(), 0.0);
    }
}
