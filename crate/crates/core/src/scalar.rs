//! Scalar bounds shared by the polynomial algebra and the numeric solvers.
//!
//! Two tiers: [`Coeff`] only asks for exact ring arithmetic, so polynomials and
//! moment specs can be built over rationals for test oracles. [`Real`] adds the
//! floating-point surface the interior-point engine needs.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use nalgebra::RealField;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Coefficient ring for polynomials and matrix specs.
pub trait Coeff: Num + Clone + Neg<Output = Self> + Debug + 'static {}

impl<T> Coeff for T where T: Num + Clone + Neg<Output = T> + Debug + 'static {}

/// Floating-point scalar (`f32` or `f64`).
pub trait Real:
    Coeff + RealField + Copy + FromPrimitive + ToPrimitive + Display + Send + Sync
{
    /// Converts an `f64` literal, saturating to the nearest representable value.
    fn lit(v: f64) -> Self;

    fn as_f64(self) -> f64;
}

impl Real for f64 {
    #[inline]
    fn lit(v: f64) -> Self {
        v
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}
