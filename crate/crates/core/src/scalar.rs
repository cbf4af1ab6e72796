//! Scalar abstraction shared by the simulator, optimizers and diagnostics.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point type the simulation core is generic over: `f32` or `f64`.
///
/// Dense eigensolves (spectra, QFIM ranks) are always carried out in `f64`
/// after conversion, so lower precision only affects state propagation.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Sum
    + NumAssign
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite conversion to f64")
    }

    /// Tolerance used for Hermiticity and norm checks at this precision.
    #[inline]
    fn check_tol() -> Self {
        Self::lit(1e-9).max(Self::epsilon() * Self::lit(1e4))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex amplitude over a [`Real`] scalar.
pub type Complex<T> = num_complex::Complex<T>;
