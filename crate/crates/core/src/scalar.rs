//! Scalar abstraction for the numeric kernels.
//!
//! Every state-arithmetic routine in this crate is generic over a
//! floating-point scalar so the pipeline can be instantiated at `f32` or
//! `f64`. The shipped tools (and the EULF1 snapshot format) use `f64`;
//! concrete aliases for the common types live at the crate root.

use num_traits::{Float, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Floating-point scalar used for all state arithmetic.
///
/// The supertraits cover what the kernels need: IEEE arithmetic with
/// transcendentals (`Float`), literal conversion (`FromPrimitive`),
/// in-place operators, summation, threading, and text formatting.
pub trait Scalar:
    Float
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal to this scalar type.
    ///
    /// Panics if the literal is not representable (never happens for the
    /// finite constants used in this crate).
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    /// Widens to `f64`, for error reporting and file output.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// One half, the most common constant in the face-average formulas.
    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + NumAssign
        + Sum
        + Debug
        + Display
        + LowerExp
        + Send
        + Sync
        + 'static
{
}
