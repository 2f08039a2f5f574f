//! Face traces and the upwind numerical flux.
//!
//! A face σ between two cells carries, for each quantity f, the trace pair
//! (f^in, f^out) taken with respect to the face's unit normal n (the normal
//! points from the "in" side to the "out" side). The bracket operators are
//!
//! ```text
//! [[f]] = f^out − f^in,        ⟨f⟩ = (f^in + f^out)/2,
//! ```
//!
//! and the upwind flux of a quantity r advected with velocity u is
//!
//! ```text
//! Up[r, u] = r^in [⟨u⟩·n]⁺ + r^out [⟨u⟩·n]⁻
//!          = ⟨r⟩⟨u⟩·n − ½|⟨u⟩·n| [[r]].
//! ```
//!
//! The numerical flux adds jump diffusion: F(r, u) = Up[r, u] − μ_h [[r]].
//!
//! Traces are stored in face-local coordinates: on axis-aligned faces the
//! normal is +x or +y, so the trace of u·n is simply the trace of the
//! normal velocity component. The scheme modules own the face geometry.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Trace pair (f^in, f^out) of one scalar quantity on one face.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceTrace<S> {
    pub inner: S,
    pub outer: S,
}

impl<S: Scalar> FaceTrace<S> {
    #[inline]
    pub fn new(inner: S, outer: S) -> Self {
        Self { inner, outer }
    }

    /// Jump [[f]] = f^out − f^in.
    #[inline]
    pub fn jump(&self) -> S {
        self.outer - self.inner
    }

    /// Average ⟨f⟩ = (f^in + f^out)/2.
    #[inline]
    pub fn average(&self) -> S {
        S::half() * (self.inner + self.outer)
    }
}

/// Upwind part Up[r, u] = r^in [⟨u⟩·n]⁺ + r^out [⟨u⟩·n]⁻.
///
/// `u_normal` is the trace of the normal velocity u·n on the face.
#[inline]
pub fn upwind_part<S: Scalar>(r: FaceTrace<S>, u_normal: FaceTrace<S>) -> S {
    let un = u_normal.average();
    r.inner * un.max(S::zero()) + r.outer * un.min(S::zero())
}

/// Central closed form ⟨r⟩⟨u⟩·n − ½|⟨u⟩·n| [[r]]; agrees with
/// [`upwind_part`] to rounding. Kept public for the equivalence test and
/// for callers that prefer the jump form.
#[inline]
pub fn upwind_part_central<S: Scalar>(r: FaceTrace<S>, u_normal: FaceTrace<S>) -> S {
    let un = u_normal.average();
    r.average() * un - S::half() * un.abs() * r.jump()
}

/// Numerical flux F(r, u) = Up[r, u] − μ_h [[r]] with μ_h ≥ 0.
#[inline]
pub fn numerical_flux<S: Scalar>(r: FaceTrace<S>, u_normal: FaceTrace<S>, mu_h: S) -> Result<S> {
    if mu_h < S::zero() || !mu_h.is_finite() {
        return Err(Error::Param(format!(
            "jump-diffusion coefficient must be non-negative, got {}",
            mu_h.to_f64_lossy()
        )));
    }
    Ok(numerical_flux_unchecked(r, u_normal, mu_h))
}

/// [`numerical_flux`] without the parameter check, for kernels that
/// validated μ_h once at scheme construction.
#[inline]
pub fn numerical_flux_unchecked<S: Scalar>(r: FaceTrace<S>, u_normal: FaceTrace<S>, mu_h: S) -> S {
    upwind_part(r, u_normal) - mu_h * r.jump()
}
