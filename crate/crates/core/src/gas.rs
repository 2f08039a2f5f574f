//! Gas model and per-cell thermodynamics for the 2D compressible Euler
//! equations.
//!
//! State variables are the conserved tuple (ρ, m₁, m₂, E) with a γ-law
//! equation of state
//!
//! ```text
//! p = (γ − 1)(E − ½|m|²/ρ),        ϑ = p/ρ,
//! s = log(ϑ)/(γ − 1) − log(ρ),     S = ρ(s − s̲),
//! ```
//!
//! where s̲ is a per-run reference entropy chosen so the shifted total
//! entropy S is non-negative on the initial data. The convex total energy
//! in (ρ, m, S) variables,
//!
//! ```text
//! E(ρ, m, S) = ½|m|²/ρ + a/(γ−1) · ρ^γ · exp((γ−1) S/ρ),    a = exp((γ−1) s̲),
//! ```
//!
//! inverts the entropy definition exactly and is what the Jensen-defect
//! analysis evaluates.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Conserved variables of one cell: density, momentum, total energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conserved<S> {
    pub rho: S,
    pub m1: S,
    pub m2: S,
    pub en: S,
}

impl<S: Scalar> Conserved<S> {
    pub fn new(rho: S, m1: S, m2: S, en: S) -> Self {
        Self { rho, m1, m2, en }
    }

    /// Kinetic energy ½|m|²/ρ. Caller guarantees ρ > 0.
    #[inline]
    pub fn kinetic(&self) -> S {
        S::half() * (self.m1 * self.m1 + self.m2 * self.m2) / self.rho
    }
}

/// Primitive variables of one cell: density, velocity, pressure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive<S> {
    pub rho: S,
    pub u1: S,
    pub u2: S,
    pub p: S,
}

impl<S: Scalar> Primitive<S> {
    pub fn new(rho: S, u1: S, u2: S, p: S) -> Self {
        Self { rho, u1, u2, p }
    }
}

/// Adiabatic exponent γ and the derived entropy-shift constants.
///
/// `a_coeff` is always the exact floating-point value of
/// `exp((gamma − 1) · s_floor)`; the fields are private so the invariant
/// cannot be broken after construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GasModel<S> {
    gamma: S,
    s_floor: S,
    a_coeff: S,
}

/// Default adiabatic exponent (diatomic gas), used by every benchmark.
pub const DEFAULT_GAMMA: f64 = 1.4;

impl<S: Scalar> GasModel<S> {
    /// Builds a gas model with reference entropy `s_floor`; requires γ > 1.
    pub fn new(gamma: S, s_floor: S) -> Result<Self> {
        if !(gamma > S::one()) || !gamma.is_finite() {
            return Err(Error::Param(format!(
                "adiabatic exponent must satisfy gamma > 1, got {}",
                gamma.to_f64_lossy()
            )));
        }
        if !s_floor.is_finite() {
            return Err(Error::Param("entropy floor must be finite".into()));
        }
        let a_coeff = ((gamma - S::one()) * s_floor).exp();
        Ok(Self {
            gamma,
            s_floor,
            a_coeff,
        })
    }

    /// Gas model with γ = 1.4 and zero entropy floor.
    pub fn standard() -> Self {
        Self::new(S::lit(DEFAULT_GAMMA), S::zero()).expect("valid default")
    }

    #[inline]
    pub fn gamma(&self) -> S {
        self.gamma
    }

    #[inline]
    pub fn s_floor(&self) -> S {
        self.s_floor
    }

    /// a = exp((γ−1) s̲).
    #[inline]
    pub fn a_coeff(&self) -> S {
        self.a_coeff
    }

    /// Same gas with a different entropy floor.
    pub fn with_s_floor(&self, s_floor: S) -> Result<Self> {
        Self::new(self.gamma, s_floor)
    }

    /// p = (γ − 1)(E − ½|m|²/ρ). The returned value may be non-positive;
    /// positivity is an admissibility check, not part of the formula.
    pub fn pressure(&self, c: Conserved<S>) -> Result<S> {
        if !(c.rho > S::zero()) {
            return Err(Error::Domain {
                what: "density",
                value: c.rho.to_f64_lossy(),
            });
        }
        Ok(self.pressure_unchecked(c))
    }

    /// [`GasModel::pressure`] without the density check, for states already
    /// validated admissible (solver inner loops).
    #[inline]
    pub fn pressure_unchecked(&self, c: Conserved<S>) -> S {
        (self.gamma - S::one()) * (c.en - c.kinetic())
    }

    /// Temperature-like variable ϑ = p/ρ (the specific internal energy is
    /// e = ϑ/(γ−1)).
    pub fn temperature(&self, c: Conserved<S>) -> Result<S> {
        Ok(self.pressure(c)? / c.rho)
    }

    /// Sound speed c = √(γ p/ρ); requires an admissible state.
    pub fn sound_speed(&self, c: Conserved<S>) -> Result<S> {
        let p = self.pressure(c)?;
        if !(p > S::zero()) {
            return Err(Error::Domain {
                what: "pressure",
                value: p.to_f64_lossy(),
            });
        }
        Ok((self.gamma * p / c.rho).sqrt())
    }

    /// Specific entropy s = log(ϑ)/(γ−1) − log(ρ).
    pub fn specific_entropy(&self, c: Conserved<S>) -> Result<S> {
        let theta = self.temperature(c)?;
        if !(theta > S::zero()) {
            return Err(Error::Domain {
                what: "temperature",
                value: theta.to_f64_lossy(),
            });
        }
        Ok(theta.ln() / (self.gamma - S::one()) - c.rho.ln())
    }

    /// Shifted total entropy S = ρ(s − s̲); non-negative whenever s ≥ s̲.
    /// The unshifted value is `rho * specific_entropy`.
    pub fn total_entropy(&self, c: Conserved<S>) -> Result<S> {
        Ok(c.rho * (self.specific_entropy(c)? - self.s_floor))
    }

    /// Convex total energy in (ρ, m, S) variables:
    /// E = ½|m|²/ρ + a/(γ−1) ρ^γ exp((γ−1) S/ρ).
    ///
    /// Exact algebraic inverse of [`GasModel::total_entropy`]: feeding a
    /// state's (ρ, m, S) back in reproduces its E.
    pub fn total_energy_of(&self, rho: S, m1: S, m2: S, s_total: S) -> Result<S> {
        if !(rho > S::zero()) {
            return Err(Error::Domain {
                what: "density",
                value: rho.to_f64_lossy(),
            });
        }
        let g1 = self.gamma - S::one();
        let kinetic = S::half() * (m1 * m1 + m2 * m2) / rho;
        let internal = self.a_coeff / g1 * rho.powf(self.gamma) * (g1 * s_total / rho).exp();
        Ok(kinetic + internal)
    }

    /// m = ρu, E = p/(γ−1) + ½ρ|u|².
    pub fn primitive_to_conserved(&self, w: Primitive<S>) -> Result<Conserved<S>> {
        if !(w.rho > S::zero()) {
            return Err(Error::Domain {
                what: "density",
                value: w.rho.to_f64_lossy(),
            });
        }
        if !(w.p > S::zero()) {
            return Err(Error::Domain {
                what: "pressure",
                value: w.p.to_f64_lossy(),
            });
        }
        let kinetic = S::half() * w.rho * (w.u1 * w.u1 + w.u2 * w.u2);
        Ok(Conserved {
            rho: w.rho,
            m1: w.rho * w.u1,
            m2: w.rho * w.u2,
            en: w.p / (self.gamma - S::one()) + kinetic,
        })
    }

    /// u = m/ρ, p from the equation of state. Errors if ρ ≤ 0 or p ≤ 0.
    pub fn conserved_to_primitive(&self, c: Conserved<S>) -> Result<Primitive<S>> {
        let p = self.pressure(c)?;
        if !(p > S::zero()) {
            return Err(Error::Domain {
                what: "pressure",
                value: p.to_f64_lossy(),
            });
        }
        Ok(Primitive {
            rho: c.rho,
            u1: c.m1 / c.rho,
            u2: c.m2 / c.rho,
            p,
        })
    }
}
