//! Exact solver for the 1D Riemann problem of the Euler equations.
//!
//! Given left/right primitive states (ρ, u, p) for a γ-law gas, the solution
//! is self-similar in ξ = x/t: two nonlinear waves (shock or rarefaction)
//! enclosing a contact. The star-region pressure p* is the root of
//!
//! ```text
//! f(p) = f_l(p) + f_r(p) + (u_r − u_l),
//! f_k(p) = (p − p_k)·√(A_k/(p + B_k))                       if p > p_k (shock),
//!        = 2c_k/(γ−1)·((p/p_k)^{(γ−1)/(2γ)} − 1)            otherwise (rarefaction),
//! A_k = 2/((γ+1)ρ_k),  B_k = (γ−1)/(γ+1)·p_k,
//! ```
//!
//! found by Newton iteration from the two-rarefaction estimate with a
//! maintained bracket and bisection fallback; u* = ½(u_l+u_r) + ½(f_r−f_l).
//! The solver is used for second-order face fluxes and as a validation
//! oracle; it rejects vacuum-forming data (2c_l/(γ−1) + 2c_r/(γ−1) ≤ u_r −
//! u_l), which never occurs in the shipped benchmarks.

use crate::error::{Error, Result};
use crate::gas::GasModel;
use crate::scalar::Scalar;

/// 1D primitive state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prim1<S> {
    pub rho: S,
    pub u: S,
    pub p: S,
}

impl<S: Scalar> Prim1<S> {
    pub fn new(rho: S, u: S, p: S) -> Self {
        Self { rho, u, p }
    }

    fn sound_speed(&self, gamma: S) -> S {
        (gamma * self.p / self.rho).sqrt()
    }

    fn validate(&self) -> Result<()> {
        if !(self.rho > S::zero()) || !self.rho.is_finite() {
            return Err(Error::Domain {
                what: "density",
                value: self.rho.to_f64_lossy(),
            });
        }
        if !(self.p > S::zero()) || !self.p.is_finite() {
            return Err(Error::Domain {
                what: "pressure",
                value: self.p.to_f64_lossy(),
            });
        }
        Ok(())
    }
}

/// Wave type on one side of the fan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Wave {
    Shock,
    Rarefaction,
}

/// Which side of the contact a sampled point lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Signal-speed span of one wave: `head` is the outermost speed, `tail` the
/// innermost (equal for a shock).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveSpan<S> {
    pub head: S,
    pub tail: S,
    pub wave: Wave,
}

/// Solved Riemann fan; sampling is closed-form once p*, u* are known.
#[derive(Clone, Copy, Debug)]
pub struct RiemannFan<S> {
    gamma: S,
    left: Prim1<S>,
    right: Prim1<S>,
    p_star: S,
    u_star: S,
    rho_star_left: S,
    rho_star_right: S,
    left_wave: Wave,
    right_wave: Wave,
}

const MAX_ITERS: u32 = 100;

/// One-sided pressure function f_k and its derivative.
fn pressure_fn<S: Scalar>(p: S, state: &Prim1<S>, gamma: S) -> (S, S) {
    let c = state.sound_speed(gamma);
    if p > state.p {
        // Shock branch.
        let a = (S::one() + S::one()) / ((gamma + S::one()) * state.rho);
        let b = (gamma - S::one()) / (gamma + S::one()) * state.p;
        let root = (a / (p + b)).sqrt();
        let f = (p - state.p) * root;
        let df = root * (S::one() - S::half() * (p - state.p) / (p + b));
        (f, df)
    } else {
        // Rarefaction branch.
        let g1 = gamma - S::one();
        let z = g1 / ((gamma + gamma));
        let ratio = p / state.p;
        let f = (S::lit(2.0) * c / g1) * (ratio.powf(z) - S::one());
        let df = (S::one() / (state.rho * c)) * ratio.powf(-(gamma + S::one()) / (gamma + gamma));
        (f, df)
    }
}

/// Solves for the star state. Errors on vacuum-forming data and on
/// non-convergence (never observed for admissible inputs).
pub fn solve<S: Scalar>(left: Prim1<S>, right: Prim1<S>, gas: &GasModel<S>) -> Result<RiemannFan<S>> {
    left.validate()?;
    right.validate()?;
    let gamma = gas.gamma();
    let g1 = gamma - S::one();
    let cl = left.sound_speed(gamma);
    let cr = right.sound_speed(gamma);
    let du = right.u - left.u;

    // Positivity (no-vacuum) condition.
    if S::lit(2.0) * cl / g1 + S::lit(2.0) * cr / g1 <= du {
        return Err(Error::Vacuum);
    }

    // Two-rarefaction estimate as the Newton start value.
    let z = g1 / (gamma + gamma);
    let p_tr = {
        let num = cl + cr - S::half() * g1 * du;
        let den = cl / left.p.powf(z) + cr / right.p.powf(z);
        (num / den).powf(S::one() / z)
    };
    let p_floor = S::lit(1e-14) * (left.p + right.p);
    let mut p = p_tr.max(p_floor);

    // Bracket: f(0⁺) < 0 by the vacuum check; grow the upper end until
    // f ≥ 0 (the shock branch is unbounded).
    let eval = |p: S| -> (S, S) {
        let (fl, dfl) = pressure_fn(p, &left, gamma);
        let (fr, dfr) = pressure_fn(p, &right, gamma);
        (fl + fr + du, dfl + dfr)
    };
    let mut lo = p_floor;
    let mut hi = left.p.max(right.p);
    for _ in 0..200 {
        if eval(hi).0 >= S::zero() {
            break;
        }
        hi = hi * S::lit(2.0);
    }

    let mut converged = false;
    for _ in 0..MAX_ITERS {
        let (f, df) = eval(p);
        if f > S::zero() {
            hi = hi.min(p);
        } else {
            lo = lo.max(p);
        }
        let newton = p - f / df;
        let next = if df > S::zero() && newton > lo && newton < hi {
            newton
        } else {
            S::half() * (lo + hi)
        };
        let change = (next - p).abs();
        p = next;
        if change <= S::lit(1e-12) * p {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { iters: MAX_ITERS });
    }

    let (fl, _) = pressure_fn(p, &left, gamma);
    let (fr, _) = pressure_fn(p, &right, gamma);
    let u_star = S::half() * (left.u + right.u) + S::half() * (fr - fl);

    let mu2 = g1 / (gamma + S::one());
    let star_density = |side: &Prim1<S>| -> (S, Wave) {
        let ratio = p / side.p;
        if p > side.p {
            (
                side.rho * ((ratio + mu2) / (mu2 * ratio + S::one())),
                Wave::Shock,
            )
        } else {
            (side.rho * ratio.powf(S::one() / gamma), Wave::Rarefaction)
        }
    };
    let (rho_star_left, left_wave) = star_density(&left);
    let (rho_star_right, right_wave) = star_density(&right);

    Ok(RiemannFan {
        gamma,
        left,
        right,
        p_star: p,
        u_star,
        rho_star_left,
        rho_star_right,
        left_wave,
        right_wave,
    })
}

impl<S: Scalar> RiemannFan<S> {
    pub fn p_star(&self) -> S {
        self.p_star
    }

    pub fn u_star(&self) -> S {
        self.u_star
    }

    pub fn rho_star_left(&self) -> S {
        self.rho_star_left
    }

    pub fn rho_star_right(&self) -> S {
        self.rho_star_right
    }

    pub fn left(&self) -> Prim1<S> {
        self.left
    }

    pub fn right(&self) -> Prim1<S> {
        self.right
    }

    /// Signal speeds of the left wave.
    pub fn left_span(&self) -> WaveSpan<S> {
        let g = self.gamma;
        let cl = self.left.sound_speed(g);
        match self.left_wave {
            Wave::Shock => {
                let ratio = self.p_star / self.left.p;
                let s = self.left.u
                    - cl * ((g + S::one()) / (g + g) * ratio + (g - S::one()) / (g + g)).sqrt();
                WaveSpan {
                    head: s,
                    tail: s,
                    wave: Wave::Shock,
                }
            }
            Wave::Rarefaction => {
                let c_star = cl * (self.p_star / self.left.p).powf((g - S::one()) / (g + g));
                WaveSpan {
                    head: self.left.u - cl,
                    tail: self.u_star - c_star,
                    wave: Wave::Rarefaction,
                }
            }
        }
    }

    /// Signal speeds of the right wave.
    pub fn right_span(&self) -> WaveSpan<S> {
        let g = self.gamma;
        let cr = self.right.sound_speed(g);
        match self.right_wave {
            Wave::Shock => {
                let ratio = self.p_star / self.right.p;
                let s = self.right.u
                    + cr * ((g + S::one()) / (g + g) * ratio + (g - S::one()) / (g + g)).sqrt();
                WaveSpan {
                    head: s,
                    tail: s,
                    wave: Wave::Shock,
                }
            }
            Wave::Rarefaction => {
                let c_star = cr * (self.p_star / self.right.p).powf((g - S::one()) / (g + g));
                WaveSpan {
                    head: self.right.u + cr,
                    tail: self.u_star + c_star,
                    wave: Wave::Rarefaction,
                }
            }
        }
    }

    /// Samples the self-similar solution at ξ = x/t, also reporting which
    /// side of the contact the point lies on (ties go left).
    pub fn sample_with_side(&self, xi: S) -> (Prim1<S>, Side) {
        if xi <= self.u_star {
            (self.sample_left(xi), Side::Left)
        } else {
            (self.sample_right(xi), Side::Right)
        }
    }

    /// Samples the self-similar solution at ξ = x/t.
    pub fn sample(&self, xi: S) -> Prim1<S> {
        self.sample_with_side(xi).0
    }

    fn sample_left(&self, xi: S) -> Prim1<S> {
        let g = self.gamma;
        let span = self.left_span();
        match self.left_wave {
            Wave::Shock => {
                if xi < span.head {
                    self.left
                } else {
                    Prim1::new(self.rho_star_left, self.u_star, self.p_star)
                }
            }
            Wave::Rarefaction => {
                if xi < span.head {
                    self.left
                } else if xi > span.tail {
                    Prim1::new(self.rho_star_left, self.u_star, self.p_star)
                } else {
                    // Inside the fan.
                    let cl = self.left.sound_speed(g);
                    let gp1 = g + S::one();
                    let g1 = g - S::one();
                    let factor =
                        S::lit(2.0) / gp1 + g1 / (gp1 * cl) * (self.left.u - xi);
                    Prim1::new(
                        self.left.rho * factor.powf(S::lit(2.0) / g1),
                        S::lit(2.0) / gp1 * (cl + S::half() * g1 * self.left.u + xi),
                        self.left.p * factor.powf(S::lit(2.0) * g / g1),
                    )
                }
            }
        }
    }

    fn sample_right(&self, xi: S) -> Prim1<S> {
        let g = self.gamma;
        let span = self.right_span();
        match self.right_wave {
            Wave::Shock => {
                if xi > span.head {
                    self.right
                } else {
                    Prim1::new(self.rho_star_right, self.u_star, self.p_star)
                }
            }
            Wave::Rarefaction => {
                if xi > span.head {
                    self.right
                } else if xi < span.tail {
                    Prim1::new(self.rho_star_right, self.u_star, self.p_star)
                } else {
                    let cr = self.right.sound_speed(g);
                    let gp1 = g + S::one();
                    let g1 = g - S::one();
                    let factor =
                        S::lit(2.0) / gp1 - g1 / (gp1 * cr) * (self.right.u - xi);
                    Prim1::new(
                        self.right.rho * factor.powf(S::lit(2.0) / g1),
                        S::lit(2.0) / gp1 * (-cr + S::half() * g1 * self.right.u + xi),
                        self.right.p * factor.powf(S::lit(2.0) * g / g1),
                    )
                }
            }
        }
    }
}

/// Solves and samples in one call.
pub fn exact_riemann<S: Scalar>(
    left: Prim1<S>,
    right: Prim1<S>,
    gas: &GasModel<S>,
    xi: S,
) -> Result<Prim1<S>> {
    Ok(solve(left, right, gas)?.sample(xi))
}
