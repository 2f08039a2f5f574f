//! Finite-volume solvers for the 2D compressible Euler equations on the
//! periodic unit square, with averaged-convergence post-processing.
//!
//! The crate has three layers:
//!
//! * **State and thermodynamics** — [`gas`], [`grid`], [`field`]: the γ-law
//!   gas model, the uniform periodic mesh, and cell-averaged conserved
//!   fields.
//! * **Solvers** — [`flux`]/[`flm`]: a first-order entropy-stable scheme
//!   built on upwind fluxes with jump diffusion and velocity-jump
//!   dissipation (plus its plain-upwind variant); [`riemann`]/[`grp`]: a
//!   second-order scheme with minmod reconstruction and a midpoint face
//!   flux from an exact 1D Riemann solution; [`driver`]: the shared
//!   explicit time loop.
//! * **Analysis** — [`kconv`]: prolongation across a dyadic mesh hierarchy,
//!   Cesàro averages, first variances, L¹ error metrics with observed
//!   orders, and the Jensen energy defect; [`measure`]/[`transport`]:
//!   exact Wasserstein distances between small discrete measures and the
//!   field-level E4 metric; [`bench`]: seeded benchmark generators and the
//!   multi-resolution experiment runner; [`io`]: EULF1 snapshots, CSV, and
//!   PGM output.
//!
//! Everything numeric is generic over the [`scalar::Scalar`] type; the
//! aliases below fix the default double-precision instantiation.

pub mod bench;
pub mod driver;
pub mod error;
pub mod field;
pub mod flm;
pub mod flux;
pub mod gas;
pub mod grid;
pub mod grp;
pub mod io;
pub mod kconv;
pub mod measure;
pub mod prng;
pub mod riemann;
pub mod scalar;
pub mod transport;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default scalar type of the shipped binaries and file formats.
pub type Real = f64;

/// Double-precision aliases for the core types.
pub type GasModel64 = gas::GasModel<Real>;
pub type Conserved64 = gas::Conserved<Real>;
pub type Primitive64 = gas::Primitive<Real>;
pub type Grid2D64 = grid::Grid2D<Real>;
pub type ConservedField64 = field::ConservedField<Real>;
pub type FlmParams64 = flm::FlmParams<Real>;
pub type GrpParams64 = grp::GrpParams<Real>;
pub type SolutionStack64 = kconv::SolutionStack<Real>;
pub type DiscreteMeasure64 = measure::DiscreteMeasure<Real>;
