//! Cell-averaged conserved fields on the periodic grid.
//!
//! A [`ConservedField`] stores the four conserved planes (ρ, m₁, m₂, E) as
//! structure-of-arrays in the grid's row-major order. Admissibility
//! (ρ > 0 and p > 0 everywhere) is a checkable property, not a type
//! invariant: the solvers validate on entry and after every update.

use crate::error::{Error, Result};
use crate::gas::{Conserved, GasModel, Primitive};
use crate::grid::Grid2D;
use crate::scalar::Scalar;

/// The four conserved planes on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservedField<S> {
    grid: Grid2D<S>,
    rho: Vec<S>,
    m1: Vec<S>,
    m2: Vec<S>,
    en: Vec<S>,
}

/// Domain sums h²·Σ of the conserved quantities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Totals<S> {
    pub mass: S,
    pub momentum: (S, S),
    pub energy: S,
}

impl<S: Scalar> ConservedField<S> {
    /// Constant field.
    pub fn uniform(grid: Grid2D<S>, c: Conserved<S>) -> Self {
        let n = grid.n_cells();
        Self {
            grid,
            rho: vec![c.rho; n],
            m1: vec![c.m1; n],
            m2: vec![c.m2; n],
            en: vec![c.en; n],
        }
    }

    /// Samples primitive data at cell centers and converts. This is how all
    /// benchmark initial data is produced (center sampling, no quadrature).
    pub fn from_primitive_fn(
        grid: Grid2D<S>,
        gas: &GasModel<S>,
        mut f: impl FnMut(S, S) -> Primitive<S>,
    ) -> Result<Self> {
        let mut field = Self::uniform(grid, Conserved::new(S::one(), S::zero(), S::zero(), S::one()));
        for j in 0..grid.n() {
            for i in 0..grid.n() {
                let (x, y) = grid.cell_center(i, j);
                let c = gas.primitive_to_conserved(f(x, y))?;
                field.set(i, j, c);
            }
        }
        Ok(field)
    }

    /// Builds a field from already-conserved per-cell values.
    pub fn from_conserved_fn(grid: Grid2D<S>, mut f: impl FnMut(S, S) -> Conserved<S>) -> Self {
        let mut field = Self::uniform(grid, Conserved::new(S::one(), S::zero(), S::zero(), S::one()));
        for j in 0..grid.n() {
            for i in 0..grid.n() {
                let (x, y) = grid.cell_center(i, j);
                field.set(i, j, f(x, y));
            }
        }
        field
    }

    /// Assembles a field from raw planes (used by the snapshot reader).
    pub fn from_planes(
        grid: Grid2D<S>,
        rho: Vec<S>,
        m1: Vec<S>,
        m2: Vec<S>,
        en: Vec<S>,
    ) -> Result<Self> {
        let n = grid.n_cells();
        if rho.len() != n || m1.len() != n || m2.len() != n || en.len() != n {
            return Err(Error::Param(format!(
                "plane length mismatch: grid has {n} cells"
            )));
        }
        Ok(Self {
            grid,
            rho,
            m1,
            m2,
            en,
        })
    }

    #[inline]
    pub fn grid(&self) -> Grid2D<S> {
        self.grid
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Conserved<S> {
        let k = self.grid.idx(i, j);
        Conserved::new(self.rho[k], self.m1[k], self.m2[k], self.en[k])
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, c: Conserved<S>) {
        let k = self.grid.idx(i, j);
        self.rho[k] = c.rho;
        self.m1[k] = c.m1;
        self.m2[k] = c.m2;
        self.en[k] = c.en;
    }

    #[inline]
    pub fn rho(&self) -> &[S] {
        &self.rho
    }

    #[inline]
    pub fn m1(&self) -> &[S] {
        &self.m1
    }

    #[inline]
    pub fn m2(&self) -> &[S] {
        &self.m2
    }

    #[inline]
    pub fn en(&self) -> &[S] {
        &self.en
    }

    /// Mutable planes in one borrow, for the update kernels.
    pub(crate) fn planes_mut(&mut self) -> (&mut [S], &mut [S], &mut [S], &mut [S]) {
        (&mut self.rho, &mut self.m1, &mut self.m2, &mut self.en)
    }

    /// Checks ρ > 0 and p > 0 on every cell, reporting the first offender.
    pub fn validate(&self, gas: &GasModel<S>) -> Result<()> {
        let n = self.grid.n();
        for j in 0..n {
            for i in 0..n {
                let c = self.get(i, j);
                if !(c.rho > S::zero()) || !c.rho.is_finite() {
                    return Err(Error::DomainAt {
                        what: "density",
                        value: c.rho.to_f64_lossy(),
                        i,
                        j,
                    });
                }
                let p = gas.pressure_unchecked(c);
                if !(p > S::zero()) || !p.is_finite() {
                    return Err(Error::DomainAt {
                        what: "pressure",
                        value: p.to_f64_lossy(),
                        i,
                        j,
                    });
                }
            }
        }
        Ok(())
    }

    /// Domain integrals h²·Σ of mass, momentum, and energy, summed in index
    /// order (deterministic).
    pub fn totals(&self) -> Totals<S> {
        let area = self.grid.cell_area();
        let sum = |v: &[S]| -> S { v.iter().copied().fold(S::zero(), |a, b| a + b) * area };
        Totals {
            mass: sum(&self.rho),
            momentum: (sum(&self.m1), sum(&self.m2)),
            energy: sum(&self.en),
        }
    }

    /// Smallest density over the field.
    pub fn min_density(&self) -> S {
        self.rho.iter().copied().fold(S::infinity(), S::min)
    }

    /// Smallest pressure over the field (may be non-positive for
    /// inadmissible fields; used by diagnostics).
    pub fn min_pressure(&self, gas: &GasModel<S>) -> S {
        let mut min = S::infinity();
        for k in 0..self.rho.len() {
            let c = Conserved::new(self.rho[k], self.m1[k], self.m2[k], self.en[k]);
            min = min.min(gas.pressure_unchecked(c));
        }
        min
    }

    /// Smallest specific entropy over the field; errors on inadmissible
    /// states.
    pub fn min_specific_entropy(&self, gas: &GasModel<S>) -> Result<S> {
        let mut min = S::infinity();
        for k in 0..self.rho.len() {
            let c = Conserved::new(self.rho[k], self.m1[k], self.m2[k], self.en[k]);
            min = min.min(gas.specific_entropy(c)?);
        }
        Ok(min)
    }

    /// The x↔y transposed field with swapped momentum components. Used by
    /// the reflection-symmetry tests: a step commutes with this map.
    pub fn transpose_swap(&self) -> Self {
        let n = self.grid.n();
        let mut out = self.clone();
        for j in 0..n {
            for i in 0..n {
                let c = self.get(j, i);
                out.set(i, j, Conserved::new(c.rho, c.m2, c.m1, c.en));
            }
        }
        out
    }

    /// Lossy conversion to the `f64` representation used by file formats.
    pub fn to_f64(&self) -> ConservedField<f64> {
        let conv = |v: &[S]| v.iter().map(|x| x.to_f64_lossy()).collect();
        ConservedField {
            grid: Grid2D::new(self.grid.n()).expect("same n"),
            rho: conv(&self.rho),
            m1: conv(&self.m1),
            m2: conv(&self.m2),
            en: conv(&self.en),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gas() -> GasModel<f64> {
        GasModel::standard()
    }

    #[test]
    fn uniform_field_totals() {
        let grid = Grid2D::new(8).unwrap();
        let f = ConservedField::uniform(grid, Conserved::new(2.0, 1.0, -1.0, 5.0));
        let t = f.totals();
        // h²·Σ over 64 cells of h² = 1/64 each reproduces the constants.
        assert_relative_eq!(t.mass, 2.0, max_relative = 1e-14);
        assert_relative_eq!(t.momentum.0, 1.0, max_relative = 1e-14);
        assert_relative_eq!(t.momentum.1, -1.0, max_relative = 1e-14);
        assert_relative_eq!(t.energy, 5.0, max_relative = 1e-14);
    }

    #[test]
    fn validate_finds_the_offending_cell() {
        let grid = Grid2D::new(4).unwrap();
        let mut f = ConservedField::uniform(grid, Conserved::new(1.0, 0.0, 0.0, 2.5));
        f.set(2, 1, Conserved::new(1.0, 2.0, 0.0, 1.0)); // E < kinetic → p < 0
        match f.validate(&gas()) {
            Err(Error::DomainAt { what, i, j, .. }) => {
                assert_eq!(what, "pressure");
                assert_eq!((i, j), (2, 1));
            }
            other => panic!("expected pressure domain error, got {other:?}"),
        }
    }

    #[test]
    fn transpose_swap_is_an_involution() {
        let grid = Grid2D::<f64>::new(6).unwrap();
        let f = ConservedField::from_conserved_fn(grid, |x, y| {
            Conserved::new(1.0 + x, x * y, x - y, 3.0 + y)
        });
        let back = f.transpose_swap().transpose_swap();
        assert_eq!(f, back);
    }

    #[test]
    fn sampling_uses_cell_centers() {
        let grid = Grid2D::new(2).unwrap();
        let f = ConservedField::from_primitive_fn(grid, &gas(), |x, y| {
            Primitive::new(1.0 + x + 2.0 * y, 0.0, 0.0, 1.0)
        })
        .unwrap();
        assert_eq!(f.get(0, 0).rho, 1.0 + 0.25 + 0.5);
        assert_eq!(f.get(1, 1).rho, 1.0 + 0.75 + 1.5);
    }
}
