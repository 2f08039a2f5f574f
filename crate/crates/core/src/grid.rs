//! Uniform n×n periodic mesh of the unit square.
//!
//! Cells are squares of side h = 1/n with centers ((i+½)h, (j+½)h),
//! 0 ≤ i, j < n; i indexes x, j indexes y. Storage everywhere in the crate
//! is row-major over j (index = j·n + i). All boundaries are periodic.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Geometry of the uniform periodic grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D<S> {
    n: usize,
    h: S,
}

impl<S: Scalar> Grid2D<S> {
    /// Builds an n×n grid; requires n ≥ 2.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Param(format!("grid needs n >= 2, got {n}")));
        }
        let h = S::one() / S::from_usize(n).expect("n representable");
        Ok(Self { n, h })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Cell size h = 1/n (Δx = Δy = h).
    #[inline]
    pub fn h(&self) -> S {
        self.h
    }

    /// Cell area |K| = h².
    #[inline]
    pub fn cell_area(&self) -> S {
        self.h * self.h
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.n * self.n
    }

    /// Row-major linear index of cell (i, j).
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        j * self.n + i
    }

    /// Center ((i+½)h, (j+½)h) of cell (i, j).
    #[inline]
    pub fn cell_center(&self, i: usize, j: usize) -> (S, S) {
        let half = S::half();
        let fi = S::from_usize(i).expect("index representable");
        let fj = S::from_usize(j).expect("index representable");
        ((fi + half) * self.h, (fj + half) * self.h)
    }

    /// Periodic successor of a 1D index (wraps n−1 → 0).
    #[inline]
    pub fn next(&self, i: usize) -> usize {
        if i + 1 == self.n {
            0
        } else {
            i + 1
        }
    }

    /// Periodic predecessor of a 1D index (wraps 0 → n−1).
    #[inline]
    pub fn prev(&self, i: usize) -> usize {
        if i == 0 {
            self.n - 1
        } else {
            i - 1
        }
    }
}
