//! Finitely supported probability measures: weighted atom lists in R^d.
//!
//! The analysis builds one such measure per grid cell, with one atom per
//! mesh level (coordinates are the per-level solution values, e.g.
//! (ρ, m₁, m₂, S, E) in R⁵) and uniform weights. Atom counts therefore
//! stay tiny.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tolerance on Σ weights == 1.
const WEIGHT_TOL: f64 = 1e-12;

/// A probability measure with finitely many weighted atoms in R^d.
/// Coordinates are stored atom-major: atom i occupies
/// `coords[i*dim .. (i+1)*dim]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure<S> {
    dim: usize,
    coords: Vec<S>,
    weights: Vec<S>,
}

impl<S: Scalar> DiscreteMeasure<S> {
    /// Validates: at least one atom, finite coordinates, non-negative
    /// weights summing to 1 within 1e-12.
    pub fn new(dim: usize, coords: Vec<S>, weights: Vec<S>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Param("atom dimension must be ≥ 1".into()));
        }
        if weights.is_empty() {
            return Err(Error::Param("a measure needs at least one atom".into()));
        }
        if coords.len() != weights.len() * dim {
            return Err(Error::Param(format!(
                "{} coordinates for {} atoms of dimension {dim}",
                coords.len(),
                weights.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Param("atom coordinates must be finite".into()));
        }
        let mut sum = S::zero();
        for &w in &weights {
            if !(w >= S::zero()) || !w.is_finite() {
                return Err(Error::Param(format!(
                    "weights must be non-negative, got {}",
                    w.to_f64_lossy()
                )));
            }
            sum += w;
        }
        if (sum - S::one()).abs() > S::lit(WEIGHT_TOL) {
            return Err(Error::Param(format!(
                "weights must sum to 1 (within {WEIGHT_TOL}), got {}",
                sum.to_f64_lossy()
            )));
        }
        Ok(Self {
            dim,
            coords,
            weights,
        })
    }

    /// Point mass at one atom.
    pub fn dirac(point: &[S]) -> Result<Self> {
        Self::new(point.len(), point.to_vec(), vec![S::one()])
    }

    /// Uniform weights 1/k over k atoms (atom-major coordinates).
    pub fn uniform(dim: usize, coords: Vec<S>) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(Error::Param(format!(
                "{} coordinates do not form atoms of dimension {dim}",
                coords.len()
            )));
        }
        let k = coords.len() / dim;
        if k == 0 {
            return Err(Error::Param("a measure needs at least one atom".into()));
        }
        let w = S::one() / S::from_usize(k).expect("small atom count");
        Self::new(dim, coords, vec![w; k])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_atoms(&self) -> usize {
        self.weights.len()
    }

    pub fn atom(&self, i: usize) -> &[S] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> S {
        self.weights[i]
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    /// Merges atoms whose coordinates coincide within `tol` (max-norm),
    /// summing their weights; the surviving atom is the first of each
    /// group. Zero-weight atoms are kept only if nothing merges into them.
    pub fn merge_coincident(&self, tol: S) -> Self {
        self.merge_coincident_with_map(tol).0
    }

    /// As [`merge_coincident`](Self::merge_coincident), also returning, for
    /// each original atom, the index of the merged atom it joined.
    pub fn merge_coincident_with_map(&self, tol: S) -> (Self, Vec<usize>) {
        let k = self.n_atoms();
        let mut kept: Vec<usize> = Vec::with_capacity(k);
        let mut weights: Vec<S> = Vec::with_capacity(k);
        let mut map = vec![0usize; k];
        'outer: for i in 0..k {
            for (slot, &j) in kept.iter().enumerate() {
                let same = self
                    .atom(i)
                    .iter()
                    .zip(self.atom(j))
                    .all(|(a, b)| (*a - *b).abs() <= tol);
                if same {
                    weights[slot] += self.weights[i];
                    map[i] = slot;
                    continue 'outer;
                }
            }
            map[i] = kept.len();
            kept.push(i);
            weights.push(self.weights[i]);
        }
        let mut coords = Vec::with_capacity(kept.len() * self.dim);
        for &j in &kept {
            coords.extend_from_slice(self.atom(j));
        }
        (
            Self {
                dim: self.dim,
                coords,
                weights,
            },
            map,
        )
    }
}

/// Euclidean distance between two points of equal dimension.
pub fn euclid<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut sum = S::zero();
    for (x, y) in a.iter().zip(b) {
        let d = *x - *y;
        sum += d * d;
    }
    sum.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn validation_catches_bad_inputs() {
        type M = DiscreteMeasure<f64>;
        assert!(M::new(0, vec![], vec![]).is_err());
        assert!(M::new(2, vec![1.0, 2.0], vec![]).is_err());
        assert!(M::new(1, vec![1.0, 2.0], vec![0.5, 0.5, 0.0]).is_err());
        assert!(M::new(1, vec![1.0, 2.0], vec![0.5, -0.5]).is_err());
        assert!(M::new(1, vec![1.0, 2.0], vec![0.7, 0.7]).is_err());
        assert!(M::new(1, vec![f64::NAN, 2.0], vec![0.5, 0.5]).is_err());
        assert!(M::new(1, vec![1.0, 2.0], vec![0.5, 0.5]).is_ok());
        // Within the 1e-12 sum tolerance.
        assert!(M::new(1, vec![1.0, 2.0], vec![0.5, 0.5 + 5e-13]).is_ok());
    }

    #[test]
    fn accessors_are_atom_major() {
        let m = DiscreteMeasure::uniform(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.n_atoms(), 2);
        assert_eq!(m.dim(), 2);
        assert_eq!(m.atom(0), &[1.0, 2.0]);
        assert_eq!(m.atom(1), &[3.0, 4.0]);
        assert_relative_eq!(m.weight(0), 0.5);
    }

    #[test]
    fn coincident_atoms_merge_with_summed_weights() {
        let m = DiscreteMeasure::new(
            1,
            vec![0.0, 1.0, 1e-15, 2.0],
            vec![0.25, 0.25, 0.25, 0.25],
        )
        .unwrap();
        let merged = m.merge_coincident(1e-14);
        assert_eq!(merged.n_atoms(), 3);
        assert_eq!(merged.atom(0), &[0.0]);
        assert_relative_eq!(merged.weight(0), 0.5);
        assert_relative_eq!(merged.weight(1), 0.25);
        // Distinct atoms survive untouched.
        let lone = m.merge_coincident(1e-20);
        assert_eq!(lone.n_atoms(), 4);
    }

    #[test]
    fn euclid_matches_hand_values() {
        assert_relative_eq!(euclid(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
        assert_eq!(euclid::<f64>(&[1.5], &[1.5]), 0.0);
    }
}
