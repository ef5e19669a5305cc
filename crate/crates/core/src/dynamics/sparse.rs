//! Triplet-list operator used inside the integrators.
//!
//! The public surface stays dense ([`OperatorMatrix`]); the propagators
//! convert each Hamiltonian and jump operator once and then work on the
//! handful of non-zero entries, which keeps the Lindblad right-hand side
//! at O(nnz · dim) instead of O(dim³).

use nalgebra::{DMatrix, DVector};

use crate::hilbert::OperatorMatrix;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOperator {
    pub fn empty(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let dim = m.nrows();
        let mut entries = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..dim {
                let v = m[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    entries.push((r, c, v));
                }
            }
        }
        Self { dim, entries }
    }

    pub fn from_operator(op: &OperatorMatrix) -> Self {
        Self::from_dense(op.entries())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect() }
    }

    /// Append `factor · other` (duplicate positions are summed on use).
    pub fn push_scaled(&mut self, other: &SparseOperator, factor: C64) {
        debug_assert_eq!(self.dim, other.dim);
        if factor == C64::new(0.0, 0.0) {
            return;
        }
        self.entries.extend(other.entries.iter().map(|&(r, c, v)| (r, c, v * factor)));
    }

    /// Conjugate by the diagonal unitary `diag(phases)`: entry (j, k) is
    /// multiplied by `phases[j] · conj(phases[k])`.
    pub fn rotated(&self, phases: &[C64]) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&(r, c, v)| (r, c, v * phases[r] * phases[c].conj())).collect(),
        }
    }

    /// out += factor · (self · x)
    pub fn apply_add(&self, x: &DVector<C64>, factor: C64, out: &mut DVector<C64>) {
        for &(r, c, v) in &self.entries {
            out[r] += factor * v * x[c];
        }
    }

    /// out += factor · (self · m)
    pub fn left_mul_add(&self, m: &DMatrix<C64>, factor: C64, out: &mut DMatrix<C64>) {
        let n = m.ncols();
        for &(r, c, v) in &self.entries {
            let w = factor * v;
            for col in 0..n {
                out[(r, col)] += w * m[(c, col)];
            }
        }
    }

    /// out += factor · (m · self†)
    pub fn right_mul_adjoint_add(&self, m: &DMatrix<C64>, factor: C64, out: &mut DMatrix<C64>) {
        // (m A†)_{ab} = Σ_k m_{ak} conj(A_{bk})
        let rows = m.nrows();
        for &(b, k, v) in &self.entries {
            let w = factor * v.conj();
            for a in 0..rows {
                out[(a, b)] += w * m[(a, k)];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(dim: usize, shift: f64) -> DMatrix<C64> {
        DMatrix::from_fn(dim, dim, |r, c| {
            if (r + 2 * c) % 3 == 0 {
                C64::new(r as f64 - shift, c as f64 * 0.5)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn products_match_dense() {
        let a = sample(6, 1.0);
        let m = DMatrix::from_fn(6, 6, |r, c| C64::new((r * c) as f64 * 0.1, r as f64 - c as f64));
        let s = SparseOperator::from_dense(&a);
        assert_eq!(s.to_dense(), a);

        let mut out = DMatrix::zeros(6, 6);
        s.left_mul_add(&m, C64::new(1.0, 0.0), &mut out);
        assert!((out - &a * &m).norm() < 1e-12);

        let mut out = DMatrix::zeros(6, 6);
        s.right_mul_adjoint_add(&m, C64::new(1.0, 0.0), &mut out);
        assert!((out - &m * a.adjoint()).norm() < 1e-12);

        let x = DVector::from_fn(6, |r, _| C64::new(r as f64, 1.0));
        let mut y = DVector::zeros(6);
        s.apply_add(&x, C64::new(0.0, 2.0), &mut y);
        assert!((y - (&a * &x) * C64::new(0.0, 2.0)).norm() < 1e-12);

        assert_eq!(s.adjoint().to_dense(), a.adjoint());
    }

    #[test]
    fn rotation_is_conjugation() {
        let a = sample(5, 0.3);
        let phases: Vec<C64> = (0..5).map(|j| C64::from_polar(1.0, 0.7 * j as f64)).collect();
        let u = DMatrix::from_diagonal(&DVector::from_row_slice(&phases));
        let expect = &u * &a * u.adjoint();
        let got = SparseOperator::from_dense(&a).rotated(&phases).to_dense();
        assert!((got - expect).norm() < 1e-12);
    }
}
