//! Dense spectral propagation and a sparse truncated-Taylor exponential.

use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::SymmetricOperator;

/// Largest dimension accepted for dense eigendecomposition by default.
pub const DEFAULT_DENSE_CEILING: usize = 1 << 14;

/// Something that can apply `exp(-i A t)` to a vector in place.
pub trait Exponential {
    fn dim(&self) -> usize;
    fn apply_exp(&self, psi: &mut [Complex64], t: f64);

    /// Exact inverse of `apply_exp(psi, t)`. Product formulas override this
    /// to reverse their factor order.
    fn apply_exp_adjoint(&self, psi: &mut [Complex64], t: f64) {
        self.apply_exp(psi, -t);
    }
}

/// Eigendecomposition `A = Q Λ Qᵀ` of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct Spectral {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl Spectral {
    pub fn new(op: &SymmetricOperator) -> Result<Self> {
        Self::with_ceiling(op, DEFAULT_DENSE_CEILING)
    }

    pub fn with_ceiling(op: &SymmetricOperator, ceiling: usize) -> Result<Self> {
        let dim = op.dim();
        if dim > ceiling {
            return Err(Error::DimensionTooLarge { dim, ceiling });
        }
        let dense = DMatrix::from_row_slice(dim, dim, &op.to_dense());
        let eig = SymmetricEigen::try_new(dense, f64::EPSILON, 0)
            .ok_or(Error::NoConvergence)?;
        Ok(Self {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// Column `k` is the eigenvector of `eigenvalues()[k]`.
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k).iter().copied().collect()
    }

    pub fn lowest(&self) -> (f64, Vec<f64>) {
        let k = self
            .values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(0);
        (self.values[k], self.eigenvector(k))
    }

    /// `Qᵀ ψ`: amplitudes in the eigenbasis.
    pub fn to_eigenbasis(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let dim = self.values.len();
        let parts = DMatrix::from_fn(dim, 2, |r, c| if c == 0 { psi[r].re } else { psi[r].im });
        let coeffs = self.vectors.tr_mul(&parts);
        (0..dim)
            .map(|k| Complex64::new(coeffs[(k, 0)], coeffs[(k, 1)]))
            .collect()
    }

    fn back_to_standard(&self, coeffs: &[Complex64], psi: &mut [Complex64]) {
        let dim = self.values.len();
        let parts = DMatrix::from_fn(dim, 2, |r, c| if c == 0 { coeffs[r].re } else { coeffs[r].im });
        let back = &self.vectors * parts;
        for (r, out) in psi.iter_mut().enumerate() {
            *out = Complex64::new(back[(r, 0)], back[(r, 1)]);
        }
    }
}

impl Exponential for Spectral {
    fn dim(&self) -> usize {
        self.values.len()
    }

    fn apply_exp(&self, psi: &mut [Complex64], t: f64) {
        let mut coeffs = self.to_eigenbasis(psi);
        for (c, &e) in coeffs.iter_mut().zip(&self.values) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        self.back_to_standard(&coeffs, psi);
    }
}

/// Remainder target for one Taylor sub-step, relative to the vector norm.
const TAYLOR_TOLERANCE: f64 = 1e-16;
/// Largest `‖A‖·|h|` handled by one sub-step.
const TAYLOR_THETA: f64 = 1.0;

/// Gershgorin interval `[lo, hi]` containing the spectrum of `diag + λ·op`.
pub fn gershgorin(diag: &[f64], op: &SymmetricOperator, lambda: f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (r, &d) in diag.iter().enumerate() {
        let mut centre = d;
        let mut radius = 0.0;
        for (c, v) in op.row(r) {
            if c == r {
                centre += lambda * v;
            } else {
                radius += (lambda * v).abs();
            }
        }
        lo = lo.min(centre - radius);
        hi = hi.max(centre + radius);
    }
    if lo > hi {
        (0.0, 0.0)
    } else {
        (lo, hi)
    }
}

/// `exp(-i (diag + λ·op) t) ψ` by a truncated Taylor series.
///
/// The spectrum is shifted to the centre of its Gershgorin interval and
/// `t` split so every sub-step has `‖A − c‖·|h| <= 1`. Each sub-step sums
/// terms until the Lagrange remainder `θ^{K+1} e^θ / (K+1)!` drops below
/// `1e-16`.
pub fn expm_multiply(diag: &[f64], op: &SymmetricOperator, lambda: f64, psi: &mut [Complex64], t: f64) {
    let dim = diag.len();
    assert_eq!(op.dim(), dim);
    assert_eq!(psi.len(), dim);
    if t == 0.0 || dim == 0 {
        return;
    }
    let (lo, hi) = gershgorin(diag, op, lambda);
    let centre = 0.5 * (lo + hi);
    let radius = 0.5 * (hi - lo);
    let substeps = libm::ceil(radius * t.abs() / TAYLOR_THETA).max(1.0) as usize;
    let h = t / substeps as f64;
    let theta = radius * h.abs();
    let mut terms = 0usize;
    {
        let mut bound = libm::exp(theta);
        loop {
            terms += 1;
            bound *= theta / terms as f64;
            if bound <= TAYLOR_TOLERANCE || theta == 0.0 {
                break;
            }
        }
    }
    let shifted: Vec<f64> = diag.iter().map(|d| d - centre).collect();
    let mut term: Vec<Complex64> = alloc::vec![Complex64::default(); dim];
    let mut next: Vec<Complex64> = alloc::vec![Complex64::default(); dim];
    let mut acc: Vec<Complex64> = alloc::vec![Complex64::default(); dim];
    let phase = Complex64::from_polar(1.0, -centre * h);
    for _ in 0..substeps {
        term.copy_from_slice(psi);
        acc.copy_from_slice(psi);
        for k in 1..=terms {
            op.apply(&term, &mut next);
            let scale = Complex64::new(0.0, -h / k as f64);
            for r in 0..dim {
                let applied = next[r] * lambda + term[r] * shifted[r];
                next[r] = applied * scale;
            }
            core::mem::swap(&mut term, &mut next);
            for (a, t) in acc.iter_mut().zip(&term) {
                *a += *t;
            }
        }
        for (p, a) in psi.iter_mut().zip(&acc) {
            *p = *a * phase;
        }
    }
}

/// Sparse `exp(-i A t)` as an [`Exponential`].
#[derive(Debug, Clone)]
pub struct SparseExponential<'a> {
    pub op: &'a SymmetricOperator,
}

impl Exponential for SparseExponential<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply_exp(&self, psi: &mut [Complex64], t: f64) {
        let zeros = alloc::vec![0.0; self.op.dim()];
        expm_multiply(&zeros, self.op, 1.0, psi, t);
    }
}

pub fn norm(psi: &[Complex64]) -> f64 {
    libm::sqrt(psi.iter().map(|c| c.norm_sqr()).sum())
}

/// `⟨a|b⟩`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `⟨ψ|A|ψ⟩` for real symmetric `A`.
pub fn expectation(op: &SymmetricOperator, psi: &[Complex64]) -> f64 {
    let mut out = alloc::vec![Complex64::default(); psi.len()];
    op.apply(psi, &mut out);
    inner(psi, &out).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sample_op() -> SymmetricOperator {
        SymmetricOperator::from_upper_triplets(
            4,
            vec![
                (0, 0, 0.3),
                (0, 1, 0.7),
                (1, 1, -1.1),
                (1, 3, 0.25),
                (2, 2, 2.0),
                (2, 3, -0.4),
                (3, 3, 0.9),
            ],
        )
        .unwrap()
    }

    fn sample_psi() -> Vec<Complex64> {
        let v = vec![
            Complex64::new(0.5, 0.1),
            Complex64::new(-0.3, 0.4),
            Complex64::new(0.2, -0.6),
            Complex64::new(0.1, 0.25),
        ];
        let n = norm(&v);
        v.into_iter().map(|c| c / n).collect()
    }

    #[test]
    fn spectral_reconstructs() {
        let op = sample_op();
        let s = Spectral::new(&op).unwrap();
        let dense = op.to_dense();
        for r in 0..4 {
            for c in 0..4 {
                let v: f64 = (0..4)
                    .map(|k| s.eigenvalues()[k] * s.eigenvector(k)[r] * s.eigenvector(k)[c])
                    .sum();
                assert!((v - dense[r * 4 + c]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn taylor_matches_spectral() {
        let op = sample_op();
        let s = Spectral::new(&op).unwrap();
        for t in [0.01, 0.7, -3.0, 12.5] {
            let mut a = sample_psi();
            let mut b = sample_psi();
            s.apply_exp(&mut a, t);
            SparseExponential { op: &op }.apply_exp(&mut b, t);
            let diff: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(diff < 1e-12, "t={t} diff={diff}");
            assert!((norm(&b) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn too_large_is_rejected() {
        let err = Spectral::with_ceiling(&sample_op(), 3).unwrap_err();
        assert_eq!(err, Error::DimensionTooLarge { dim: 4, ceiling: 3 });
    }

    #[test]
    fn gershgorin_contains_spectrum() {
        let op = sample_op();
        let (lo, hi) = gershgorin(&[0.0; 4], &op, 1.0);
        for &e in Spectral::new(&op).unwrap().eigenvalues() {
            assert!(lo <= e && e <= hi);
        }
    }
}
