//! Complex spectra, the imaginary-part gap, and sweep/tracking analyses.
//!
//! [`full_diagonalize`] is the dense reference path: it densifies the
//! operator and hands it to LAPACK's general complex eigensolver. The
//! [`translation`] submodule exploits the chains' translation invariance to
//! diagonalize one momentum block at a time, which yields the same
//! eigenvalue multiset at a fraction of the cost and is what the sweep
//! drivers use. Both paths are cross-checked against each other in tests.

pub mod flow;
pub mod sweep;
pub mod translation;

use ndarray::{Array2, ArrayView1, Axis};
use ndarray_linalg::{Eig, EigVals};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::OperatorMatrix;

/// Two eigenvalues whose imaginary parts sit closer than this are treated
/// as a degenerate top level, making the gap read zero.
pub const GAP_DEGENERACY_TOL: f64 = 1e-9;

/// Eigenvalues (and optionally unit-norm right eigenvectors) sorted by
/// descending imaginary part, ties broken by ascending real part.
#[derive(Debug, Clone)]
pub struct ComplexSpectrum {
    pub eigenvalues: Vec<Complex64>,
    /// Right eigenvectors as columns, aligned with `eigenvalues`.
    pub eigenvectors: Option<Array2<Complex64>>,
}

impl ComplexSpectrum {
    pub(crate) fn from_unsorted(
        values: Vec<Complex64>,
        vectors: Option<Array2<Complex64>>,
    ) -> Self {
        let perm = sort_permutation(&values);
        let eigenvalues = perm.iter().map(|&i| values[i]).collect();
        let eigenvectors = vectors.map(|v| v.select(Axis(1), &perm));
        ComplexSpectrum {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalue with the largest imaginary part.
    pub fn max_imag(&self) -> Complex64 {
        self.eigenvalues[0]
    }

    /// Column view of the i-th eigenvector, if vectors were requested.
    pub fn eigenvector(&self, i: usize) -> Option<ArrayView1<'_, Complex64>> {
        self.eigenvectors.as_ref().map(|v| v.column(i))
    }

    /// Sum of all eigenvalues; zero for the traceless chain Hamiltonians.
    pub fn eigenvalue_sum(&self) -> Complex64 {
        self.eigenvalues.iter().sum()
    }
}

/// Permutation that sorts eigenvalues by (Im desc, Re asc). Total order via
/// `total_cmp`, so the result is deterministic for any input.
pub(crate) fn sort_permutation(values: &[Complex64]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..values.len()).collect();
    perm.sort_by(|&a, &b| {
        values[b]
            .im
            .total_cmp(&values[a].im)
            .then(values[a].re.total_cmp(&values[b].re))
    });
    perm
}

/// All eigenvalues of the densified operator via LAPACK zgeev.
///
/// Eigenvectors come back with unit 2-norm. Dimensions above `2^14` are
/// refused; use the translation-block path or raise your own dense solve.
pub fn full_diagonalize(h: &OperatorMatrix, want_vectors: bool) -> Result<ComplexSpectrum> {
    let dim = h.dim();
    if dim > 1 << 14 {
        return Err(Error::ResourceGuard(format!(
            "dense diagonalization refused at dim {dim} > 2^14"
        )));
    }
    let dense = h.to_dense();
    let context = format!("dense eigensolve at dim {dim}");
    if want_vectors {
        let (vals, vecs) = dense.eig().map_err(Error::linalg(context))?;
        let mut vecs = vecs;
        for mut col in vecs.columns_mut() {
            let norm = col.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                col.map_inplace(|a| *a /= norm);
            }
        }
        Ok(ComplexSpectrum::from_unsorted(vals.to_vec(), Some(vecs)))
    } else {
        let vals = dense.eigvals().map_err(Error::linalg(context))?;
        Ok(ComplexSpectrum::from_unsorted(vals.to_vec(), None))
    }
}

/// Gap between the largest and second-largest imaginary parts.
/// Reads zero when the top level is degenerate within [`GAP_DEGENERACY_TOL`].
pub fn complex_gap(s: &ComplexSpectrum) -> f64 {
    gap_of_sorted(&s.eigenvalues)
}

pub(crate) fn gap_of_sorted(sorted: &[Complex64]) -> f64 {
    if sorted.len() < 2 {
        return 0.0;
    }
    let delta = sorted[0].im - sorted[1].im;
    if delta < GAP_DEGENERACY_TOL {
        0.0
    } else {
        delta
    }
}

/// Largest distance from any eigenvalue to the nearest conjugated eigenvalue.
/// Zero (up to solver roundoff) whenever the spectrum is closed under
/// complex conjugation, as the chain symmetry `H(gamma)* ~ H(gamma)` demands.
pub fn conjugation_closure_deviation(values: &[Complex64]) -> f64 {
    let mut worst = 0.0f64;
    for &e in values {
        let target = e.conj();
        let best = values
            .iter()
            .map(|&f| (f - target).norm())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::build_hamiltonian;
    use crate::model::{Model, SpinChainSpec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sorting_order() {
        let s = ComplexSpectrum::from_unsorted(
            vec![c(0.0, 0.0), c(1.0, 2.0), c(-1.0, 2.0), c(0.5, 1.5)],
            None,
        );
        assert_eq!(
            s.eigenvalues,
            vec![c(-1.0, 2.0), c(1.0, 2.0), c(0.5, 1.5), c(0.0, 0.0)]
        );
        assert_eq!(s.max_imag(), c(-1.0, 2.0));
    }

    #[test]
    fn gap_arithmetic() {
        let s = ComplexSpectrum::from_unsorted(vec![c(1.0, 2.0), c(0.5, 1.5), c(0.0, 0.0)], None);
        assert!((complex_gap(&s) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gap_zero_on_degenerate_top() {
        let s = ComplexSpectrum::from_unsorted(
            vec![c(1.0, 1.0), c(-1.0, 1.0 - 1e-10), c(0.0, 0.0)],
            None,
        );
        assert_eq!(complex_gap(&s), 0.0);
    }

    #[test]
    fn hermitian_limit_is_gapless_and_real() {
        let spec = SpinChainSpec::new(Model::Nhtfi, 4).with_omega(2.0);
        let h = build_hamiltonian(&spec).unwrap();
        let s = full_diagonalize(&h, false).unwrap();
        assert!(s.eigenvalues.iter().all(|e| e.im.abs() < 1e-10));
        assert_eq!(complex_gap(&s), 0.0);
    }

    #[test]
    fn diagonal_model_spectrum_is_exact() {
        let spec = SpinChainSpec::new(Model::Nhtfi, 3).with_gamma(0.8);
        let h = build_hamiltonian(&spec).unwrap();
        let s = full_diagonalize(&h, false).unwrap();
        let top = s.max_imag();
        assert!((top - c(-3.0, 0.6)).norm() < 1e-12);
        assert!((complex_gap(&s) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn eigenvector_residuals_are_small() {
        let spec = SpinChainSpec::new(Model::NhxxField, 4)
            .with_omega(2.0)
            .with_gamma(1.0);
        let h = build_hamiltonian(&spec).unwrap();
        let s = full_diagonalize(&h, true).unwrap();
        let hnorm: f64 = (0..h.dim())
            .map(|r| h.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        for i in 0..s.len() {
            let v = s.eigenvector(i).unwrap();
            let hv = h.apply_alloc(v.as_slice().unwrap()).unwrap();
            let resid: f64 = hv
                .iter()
                .zip(v.iter())
                .map(|(hv, v)| (hv - s.eigenvalues[i] * v).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(resid <= 1e-8 * hnorm, "residual {resid} at level {i}");
        }
    }

    #[test]
    fn trace_identity() {
        let spec = SpinChainSpec::new(Model::NhxxField, 5)
            .with_omega(0.9)
            .with_gamma(0.7);
        let h = build_hamiltonian(&spec).unwrap();
        let s = full_diagonalize(&h, false).unwrap();
        assert!(s.eigenvalue_sum().norm() <= 1e-8 * 32.0);
    }

    #[test]
    fn conjugation_closure() {
        let spec = SpinChainSpec::new(Model::Nhtfi, 5)
            .with_omega(1.3)
            .with_gamma(0.9);
        let h = build_hamiltonian(&spec).unwrap();
        let s = full_diagonalize(&h, false).unwrap();
        assert!(conjugation_closure_deviation(&s.eigenvalues) < 1e-8);
    }

    #[test]
    fn refuses_oversized_dense_solves() {
        let m = OperatorMatrix::zero(1 << 15);
        assert!(matches!(
            full_diagonalize(&m, false),
            Err(Error::ResourceGuard(_))
        ));
    }
}
