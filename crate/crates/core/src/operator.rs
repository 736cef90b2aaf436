//! Sparse complex operators in compressed-row form.
//!
//! Rows store their columns in ascending order, so matrix-vector products
//! accumulate in a fixed order and are bit-reproducible between runs.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Sparse complex matrix acting on the `2^N` spin Hilbert space.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
}

impl OperatorMatrix {
    /// Build from (row, col, value) triplets. Duplicate positions are summed;
    /// zero sums are kept so the sparsity pattern is predictable.
    pub fn from_triplets(
        dim: usize,
        mut entries: Vec<(usize, usize, Complex64)>,
    ) -> Result<Self> {
        for &(r, c, _) in &entries {
            if r >= dim || c >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.max(c) + 1,
                });
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals = Vec::with_capacity(entries.len());
        row_ptr.push(0);
        let mut row = 0usize;
        for (r, c, v) in entries {
            while row < r {
                row_ptr.push(cols.len());
                row += 1;
            }
            if let (Some(&last_c), true) = (cols.last(), row_ptr.len() == row + 1) {
                if last_c as usize == c && cols.len() > *row_ptr.last().unwrap() {
                    *vals.last_mut().unwrap() += v;
                    continue;
                }
            }
            cols.push(c as u32);
            vals.push(v);
        }
        while row < dim {
            row_ptr.push(cols.len());
            row += 1;
        }
        Ok(OperatorMatrix {
            dim,
            row_ptr,
            cols,
            vals,
        })
    }

    /// Build row by row from a closure producing each row's entries.
    /// Entries within a row may arrive in any order; they are sorted and
    /// duplicates merged.
    pub fn from_rows<F>(dim: usize, mut row_entries: F) -> Self
    where
        F: FnMut(usize, &mut Vec<(usize, Complex64)>),
    {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut scratch: Vec<(usize, Complex64)> = Vec::new();
        row_ptr.push(0);
        for r in 0..dim {
            scratch.clear();
            row_entries(r, &mut scratch);
            scratch.sort_by_key(|&(c, _)| c);
            let mut i = 0;
            while i < scratch.len() {
                let (c, mut v) = scratch[i];
                debug_assert!(c < dim);
                let mut j = i + 1;
                while j < scratch.len() && scratch[j].0 == c {
                    v += scratch[j].1;
                    j += 1;
                }
                cols.push(c as u32);
                vals.push(v);
                i = j;
            }
            row_ptr.push(cols.len());
        }
        OperatorMatrix {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    /// All-zero matrix with no stored entries.
    pub fn zero(dim: usize) -> Self {
        OperatorMatrix {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Largest number of stored entries in any row.
    pub fn max_nnz_per_row(&self) -> usize {
        self.row_ptr
            .windows(2)
            .map(|w| w[1] - w[0])
            .max()
            .unwrap_or(0)
    }

    /// Entries of one row as (column, value) pairs, columns ascending.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        self.cols[lo..hi]
            .iter()
            .zip(&self.vals[lo..hi])
            .map(|(&c, &v)| (c as usize, v))
    }

    /// Stored value at (r, c), or zero.
    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.cols[lo..hi].binary_search(&(c as u32)) {
            Ok(i) => self.vals[lo + i],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    /// `out = M v`. Deterministic accumulation order (ascending columns).
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        if v.len() != self.dim || out.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len().min(out.len()),
            });
        }
        for r in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[i] * v[self.cols[i] as usize];
            }
            out[r] = acc;
        }
        Ok(())
    }

    /// `out = scale * (M v) + shift * v`, fused in one pass.
    /// This is the kernel of the Faber recurrence, where the operator is
    /// rescaled and recentered without ever materializing `M/lambda`.
    pub fn apply_scaled_shifted(
        &self,
        scale: Complex64,
        shift: Complex64,
        v: &[Complex64],
        out: &mut [Complex64],
    ) -> Result<()> {
        if v.len() != self.dim || out.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len().min(out.len()),
            });
        }
        for r in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[i] * v[self.cols[i] as usize];
            }
            out[r] = scale * acc + shift * v[r];
        }
        Ok(())
    }

    /// Allocating convenience wrapper around [`apply`](Self::apply).
    pub fn apply_alloc(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply(v, &mut out)?;
        Ok(out)
    }

    /// `M + shift * I` as a new matrix.
    pub fn with_shifted_diagonal(&self, shift: Complex64) -> OperatorMatrix {
        let mut triplets: Vec<(usize, usize, Complex64)> = Vec::with_capacity(self.nnz() + self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                triplets.push((r, c, v));
            }
            triplets.push((r, r, shift));
        }
        OperatorMatrix::from_triplets(self.dim, triplets)
            .expect("triplets from a valid matrix are in bounds")
    }

    /// Densify. Intended for diagonalization and small-system tests.
    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut a = Array2::zeros((self.dim, self.dim));
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                a[(r, c)] = v;
            }
        }
        a
    }
}
