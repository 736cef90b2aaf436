//! Independent dense construction of the model Hamiltonians via explicit
//! Kronecker products. Shares no code with the production builder: the
//! production path assembles sparse rows from bit arithmetic, this one
//! multiplies out `I ⊗ ... ⊗ op ⊗ ... ⊗ I` literally.

use ndarray::Array2;
use nhspin::{Model, SpinChainSpec};
use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Basis ordering: index 0 = down (sigma^z = -1), index 1 = up.
pub fn sigma_z() -> Array2<Complex64> {
    ndarray::array![[c(-1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]
}

pub fn sigma_x() -> Array2<Complex64> {
    ndarray::array![[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]
}

pub fn sigma_y() -> Array2<Complex64> {
    ndarray::array![[c(0.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(0.0, 0.0)]]
}

pub fn eye(dim: usize) -> Array2<Complex64> {
    Array2::eye(dim)
}

pub fn kron(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for ia in 0..ra {
        for ja in 0..ca {
            let v = a[(ia, ja)];
            if v == c(0.0, 0.0) {
                continue;
            }
            for ib in 0..rb {
                for jb in 0..cb {
                    out[(ia * rb + ib, ja * cb + jb)] = v * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// `op` acting on site `j` of an `n`-site chain. Site 0 is the fastest
/// (least significant) index, so the identity on the higher sites goes on
/// the left of the product.
pub fn site_op(n: usize, j: usize, op: &Array2<Complex64>) -> Array2<Complex64> {
    let left = eye(1 << (n - 1 - j));
    let right = eye(1 << j);
    kron(&left, &kron(op, &right))
}

/// Two-site term `op_a(j) op_b(j+1)` with periodic wrap.
pub fn bond_op(
    n: usize,
    j: usize,
    op_a: &Array2<Complex64>,
    op_b: &Array2<Complex64>,
) -> Array2<Complex64> {
    site_op(n, j, op_a).dot(&site_op(n, (j + 1) % n, op_b))
}

/// The full model Hamiltonian as a dense matrix, by summing explicit
/// operator products.
pub fn kronecker_hamiltonian(spec: &SpinChainSpec) -> Array2<Complex64> {
    let n = spec.n;
    let dim = 1usize << n;
    let mut h = Array2::<Complex64>::zeros((dim, dim));
    let sz = sigma_z();
    let sx = sigma_x();
    let sy = sigma_y();
    match spec.model {
        Model::Nhtfi => {
            for j in 0..n {
                h = h - bond_op(n, j, &sz, &sz).mapv(|x| x * spec.j);
                h = h - site_op(n, j, &sx).mapv(|x| x * spec.omega);
            }
        }
        Model::Nhxx | Model::NhxxField => {
            for j in 0..n {
                h = h - (bond_op(n, j, &sx, &sx) + bond_op(n, j, &sy, &sy))
                    .mapv(|x| x * spec.j);
                if spec.model == Model::NhxxField {
                    h = h - site_op(n, j, &sx).mapv(|x| x * spec.omega);
                }
            }
        }
    }
    for j in 0..n {
        h = h - site_op(n, j, &sz).mapv(|x| x * c(0.0, spec.gamma / 4.0));
    }
    h
}

pub fn max_abs_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
