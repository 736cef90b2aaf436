//! Assembly of the sparse chain Hamiltonians.
//!
//! All matrices are complex symmetric (`H = H^T`): the Pauli terms used
//! here couple basis pairs with equal weight in both directions, and the
//! dissipative part is diagonal. The anti-Hermitian content sits entirely
//! in the imaginary diagonal `-i(gamma/4) sum_j sigma^z_j`, whose entry on a
//! row with excitation number `n` is `-i(gamma/4)(2n - N)`.

use num_complex::Complex64;

use crate::basis::{excitation_number, sz, BasisIndex};
use crate::error::Result;
use crate::model::{Model, SpinChainSpec};
use crate::operator::OperatorMatrix;

/// Build the sparse matrix of the model Hamiltonian.
///
/// Row `r` carries the diagonal Ising/dissipation parts plus one entry per
/// transverse-field spin flip (`-Omega` at column `r ^ (1<<j)`) and one per
/// XX bond acting on an antiparallel pair (`-2J` at the pair-swapped column),
/// so each row holds at most `2N + 1` entries.
pub fn build_hamiltonian(spec: &SpinChainSpec) -> Result<OperatorMatrix> {
    spec.validate()?;
    let n = spec.n;
    let dim = spec.dim();
    let j = spec.j;
    let omega = spec.omega;
    let quarter_gamma = 0.25 * spec.gamma;
    let ising = spec.model == Model::Nhtfi;
    let xx = spec.model.has_xx_bond();
    let flips = omega != 0.0;

    Ok(OperatorMatrix::from_rows(dim, |r, out| {
        let mut diag_re = 0.0;
        if ising {
            for site in 0..n {
                let next = (site + 1) % n;
                diag_re -= j * (sz(r, site) * sz(r, next)) as f64;
            }
        }
        let diag_im = -quarter_gamma * (2.0 * excitation_number(r) as f64 - n as f64);
        out.push((r, Complex64::new(diag_re, diag_im)));

        if flips {
            for site in 0..n {
                out.push((r ^ (1usize << site), Complex64::new(-omega, 0.0)));
            }
        }
        if xx {
            for site in 0..n {
                let next = (site + 1) % n;
                if (r >> site & 1) != (r >> next & 1) {
                    let c: BasisIndex = r ^ (1usize << site) ^ (1usize << next);
                    out.push((c, Complex64::new(-2.0 * j, 0.0)));
                }
            }
        }
    }))
}
