//! Dense state vectors over the computational basis.

use num_complex::Complex64;
use rand::Rng;

use crate::basis::{excitation_number, BasisIndex};
use crate::error::{Error, Result};

/// Normalized amplitudes over the `2^N` computational basis states.
///
/// Constructors normalize; evolution code renormalizes after every step, so
/// a `StateVector` in circulation always has unit 2-norm (within roundoff).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    n: usize,
}

impl StateVector {
    /// Wrap raw amplitudes, normalizing them. Fails on a zero or non-finite
    /// vector or a length that is not a power of two.
    pub fn from_amplitudes(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidSpec(format!(
                "state length {dim} is not a power of two >= 2"
            )));
        }
        let norm = l2_norm(&amplitudes);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Numerical(format!(
                "cannot normalize state with norm {norm}"
            )));
        }
        let inv = 1.0 / norm;
        for a in &mut amplitudes {
            *a *= inv;
        }
        Ok(StateVector {
            amplitudes,
            n: dim.trailing_zeros() as usize,
        })
    }

    /// Wrap a buffer that is already unit-normalized, skipping validation.
    /// Callers guarantee the length is `2^n` and the 2-norm is 1.
    pub(crate) fn from_normalized_unchecked(amplitudes: Vec<Complex64>, n: usize) -> Self {
        debug_assert_eq!(amplitudes.len(), 1usize << n);
        debug_assert!((l2_norm(&amplitudes) - 1.0).abs() < 1e-6);
        StateVector { amplitudes, n }
    }

    /// The computational basis state `|b>`.
    pub fn basis_state(n: usize, b: BasisIndex) -> Result<Self> {
        let dim = 1usize << n;
        if b >= dim {
            return Err(Error::InvalidSpec(format!(
                "basis index {b} outside [0, {dim})"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[b] = Complex64::new(1.0, 0.0);
        Ok(StateVector { amplitudes, n })
    }

    /// The separable state `((|0> + |1>)/sqrt(2))^{tensor N}`: every amplitude
    /// equals `2^{-N/2}` with zero phase. Default initial state for evolution.
    pub fn plus_product(n: usize) -> Self {
        let dim = 1usize << n;
        let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        StateVector {
            amplitudes: vec![amp; dim],
            n,
        }
    }

    /// The Neel state `|0101...>`: alternating spins starting with 0 at site 0.
    /// Requires even `n`.
    pub fn neel(n: usize) -> Result<Self> {
        if n % 2 != 0 {
            return Err(Error::InvalidSpec(format!(
                "Neel state needs an even site count, got {n}"
            )));
        }
        let mut b: BasisIndex = 0;
        for site in (1..n).step_by(2) {
            b |= 1usize << site;
        }
        Self::basis_state(n, b)
    }

    /// Haar-ish random normalized state from the given RNG (Gaussian
    /// components). Intended for tests and fuzzing.
    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        let dim = 1usize << n;
        let mut amplitudes = Vec::with_capacity(dim);
        for _ in 0..dim {
            amplitudes.push(Complex64::new(gaussian(rng), gaussian(rng)));
        }
        Self::from_amplitudes(amplitudes).expect("gaussian vector has nonzero norm")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Mutable buffer access for the evolution kernels, which renormalize
    /// before handing the state back.
    pub(crate) fn amplitudes_vec_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.amplitudes
    }

    /// 2-norm; 1 up to roundoff for any constructed state.
    pub fn norm(&self) -> f64 {
        l2_norm(&self.amplitudes)
    }

    /// Inner product `<self|other>` (conjugate-linear in `self`).
    pub fn dot(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|`, the overlap magnitude.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.dot(other).norm()
    }

    /// Probability weight in each excitation sector: index `k` holds
    /// `sum_{b: popcount(b)=k} |amp_b|^2`. Sums to 1 for a normalized state.
    pub fn sector_populations(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.n + 1];
        for (b, a) in self.amplitudes.iter().enumerate() {
            p[excitation_number(b) as usize] += a.norm_sqr();
        }
        p
    }
}

/// Plain 2-norm of a complex slice.
pub fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Normalize a raw amplitude buffer in place, returning the prior norm.
pub(crate) fn normalize_in_place(v: &mut [Complex64]) -> f64 {
    let norm = l2_norm(v);
    if norm > 0.0 && norm.is_finite() {
        let inv = 1.0 / norm;
        for a in v.iter_mut() {
            *a *= inv;
        }
    }
    norm
}

/// Standard-normal sample via Box-Muller.
fn gaussian(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (-2.0 * u.ln()).sqrt() * v.cos()
}
