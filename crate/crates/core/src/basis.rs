//! Computational-basis conventions and bit manipulation.
//!
//! A basis state is an integer in `[0, 2^N)`. Bit `j` holds the state of
//! spin `j`: bit 1 means `sigma^z = +1` ("excited"), bit 0 means
//! `sigma^z = -1`. The excitation number of a state is therefore its
//! population count, and the least-excited state that survives strong
//! dissipation is the all-zeros index.
//!
//! For entanglement cuts, part A is always the `cut` low-order bits.

use crate::error::{Error, Result};

/// Index into the `2^N`-dimensional computational basis.
pub type BasisIndex = usize;

/// Number of excited (`sigma^z = +1`) sites in `b`.
pub fn excitation_number(b: BasisIndex) -> u32 {
    b.count_ones()
}

/// All basis indices with exactly `n_excited` excitations, ascending.
/// The list has length `binomial(n, n_excited)`.
pub fn sector_indices(n: usize, n_excited: usize) -> Result<Vec<BasisIndex>> {
    if n_excited > n {
        return Err(Error::InvalidSpec(format!(
            "excitation number {n_excited} outside [0, {n}]"
        )));
    }
    let mut out = Vec::with_capacity(binomial(n, n_excited));
    for b in 0..(1usize << n) {
        if excitation_number(b) as usize == n_excited {
            out.push(b);
        }
    }
    Ok(out)
}

/// Binomial coefficient, exact for the small arguments used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// One-site translation: spin `j` moves to site `j+1 (mod n)`, i.e. a cyclic
/// left rotation of the low `n` bits.
pub fn translate(b: BasisIndex, n: usize) -> BasisIndex {
    let mask = (1usize << n) - 1;
    ((b << 1) | (b >> (n - 1))) & mask
}

/// Global spin flip `X = prod_j sigma^x_j`: complements the low `n` bits.
pub fn flip_all(b: BasisIndex, n: usize) -> BasisIndex {
    b ^ ((1usize << n) - 1)
}

/// `sigma^z` eigenvalue (+1/-1) of spin `j` in state `b`.
pub fn sz(b: BasisIndex, j: usize) -> i32 {
    if b >> j & 1 == 1 {
        1
    } else {
        -1
    }
}
