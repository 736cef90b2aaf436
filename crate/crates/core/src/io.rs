//! Shared output formatting.
//!
//! Every float written to CSV or JSON goes through [`fmt_f64`], which prints
//! 17 significant digits: enough to reconstruct the exact binary value, so
//! reruns produce byte-identical files.

use crate::error::{Error, Result};

/// Scientific notation with 17 significant digits. Negative zero is
/// canonicalized so sign-of-zero noise never reaches a file.
pub fn fmt_f64(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// Refuse to emit NaN or infinity into an output file.
pub fn require_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Numerical(format!(
            "refusing to write non-finite value {x} for column {name}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_lossless() {
        for x in [
            0.1,
            std::f64::consts::PI,
            -1.45,
            1.0 / 3.0,
            6.02e23,
            -2.5e-19,
            0.0,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {s}");
        }
        assert_eq!(fmt_f64(-0.0), fmt_f64(0.0));
    }

    #[test]
    fn finite_guard() {
        assert!(require_finite("x", 1.0).is_ok());
        assert!(require_finite("x", f64::NAN).is_err());
        assert!(require_finite("x", f64::INFINITY).is_err());
    }
}
