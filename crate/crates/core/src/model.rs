//! Model definitions for the dissipative spin chains.
//!
//! All three models share the same anti-Hermitian part, an imaginary
//! longitudinal field `-i(gamma/4) sum_j sigma^z_j` that biases decay toward
//! the least-excited basis states. They differ in the Hermitian part:
//!
//! * `Nhtfi`: transverse-field Ising chain,
//!   `-J sum_j sigma^z_j sigma^z_{j+1} - Omega sum_j sigma^x_j`.
//! * `Nhxx`: XX chain, `-J sum_j (sigma^x_j sigma^x_{j+1} + sigma^y_j sigma^y_{j+1})`,
//!   which conserves the excitation number.
//! * `NhxxField`: the XX chain plus a transverse field `-Omega sum_j sigma^x_j`,
//!   which breaks the excitation-number conservation.
//!
//! Only periodic chains are supported; the bond sum runs over `j = 0..N`
//! with site `N` identified with site `0`.

use crate::error::{Error, Result};

/// Which Hamiltonian family a spec describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Transverse-field Ising chain with the imaginary longitudinal field.
    Nhtfi,
    /// XX chain with the imaginary longitudinal field; requires `omega == 0`.
    Nhxx,
    /// XX chain with a real transverse field and the imaginary longitudinal field.
    NhxxField,
}

impl Model {
    /// Canonical config-file name.
    pub fn name(self) -> &'static str {
        match self {
            Model::Nhtfi => "NHTFI",
            Model::Nhxx => "NHXX",
            Model::NhxxField => "NHXX_FIELD",
        }
    }

    /// Parse the config-file name (case-insensitive).
    pub fn parse(s: &str) -> Result<Model> {
        match s.to_ascii_uppercase().as_str() {
            "NHTFI" => Ok(Model::Nhtfi),
            "NHXX" => Ok(Model::Nhxx),
            "NHXX_FIELD" => Ok(Model::NhxxField),
            other => Err(Error::InvalidSpec(format!("unknown model {other:?}"))),
        }
    }

    /// True for the two models built on the XX bond.
    pub fn has_xx_bond(self) -> bool {
        matches!(self, Model::Nhxx | Model::NhxxField)
    }

    /// True when the excitation number is conserved by the Hermitian part.
    pub fn conserves_excitation(self) -> bool {
        matches!(self, Model::Nhxx)
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Boundary condition of the chain. Only periodic chains are implemented;
/// the enum exists so the choice is explicit at call sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    Periodic,
}

/// Default upper bound on the chain length. Raising it is possible via
/// [`SpinChainSpec::allow_large`], but dense spectra above this size are
/// expensive and propagation memory grows as `2^N`.
pub const SIZE_GUARD_MAX_SITES: usize = 14;

/// Complete physical description of one chain instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinChainSpec {
    pub model: Model,
    /// Number of sites N.
    pub n: usize,
    /// Coupling strength J > 0 (energy unit; defaults to 1).
    pub j: f64,
    /// Transverse field strength Omega >= 0.
    pub omega: f64,
    /// Dissipation rate gamma >= 0.
    pub gamma: f64,
    pub boundary: Boundary,
    /// Set by [`allow_large`](Self::allow_large) to lift the N <= 14 guard.
    size_guard_off: bool,
}

impl SpinChainSpec {
    /// A spec with default couplings: `J = 1`, `Omega = 0`, `gamma = 0`.
    pub fn new(model: Model, n: usize) -> Self {
        SpinChainSpec {
            model,
            n,
            j: 1.0,
            omega: 0.0,
            gamma: 0.0,
            boundary: Boundary::Periodic,
            size_guard_off: false,
        }
    }

    pub fn with_coupling(mut self, j: f64) -> Self {
        self.j = j;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// Lift the default `N <= 14` resource guard. The caller takes
    /// responsibility for memory and runtime.
    pub fn allow_large(mut self) -> Self {
        self.size_guard_off = true;
        self
    }

    /// Hilbert-space dimension `2^N`.
    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    /// Check every invariant; all matrix builders call this first.
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidSpec(format!(
                "N = {} but the periodic bond sum needs N >= 3 (N = 2 would \
                 count its single bond twice)",
                self.n
            )));
        }
        if self.n > SIZE_GUARD_MAX_SITES && !self.size_guard_off {
            return Err(Error::ResourceGuard(format!(
                "N = {} exceeds the default cap of {SIZE_GUARD_MAX_SITES}; \
                 use allow_large() to override",
                self.n
            )));
        }
        if !(self.j > 0.0) || !self.j.is_finite() {
            return Err(Error::InvalidSpec(format!("J must be positive, got {}", self.j)));
        }
        if !(self.omega >= 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "Omega must be nonnegative, got {}",
                self.omega
            )));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "gamma must be nonnegative, got {}",
                self.gamma
            )));
        }
        if self.model == Model::Nhxx && self.omega != 0.0 {
            return Err(Error::InvalidSpec(format!(
                "NHXX takes no transverse field (Omega = {}); use NHXX_FIELD",
                self.omega
            )));
        }
        Ok(())
    }
}
