//! Non-Hermitian spin-chain toolkit.
//!
//! Sparse Hamiltonians for dissipative Ising and XX chains, complex
//! spectra with gap and level-crossing analysis, polynomial-expansion time
//! evolution with entanglement tracking, and quantum-jump trajectory
//! sampling with a Lindblad cross-check.
//!
//! Conventions, fixed across the crate:
//! - basis index bit `j` is site `j`; a set bit is an up spin (`sigma^z = +1`)
//! - part A of a bipartition is the low-order bits
//! - rings only: site `N` wraps to site `0`
//! - complex eigenvalues sort by descending imaginary part, ties by
//!   ascending real part
//! - entropies are in nats

pub mod basis;
pub mod entanglement;
pub mod error;
pub mod hamiltonian;
pub mod io;
pub mod model;
pub mod operator;
pub mod propagation;
pub mod spectral;
pub mod state;
pub mod trajectory;

pub use num_complex::Complex64;

pub use entanglement::{
    entropy, scaling_analysis, steady_entropy_spectral, Bipartition, Classification,
    LinearFit, ScalingMethod, ScalingRecord,
};
pub use error::{Error, Result};
pub use hamiltonian::build_hamiltonian;
pub use model::{Boundary, Model, SpinChainSpec};
pub use operator::OperatorMatrix;
pub use propagation::{
    evolve_trajectory, exact_evolve, EvolveOptions, FaberPlan, Propagator, SpectralBounds,
    TimeSample, TimeSeries,
};
pub use spectral::flow::{track_levels, LevelFlow};
pub use spectral::sweep::{
    critical_rate, critical_rate_default, gap_sweep, gap_sweep_with_cut, SweepRow, SweepTable,
    CRITICAL_RATE_DEFAULT_FRACTION,
};
pub use spectral::translation::{block_diagonalize, BlockSpectrum, LevelId, TranslationBasis};
pub use spectral::{complex_gap, full_diagonalize, ComplexSpectrum};
pub use state::StateVector;
pub use trajectory::{
    average_trajectories, jump_lindblad_agreement, lindblad_evolve, no_jump_consistency,
    run_trajectory, trace_distance, AgreementReport, EnsembleResult, JumpModel, JumpSampler,
    TrajectoryOptions, TrajectoryRecord, LINDBLAD_MAX_SITES,
};
