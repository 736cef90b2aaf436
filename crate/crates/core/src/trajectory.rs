//! Quantum-jump unraveling of the dissipative dynamics and the dense
//! Lindblad reference it must reproduce.
//!
//! The unraveling attaches a lowering jump operator `sqrt(gamma) sigma_j^-`
//! to every site. The associated no-jump generator is the model Hamiltonian
//! shifted by `-i gamma N / 4`: the shift is proportional to the identity,
//! so normalized no-jump evolution reuses the model propagator unchanged and
//! only the norm bookkeeping carries the shift.

use std::io::Write;

use ndarray::Array2;
use ndarray_linalg::{EigValsh, UPLO};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::excitation_number;
use crate::error::{Error, Result};
use crate::hamiltonian::build_hamiltonian;
use crate::io::{fmt_f64, require_finite};
use crate::model::SpinChainSpec;
use crate::operator::OperatorMatrix;
use crate::propagation::{exact_evolve, FaberPlan, Propagator, SpectralBounds};
use crate::state::{normalize_in_place, StateVector};

/// Entrywise tolerance for the two construction routes of the no-jump
/// generator to agree.
pub const GENERATOR_IDENTITY_TOL: f64 = 1e-14;

/// Largest chain the dense Lindblad integrator accepts.
pub const LINDBLAD_MAX_SITES: usize = 4;

/// How jump times are decided along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpSampler {
    /// First-order scheme: each step jumps with probability
    /// `gamma dt <n_j>` per site. Requires `dt <= 0.01 / gamma`.
    Euler,
    /// Waiting-time scheme: evolve without jumps until the survival
    /// probability crosses a pre-drawn uniform threshold. Jump placement is
    /// accurate to one step; the survival law itself is exact.
    NormThreshold,
}

impl JumpSampler {
    pub fn name(self) -> &'static str {
        match self {
            JumpSampler::Euler => "euler",
            JumpSampler::NormThreshold => "norm-threshold",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(JumpSampler::Euler),
            "norm-threshold" | "norm_threshold" => Ok(JumpSampler::NormThreshold),
            other => Err(Error::InvalidSpec(format!("unknown sampler {other:?}"))),
        }
    }
}

/// The pieces of the jump unraveling for one model: Hermitian part,
/// full model Hamiltonian, and spectral bounds for plan construction.
#[derive(Debug, Clone)]
pub struct JumpModel {
    n: usize,
    gamma: f64,
    /// The model Hamiltonian (anti-Hermitian diagonal included).
    h_model: OperatorMatrix,
    /// The same model at zero dissipation.
    hermitian: OperatorMatrix,
    bounds: SpectralBounds,
}

impl JumpModel {
    pub fn new(spec: &SpinChainSpec) -> Result<Self> {
        spec.validate()?;
        let h_model = build_hamiltonian(spec)?;
        let hermitian = build_hamiltonian(&spec.clone().with_gamma(0.0))?;
        Ok(JumpModel {
            n: spec.n,
            gamma: spec.gamma,
            h_model,
            hermitian,
            bounds: SpectralBounds::for_spec(spec),
        })
    }

    /// Assemble from raw parts; the test doubles use this to reach systems
    /// the model validators exclude (single sites, open chains).
    #[cfg(test)]
    pub(crate) fn from_parts(
        n: usize,
        gamma: f64,
        h_model: OperatorMatrix,
        hermitian: OperatorMatrix,
        bounds: SpectralBounds,
    ) -> Self {
        JumpModel {
            n,
            gamma,
            h_model,
            hermitian,
            bounds,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn model_hamiltonian(&self) -> &OperatorMatrix {
        &self.h_model
    }

    pub fn hermitian_part(&self) -> &OperatorMatrix {
        &self.hermitian
    }

    /// No-jump generator `H_model - i gamma N / 4`.
    pub fn effective_hamiltonian(&self) -> OperatorMatrix {
        let shift = Complex64::new(0.0, -self.gamma * self.n as f64 / 4.0);
        self.h_model.with_shifted_diagonal(shift)
    }

    /// Largest entrywise deviation between the two routes to the no-jump
    /// generator: shifting the model Hamiltonian, versus adding
    /// `-i gamma/2` times the excitation-number operator to the Hermitian
    /// part. Zero up to roundoff when the Hamiltonian builder and the jump
    /// bookkeeping agree.
    pub fn generator_identity_error(&self) -> f64 {
        let shifted = self.effective_hamiltonian();
        let dim = shifted.dim();
        let mut worst: f64 = 0.0;
        for r in 0..dim {
            for (c, v) in shifted.row(r) {
                let mut want = self.hermitian.entry(r, c);
                if r == c {
                    want += Complex64::new(0.0, -self.gamma / 2.0)
                        * excitation_number(r) as f64;
                }
                worst = worst.max((v - want).norm());
            }
            // entries present in the Hermitian part but absent above
            for (c, v) in self.hermitian.row(r) {
                if shifted.entry(r, c) == Complex64::new(0.0, 0.0) && r != c {
                    worst = worst.max(v.norm());
                }
            }
        }
        worst
    }

    /// Propagator for the normalized no-jump evolution.
    pub fn propagator(&self, dt: f64, tail_tol: f64) -> Result<Propagator> {
        let plan = FaberPlan::from_bounds(self.bounds, dt, tail_tol)?;
        Propagator::from_parts(self.h_model.clone(), plan)
    }

    /// `ln` of the per-step norm factor of the *no-jump* generator, given
    /// the factor `eta` the model propagator reported.
    fn no_jump_log_norm(&self, eta: f64, dt: f64) -> f64 {
        eta.ln() - self.gamma * self.n as f64 * dt / 4.0
    }
}

/// Per-site occupation weights `<n_j>` of a normalized state.
fn site_occupations(state: &StateVector, n: usize) -> Vec<f64> {
    let mut occ = vec![0.0; n];
    for (b, a) in state.amplitudes().iter().enumerate() {
        let w = a.norm_sqr();
        if w == 0.0 {
            continue;
        }
        let mut bits = b;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            occ[j] += w;
            bits &= bits - 1;
        }
    }
    occ
}

/// Apply `sigma_j^-` and renormalize; fails if the site is unoccupied.
fn apply_lowering(state: &mut StateVector, site: usize) -> Result<()> {
    let n = state.n();
    let bit = 1usize << site;
    let old = state.amplitudes().to_vec();
    let mut new = vec![Complex64::new(0.0, 0.0); old.len()];
    for (b, a) in old.iter().enumerate() {
        if b & bit != 0 {
            new[b ^ bit] = *a;
        }
    }
    let norm = normalize_in_place(&mut new);
    if !(norm > 0.0) {
        return Err(Error::Numerical(format!(
            "jump at unoccupied site {site}"
        )));
    }
    *state = StateVector::from_normalized_unchecked(new, n);
    Ok(())
}

/// Knobs for one trajectory or an ensemble.
#[derive(Debug, Clone)]
pub struct TrajectoryOptions {
    pub dt: f64,
    pub t_max: f64,
    pub tail_tol: f64,
    pub sampler: JumpSampler,
    /// Snapshot the state every this many steps (the ensemble averages
    /// densities at these checkpoints). Zero means final time only.
    pub checkpoint_every: usize,
}

impl TrajectoryOptions {
    pub fn new(dt: f64, t_max: f64, sampler: JumpSampler) -> Self {
        TrajectoryOptions {
            dt,
            t_max,
            tail_tol: 1e-10,
            sampler,
            checkpoint_every: 0,
        }
    }

    fn validate(&self, gamma: f64) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidSpec(format!("dt {} must be positive", self.dt)));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "t_max {} must be positive",
                self.t_max
            )));
        }
        if self.sampler == JumpSampler::Euler && gamma > 0.0 && self.dt > 0.01 / gamma {
            return Err(Error::InvalidSpec(format!(
                "first-order sampler needs dt <= 0.01/gamma = {}; got {}",
                0.01 / gamma,
                self.dt
            )));
        }
        Ok(((self.t_max / self.dt) + 1e-9).floor().max(1.0) as usize)
    }
}

/// One sampled trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub seed: u64,
    /// `(time, site)` of every jump, ascending in time.
    pub jumps: Vec<(f64, usize)>,
    pub final_state: StateVector,
    /// Normalized snapshots at the checkpoints, aligned with
    /// [`checkpoint_times`](Self::checkpoint_times).
    pub snapshots: Vec<StateVector>,
    pub checkpoint_times: Vec<f64>,
}

/// Sample one trajectory. The propagator must come from the same model
/// (see [`JumpModel::propagator`]); it is borrowed so ensembles reuse one
/// plan across all trajectories.
pub fn run_trajectory(
    model: &JumpModel,
    prop: &mut Propagator,
    v0: &StateVector,
    opts: &TrajectoryOptions,
    seed: u64,
) -> Result<TrajectoryRecord> {
    if v0.n() != model.n {
        return Err(Error::DimensionMismatch {
            expected: 1 << model.n,
            got: v0.dim(),
        });
    }
    let n_steps = opts.validate(model.gamma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = v0.clone();
    let mut jumps = Vec::new();
    let mut snapshots = Vec::new();
    let mut checkpoint_times = Vec::new();

    // waiting-time bookkeeping (NormThreshold only)
    let mut log_q = 0.0f64;
    let mut q_target: f64 = 1.0 - rng.gen::<f64>();

    for k in 0..n_steps {
        let t_next = (k + 1) as f64 * opts.dt;
        match opts.sampler {
            JumpSampler::Euler => {
                let occ = site_occupations(&state, model.n);
                let p_total: f64 = occ.iter().sum::<f64>() * model.gamma * opts.dt;
                let u: f64 = rng.gen();
                if u < p_total {
                    // pick the site proportionally to its occupation
                    let mut target = u / (model.gamma * opts.dt);
                    let mut site = model.n - 1;
                    for (j, &o) in occ.iter().enumerate() {
                        if target < o {
                            site = j;
                            break;
                        }
                        target -= o;
                    }
                    apply_lowering(&mut state, site)?;
                    jumps.push((t_next, site));
                } else {
                    prop.step(&mut state)?;
                }
            }
            JumpSampler::NormThreshold => {
                let eta = prop.step(&mut state)?;
                log_q += 2.0 * model.no_jump_log_norm(eta, opts.dt);
                if log_q.exp() <= q_target {
                    let occ = site_occupations(&state, model.n);
                    let total: f64 = occ.iter().sum();
                    if total > 0.0 {
                        let mut target = rng.gen::<f64>() * total;
                        let mut site = model.n - 1;
                        for (j, &o) in occ.iter().enumerate() {
                            if target < o {
                                site = j;
                                break;
                            }
                            target -= o;
                        }
                        apply_lowering(&mut state, site)?;
                        jumps.push((t_next, site));
                    }
                    log_q = 0.0;
                    q_target = 1.0 - rng.gen::<f64>();
                }
            }
        }
        if opts.checkpoint_every > 0 && (k + 1) % opts.checkpoint_every == 0 {
            snapshots.push(state.clone());
            checkpoint_times.push(t_next);
        }
    }

    Ok(TrajectoryRecord {
        seed,
        jumps,
        final_state: state,
        snapshots,
        checkpoint_times,
    })
}

/// Ensemble average over trajectories.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub n_traj: usize,
    pub seed_base: u64,
    pub checkpoint_times: Vec<f64>,
    /// Trajectory-averaged density matrix at each checkpoint.
    pub mean_density: Vec<Array2<Complex64>>,
    /// Summed elementwise variance estimate at each checkpoint, for the
    /// statistical error bound.
    variance_sum: Vec<f64>,
    pub no_jump_fraction: f64,
    pub mean_jump_count: f64,
}

impl EnsembleResult {
    /// Three-sigma bound on the trace distance between the sampled mean and
    /// the true ensemble mean at checkpoint `i`, from
    /// `T <= sqrt(d)/2 ||.||_F` and the elementwise variance estimate.
    pub fn trace_distance_3sigma(&self, i: usize) -> f64 {
        let d = self.mean_density[i].nrows() as f64;
        let m = self.n_traj as f64;
        3.0 * 0.5 * (d * self.variance_sum[i] / m).sqrt()
    }
}

/// Run `n_traj` trajectories with consecutive seeds and average the
/// projectors at every checkpoint.
pub fn average_trajectories(
    model: &JumpModel,
    v0: &StateVector,
    opts: &TrajectoryOptions,
    n_traj: usize,
    seed_base: u64,
) -> Result<EnsembleResult> {
    if n_traj == 0 {
        return Err(Error::InvalidSpec("ensemble needs at least one trajectory".into()));
    }
    if opts.checkpoint_every == 0 {
        return Err(Error::InvalidSpec(
            "ensemble averaging needs checkpoints; set checkpoint_every > 0".into(),
        ));
    }
    let mut prop = model.propagator(opts.dt, opts.tail_tol)?;
    let dim = v0.dim();
    let n_steps = opts.validate(model.gamma)?;
    let n_checks = n_steps / opts.checkpoint_every;
    if n_checks == 0 {
        return Err(Error::InvalidSpec(
            "checkpoint_every exceeds the number of steps".into(),
        ));
    }
    let mut sum: Vec<Array2<Complex64>> = (0..n_checks)
        .map(|_| Array2::zeros((dim, dim)))
        .collect();
    let mut sum_sq: Vec<Array2<f64>> = (0..n_checks)
        .map(|_| Array2::zeros((dim, dim)))
        .collect();
    let mut checkpoint_times = Vec::new();
    let mut no_jump = 0usize;
    let mut total_jumps = 0usize;

    for i in 0..n_traj {
        let rec = run_trajectory(model, &mut prop, v0, opts, seed_base + i as u64)?;
        if rec.jumps.is_empty() {
            no_jump += 1;
        }
        total_jumps += rec.jumps.len();
        if checkpoint_times.is_empty() {
            checkpoint_times = rec.checkpoint_times.clone();
        }
        for (c, snap) in rec.snapshots.iter().enumerate() {
            let amps = snap.amplitudes();
            for (r, &ar) in amps.iter().enumerate() {
                for (cc, &ac) in amps.iter().enumerate() {
                    let x = ar * ac.conj();
                    sum[c][(r, cc)] += x;
                    sum_sq[c][(r, cc)] += x.norm_sqr();
                }
            }
        }
    }

    let m = n_traj as f64;
    let mut mean_density = Vec::with_capacity(n_checks);
    let mut variance_sum = Vec::with_capacity(n_checks);
    for (s, sq) in sum.iter().zip(&sum_sq) {
        let mean = s.mapv(|x| x / m);
        let var: f64 = mean
            .iter()
            .zip(sq.iter())
            .map(|(mu, &esq)| (esq / m - mu.norm_sqr()).max(0.0))
            .sum();
        mean_density.push(mean);
        variance_sum.push(var);
    }

    Ok(EnsembleResult {
        n_traj,
        seed_base,
        checkpoint_times,
        mean_density,
        variance_sum,
        no_jump_fraction: no_jump as f64 / m,
        mean_jump_count: total_jumps as f64 / m,
    })
}

/// Dense Lindblad integration with lowering jumps on every site:
/// `d rho/dt = -i [H_herm, rho] + gamma sum_j (s_j rho s_j^+ - {n_j, rho}/2)`.
///
/// Fourth-order Runge-Kutta on the full density matrix; snapshots are taken
/// at the requested multiples of the internal step. Trace and positivity
/// are checked on every snapshot.
pub fn lindblad_evolve(
    spec: &SpinChainSpec,
    rho0: &Array2<Complex64>,
    times: &[f64],
    dt: f64,
) -> Result<Vec<Array2<Complex64>>> {
    spec.validate()?;
    if spec.n > LINDBLAD_MAX_SITES {
        return Err(Error::ResourceGuard(format!(
            "dense Lindblad integration is capped at {LINDBLAD_MAX_SITES} sites; got {}",
            spec.n
        )));
    }
    let h = build_hamiltonian(&spec.clone().with_gamma(0.0))?.to_dense();
    lindblad_evolve_raw(spec.n, &h, spec.gamma, rho0, times, dt)
}

pub(crate) fn lindblad_evolve_raw(
    n: usize,
    h_herm: &Array2<Complex64>,
    gamma: f64,
    rho0: &Array2<Complex64>,
    times: &[f64],
    dt: f64,
) -> Result<Vec<Array2<Complex64>>> {
    let dim = 1usize << n;
    if rho0.nrows() != dim || rho0.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: rho0.nrows(),
        });
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidSpec(format!("dt {dt} must be positive")));
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.first().copied().unwrap_or(0.0) < 0.0 {
        return Err(Error::InvalidSpec("negative snapshot time".into()));
    }
    let steps_of = |t: f64| -> Result<usize> {
        let s = t / dt;
        if (s - s.round()).abs() > 1e-6 {
            return Err(Error::InvalidSpec(format!(
                "snapshot time {t} is not a multiple of dt {dt}"
            )));
        }
        Ok(s.round() as usize)
    };

    let occupations: Vec<f64> = (0..dim).map(|b| excitation_number(b) as f64).collect();
    let rhs = |rho: &Array2<Complex64>| -> Array2<Complex64> {
        let mut out = h_herm.dot(rho) - rho.dot(h_herm);
        out.mapv_inplace(|x| x * Complex64::new(0.0, -1.0));
        // gamma sum_j s_j rho s_j^+: entry (a, b) receives rho[a | bit, b | bit]
        // for every site unoccupied in both a and b
        for a in 0..dim {
            for b in 0..dim {
                let mut gain = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    let bit = 1usize << j;
                    if a & bit == 0 && b & bit == 0 {
                        gain += rho[(a | bit, b | bit)];
                    }
                }
                out[(a, b)] +=
                    gamma * (gain - 0.5 * (occupations[a] + occupations[b]) * rho[(a, b)]);
            }
        }
        out
    };

    let mut rho = rho0.clone();
    let mut snapshots = Vec::with_capacity(sorted.len());
    let mut step = 0usize;
    for &t in &sorted {
        let target = steps_of(t)?;
        while step < target {
            let k1 = rhs(&rho);
            let k2 = rhs(&(&rho + &k1.mapv(|x| x * (dt / 2.0))));
            let k3 = rhs(&(&rho + &k2.mapv(|x| x * (dt / 2.0))));
            let k4 = rhs(&(&rho + &k3.mapv(|x| x * dt)));
            rho = &rho
                + &(k1 + k2.mapv(|x| x * 2.0) + k3.mapv(|x| x * 2.0) + k4)
                    .mapv(|x| x * (dt / 6.0));
            step += 1;
        }
        // enforce exact Hermiticity before the checks
        let herm = rho.t().mapv(|x| x.conj());
        rho = (&rho + &herm).mapv(|x| x * 0.5);
        let trace: Complex64 = (0..dim).map(|i| rho[(i, i)]).sum();
        if (trace - Complex64::new(1.0, 0.0)).norm() > 1e-9 {
            return Err(Error::Numerical(format!(
                "Lindblad trace drifted to {trace} at t={t}"
            )));
        }
        let evals = rho
            .eigvalsh(UPLO::Lower)
            .map_err(Error::linalg("Lindblad positivity check"))?;
        if evals.iter().any(|&e| e < -1e-7) {
            return Err(Error::Numerical(format!(
                "Lindblad state lost positivity at t={t}"
            )));
        }
        snapshots.push(rho.clone());
    }
    Ok(snapshots)
}

/// Trace distance `(1/2) ||a - b||_1` between two density matrices.
pub fn trace_distance(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.nrows(),
        });
    }
    let d = a - b;
    // the difference of two Hermitian matrices is Hermitian, so the trace
    // norm is the sum of absolute eigenvalues
    let evals = d
        .eigvalsh(UPLO::Lower)
        .map_err(Error::linalg("trace distance eigenvalues"))?;
    Ok(0.5 * evals.iter().map(|e| e.abs()).sum::<f64>())
}

/// Outcome of the deterministic no-jump cross-check.
#[derive(Debug, Clone, Copy)]
pub struct NoJumpCheck {
    pub t: f64,
    /// `1 - |<psi_exact | psi_expansion>|` for the normalized no-jump states.
    pub fidelity_error: f64,
    /// Absolute difference of the survival probabilities computed from the
    /// expansion's norm bookkeeping and from dense eigendecomposition.
    pub survival_error: f64,
    /// The survival probability itself (dense route).
    pub survival: f64,
}

/// Evolve the no-jump branch two independent ways and compare: polynomial
/// expansion with per-step norm tracking, versus dense eigendecomposition.
pub fn no_jump_consistency(
    spec: &SpinChainSpec,
    v0: &StateVector,
    t: f64,
    dt: f64,
    tail_tol: f64,
) -> Result<NoJumpCheck> {
    spec.validate()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidSpec(format!("time {t} must be positive")));
    }
    let model = JumpModel::new(spec)?;
    let mut prop = model.propagator(dt, tail_tol)?;
    let n_steps = ((t / dt) + 1e-9).floor() as usize;
    if (n_steps as f64 * dt - t).abs() > 1e-9 {
        return Err(Error::InvalidSpec(format!(
            "time {t} is not a multiple of dt {dt}"
        )));
    }
    let mut state = v0.clone();
    let mut log_q = 0.0;
    for _ in 0..n_steps {
        let eta = prop.step(&mut state)?;
        log_q += 2.0 * model.no_jump_log_norm(eta, dt);
    }
    let exact = exact_evolve(spec, v0, t)?;
    let shift = -spec.gamma * spec.n as f64 * t / 4.0;
    let q_exact = (2.0 * (exact.log_norm + shift)).exp();
    let q_faber = log_q.exp();
    Ok(NoJumpCheck {
        t,
        fidelity_error: (1.0 - state.fidelity(&exact.state)).abs(),
        survival_error: (q_faber - q_exact).abs(),
        survival: q_exact,
    })
}

/// Comparison of a trajectory ensemble against the dense Lindblad solution.
#[derive(Debug, Clone)]
pub struct AgreementReport {
    pub seed_base: u64,
    pub n_traj: usize,
    pub dt: f64,
    pub t_max: f64,
    pub sampler: JumpSampler,
    pub times: Vec<f64>,
    pub trace_distances: Vec<f64>,
    /// Statistical 3-sigma bound per checkpoint.
    pub bounds_3sigma: Vec<f64>,
    pub no_jump_fraction: f64,
    pub mean_jump_count: f64,
}

impl AgreementReport {
    /// True when every checkpoint distance sits inside its 3-sigma bound.
    pub fn within_bounds(&self) -> bool {
        self.trace_distances
            .iter()
            .zip(&self.bounds_3sigma)
            .all(|(d, b)| d <= b)
    }

    /// Summary JSON, one object.
    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        let dist_final = self.trace_distances.last().copied().unwrap_or(0.0);
        require_finite("trace distance", dist_final)?;
        writeln!(w, "{{")?;
        writeln!(w, "  \"seed_base\": {},", self.seed_base)?;
        writeln!(w, "  \"n_traj\": {},", self.n_traj)?;
        writeln!(w, "  \"dt\": {},", fmt_f64(self.dt))?;
        writeln!(w, "  \"t_max\": {},", fmt_f64(self.t_max))?;
        writeln!(w, "  \"sampler\": \"{}\",", self.sampler.name())?;
        writeln!(
            w,
            "  \"times\": [{}],",
            self.times.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(", ")
        )?;
        writeln!(
            w,
            "  \"trace_distances\": [{}],",
            self.trace_distances
                .iter()
                .map(|&x| fmt_f64(x))
                .collect::<Vec<_>>()
                .join(", ")
        )?;
        writeln!(
            w,
            "  \"bounds_3sigma\": [{}],",
            self.bounds_3sigma
                .iter()
                .map(|&x| fmt_f64(x))
                .collect::<Vec<_>>()
                .join(", ")
        )?;
        writeln!(
            w,
            "  \"trace_distance_to_lindblad\": {},",
            fmt_f64(dist_final)
        )?;
        writeln!(w, "  \"within_bounds\": {},", self.within_bounds())?;
        writeln!(w, "  \"no_jump_fraction\": {},", fmt_f64(self.no_jump_fraction))?;
        writeln!(w, "  \"mean_jump_count\": {}", fmt_f64(self.mean_jump_count))?;
        writeln!(w, "}}")?;
        Ok(())
    }
}

/// Sample an ensemble from `|v0>` and compare its averaged density against
/// the dense Lindblad solution at every checkpoint.
pub fn jump_lindblad_agreement(
    spec: &SpinChainSpec,
    v0: &StateVector,
    opts: &TrajectoryOptions,
    n_traj: usize,
    seed_base: u64,
) -> Result<AgreementReport> {
    let model = JumpModel::new(spec)?;
    let ens = average_trajectories(&model, v0, opts, n_traj, seed_base)?;
    let mut rho0 = Array2::zeros((v0.dim(), v0.dim()));
    for (r, &ar) in v0.amplitudes().iter().enumerate() {
        for (c, &ac) in v0.amplitudes().iter().enumerate() {
            rho0[(r, c)] = ar * ac.conj();
        }
    }
    let reference = lindblad_evolve(spec, &rho0, &ens.checkpoint_times, opts.dt)?;
    let mut trace_distances = Vec::with_capacity(reference.len());
    let mut bounds = Vec::with_capacity(reference.len());
    for (i, r) in reference.iter().enumerate() {
        trace_distances.push(trace_distance(&ens.mean_density[i], r)?);
        bounds.push(ens.trace_distance_3sigma(i));
    }
    Ok(AgreementReport {
        seed_base,
        n_traj,
        dt: opts.dt,
        t_max: opts.t_max,
        sampler: opts.sampler,
        times: ens.checkpoint_times,
        trace_distances,
        bounds_3sigma: bounds,
        no_jump_fraction: ens.no_jump_fraction,
        mean_jump_count: ens.mean_jump_count,
    })
}
