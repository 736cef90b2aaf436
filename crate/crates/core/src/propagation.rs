//! Time evolution.
//!
//! The work-horse is a truncated Faber-polynomial expansion of
//! `exp(-i H dt)` on an elliptical enclosure of the spectrum. The ellipse
//! comes from rigorous numerical-range bounds, so the expansion converges
//! for every valid model parameter set. A dense eigendecomposition
//! propagator ([`exact_evolve`]) serves as the small-system reference.

use std::io::Write;
use std::mem;

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Factorize, ReciprocalConditionNum, Solve};
use num_complex::Complex64;

use crate::entanglement::{entropy, Bipartition};
use crate::error::{Error, Result};
use crate::hamiltonian::build_hamiltonian;
use crate::io::{fmt_f64, require_finite};
use crate::model::SpinChainSpec;
use crate::operator::OperatorMatrix;
use crate::state::{l2_norm, normalize_in_place, StateVector};

/// Hard cap on the expansion order of a single step.
pub const MAX_EXPANSION_ORDER: usize = 4096;

/// Intermediate-vector norm beyond which a step aborts with
/// [`Error::Overflow`]; reached only if the spectrum escapes the enclosure.
pub const NORM_GUARD: f64 = 1e12;

pub const DEFAULT_DT: f64 = 0.05;
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;
pub const DEFAULT_T_MAX: f64 = 200.0;

/// Entropy spread over the trailing window below which the steady-state
/// stopping rule fires.
pub const STEADY_ENTROPY_TOL: f64 = 1e-4;

/// Linear safety margin applied to both spectral half-widths before the
/// enclosing ellipse is constructed.
const ENCLOSURE_MARGIN: f64 = 1.1;

/// Number of consecutive sub-tolerance coefficients required to accept a
/// truncation point; a single small value can be an incidental zero of the
/// Bessel-like coefficient sequence.
const TAIL_WINDOW: usize = 4;

const QUADRATURE_START: usize = 1024;
const QUADRATURE_MAX: usize = 1 << 16;

/// Half-widths of a rectangle `|Re z| <= re_max`, `|Im z| <= im_max`
/// containing every eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub re_max: f64,
    pub im_max: f64,
}

impl SpectralBounds {
    /// Numerical-range bounds: every eigenvalue is a Rayleigh quotient, so
    /// its real part is bounded by the operator norm of the Hermitian part
    /// (triangle inequality over bond and field terms) and its imaginary
    /// part by the extreme entries of the anti-Hermitian diagonal.
    pub fn for_spec(spec: &SpinChainSpec) -> Self {
        let n = spec.n as f64;
        let bond = if spec.model.has_xx_bond() { 2.0 } else { 1.0 };
        SpectralBounds {
            re_max: n * (bond * spec.j + spec.omega),
            im_max: n * spec.gamma / 4.0,
        }
    }
}

/// Precomputed expansion of `exp(-i H dt)` for one fixed step size.
///
/// The enclosing ellipse (semi-axes `a >= b`, centered at the origin) is
/// mapped from the unit circle by `z = lambda (w + q / w)` with capacity
/// `lambda = (a + b) / 2` and shape parameter `q = (a - b) / (a + b)`.
/// The polynomials attached to that map satisfy `F_n(z(w)) = w^n + q^n w^-n`,
/// so the expansion coefficients are the non-negative Fourier coefficients
/// of `theta -> exp(-i dt z(e^{i theta}))`, computed by trapezoidal
/// quadrature with self-checked resolution.
#[derive(Debug, Clone)]
pub struct FaberPlan {
    dt: f64,
    tail_tol: f64,
    lambda: f64,
    ellipse_param: f64,
    coeffs: Vec<Complex64>,
}

impl FaberPlan {
    pub fn new(spec: &SpinChainSpec, dt: f64, tail_tol: f64) -> Result<Self> {
        spec.validate()?;
        Self::from_bounds(SpectralBounds::for_spec(spec), dt, tail_tol)
    }

    pub fn from_bounds(bounds: SpectralBounds, dt: f64, tail_tol: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidSpec(format!("time step {dt} must be positive")));
        }
        if !(tail_tol > 0.0) || tail_tol > 1e-2 {
            return Err(Error::InvalidSpec(format!(
                "tail tolerance {tail_tol} outside (0, 1e-2]"
            )));
        }
        if bounds.re_max < 0.0 || bounds.im_max < 0.0 {
            return Err(Error::InvalidSpec("negative spectral bounds".into()));
        }
        // An ellipse with semi-axes (sqrt(2) rx, sqrt(2) ry) passes exactly
        // through the rectangle corners; the margin pushes the spectrum
        // strictly inside.
        let a = ENCLOSURE_MARGIN * std::f64::consts::SQRT_2 * bounds.re_max;
        let b = ENCLOSURE_MARGIN * std::f64::consts::SQRT_2 * bounds.im_max;
        let (lambda, ellipse_param) = if a + b > 0.0 {
            ((a + b) / 2.0, (a - b) / (a + b))
        } else {
            // zero operator: any unit-capacity map works
            (1.0, 0.0)
        };
        let coeffs = expansion_coefficients(dt, tail_tol, lambda, ellipse_param)?;
        Ok(FaberPlan {
            dt,
            tail_tol,
            lambda,
            ellipse_param,
            coeffs,
        })
    }

    /// Number of expansion terms (polynomial degree + 1).
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn ellipse_param(&self) -> f64 {
        self.ellipse_param
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Evaluate the truncated expansion at a scalar point, via the same
    /// recurrence the operator kernel uses. Agrees with `exp(-i z dt)` to
    /// roughly the tail tolerance for `z` inside the bounds rectangle.
    pub fn eval_scalar(&self, z: Complex64) -> Complex64 {
        let m = self.coeffs.len();
        let mut acc = self.coeffs[0];
        if m == 1 {
            return acc;
        }
        let zl = z / self.lambda;
        let q = self.ellipse_param;
        let mut f_prev = Complex64::new(1.0, 0.0);
        let mut f_cur = zl;
        acc += self.coeffs[1] * f_cur;
        for (n, &c) in self.coeffs.iter().enumerate().skip(2) {
            let beta = if n == 2 { 2.0 * q } else { q };
            let f_next = zl * f_cur - beta * f_prev;
            acc += c * f_next;
            f_prev = f_cur;
            f_cur = f_next;
        }
        acc
    }
}

/// Boundary samples of `exp(-i dt z(e^{i theta}))`, projected on the
/// non-negative frequencies. Doubles the number of quadrature nodes until
/// the coefficients stop moving, then picks the truncation point.
fn expansion_coefficients(
    dt: f64,
    tail_tol: f64,
    lambda: f64,
    q: f64,
) -> Result<Vec<Complex64>> {
    let alias_tol = tail_tol / 10.0;
    let mut nodes = QUADRATURE_START;
    let mut prev: Option<Vec<Complex64>> = None;
    loop {
        let cur = boundary_dft(nodes, dt, lambda, q);
        if let Some(p) = &prev {
            let settled = p
                .iter()
                .zip(&cur)
                .all(|(a, b)| (a - b).norm() < alias_tol);
            if settled {
                if let Some(m) = truncation_point(&cur, tail_tol) {
                    let mut coeffs = cur;
                    coeffs.truncate(m);
                    return Ok(coeffs);
                }
                if cur.len() > MAX_EXPANSION_ORDER {
                    return Err(Error::TailNotConverged {
                        tail_tol,
                        max_order: MAX_EXPANSION_ORDER,
                        dt,
                    });
                }
                // window may lie beyond the resolved frequencies
            }
        }
        prev = Some(cur);
        nodes *= 2;
        if nodes > QUADRATURE_MAX {
            return Err(Error::TailNotConverged {
                tail_tol,
                max_order: MAX_EXPANSION_ORDER,
                dt,
            });
        }
    }
}

/// `a_n = (1/K) sum_j g(theta_j) e^{-i n theta_j}` for
/// `n < min(K/2, MAX_EXPANSION_ORDER + TAIL_WINDOW + 1)`.
fn boundary_dft(k: usize, dt: f64, lambda: f64, q: f64) -> Vec<Complex64> {
    let n_out = (k / 2).min(MAX_EXPANSION_ORDER + TAIL_WINDOW + 1);
    let mut out = vec![Complex64::new(0.0, 0.0); n_out];
    for j in 0..k {
        let theta = std::f64::consts::TAU * j as f64 / k as f64;
        let w = Complex64::from_polar(1.0, theta);
        let z = lambda * (w + q * w.conj());
        let g = (Complex64::new(0.0, -dt) * z).exp();
        let base = w.conj();
        let mut phase = Complex64::new(1.0, 0.0);
        for (n, o) in out.iter_mut().enumerate() {
            // refresh the running power to stop roundoff accumulating
            if n % 64 == 0 {
                phase = Complex64::from_polar(1.0, -(n as f64) * theta);
            }
            *o += g * phase;
            phase *= base;
        }
    }
    let inv = 1.0 / k as f64;
    for o in &mut out {
        *o *= inv;
    }
    out
}

/// Smallest `m >= 1` with a full window of sub-tolerance coefficients at
/// `[m, m + TAIL_WINDOW)`, bounded by the order cap.
fn truncation_point(coeffs: &[Complex64], tail_tol: f64) -> Option<usize> {
    let last = coeffs
        .len()
        .saturating_sub(TAIL_WINDOW)
        .min(MAX_EXPANSION_ORDER);
    'outer: for m in 1..=last {
        for c in &coeffs[m..m + TAIL_WINDOW] {
            if c.norm() >= tail_tol {
                continue 'outer;
            }
        }
        return Some(m);
    }
    None
}

/// Reusable stepper: Hamiltonian, plan, and scratch buffers.
pub struct Propagator {
    h: OperatorMatrix,
    plan: FaberPlan,
    f_prev: Vec<Complex64>,
    f_cur: Vec<Complex64>,
    f_next: Vec<Complex64>,
    acc: Vec<Complex64>,
}

impl Propagator {
    pub fn new(spec: &SpinChainSpec, dt: f64, tail_tol: f64) -> Result<Self> {
        let plan = FaberPlan::new(spec, dt, tail_tol)?;
        let h = build_hamiltonian(spec)?;
        Self::from_parts(h, plan)
    }

    /// Pair an arbitrary operator with a plan whose enclosure must contain
    /// its spectrum.
    pub fn from_parts(h: OperatorMatrix, plan: FaberPlan) -> Result<Self> {
        let dim = h.dim();
        let zeros = vec![Complex64::new(0.0, 0.0); dim];
        Ok(Propagator {
            h,
            plan,
            f_prev: zeros.clone(),
            f_cur: zeros.clone(),
            f_next: zeros.clone(),
            acc: zeros,
        })
    }

    pub fn plan(&self) -> &FaberPlan {
        &self.plan
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.h
    }

    /// Advance `state` by one step of `dt`, renormalizing. Returns the norm
    /// the unnormalized result had, the per-step norm factor of the
    /// non-unitary dynamics.
    pub fn step(&mut self, state: &mut StateVector) -> Result<f64> {
        let amps = state.amplitudes_vec_mut();
        if amps.len() != self.h.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.h.dim(),
                got: amps.len(),
            });
        }
        let coeffs = &self.plan.coeffs;
        let m = coeffs.len();
        let inv_lambda = Complex64::new(1.0 / self.plan.lambda, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let q = self.plan.ellipse_param;

        for (a, v) in self.acc.iter_mut().zip(amps.iter()) {
            *a = coeffs[0] * v;
        }
        if m > 1 {
            self.f_prev.copy_from_slice(amps);
            self.h
                .apply_scaled_shifted(inv_lambda, zero, &self.f_prev, &mut self.f_cur)?;
            for (a, v) in self.acc.iter_mut().zip(&self.f_cur) {
                *a += coeffs[1] * v;
            }
            for (n, &c) in coeffs.iter().enumerate().skip(2) {
                let beta = if n == 2 { 2.0 * q } else { q };
                self.h
                    .apply_scaled_shifted(inv_lambda, zero, &self.f_cur, &mut self.f_next)?;
                if beta != 0.0 {
                    for (x, p) in self.f_next.iter_mut().zip(&self.f_prev) {
                        *x -= beta * p;
                    }
                }
                for (a, x) in self.acc.iter_mut().zip(&self.f_next) {
                    *a += c * x;
                }
                mem::swap(&mut self.f_prev, &mut self.f_cur);
                mem::swap(&mut self.f_cur, &mut self.f_next);
                let grow = l2_norm(&self.f_cur);
                if !grow.is_finite() || grow > NORM_GUARD {
                    return Err(Error::Overflow {
                        context: format!("expansion term {n}"),
                        norm: grow,
                    });
                }
            }
        }
        let prenorm = normalize_in_place(&mut self.acc);
        if !prenorm.is_finite() || prenorm > NORM_GUARD {
            return Err(Error::Overflow {
                context: "step result".into(),
                norm: prenorm,
            });
        }
        if prenorm == 0.0 {
            return Err(Error::Numerical("step annihilated the state".into()));
        }
        mem::swap(amps, &mut self.acc);
        Ok(prenorm)
    }
}

/// Result of the dense reference propagator.
#[derive(Debug, Clone)]
pub struct ExactEvolution {
    /// Normalized final state.
    pub state: StateVector,
    /// `ln` of the norm the unnormalized result had.
    pub log_norm: f64,
    /// Set when the eigenvector matrix is numerically singular
    /// (reciprocal condition below 1e-12); the result is still returned.
    pub ill_conditioned: bool,
}

/// Propagate by full eigendecomposition: `exp(-i H t) v = V e^{-i D t} V^{-1} v`.
///
/// Limited to 10 sites; this is the cross-check reference, not the
/// production path.
pub fn exact_evolve(spec: &SpinChainSpec, v0: &StateVector, t: f64) -> Result<ExactEvolution> {
    spec.validate()?;
    if spec.n > 10 {
        return Err(Error::ResourceGuard(format!(
            "dense reference propagator is capped at 10 sites; got {}",
            spec.n
        )));
    }
    if v0.n() != spec.n {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: v0.dim(),
        });
    }
    require_finite("time", t)?;
    let h = build_hamiltonian(spec)?.to_dense();
    let (vals, vecs): (Array1<Complex64>, Array2<Complex64>) =
        h.eig().map_err(Error::linalg("dense propagator eigendecomposition"))?;
    let rcond = vecs
        .rcond()
        .map_err(Error::linalg("eigenvector matrix conditioning"))?;
    let fact = vecs
        .factorize()
        .map_err(Error::linalg("eigenvector matrix factorization"))?;
    let b = Array1::from_iter(v0.amplitudes().iter().copied());
    let mut c = fact
        .solve(&b)
        .map_err(Error::linalg("eigenbasis projection"))?;
    for (ci, &e) in c.iter_mut().zip(vals.iter()) {
        *ci *= (Complex64::new(0.0, -t) * e).exp();
    }
    let y = vecs.dot(&c);
    let norm = l2_norm(y.as_slice().expect("contiguous"));
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Numerical(format!(
            "dense propagation produced norm {norm}"
        )));
    }
    let state = StateVector::from_amplitudes(y.to_vec())?;
    Ok(ExactEvolution {
        state,
        log_norm: norm.ln(),
        ill_conditioned: rcond < 1e-12,
    })
}

/// Knobs for [`evolve_trajectory`].
#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub dt: f64,
    pub tail_tol: f64,
    pub t_max: f64,
    /// Bipartition cut for the entropy observable.
    pub cut: usize,
    /// Stop once the entropy is flat over the trailing window.
    pub stop_on_steady: bool,
    /// Record excitation-sector populations per sample.
    pub record_sectors: bool,
}

impl EvolveOptions {
    pub fn new(spec: &SpinChainSpec) -> Self {
        EvolveOptions {
            dt: DEFAULT_DT,
            tail_tol: DEFAULT_TAIL_TOL,
            t_max: DEFAULT_T_MAX,
            cut: (spec.n / 2).max(1),
            stop_on_steady: false,
            record_sectors: spec.model.conserves_excitation(),
        }
    }

    /// Defaults plus the steady-state stopping rule.
    pub fn steady_state(spec: &SpinChainSpec) -> Self {
        EvolveOptions {
            stop_on_steady: true,
            ..Self::new(spec)
        }
    }

    /// Width of the trailing window the stopping rule inspects: ten
    /// dissipation times, or ten coupling times when the dissipation is
    /// too weak to set a scale.
    pub fn steady_window(&self, spec: &SpinChainSpec) -> f64 {
        if spec.gamma >= 0.1 {
            10.0 / spec.gamma
        } else {
            10.0 / spec.j
        }
    }
}

/// One observation instant of a normalized evolving state.
#[derive(Debug, Clone)]
pub struct TimeSample {
    pub t: f64,
    /// Half-cut entanglement entropy, nats.
    pub entropy: f64,
    /// `-2 ln(eta) / dt` for the norm factor `eta` of the step that
    /// produced this sample; zero for the initial sample.
    pub norm_loss_rate: f64,
    /// Excitation-sector weights `p_0 .. p_N`, when recorded.
    pub sector_populations: Option<Vec<f64>>,
}

/// Evolution record: samples at every step plus the final state and the
/// accumulated norm bookkeeping.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub n: usize,
    pub samples: Vec<TimeSample>,
    /// True when the steady-state stopping rule fired before `t_max`.
    pub steady_reached: bool,
    /// Accumulated `sum ln(eta)` over all steps; `exp(2 log_norm)` is the
    /// squared norm the unnormalized state would have.
    pub log_norm: f64,
    pub final_state: StateVector,
    /// Expansion order of the plan that produced the run.
    pub expansion_order: usize,
}

impl TimeSeries {
    pub fn final_entropy(&self) -> Option<f64> {
        self.samples.last().map(|s| s.entropy)
    }

    pub fn final_time(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    /// CSV body: `t,entropy,norm_loss_rate` plus `p0..pN` when sector
    /// populations were recorded.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let with_sectors = self
            .samples
            .first()
            .is_some_and(|s| s.sector_populations.is_some());
        write!(w, "t,entropy,norm_loss_rate")?;
        if with_sectors {
            for k in 0..=self.n {
                write!(w, ",p{k}")?;
            }
        }
        writeln!(w)?;
        for s in &self.samples {
            require_finite("t", s.t)?;
            require_finite("entropy", s.entropy)?;
            require_finite("norm_loss_rate", s.norm_loss_rate)?;
            write!(
                w,
                "{},{},{}",
                fmt_f64(s.t),
                fmt_f64(s.entropy),
                fmt_f64(s.norm_loss_rate)
            )?;
            if with_sectors {
                let pops = s.sector_populations.as_ref().ok_or_else(|| {
                    Error::Numerical("inconsistent sector recording".into())
                })?;
                for &p in pops {
                    require_finite("population", p)?;
                    write!(w, ",{}", fmt_f64(p))?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Evolve `v0` under the model Hamiltonian with per-step renormalization,
/// recording entropy, norm-loss rate, and optionally sector populations.
pub fn evolve_trajectory(
    spec: &SpinChainSpec,
    v0: &StateVector,
    opts: &EvolveOptions,
) -> Result<TimeSeries> {
    spec.validate()?;
    if v0.n() != spec.n {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: v0.dim(),
        });
    }
    if !(opts.t_max > 0.0) || !opts.t_max.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "t_max {} must be positive",
            opts.t_max
        )));
    }
    let part = Bipartition::new(spec.n, opts.cut)?;
    let mut prop = Propagator::new(spec, opts.dt, opts.tail_tol)?;
    let n_steps = ((opts.t_max / opts.dt) + 1e-9).floor().max(1.0) as usize;
    let window = opts.steady_window(spec);

    let mut state = v0.clone();
    let mut samples = Vec::with_capacity(n_steps + 1);
    let observe = |state: &StateVector, t: f64, rate: f64| -> Result<TimeSample> {
        Ok(TimeSample {
            t,
            entropy: entropy(state, &part)?,
            norm_loss_rate: rate,
            sector_populations: opts.record_sectors.then(|| state.sector_populations()),
        })
    };
    samples.push(observe(&state, 0.0, 0.0)?);

    let mut log_norm = 0.0;
    let mut steady_reached = false;
    for k in 0..n_steps {
        let eta = prop.step(&mut state)?;
        log_norm += eta.ln();
        let t = (k + 1) as f64 * opts.dt;
        let rate = -2.0 * eta.ln() / opts.dt;
        samples.push(observe(&state, t, rate)?);
        if opts.stop_on_steady && t >= window {
            let cutoff = t - window;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for s in samples.iter().rev().take_while(|s| s.t >= cutoff) {
                lo = lo.min(s.entropy);
                hi = hi.max(s.entropy);
            }
            if hi - lo < STEADY_ENTROPY_TOL {
                steady_reached = true;
                break;
            }
        }
    }

    Ok(TimeSeries {
        n: spec.n,
        samples,
        steady_reached,
        log_norm,
        final_state: state,
        expansion_order: prop.plan().order(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_points(b: &SpectralBounds) -> Vec<Complex64> {
        let mut pts = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(b.re_max, b.im_max),
            Complex64::new(-b.re_max, b.im_max),
            Complex64::new(b.re_max, -b.im_max),
            Complex64::new(-b.re_max, -b.im_max),
            Complex64::new(b.re_max, 0.0),
            Complex64::new(0.0, b.im_max),
        ];
        for i in 1..8 {
            let f = i as f64 / 8.0;
            pts.push(Complex64::new(
                b.re_max * (2.0 * f - 1.0),
                b.im_max * (1.0 - 2.0 * f),
            ));
        }
        pts
    }

    #[test]
    fn bounds_for_each_model() {
        let spec = SpinChainSpec::new(Model::Nhtfi, 4)
            .with_omega(2.0)
            .with_gamma(0.8);
        let b = SpectralBounds::for_spec(&spec);
        assert_eq!(b.re_max, 12.0);
        assert_eq!(b.im_max, 0.8);
        let spec = SpinChainSpec::new(Model::Nhxx, 6).with_gamma(1.0);
        let b = SpectralBounds::for_spec(&spec);
        assert_eq!(b.re_max, 12.0);
        assert_eq!(b.im_max, 1.5);
        let spec = SpinChainSpec::new(Model::NhxxField, 6)
            .with_omega(1.0)
            .with_gamma(1.0);
        assert_eq!(SpectralBounds::for_spec(&spec).re_max, 18.0);
    }

    #[test]
    fn plan_matches_exponential_on_scalars() {
        let spec = SpinChainSpec::new(Model::Nhtfi, 3)
            .with_omega(1.5)
            .with_gamma(0.6);
        let plan = FaberPlan::new(&spec, 0.05, 1e-12).unwrap();
        let b = SpectralBounds::for_spec(&spec);
        for z in sample_points(&b) {
            let got = plan.eval_scalar(z);
            let want = (Complex64::new(0.0, -0.05) * z).exp();
            assert!(
                (got - want).norm() < 1e-10,
                "z={z}, got {got}, want {want}"
            );
        }
    }

    #[test]
    fn plan_handles_flat_spectrum_hermitian_limit() {
        // gamma = 0 collapses the ellipse to a segment (Chebyshev limit)
        let spec = SpinChainSpec::new(Model::Nhtfi, 4).with_omega(1.0);
        let plan = FaberPlan::new(&spec, 0.1, 1e-12).unwrap();
        assert_eq!(plan.ellipse_param(), 1.0);
        let b = SpectralBounds::for_spec(&spec);
        for z in sample_points(&b) {
            let want = (Complex64::new(0.0, -0.1) * z).exp();
            assert!((plan.eval_scalar(z) - want).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_operator_step_is_identity() {
        let plan =
            FaberPlan::from_bounds(SpectralBounds { re_max: 0.0, im_max: 0.0 }, 0.3, 1e-12)
                .unwrap();
        let h = OperatorMatrix::zero(8);
        let mut prop = Propagator::from_parts(h, plan).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v0 = StateVector::random(3, &mut rng);
        let mut v = v0.clone();
        let eta = prop.step(&mut v).unwrap();
        assert!((eta - 1.0).abs() < 1e-12);
        assert!((v.fidelity(&v0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unitary_limit_preserves_norm_and_matches_exact() {
        let spec = SpinChainSpec::new(Model::Nhtfi, 4).with_omega(1.3);
        let mut prop = Propagator::new(&spec, 0.05, 1e-12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v0 = StateVector::random(4, &mut rng);
        let mut v = v0.clone();
        let mut log_norm = 0.0;
        for _ in 0..20 {
            let eta = prop.step(&mut v).unwrap();
            assert!((eta - 1.0).abs() < 1e-11, "unitary step changed norm by {eta}");
            log_norm += eta.ln();
        }
        let exact = exact_evolve(&spec, &v0, 1.0).unwrap();
        assert!((v.fidelity(&exact.state) - 1.0).abs() < 1e-10);
        assert!(log_norm.abs() < 1e-10);
        assert!(exact.log_norm.abs() < 1e-10);
    }

    #[test]
    fn matches_exact_for_dissipative_models() {
        for (model, omega) in [
            (Model::Nhxx, 0.0),
            (Model::NhxxField, 1.1),
            (Model::Nhtfi, 2.0),
        ] {
            let spec = SpinChainSpec::new(model, 4)
                .with_omega(omega)
                .with_gamma(0.9);
            let mut prop = Propagator::new(&spec, 0.05, 1e-12).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let v0 = StateVector::random(4, &mut rng);
            let mut v = v0.clone();
            let mut log_norm = 0.0;
            for _ in 0..20 {
                log_norm += prop.step(&mut v).unwrap().ln();
            }
            let exact = exact_evolve(&spec, &v0, 1.0).unwrap();
            assert!(
                (v.fidelity(&exact.state) - 1.0).abs() < 1e-9,
                "{model}: fidelity {}",
                v.fidelity(&exact.state)
            );
            assert!(
                (log_norm - exact.log_norm).abs() < 1e-9,
                "{model}: log norm {} vs {}",
                log_norm,
                exact.log_norm
            );
        }
    }

    #[test]
    fn two_half_steps_equal_one_full_step() {
        let spec = SpinChainSpec::new(Model::NhxxField, 5)
            .with_omega(0.7)
            .with_gamma(1.2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v0 = StateVector::random(5, &mut rng);

        let mut half = Propagator::new(&spec, 0.05, 1e-12).unwrap();
        let mut va = v0.clone();
        let mut log_a = 0.0;
        for _ in 0..2 {
            log_a += half.step(&mut va).unwrap().ln();
        }

        let mut full = Propagator::new(&spec, 0.1, 1e-12).unwrap();
        let mut vb = v0.clone();
        let log_b = full.step(&mut vb).unwrap().ln();

        assert!((va.fidelity(&vb) - 1.0).abs() < 1e-10);
        assert!((log_a - log_b).abs() < 1e-10);
    }

    #[test]
    fn diagonal_model_evolves_analytically() {
        // Omega = 0 leaves the Hamiltonian diagonal: each amplitude picks up
        // exp(-i E_b t) exactly
        let spec = SpinChainSpec::new(Model::Nhtfi, 3).with_gamma(0.8);
        let h = build_hamiltonian(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let v0 = StateVector::random(3, &mut rng);
        let t = 0.75;
        let mut analytic: Vec<Complex64> = v0
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(b, &a)| {
                let e = h.entry(b, b);
                a * (Complex64::new(0.0, -t) * e).exp()
            })
            .collect();
        let raw_norm = l2_norm(&analytic);
        normalize_in_place(&mut analytic);

        let mut prop = Propagator::new(&spec, 0.05, 1e-12).unwrap();
        let mut v = v0.clone();
        let mut log_norm = 0.0;
        for _ in 0..15 {
            log_norm += prop.step(&mut v).unwrap().ln();
        }
        for (a, b) in v.amplitudes().iter().zip(&analytic) {
            assert!((a - b).norm() < 1e-10);
        }
        assert!((log_norm - raw_norm.ln()).abs() < 1e-10);

        let exact = exact_evolve(&spec, &v0, t).unwrap();
        for (a, b) in exact.state.amplitudes().iter().zip(&analytic) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn sector_ratio_decay_law() {
        // conserving model: the double ratio p_n(t) p_0(0) / (p_n(0) p_0(t))
        // must equal exp(-n gamma t) independent of the Hermitian dynamics
        let gamma = 0.7;
        let spec = SpinChainSpec::new(Model::Nhxx, 5).with_gamma(gamma);
        let v0 = StateVector::plus_product(5);
        let p_start = v0.sector_populations();
        let opts = EvolveOptions {
            t_max: 2.0,
            ..EvolveOptions::new(&spec)
        };
        let series = evolve_trajectory(&spec, &v0, &opts).unwrap();
        let last = series.samples.last().unwrap();
        let t = last.t;
        let p_end = last.sector_populations.as_ref().unwrap();
        for n in 0..=5usize {
            let ratio = (p_end[n] / p_start[n]) * (p_start[0] / p_end[0]);
            let want = (-(n as f64) * gamma * t).exp();
            assert!(
                (ratio - want).abs() < 1e-6 * want.max(1e-3),
                "sector {n}: ratio {ratio} vs {want}"
            );
        }
    }

    #[test]
    fn steady_stopping_rule_fires() {
        let spec = SpinChainSpec::new(Model::Nhtfi, 4).with_gamma(1.0);
        let v0 = StateVector::plus_product(4);
        let opts = EvolveOptions::steady_state(&spec);
        let series = evolve_trajectory(&spec, &v0, &opts).unwrap();
        assert!(series.steady_reached);
        assert!(series.final_time() < DEFAULT_T_MAX);
        // diagonal model funnels into the all-down product state
        assert!(series.final_entropy().unwrap() < 1e-3);
    }

    #[test]
    fn norm_loss_rate_tracks_sector_decay() {
        // start inside one excitation sector of the conserving model: the
        // squared norm changes at exactly (2n - N) gamma / 2, the sector's
        // imaginary eigenvalue doubled (the jump-model convention with its
        // -i gamma N / 4 shift adds a uniform n gamma offset on top)
        let gamma = 0.6;
        let spec = SpinChainSpec::new(Model::Nhxx, 4).with_gamma(gamma);
        for (state, n_exc) in [(0b0111usize, 3.0f64), (0b0001, 1.0), (0b0011, 2.0)] {
            let v0 = StateVector::basis_state(4, state).unwrap();
            let opts = EvolveOptions {
                t_max: 1.0,
                ..EvolveOptions::new(&spec)
            };
            let series = evolve_trajectory(&spec, &v0, &opts).unwrap();
            let want = (2.0 * n_exc - 4.0) * gamma / 2.0;
            for s in &series.samples[1..] {
                assert!(
                    (s.norm_loss_rate - want).abs() < 1e-9,
                    "state {state:#b} t={}: rate {} want {want}",
                    s.t,
                    s.norm_loss_rate
                );
            }
        }
    }

    #[test]
    fn csv_layout() {
        let spec = SpinChainSpec::new(Model::Nhxx, 4).with_gamma(0.5);
        let v0 = StateVector::plus_product(4);
        let opts = EvolveOptions {
            t_max: 0.1,
            ..EvolveOptions::new(&spec)
        };
        let series = evolve_trajectory(&spec, &v0, &opts).unwrap();
        let mut buf = Vec::new();
        series.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,entropy,norm_loss_rate,p0,p1,p2,p3,p4");
        assert_eq!(lines.count(), series.samples.len());

        let spec = SpinChainSpec::new(Model::Nhtfi, 4).with_gamma(0.5);
        let opts = EvolveOptions {
            t_max: 0.1,
            ..EvolveOptions::new(&spec)
        };
        let series = evolve_trajectory(&spec, &v0, &opts).unwrap();
        let mut buf = Vec::new();
        series.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("t,entropy,norm_loss_rate\n"));
    }

    #[test]
    fn absurd_step_fails_to_converge() {
        let spec = SpinChainSpec::new(Model::Nhtfi, 4)
            .with_omega(1.0)
            .with_gamma(0.5);
        assert!(matches!(
            FaberPlan::new(&spec, 1e6, 1e-12),
            Err(Error::TailNotConverged { .. })
        ));
    }

    #[test]
    fn rejects_bad_parameters() {
        let spec = SpinChainSpec::new(Model::Nhtfi, 4).with_gamma(0.5);
        assert!(FaberPlan::new(&spec, 0.0, 1e-12).is_err());
        assert!(FaberPlan::new(&spec, 0.05, 0.0).is_err());
        assert!(FaberPlan::new(&spec, 0.05, 1.0).is_err());
        let v0 = StateVector::plus_product(5);
        let opts = EvolveOptions::new(&spec);
        assert!(evolve_trajectory(&spec, &v0, &opts).is_err());
    }
}
