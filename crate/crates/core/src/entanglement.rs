//! Half-cut reduced density matrices, von Neumann entropy, and
//! entropy-vs-size scaling.
//!
//! Entropies are in nats (natural logarithm) throughout.

use std::io::Write;

use ndarray::Array2;
use ndarray_linalg::{EigValsh, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::io::{fmt_f64, require_finite};
use crate::model::SpinChainSpec;
use crate::propagation::{evolve_trajectory, EvolveOptions};
use crate::spectral::translation::{block_diagonalize, sector_eig, TranslationBasis};
use crate::spectral::GAP_DEGENERACY_TOL;
use crate::state::StateVector;

/// Reduced-density-matrix eigenvalues below this are dropped before the log;
/// roundoff can push true zeros slightly negative.
pub const EIGENVALUE_CLIP: f64 = 1e-14;

/// Slope magnitude (nats/site) below which a scaling record classifies as
/// area law.
pub const AREA_LAW_SLOPE_MAX: f64 = 0.02;

/// Slope (nats/site) above which a scaling record classifies as volume law,
/// provided the fit residual stays under [`VOLUME_LAW_RESIDUAL_FRACTION`]
/// of the entropy range.
pub const VOLUME_LAW_SLOPE_MIN: f64 = 0.1;

pub const VOLUME_LAW_RESIDUAL_FRACTION: f64 = 0.2;

/// Contiguous bipartition: part A is the `cut` low-order sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bipartition {
    n: usize,
    cut: usize,
}

impl Bipartition {
    pub fn new(n: usize, cut: usize) -> Result<Self> {
        if cut == 0 || cut >= n {
            return Err(Error::InvalidSpec(format!(
                "cut {cut} outside [1, {}]",
                n.saturating_sub(1)
            )));
        }
        Ok(Bipartition { n, cut })
    }

    /// The default half cut (`N/2` low-order sites).
    pub fn half(n: usize) -> Result<Self> {
        Self::new(n, n / 2)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cut(&self) -> usize {
        self.cut
    }

    pub fn dim_a(&self) -> usize {
        1 << self.cut
    }

    pub fn dim_b(&self) -> usize {
        1 << (self.n - self.cut)
    }
}

/// `rho_A = Tr_B |v><v|` as a dense Hermitian matrix of size `2^cut`.
///
/// The state is viewed as a `2^(N-cut) x 2^cut` array (part A varying
/// fastest, matching the basis convention) and contracted with its
/// conjugate. Hermiticity holds exactly: the lower triangle is computed
/// and mirrored.
pub fn reduced_density_matrix(
    v: &StateVector,
    p: &Bipartition,
) -> Result<Array2<Complex64>> {
    if v.n() != p.n {
        return Err(Error::DimensionMismatch {
            expected: 1 << p.n,
            got: v.dim(),
        });
    }
    let norm = v.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Numerical(format!(
            "reduced density matrix needs a normalized state; got norm {norm}"
        )));
    }
    let da = p.dim_a();
    let db = p.dim_b();
    let amps = v.amplitudes();
    let mut rho = Array2::<Complex64>::zeros((da, da));
    for b in 0..db {
        let base = b << p.cut;
        for a in 0..da {
            let va = amps[base | a];
            for a2 in 0..=a {
                rho[(a, a2)] += va * amps[base | a2].conj();
            }
        }
    }
    for a in 0..da {
        for a2 in (a + 1)..da {
            rho[(a, a2)] = rho[(a2, a)].conj();
        }
    }
    Ok(rho)
}

/// Von Neumann entropy `-Tr(rho ln rho)` of a Hermitian density matrix,
/// in nats. Eigenvalues below [`EIGENVALUE_CLIP`] are dropped.
pub fn entropy_of_density(rho: &Array2<Complex64>) -> Result<f64> {
    let evals = rho
        .eigvalsh(UPLO::Lower)
        .map_err(Error::linalg("density matrix eigenvalues"))?;
    Ok(entropy_from_probabilities(evals.iter().copied()))
}

/// `-sum p ln p` over the given weights, skipping entries below the clip.
pub fn entropy_from_probabilities(probs: impl IntoIterator<Item = f64>) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p >= EIGENVALUE_CLIP)
        .map(|p| -p * p.ln())
        .sum()
}

/// Half-cut entanglement entropy of a pure state, in nats.
pub fn entropy(v: &StateVector, p: &Bipartition) -> Result<f64> {
    let rho = reduced_density_matrix(v, p)?;
    entropy_of_density(&rho)
}

/// Entropy of the eigenvector with the largest imaginary eigenvalue, the
/// steady state of the normalized long-time dynamics.
///
/// Fails with [`Error::NoSteadyLevel`] when the top of the spectrum is
/// degenerate within the gap tolerance, since no unique steady level exists.
pub fn steady_entropy_spectral(spec: &SpinChainSpec, p: &Bipartition) -> Result<f64> {
    spec.validate()?;
    if p.n != spec.n {
        return Err(Error::DimensionMismatch {
            expected: spec.n,
            got: p.n,
        });
    }
    let values = block_diagonalize(spec, false)?;
    let sorted = values.eigenvalues_sorted();
    if sorted.len() >= 2 {
        let gap = sorted[0].im - sorted[1].im;
        if gap < GAP_DEGENERACY_TOL {
            return Err(Error::NoSteadyLevel { gap });
        }
    }
    let top = values.level(0);
    let h = crate::hamiltonian::build_hamiltonian(spec)?;
    let basis = TranslationBasis::new(spec.n);
    let block = sector_eig(&basis, &h, top.sector, true)?;
    let lifted = basis.lift(
        top.sector,
        block
            .vectors
            .as_ref()
            .expect("solved with vectors")
            .column(0),
    )?;
    entropy(&lifted, p)
}

/// How a steady-state entropy is obtained for scaling analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingMethod {
    /// Long-time evolution from the separable product state with the
    /// steady-entropy stopping rule.
    Dynamics,
    /// Entropy of the maximal-imaginary eigenvector.
    Spectral,
}

impl ScalingMethod {
    pub fn name(self) -> &'static str {
        match self {
            ScalingMethod::Dynamics => "dynamics",
            ScalingMethod::Spectral => "spectral",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dynamics" => Ok(ScalingMethod::Dynamics),
            "spectral" => Ok(ScalingMethod::Spectral),
            other => Err(Error::InvalidSpec(format!("unknown method {other:?}"))),
        }
    }
}

/// Least-squares line through (x, y) points.
#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual_rms: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx) * (xi - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let residual_rms = (x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let r = yi - (slope * xi + intercept);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    LinearFit {
        slope,
        intercept,
        residual_rms,
    }
}

/// Outcome of comparing a scaling record against the slope thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Volume,
    Area,
    Indeterminate,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::Volume => "volume",
            Classification::Area => "area",
            Classification::Indeterminate => "indeterminate",
        }
    }
}

/// Steady-state entropy per chain length at one dissipation rate.
#[derive(Debug, Clone)]
pub struct ScalingRecord {
    /// Chain lengths with a successful entropy, ascending.
    pub n_values: Vec<usize>,
    /// Steady-state entropies aligned with `n_values` (nats).
    pub entropies: Vec<f64>,
    pub gamma: f64,
    pub method: ScalingMethod,
    /// Present when at least three points survived.
    pub fit: Option<LinearFit>,
    /// Chain lengths whose entropy computation failed, with the reason.
    pub failures: Vec<(usize, String)>,
}

impl ScalingRecord {
    pub fn classification(&self) -> Classification {
        let Some(fit) = self.fit else {
            return Classification::Indeterminate;
        };
        if fit.slope.abs() < AREA_LAW_SLOPE_MAX {
            return Classification::Area;
        }
        let range = self
            .entropies
            .iter()
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - self.entropies.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        if fit.slope > VOLUME_LAW_SLOPE_MIN
            && fit.residual_rms < VOLUME_LAW_RESIDUAL_FRACTION * range
        {
            return Classification::Volume;
        }
        Classification::Indeterminate
    }

    /// CSV body: `N,entropy,gamma,method`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "N,entropy,gamma,method")?;
        for (&n, &s) in self.n_values.iter().zip(&self.entropies) {
            require_finite("entropy", s)?;
            writeln!(w, "{},{},{},{}", n, fmt_f64(s), fmt_f64(self.gamma), self.method.name())?;
        }
        Ok(())
    }

    /// Fit summary JSON: `{gamma, slope, intercept, classification}`.
    pub fn write_fit_json<W: Write>(&self, mut w: W) -> Result<()> {
        let (slope, intercept) = match self.fit {
            Some(f) => (f.slope, f.intercept),
            None => (f64::NAN, f64::NAN),
        };
        if self.fit.is_some() {
            require_finite("slope", slope)?;
            require_finite("intercept", intercept)?;
            writeln!(
                w,
                "{{\"gamma\": {}, \"slope\": {}, \"intercept\": {}, \"classification\": \"{}\"}}",
                fmt_f64(self.gamma),
                fmt_f64(slope),
                fmt_f64(intercept),
                self.classification().name()
            )?;
        } else {
            writeln!(
                w,
                "{{\"gamma\": {}, \"slope\": null, \"intercept\": null, \"classification\": \"{}\"}}",
                fmt_f64(self.gamma),
                self.classification().name()
            )?;
        }
        Ok(())
    }
}

/// Compute the steady-state entropy for each even chain length in `n_list`
/// and fit entropy against length.
///
/// `template` provides the model and couplings; its site count is replaced
/// per entry. Failures at single lengths are recorded and excluded from
/// the fit, which needs at least three surviving points.
pub fn scaling_analysis(
    template: &SpinChainSpec,
    n_list: &[usize],
    gamma: f64,
    method: ScalingMethod,
) -> Result<ScalingRecord> {
    if n_list.is_empty() {
        return Err(Error::InvalidSpec("empty N list".into()));
    }
    let mut sorted_ns = n_list.to_vec();
    sorted_ns.sort_unstable();
    sorted_ns.dedup();
    for &n in &sorted_ns {
        if n % 2 != 0 || !(4..=14).contains(&n) {
            return Err(Error::InvalidSpec(format!(
                "scaling lengths must be even and within [4, 14]; got {n}"
            )));
        }
    }

    let mut n_values = Vec::new();
    let mut entropies = Vec::new();
    let mut failures = Vec::new();
    for &n in &sorted_ns {
        let mut spec = template.clone().with_gamma(gamma);
        spec.n = n;
        let part = Bipartition::half(n)?;
        let result = match method {
            ScalingMethod::Spectral => steady_entropy_spectral(&spec, &part),
            ScalingMethod::Dynamics => {
                let v0 = StateVector::plus_product(n);
                let opts = EvolveOptions::steady_state(&spec);
                evolve_trajectory(&spec, &v0, &opts).and_then(|series| {
                    series.final_entropy().ok_or_else(|| {
                        Error::Numerical("evolution produced no entropy samples".into())
                    })
                })
            }
        };
        match result {
            Ok(s) => {
                n_values.push(n);
                entropies.push(s);
            }
            Err(e) => failures.push((n, e.to_string())),
        }
    }

    let fit = if n_values.len() >= 3 {
        let xs: Vec<f64> = n_values.iter().map(|&n| n as f64).collect();
        Some(linear_fit(&xs, &entropies))
    } else {
        None
    };

    Ok(ScalingRecord {
        n_values,
        entropies,
        gamma,
        method,
        fit,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;

    #[test]
    fn bipartition_bounds() {
        assert!(Bipartition::new(6, 0).is_err());
        assert!(Bipartition::new(6, 6).is_err());
        let p = Bipartition::half(6).unwrap();
        assert_eq!(p.cut(), 3);
        assert_eq!(p.dim_a(), 8);
        assert_eq!(p.dim_b(), 8);
    }

    #[test]
    fn product_state_is_rank_one_and_pure() {
        let v = StateVector::plus_product(6);
        let p = Bipartition::half(6).unwrap();
        let rho = reduced_density_matrix(&v, &p).unwrap();
        // rank-1 projector: rho^2 = rho and trace 1
        let rho2 = rho.dot(&rho);
        for ((i, j), &x) in rho.indexed_iter() {
            assert!((rho2[(i, j)] - x).norm() < 1e-12);
        }
        let tr: Complex64 = (0..8).map(|i| rho[(i, i)]).sum();
        assert!((tr - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(entropy(&v, &p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn ghz_half_cut() {
        let mut amps = vec![Complex64::new(0.0, 0.0); 32];
        amps[0] = Complex64::new(1.0, 0.0);
        amps[31] = Complex64::new(1.0, 0.0);
        let v = StateVector::from_amplitudes(amps).unwrap();
        for cut in 1..5 {
            let p = Bipartition::new(5, cut).unwrap();
            let rho = reduced_density_matrix(&v, &p).unwrap();
            let da = p.dim_a();
            for ((i, j), &x) in rho.indexed_iter() {
                let want = if i == j && (i == 0 || i == da - 1) {
                    Complex64::new(0.5, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((x - want).norm() < 1e-12);
            }
            let s = entropy(&v, &p).unwrap();
            assert!((s - std::f64::consts::LN_2).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_agrees_with_singular_values() {
        use ndarray_linalg::SVD;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let v = StateVector::random(6, &mut rng);
        for cut in 1..6 {
            let p = Bipartition::new(6, cut).unwrap();
            let mut m = Array2::zeros((p.dim_b(), p.dim_a()));
            for b in 0..p.dim_b() {
                for a in 0..p.dim_a() {
                    m[(b, a)] = v.amplitudes()[(b << cut) | a];
                }
            }
            let (_, sv, _) = m.svd(false, false).unwrap();
            let from_svd = entropy_from_probabilities(sv.iter().map(|s| s * s));
            let from_rho = entropy(&v, &p).unwrap();
            assert!(
                (from_svd - from_rho).abs() < 1e-12,
                "cut {cut}: {from_svd} vs {from_rho}"
            );
        }
    }

    #[test]
    fn both_sides_of_a_cut_have_equal_entropy() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let n = 7;
        let v = StateVector::random(n, &mut rng);
        for cut in 1..n {
            let p = Bipartition::new(n, cut).unwrap();
            // density matrix of the complement (the high-order sites)
            let mut rho_b = Array2::<Complex64>::zeros((p.dim_b(), p.dim_b()));
            for a in 0..p.dim_a() {
                for b in 0..p.dim_b() {
                    let vb = v.amplitudes()[(b << cut) | a];
                    for b2 in 0..p.dim_b() {
                        rho_b[(b, b2)] += vb * v.amplitudes()[(b2 << cut) | a].conj();
                    }
                }
            }
            let s_a = entropy(&v, &p).unwrap();
            let s_b = entropy_of_density(&rho_b).unwrap();
            assert!((s_a - s_b).abs() < 1e-10, "cut {cut}: {s_a} vs {s_b}");
        }
    }

    #[test]
    fn steady_entropy_of_diagonal_model_is_zero() {
        let spec = SpinChainSpec::new(Model::Nhtfi, 6).with_gamma(0.8);
        let p = Bipartition::half(6).unwrap();
        let s = steady_entropy_spectral(&spec, &p).unwrap();
        assert!(s.abs() < 1e-10, "entropy {s}");
    }

    #[test]
    fn steady_entropy_rejects_gapless_spectra() {
        // gamma = 0 is Hermitian: every imaginary part is zero, top degenerate
        let spec = SpinChainSpec::new(Model::Nhtfi, 4).with_omega(1.0);
        let p = Bipartition::half(4).unwrap();
        assert!(matches!(
            steady_entropy_spectral(&spec, &p),
            Err(Error::NoSteadyLevel { .. })
        ));
    }

    #[test]
    fn fit_recovers_a_line() {
        let x = [4.0, 6.0, 8.0, 10.0];
        let y = [1.1, 1.5, 1.9, 2.3];
        let f = linear_fit(&x, &y);
        assert!((f.slope - 0.2).abs() < 1e-12);
        assert!((f.intercept - 0.3).abs() < 1e-12);
        assert!(f.residual_rms < 1e-12);
    }

    #[test]
    fn classification_thresholds() {
        let rec = |slope: f64, rms: f64, range: f64| ScalingRecord {
            n_values: vec![4, 6, 8],
            entropies: vec![0.0, range / 2.0, range],
            gamma: 1.0,
            method: ScalingMethod::Spectral,
            fit: Some(LinearFit {
                slope,
                intercept: 0.0,
                residual_rms: rms,
            }),
            failures: Vec::new(),
        };
        assert_eq!(rec(0.01, 0.0, 0.04).classification(), Classification::Area);
        assert_eq!(rec(0.3, 0.01, 1.2).classification(), Classification::Volume);
        assert_eq!(
            rec(0.3, 0.5, 1.2).classification(),
            Classification::Indeterminate
        );
        assert_eq!(
            rec(0.05, 0.0, 0.2).classification(),
            Classification::Indeterminate
        );
    }

    #[test]
    fn scaling_rejects_bad_lengths() {
        let spec = SpinChainSpec::new(Model::Nhtfi, 6);
        assert!(scaling_analysis(&spec, &[5, 6], 0.5, ScalingMethod::Spectral).is_err());
        assert!(scaling_analysis(&spec, &[2, 4], 0.5, ScalingMethod::Spectral).is_err());
        assert!(scaling_analysis(&spec, &[], 0.5, ScalingMethod::Spectral).is_err());
    }

    #[test]
    fn scaling_spectral_smoke() {
        let spec = SpinChainSpec::new(Model::Nhtfi, 4).with_gamma(0.0);
        let rec = scaling_analysis(&spec, &[4, 6, 8], 0.9, ScalingMethod::Spectral).unwrap();
        assert_eq!(rec.n_values, vec![4, 6, 8]);
        // diagonal model: steady state is a product state at every length
        for s in &rec.entropies {
            assert!(s.abs() < 1e-10);
        }
        assert_eq!(rec.classification(), Classification::Area);
        let mut csv = Vec::new();
        rec.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("N,entropy,gamma,method\n"));
        assert!(text.contains(",spectral"));
        let mut json = Vec::new();
        rec.write_fit_json(&mut json).unwrap();
        let jtext = String::from_utf8(json).unwrap();
        assert!(jtext.contains("\"classification\": \"area\""));
    }
}
