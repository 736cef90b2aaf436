//! Dissipation sweeps: gap, dominant level, and steady-level entropy per
//! grid point.

use std::io::Write;

use num_complex::Complex64;

use crate::entanglement::{entropy, Bipartition};
use crate::error::{Error, Result};
use crate::hamiltonian::build_hamiltonian;
use crate::io::{fmt_f64, require_finite};
use crate::model::SpinChainSpec;
use crate::operator::OperatorMatrix;
use crate::spectral::translation::{
    block_diagonalize_prebuilt, sector_eig, BlockEig, BlockSpectrum, LevelId, TranslationBasis,
};

/// Fraction of the asymptotic slope `gamma/2` that the gap must exceed,
/// persistently, before a point counts as gapped in [`critical_rate`].
pub const CRITICAL_RATE_DEFAULT_FRACTION: f64 = 0.02;

/// Per-gamma record of one sweep point.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub gamma: f64,
    /// Imaginary-part gap; zero when the top level is degenerate.
    pub gap: f64,
    /// Real part of the maximal-imaginary eigenvalue.
    pub re_max: f64,
    /// Imaginary part of the maximal-imaginary eigenvalue.
    pub im_max: f64,
    /// Half-cut entropy of the maximal-imaginary eigenvector (nats). At a
    /// degenerate top this reports the sorted-first member of the multiplet.
    pub entropy_max_level: f64,
    /// True when the dominant-level identity moved relative to the previous
    /// grid point (overlap below 1/2, or a different momentum sector).
    pub crossing: bool,
    /// False when diagonalization failed at this point; the numeric fields
    /// are then zero placeholders.
    pub converged: bool,
}

/// One full sweep over a gamma grid for a fixed model/size/field.
#[derive(Debug, Clone)]
pub struct SweepTable {
    pub spec_template: SpinChainSpec,
    /// Cut size used for `entropy_max_level`.
    pub cut: usize,
    pub rows: Vec<SweepRow>,
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidSpec("empty gamma grid".into()));
    }
    if grid.iter().any(|g| !g.is_finite() || *g < 0.0) {
        return Err(Error::InvalidSpec(
            "gamma grid must be finite and nonnegative".into(),
        ));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSpec(
            "gamma grid must be strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Values of every sector plus the dominant level's sector solved with
/// vectors. Shared by the sweep and tracking drivers.
pub(crate) struct PointSolve {
    pub values: BlockSpectrum,
    pub top_block: BlockEig,
    pub top_id: LevelId,
}

pub(crate) fn solve_point(basis: &TranslationBasis, h: &OperatorMatrix) -> Result<PointSolve> {
    let values = block_diagonalize_prebuilt(basis, h, false)?;
    let top_id = values.level(0);
    let top_block = sector_eig(basis, h, top_id.sector, true)?;
    Ok(PointSolve {
        values,
        top_block,
        top_id,
    })
}

/// Sweep the gap and dominant-level data across `gamma_grid` with the
/// default half cut.
///
/// Failures at single points are recorded (`converged = false`) without
/// aborting the rest of the sweep.
pub fn gap_sweep(spec_template: &SpinChainSpec, gamma_grid: &[f64]) -> Result<SweepTable> {
    let cut = spec_template.n / 2;
    gap_sweep_with_cut(spec_template, gamma_grid, cut)
}

/// [`gap_sweep`] with an explicit entanglement cut for the entropy column.
pub fn gap_sweep_with_cut(
    spec_template: &SpinChainSpec,
    gamma_grid: &[f64],
    cut: usize,
) -> Result<SweepTable> {
    spec_template.clone().with_gamma(0.0).validate()?;
    validate_grid(gamma_grid)?;
    let part = Bipartition::new(spec_template.n, cut)?;
    let basis = TranslationBasis::new(spec_template.n);

    let mut rows = Vec::with_capacity(gamma_grid.len());
    let mut prev_top: Option<(usize, Vec<Complex64>)> = None;
    for &gamma in gamma_grid {
        let spec = spec_template.clone().with_gamma(gamma);
        let point = build_hamiltonian(&spec).and_then(|h| solve_point(&basis, &h));
        match point {
            Ok(p) => {
                let top = p.values.value(p.top_id);
                let top_vec: Vec<Complex64> = p
                    .top_block
                    .vectors
                    .as_ref()
                    .expect("solved with vectors")
                    .column(0)
                    .to_vec();
                let crossing = match &prev_top {
                    None => false,
                    Some((sector, prev)) => {
                        if *sector != p.top_id.sector {
                            true
                        } else {
                            overlap(prev, &top_vec) < 0.5
                        }
                    }
                };
                let lifted = p.top_block
                    .vectors
                    .as_ref()
                    .map(|v| basis.lift(p.top_id.sector, v.column(0)))
                    .expect("solved with vectors")?;
                let s = entropy(&lifted, &part)?;
                rows.push(SweepRow {
                    gamma,
                    gap: p.values.gap(),
                    re_max: top.re,
                    im_max: top.im,
                    entropy_max_level: s,
                    crossing,
                    converged: true,
                });
                prev_top = Some((p.top_id.sector, top_vec));
            }
            Err(err) => {
                rows.push(SweepRow {
                    gamma,
                    gap: 0.0,
                    re_max: 0.0,
                    im_max: 0.0,
                    entropy_max_level: 0.0,
                    crossing: false,
                    converged: false,
                });
                prev_top = None;
                // deliberately swallowed: the row carries the failure flag
                let _ = err;
            }
        }
    }
    Ok(SweepTable {
        spec_template: spec_template.clone(),
        cut,
        rows,
    })
}

fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        .norm()
}

impl SweepTable {
    /// True when every grid point diagonalized successfully.
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }

    /// CSV body matching the documented schema, floats at 17 significant
    /// digits, flags as 0/1.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "gamma,gap,re_max,im_max,entropy_max_level,crossing_flag,converged"
        )?;
        for r in &self.rows {
            for (name, x) in [
                ("gamma", r.gamma),
                ("gap", r.gap),
                ("re_max", r.re_max),
                ("im_max", r.im_max),
                ("entropy_max_level", r.entropy_max_level),
            ] {
                require_finite(name, x)?;
            }
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt_f64(r.gamma),
                fmt_f64(r.gap),
                fmt_f64(r.re_max),
                fmt_f64(r.im_max),
                fmt_f64(r.entropy_max_level),
                u8::from(r.crossing),
                u8::from(r.converged),
            )?;
        }
        Ok(())
    }
}

/// Smallest grid gamma beyond which the gap persistently exceeds
/// `fraction * gamma/2`.
///
/// Scanning from the top of the grid: if the final point fails the
/// threshold there is no transition in range (`None`); otherwise the
/// critical rate is the last failing grid point, or the first grid point
/// when every point passes. Unconverged rows count as failing.
pub fn critical_rate(table: &SweepTable, fraction: f64) -> Option<f64> {
    let passes = |r: &SweepRow| r.converged && r.gap > fraction * r.gamma / 2.0;
    let last = table.rows.last()?;
    if !passes(last) {
        return None;
    }
    table
        .rows
        .iter()
        .rev()
        .find(|r| !passes(r))
        .map(|r| r.gamma)
        .or_else(|| table.rows.first().map(|r| r.gamma))
}

/// [`critical_rate`] at the calibrated default threshold.
pub fn critical_rate_default(table: &SweepTable) -> Option<f64> {
    critical_rate(table, CRITICAL_RATE_DEFAULT_FRACTION)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;

    fn synthetic_table(points: &[(f64, f64)]) -> SweepTable {
        SweepTable {
            spec_template: SpinChainSpec::new(Model::Nhtfi, 4),
            cut: 2,
            rows: points
                .iter()
                .map(|&(gamma, gap)| SweepRow {
                    gamma,
                    gap,
                    re_max: 0.0,
                    im_max: 0.0,
                    entropy_max_level: 0.0,
                    crossing: false,
                    converged: true,
                })
                .collect(),
        }
    }

    #[test]
    fn critical_rate_monotone_table() {
        // gap = gamma/2 everywhere: every point passes, transition at grid start
        let t = synthetic_table(&[(0.4, 0.2), (0.8, 0.4), (1.2, 0.6)]);
        assert_eq!(critical_rate_default(&t), Some(0.4));
    }

    #[test]
    fn critical_rate_with_flat_start() {
        let t = synthetic_table(&[
            (0.0, 0.0),
            (0.5, 1e-6),
            (1.0, 1e-6),
            (1.5, 0.2),
            (2.0, 0.5),
        ]);
        assert_eq!(critical_rate_default(&t), Some(1.0));
    }

    #[test]
    fn critical_rate_none_when_end_gapless() {
        let t = synthetic_table(&[(0.0, 0.0), (0.5, 0.3), (1.0, 0.0)]);
        assert_eq!(critical_rate_default(&t), None);
    }

    #[test]
    fn ising_sweep_gap_law() {
        let spec = SpinChainSpec::new(Model::Nhtfi, 5);
        let table = gap_sweep(&spec, &[0.4, 0.8, 1.2]).unwrap();
        assert!(table.all_converged());
        for (r, want) in table.rows.iter().zip([0.2, 0.4, 0.6]) {
            assert!((r.gap - want).abs() < 1e-10);
            // steady level of the diagonal model is the all-zeros product state
            assert!(r.entropy_max_level.abs() < 1e-10);
            assert!((r.im_max - 5.0 * r.gamma / 4.0).abs() < 1e-10);
            assert!(!r.crossing);
        }
        assert_eq!(critical_rate_default(&table), Some(0.4));
    }

    #[test]
    fn csv_schema() {
        let spec = SpinChainSpec::new(Model::Nhtfi, 4).with_omega(0.5);
        let table = gap_sweep(&spec, &[0.2, 0.4]).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "gamma,gap,re_max,im_max,entropy_max_level,crossing_flag,converged"
        );
        let first = lines.next().unwrap();
        assert_eq!(first.split(',').count(), 7);
        assert!(first.starts_with("2.0000000000000001e-1,"));
        assert!(first.ends_with(",0,1"));
    }

    #[test]
    fn rejects_bad_grids() {
        let spec = SpinChainSpec::new(Model::Nhtfi, 4);
        assert!(gap_sweep(&spec, &[]).is_err());
        assert!(gap_sweep(&spec, &[0.2, 0.2]).is_err());
        assert!(gap_sweep(&spec, &[0.4, 0.2]).is_err());
        assert!(gap_sweep(&spec, &[-0.1, 0.2]).is_err());
    }
}
