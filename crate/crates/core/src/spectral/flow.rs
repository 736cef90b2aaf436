//! Level continuation across a dissipation sweep.
//!
//! Eigenvalue curves are traced by eigenvector overlap between adjacent
//! grid points. Because continuation branches stay inside their momentum
//! sector (the Hamiltonian commutes with translation at every gamma),
//! overlaps are formed between sector-basis vectors; vectors from
//! different sectors are exactly orthogonal.

use ndarray::ArrayView1;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::build_hamiltonian;
use crate::model::SpinChainSpec;
use crate::spectral::sweep::{solve_point, validate_grid};
use crate::spectral::translation::{sector_eig, BlockEig, LevelId, TranslationBasis};

/// Best overlaps closer than this are reported as an ambiguous assignment.
pub const AMBIGUITY_TOL: f64 = 1e-6;

/// Overlaps below this threshold trigger a grid-resolution warning.
pub const OVERLAP_WARN: f64 = 0.5;

/// One continuation curve.
#[derive(Debug, Clone)]
pub struct TrackedLevel {
    /// Identity at the final grid point (the level that was selected).
    pub end_id: LevelId,
    /// Identity at every grid point, aligned with the gamma grid.
    pub ids: Vec<LevelId>,
    /// Eigenvalue at every grid point.
    pub eigenvalues: Vec<Complex64>,
    /// Smallest adjacent-point overlap met while tracing.
    pub min_overlap: f64,
    /// Grid indices where two candidate overlaps were within [`AMBIGUITY_TOL`].
    pub ambiguous_at: Vec<usize>,
}

/// Continuation curves, the pointwise dominant eigenvalue, and the grid
/// intervals where the dominant level changes identity.
#[derive(Debug, Clone)]
pub struct LevelFlow {
    pub gamma_grid: Vec<f64>,
    pub tracked: Vec<TrackedLevel>,
    /// Eigenvalue with the largest imaginary part at each grid point.
    pub max_imag_curve: Vec<Complex64>,
    /// `(gamma_lo, gamma_hi)` grid intervals across which the identity of
    /// the maximal-imaginary level switches branches.
    pub crossings: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

/// Trace the `k_levels` levels with the largest imaginary parts at the final
/// grid point backward through the sweep by greedy maximal overlap.
pub fn track_levels(
    spec_template: &SpinChainSpec,
    gamma_grid: &[f64],
    k_levels: usize,
) -> Result<LevelFlow> {
    spec_template.clone().with_gamma(0.0).validate()?;
    validate_grid(gamma_grid)?;
    if gamma_grid.len() < 2 {
        return Err(Error::InvalidSpec(
            "level tracking needs at least two grid points".into(),
        ));
    }
    if k_levels == 0 || k_levels > spec_template.dim() {
        return Err(Error::InvalidSpec(format!(
            "k_levels = {k_levels} outside [1, {}]",
            spec_template.dim()
        )));
    }

    let basis = TranslationBasis::new(spec_template.n);
    let mut warnings = Vec::new();

    // Forward pass: all eigenvalues per point, the dominant level's sector
    // solved with vectors, and crossings of the dominant identity.
    let mut hams = Vec::with_capacity(gamma_grid.len());
    let mut max_imag_curve = Vec::with_capacity(gamma_grid.len());
    let mut end_order = None;
    let mut crossings = Vec::new();
    let mut prev_top: Option<(usize, Vec<Complex64>)> = None;
    for (i, &gamma) in gamma_grid.iter().enumerate() {
        let spec = spec_template.clone().with_gamma(gamma);
        let h = build_hamiltonian(&spec)?;
        let point = solve_point(&basis, &h)?;
        max_imag_curve.push(point.values.value(point.top_id));
        let top_vec: Vec<Complex64> = point
            .top_block
            .vectors
            .as_ref()
            .expect("solved with vectors")
            .column(0)
            .to_vec();
        if let Some((sector, prev)) = &prev_top {
            let ov = if *sector == point.top_id.sector {
                overlap(prev, &top_vec)
            } else {
                0.0
            };
            if ov < OVERLAP_WARN {
                crossings.push((gamma_grid[i - 1], gamma));
            }
        }
        prev_top = Some((point.top_id.sector, top_vec));
        if i == gamma_grid.len() - 1 {
            end_order = Some(
                (0..k_levels)
                    .map(|rank| point.values.level(rank))
                    .collect::<Vec<_>>(),
            );
        }
        hams.push(h);
    }
    let end_ids = end_order.expect("grid has at least two points");

    // Sectors hosting the selected levels; only these need vectors.
    let mut sectors: Vec<usize> = end_ids.iter().map(|id| id.sector).collect();
    sectors.sort_unstable();
    sectors.dedup();

    let solve_sectors = |h, out: &mut Vec<(usize, BlockEig)>| -> Result<()> {
        out.clear();
        for &k in &sectors {
            out.push((k, sector_eig(&basis, h, k, true)?));
        }
        Ok(())
    };
    let block_of = |store: &[(usize, BlockEig)], k: usize| -> usize {
        store.iter().position(|(kk, _)| *kk == k).expect("sector solved")
    };

    // Backward pass: greedy overlap continuation.
    let last = gamma_grid.len() - 1;
    let mut cur_store: Vec<(usize, BlockEig)> = Vec::new();
    solve_sectors(&hams[last], &mut cur_store)?;

    struct Cursor {
        end_id: LevelId,
        id: LevelId,
        vec: Vec<Complex64>,
        ids_rev: Vec<LevelId>,
        vals_rev: Vec<Complex64>,
        min_overlap: f64,
        ambiguous_rev: Vec<usize>,
    }
    let mut cursors: Vec<Cursor> = end_ids
        .iter()
        .map(|&id| {
            let block = &cur_store[block_of(&cur_store, id.sector)].1;
            Cursor {
                end_id: id,
                id,
                vec: block
                    .vectors
                    .as_ref()
                    .expect("solved with vectors")
                    .column(id.index)
                    .to_vec(),
                ids_rev: vec![id],
                vals_rev: vec![block.eigenvalues[id.index]],
                min_overlap: 1.0,
                ambiguous_rev: Vec::new(),
            }
        })
        .collect();

    let mut prev_store: Vec<(usize, BlockEig)> = Vec::new();
    for i in (0..last).rev() {
        solve_sectors(&hams[i], &mut prev_store)?;
        for cursor in &mut cursors {
            let block = &prev_store[block_of(&prev_store, cursor.id.sector)].1;
            let vectors = block.vectors.as_ref().expect("solved with vectors");
            let mut best = (0usize, -1.0f64);
            let mut second = -1.0f64;
            for j in 0..block.eigenvalues.len() {
                let ov = overlap_view(vectors.column(j), &cursor.vec);
                if ov > best.1 {
                    second = best.1;
                    best = (j, ov);
                } else if ov > second {
                    second = ov;
                }
            }
            if second >= 0.0 && (best.1 - second).abs() < AMBIGUITY_TOL {
                cursor.ambiguous_rev.push(i);
            }
            if best.1 < OVERLAP_WARN {
                warnings.push(format!(
                    "level {} continuation overlap {:.3} between gamma={} and gamma={}; \
                     refine the grid",
                    cursor.end_id, best.1, gamma_grid[i], gamma_grid[i + 1]
                ));
            }
            cursor.min_overlap = cursor.min_overlap.min(best.1);
            cursor.id = LevelId {
                sector: cursor.id.sector,
                index: best.0,
            };
            cursor.vec = vectors.column(best.0).to_vec();
            cursor.ids_rev.push(cursor.id);
            cursor.vals_rev.push(block.eigenvalues[best.0]);
        }
        std::mem::swap(&mut cur_store, &mut prev_store);
    }

    let tracked = cursors
        .into_iter()
        .map(|mut c| {
            c.ids_rev.reverse();
            c.vals_rev.reverse();
            c.ambiguous_rev.reverse();
            TrackedLevel {
                end_id: c.end_id,
                ids: c.ids_rev,
                eigenvalues: c.vals_rev,
                min_overlap: c.min_overlap,
                ambiguous_at: c.ambiguous_rev,
            }
        })
        .collect();

    Ok(LevelFlow {
        gamma_grid: gamma_grid.to_vec(),
        tracked,
        max_imag_curve,
        crossings,
        warnings,
    })
}

fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        .norm()
}

fn overlap_view(a: ArrayView1<'_, Complex64>, b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        .norm()
}
