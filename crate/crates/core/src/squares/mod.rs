//! Inscribed squares: residual system, diagonal seeding, Newton refinement,
//! the polygon variant and a derivative-free oracle.

mod candidate;
mod newton;
mod oracle;
mod polyline;
mod residual;
mod seeds;

pub use candidate::{dedup_squares, Orientation, SquareCandidate};
pub use newton::{newton_refine, RefineError, MAX_CONDITION, RANK_DEFICIENCY_RATIO};
pub use oracle::brute_force_oracle;
pub use polyline::find_polyline_squares;
pub use residual::{residual_and_jacobian, residual_from_points, residual_jacobian, square_residual};
pub use seeds::{complete_diagonal, diagonal_seed_search, DiagonalSeed};

use crate::curves::{CurveAnalysis, PlaneCurve, DEFAULT_TABLE_SIZE};
use rayon::prelude::*;
use serde::Serialize;

/// Default diagonal grid for smooth curves. Coarser grids merge the seeds
/// of nearby squares on mildly perturbed near-circles.
pub const DEFAULT_GRID: usize = 192;

/// Search parameters. `None` fields scale with the curve length `L`.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    /// Diagonal grid resolution; [`DEFAULT_GRID`] for smooth curves, twice
    /// the vertex count for polygons.
    pub grid_n: Option<usize>,
    /// Residual tolerance; default `1e-11 · L`.
    pub tol: Option<f64>,
    /// Squares shorter than this are degenerate; default `1e-6 · L`.
    pub min_sidelength: Option<f64>,
    /// Vertex distance under which two squares coincide; default `1e-6 · L`.
    pub dedup_tol: Option<f64>,
    pub max_iter: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid_n: None,
            tol: None,
            min_sidelength: None,
            dedup_tol: None,
            max_iter: 60,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchWarning {
    /// Squares with a rank-deficient Jacobian were found; each reported
    /// square stands for a one-parameter family.
    Continuum { representatives: usize },
    /// No square found. Every smooth Jordan curve has an odd number of
    /// inscribed squares after generic perturbation, so an empty result on
    /// one means the search missed something.
    NoSquaresFound,
}

#[derive(Clone, Debug, Serialize)]
pub struct SquareSearch {
    pub squares: Vec<SquareCandidate>,
    pub warnings: Vec<SearchWarning>,
    /// Seeds produced by the diagonal scan.
    pub seeds: usize,
    /// Seeds whose refinement failed.
    pub failures: usize,
}

/// Merge rank-deficient squares that share a centre and sidelength: they
/// lie on one continuum and get a single representative.
pub(crate) fn collapse_continua(squares: Vec<SquareCandidate>, tol: f64) -> Vec<SquareCandidate> {
    let mut kept: Vec<SquareCandidate> = Vec::with_capacity(squares.len());
    for sq in squares {
        let same_family = sq.rank_deficient
            && kept.iter().any(|k| {
                k.rank_deficient
                    && (k.center() - sq.center()).norm() <= 1e3 * tol
                    && (k.sidelength - sq.sidelength).abs() <= 1e3 * tol
            });
        if !same_family {
            kept.push(sq);
        }
    }
    kept
}

/// All positive-sidelength inscribed squares of a smooth curve, one per
/// geometric square, sorted by first parameter.
pub fn find_all_squares<C: PlaneCurve + ?Sized>(curve: &C, config: &SearchConfig) -> SquareSearch {
    let analysis = CurveAnalysis::new(curve, DEFAULT_TABLE_SIZE);
    find_all_squares_with(curve, &analysis, config)
}

pub fn find_all_squares_with<C: PlaneCurve + ?Sized>(
    curve: &C,
    analysis: &CurveAnalysis,
    config: &SearchConfig,
) -> SquareSearch {
    let length = analysis.total_length;
    let tol = config.tol.unwrap_or(1e-11 * length);
    let min_side = config.min_sidelength.unwrap_or(1e-6 * length);
    let dedup_tol = config.dedup_tol.unwrap_or(1e-6 * length);
    let seeds = seeds::diagonal_seeds(curve, analysis, config.grid_n.unwrap_or(DEFAULT_GRID));
    let refined: Vec<Result<SquareCandidate, RefineError>> = seeds
        .par_iter()
        .map(|seed| newton_refine(curve, seed.params, tol, config.max_iter))
        .collect();
    let failures = refined.iter().filter(|r| r.is_err()).count();
    let accepted: Vec<SquareCandidate> = refined
        .into_iter()
        .filter_map(Result::ok)
        .filter(|c| c.sidelength >= min_side)
        .collect();
    let squares = collapse_continua(dedup_squares(accepted, dedup_tol), dedup_tol);
    let mut warnings = Vec::new();
    let continua = squares.iter().filter(|s| s.rank_deficient).count();
    if continua > 0 {
        warnings.push(SearchWarning::Continuum {
            representatives: continua,
        });
    }
    if squares.is_empty() {
        warnings.push(SearchWarning::NoSquaresFound);
    }
    SquareSearch {
        squares,
        warnings,
        seeds: seeds.len(),
        failures,
    }
}
