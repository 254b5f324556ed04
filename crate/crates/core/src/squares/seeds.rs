use crate::curves::{refine_projection, CurveAnalysis, PlaneCurve, DEFAULT_TABLE_SIZE};
use crate::geom::{rot90, rot_neg90, SegmentHit, SegmentIndex, Vec2};
use rayon::prelude::*;
use std::f64::consts::TAU;

/// A starting point for refinement together with its diagonal-scan score.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagonalSeed {
    pub params: [f64; 4],
    pub score: f64,
}

/// Vertices 2 and 4 of the square whose diagonal runs from `p1` to `p3`.
#[inline]
pub fn complete_diagonal(p1: &Vec2, p3: &Vec2) -> (Vec2, Vec2) {
    let c = (p1 + p3) * 0.5;
    let v = p3 - c;
    (c + rot_neg90(&v), c + rot90(&v))
}

/// Score matrix of a diagonal scan plus the local minima below `threshold`.
///
/// `score(i, j)` is the summed squared distance from the two completed
/// vertices to the curve; cells within one step of the main diagonal are
/// excluded since they describe vanishing squares.
pub(crate) fn scan_local_minima<F>(n: usize, score: F, threshold: f64, fallback: usize) -> Vec<(usize, usize, f64)>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let excluded = |i: usize, j: usize| {
        let d = i.abs_diff(j);
        d.min(n - d) <= 1
    };
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if excluded(i, j) {
                        f64::INFINITY
                    } else if i < j {
                        score(i, j)
                    } else {
                        f64::NAN
                    }
                })
                .collect()
        })
        .collect();
    // symmetric fill
    let s = |i: usize, j: usize| {
        let v = rows[i][j];
        if v.is_nan() {
            rows[j][i]
        } else {
            v
        }
    };
    let mut minima = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = s(i, j);
            if !v.is_finite() {
                continue;
            }
            let mut is_min = true;
            'nb: for di in [n - 1, 0, 1] {
                for dj in [n - 1, 0, 1] {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    if s((i + di) % n, (j + dj) % n) < v {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                minima.push((i, j, v));
            }
        }
    }
    minima.sort_by(|a, b| a.2.total_cmp(&b.2));
    let below = minima.iter().filter(|m| m.2 <= threshold).count();
    minima.truncate(below.max(fallback.min(minima.len())));
    minima
}

/// Diagonal search: for every grid pair `(s₁, s₃)` complete the square on
/// that diagonal and score how far the other two vertices are from the
/// curve. Local minima become four-parameter seeds, with `s₂`, `s₄` taken
/// from nearest-point projection.
pub fn diagonal_seed_search<C: PlaneCurve + ?Sized>(curve: &C, grid_n: usize) -> Vec<[f64; 4]> {
    let analysis = CurveAnalysis::new(curve, DEFAULT_TABLE_SIZE);
    diagonal_seeds(curve, &analysis, grid_n)
        .into_iter()
        .map(|s| s.params)
        .collect()
}

pub(crate) fn diagonal_seeds<C: PlaneCurve + ?Sized>(
    curve: &C,
    analysis: &CurveAnalysis,
    grid_n: usize,
) -> Vec<DiagonalSeed> {
    let n = grid_n.max(16);
    let length = analysis.total_length;
    let grid: Vec<f64> = (0..n)
        .map(|k| analysis.param_at_arc(curve, length * k as f64 / n as f64))
        .collect();
    let pts: Vec<Vec2> = grid.iter().map(|&s| curve.point(s)).collect();
    let dense_n = (32 * n).max(4096);
    let dense_h = TAU / dense_n as f64;
    let index = SegmentIndex::new(curve.sample(dense_n));
    let score = |i: usize, j: usize| {
        let (p2, p4) = complete_diagonal(&pts[i], &pts[j]);
        let a = index.nearest(&p2).distance;
        let b = index.nearest(&p4).distance;
        a * a + b * b
    };
    let h = length / n as f64;
    let minima = scan_local_minima(n, score, 8.0 * h * h, 4);
    let param_of = |hit: &SegmentHit| dense_h * (hit.segment as f64 + hit.u);
    minima
        .into_par_iter()
        .map(|(i, j, v)| {
            let (p2, p4) = complete_diagonal(&pts[i], &pts[j]);
            let s2 = refine_projection(curve, &p2, param_of(&index.nearest(&p2)), 2.0 * dense_h).0;
            let s4 = refine_projection(curve, &p4, param_of(&index.nearest(&p4)), 2.0 * dense_h).0;
            DiagonalSeed {
                params: [grid[i], s2, grid[j], s4],
                score: v,
            }
        })
        .collect()
}
