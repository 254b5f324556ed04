//! Square search on polygons, where corners rule out Newton's method.
//!
//! Seeds from the diagonal scan are minimized over `(s₁, s₃)` by
//! Nelder–Mead on the distance of the two completed vertices to the
//! polygon. The minimizer is then polished exactly: once the four edges
//! carrying the vertices are known, the square condition is a 2×2 linear
//! system in the positions of `p₁` and `p₃` along their edges.

use super::candidate::{dedup_squares, SquareCandidate};
use super::residual::residual_from_points;
use super::seeds::{complete_diagonal, scan_local_minima};
use super::{collapse_continua, SearchConfig, SearchWarning, SquareSearch};
use crate::curves::{PlaneCurve, PolylineCurve};
#[cfg(test)]
use crate::geom::point_segment_distance;
use crate::geom::{rot90, SegmentIndex, Vec2};
use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;

/// Minimize `f` over the plane from `x0` with initial simplex size `scale`.
pub(crate) fn nelder_mead<F: Fn([f64; 2]) -> f64>(
    f: F,
    x0: [f64; 2],
    scale: f64,
    xtol: f64,
    max_evals: usize,
) -> ([f64; 2], f64) {
    let mut simplex = [x0, [x0[0] + scale, x0[1]], [x0[0], x0[1] + scale]];
    let mut values = simplex.map(&f);
    let mut evals = 3;
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    while evals < max_evals {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = idx.map(|i| simplex[i]);
        values = idx.map(|i| values[i]);
        let size = (1..3)
            .map(|k| {
                (simplex[k][0] - simplex[0][0])
                    .abs()
                    .max((simplex[k][1] - simplex[0][1]).abs())
            })
            .fold(0.0, f64::max);
        if size < xtol {
            break;
        }
        let centroid = lerp(simplex[0], simplex[1], 0.5);
        let reflected = lerp(centroid, simplex[2], -1.0);
        let fr = f(reflected);
        evals += 1;
        if fr < values[0] {
            let expanded = lerp(centroid, simplex[2], -2.0);
            let fe = f(expanded);
            evals += 1;
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let (contracted, fc) = if fr < values[2] {
                let c = lerp(centroid, simplex[2], -0.5);
                (c, f(c))
            } else {
                let c = lerp(centroid, simplex[2], 0.5);
                (c, f(c))
            };
            evals += 1;
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = lerp(simplex[0], simplex[k], 0.5);
                    values[k] = f(simplex[k]);
                }
                evals += 2;
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    (simplex[best], values[best])
}

/// A square with `p₁` on edge `a`, `p₂` on `b`, `p₃` on `c` and `p₄` on `d`,
/// if one exists with every vertex inside its edge (up to `slack`).
fn exact_square_on_edges(poly: &PolylineCurve, edges: [usize; 4], slack: f64) -> Option<([f64; 4], [Vec2; 4])> {
    let (a0, a1) = poly.edge(edges[0]);
    let (b0, b1) = poly.edge(edges[1]);
    let (c0, c1) = poly.edge(edges[2]);
    let (d0, d1) = poly.edge(edges[3]);
    let (ea, ec) = (a1 - a0, c1 - c0);
    // p1 = a0 + u·ea, p3 = c0 + w·ec; p2 = m + R₋₉₀(p3 − m), p4 = m + R₊₉₀(p3 − m)
    // with m the midpoint, so both are affine in (u, w).
    let p2_of = |u: f64, w: f64| {
        let p1 = a0 + ea * u;
        let p3 = c0 + ec * w;
        complete_diagonal(&p1, &p3)
    };
    let (p2_0, p4_0) = p2_of(0.0, 0.0);
    let (p2_u, p4_u) = p2_of(1.0, 0.0);
    let (p2_w, p4_w) = p2_of(0.0, 1.0);
    let nb = rot90(&(b1 - b0));
    let nd = rot90(&(d1 - d0));
    let m = Matrix2::new(
        nb.dot(&(p2_u - p2_0)),
        nb.dot(&(p2_w - p2_0)),
        nd.dot(&(p4_u - p4_0)),
        nd.dot(&(p4_w - p4_0)),
    );
    let rhs = Vector2::new(-nb.dot(&(p2_0 - b0)), -nd.dot(&(p4_0 - d0)));
    let sol = m.lu().solve(&rhs)?;
    let (u, w) = (sol[0], sol[1]);
    if !u.is_finite() || !w.is_finite() {
        return None;
    }
    let p1 = a0 + ea * u;
    let p3 = c0 + ec * w;
    let (p2, p4) = complete_diagonal(&p1, &p3);
    let along = |p: &Vec2, e0: &Vec2, e1: &Vec2| (p - e0).dot(&(e1 - e0)) / (e1 - e0).norm_squared();
    let v = along(&p2, &b0, &b1);
    let x = along(&p4, &d0, &d1);
    let inside = |t: f64| t >= -slack && t <= 1.0 + slack;
    if !(inside(u) && inside(v) && inside(w) && inside(x)) {
        return None;
    }
    let params = [
        poly.param_on_edge(edges[0], u.clamp(0.0, 1.0)),
        poly.param_on_edge(edges[1], v.clamp(0.0, 1.0)),
        poly.param_on_edge(edges[2], w.clamp(0.0, 1.0)),
        poly.param_on_edge(edges[3], x.clamp(0.0, 1.0)),
    ];
    Some((params, [p1, p2, p3, p4]))
}

/// Polish an approximate square onto exact edge lines, trying the edges
/// under each vertex and their neighbours.
fn polish(poly: &PolylineCurve, index: &SegmentIndex, s1: f64, s3: f64) -> Option<SquareCandidate> {
    let n = poly.len();
    let p1 = poly.point(s1);
    let p3 = poly.point(s3);
    let (p2, p4) = complete_diagonal(&p1, &p3);
    let base = [
        poly.locate(s1).0,
        index.nearest(&p2).segment,
        poly.locate(s3).0,
        index.nearest(&p4).segment,
    ];
    let approx = [p1, p2, p3, p4];
    let mut best: Option<(f64, [f64; 4], [Vec2; 4])> = None;
    for code in 0..81usize {
        let mut edges = base;
        let mut c = code;
        for e in edges.iter_mut() {
            *e = (*e + n + (c % 3) - 1) % n;
            c /= 3;
        }
        if let Some((params, pts)) = exact_square_on_edges(poly, edges, 1e-9) {
            let shift = (0..4).map(|k| (pts[k] - approx[k]).norm()).fold(0.0, f64::max);
            if best.as_ref().is_none_or(|b| shift < b.0) {
                best = Some((shift, params, pts));
            }
        }
    }
    let (_, params, _) = best?;
    // re-evaluate so the residual reflects the stored points
    let on_curve = params.map(|s| poly.point(s));
    let residual = residual_from_points(&on_curve).norm();
    Some(SquareCandidate::from_parts(params, on_curve, residual))
}

/// All inscribed squares of a polygon.
///
/// Uses the diagonal scan at `2 × vertex count` resolution by default, a
/// derivative-free local search, and the exact edge-line polish above.
pub fn find_polyline_squares(poly: &PolylineCurve, config: &SearchConfig) -> SquareSearch {
    let length = poly.total_length();
    let n = config.grid_n.unwrap_or(2 * poly.len()).max(16);
    let tol = config.tol.unwrap_or(1e-11 * length);
    let min_side = config.min_sidelength.unwrap_or(1e-6 * length);
    let dedup_tol = config.dedup_tol.unwrap_or(1e-6 * length);
    let index = poly.segment_index();
    let grid: Vec<f64> = (0..n).map(|k| std::f64::consts::TAU * k as f64 / n as f64).collect();
    let pts: Vec<Vec2> = grid.iter().map(|&s| poly.point(s)).collect();
    let phi = |s1: f64, s3: f64| {
        let (p2, p4) = complete_diagonal(&poly.point(s1), &poly.point(s3));
        let a = index.nearest(&p2).distance;
        let b = index.nearest(&p4).distance;
        a * a + b * b
    };
    let h = length / n as f64;
    let minima = scan_local_minima(
        n,
        |i, j| {
            let (p2, p4) = complete_diagonal(&pts[i], &pts[j]);
            let a = index.nearest(&p2).distance;
            let b = index.nearest(&p4).distance;
            a * a + b * b
        },
        8.0 * h * h,
        4,
    );
    let seeds = minima.len();
    let step = std::f64::consts::TAU / n as f64;
    let found: Vec<Option<SquareCandidate>> = minima
        .par_iter()
        .map(|&(i, j, _)| {
            let (x, _) = nelder_mead(|x| phi(x[0], x[1]), [grid[i], grid[j]], 0.5 * step, 1e-13, 2000);
            polish(poly, &index, x[0], x[1])
        })
        .collect();
    let failures = found.iter().filter(|c| c.is_none()).count();
    let accepted: Vec<SquareCandidate> = found
        .into_iter()
        .flatten()
        .filter(|c| c.residual_norm <= tol.max(1e-12 * length * length) && c.sidelength >= min_side)
        .filter(|c| c.is_square_within(1e-7))
        .collect();
    let squares = collapse_continua(dedup_squares(accepted, dedup_tol), dedup_tol);
    let warnings = if squares.is_empty() {
        vec![SearchWarning::NoSquaresFound]
    } else {
        Vec::new()
    };
    SquareSearch {
        squares,
        warnings,
        seeds,
        failures,
    }
}
