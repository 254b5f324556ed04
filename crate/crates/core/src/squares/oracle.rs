//! Independent square finder for cross-checking the main search.
//!
//! Shares only the residual and the candidate type with the fast path:
//! distances are brute force over a dense sample, parameters are uniform
//! rather than arc-length based, and refinement is a Hooke–Jeeves pattern
//! search on `|F|²` with no derivatives.

use super::candidate::{dedup_squares, SquareCandidate};
use super::residual::{residual_from_points, square_residual};
use crate::curves::PlaneCurve;
use crate::geom::{point_segment_distance, rot90, rot_neg90, Vec2};
use rayon::prelude::*;
use std::f64::consts::TAU;

const DENSE: usize = 2048;

fn sum_sq(f: &[f64; 4]) -> f64 {
    f.iter().map(|x| x * x).sum()
}

/// `|F|²` with each component divided by the matching power of the squared
/// diagonal length, so shrinking towards a point square is not rewarded.
fn scaled_objective<C: PlaneCurve + ?Sized>(curve: &C, s: &[f64; 4]) -> f64 {
    let p = s.map(|x| curve.point(x));
    let d = (p[2] - p[0]).norm_squared() + (p[3] - p[1]).norm_squared();
    if d == 0.0 {
        return f64::INFINITY;
    }
    let f = residual_from_points(&p);
    (f[0] * f[0] + f[1] * f[1]) / d + (f[2] * f[2] + f[3] * f[3]) / (d * d)
}

/// Nearest dense-sample segment: `(distance, parameter)`.
fn nearest_on_samples(pts: &[Vec2], p: &Vec2) -> (f64, f64) {
    let n = pts.len();
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..n {
        let (d, u) = point_segment_distance(p, &pts[i], &pts[(i + 1) % n]);
        if d < best.0 {
            best = (d, TAU * (i as f64 + u) / n as f64);
        }
    }
    best
}

fn pattern_search<C: PlaneCurve + ?Sized>(curve: &C, start: [f64; 4], floor: f64) -> [f64; 4] {
    let objective = |s: &[f64; 4]| scaled_objective(curve, s);
    let mut base = start;
    let mut fbase = objective(&base);
    let mut step = 0.02;
    let explore = |from: [f64; 4], fval: f64, step: f64| {
        let mut x = from;
        let mut fx = fval;
        for k in 0..4 {
            for dir in [1.0, -1.0] {
                let mut trial = x;
                trial[k] += dir * step;
                let ft = objective(&trial);
                if ft < fx {
                    x = trial;
                    fx = ft;
                    break;
                }
            }
        }
        (x, fx)
    };
    for _ in 0..200_000 {
        if step < 1e-15 || fbase <= floor {
            break;
        }
        let (x, fx) = explore(base, fbase, step);
        if fx < fbase {
            // pattern move along the successful direction
            let mut prev = base;
            base = x;
            fbase = fx;
            loop {
                let jump: [f64; 4] = std::array::from_fn(|k| 2.0 * base[k] - prev[k]);
                let fj = objective(&jump);
                let (y, fy) = explore(jump, fj, step);
                if fy < fbase {
                    prev = base;
                    base = y;
                    fbase = fy;
                } else {
                    break;
                }
            }
        } else {
            step *= 0.5;
        }
    }
    base
}

/// Squares found by an exhaustive diagonal scan on a `grid_n × grid_n`
/// uniform parameter grid, refined by derivative-free pattern search.
pub fn brute_force_oracle<C: PlaneCurve + ?Sized>(curve: &C, grid_n: usize) -> Vec<SquareCandidate> {
    let n = grid_n.clamp(16, 64);
    let dense = curve.sample(DENSE);
    let length: f64 = (0..DENSE).map(|i| (dense[(i + 1) % DENSE] - dense[i]).norm()).sum();
    let min_side = 1e-6 * length;
    let dedup_tol = 1e-6 * length;
    let grid: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
    let pts: Vec<Vec2> = grid.iter().map(|&s| curve.point(s)).collect();
    let diag = |i: usize, j: usize| {
        let c = (pts[i] + pts[j]) * 0.5;
        let v = pts[j] - c;
        (c + rot_neg90(&v), c + rot90(&v))
    };
    let mut score = vec![f64::INFINITY; n * n];
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let gap = i.abs_diff(j).min(n - i.abs_diff(j));
                    if gap <= 1 {
                        return f64::INFINITY;
                    }
                    let (p2, p4) = diag(i, j);
                    nearest_on_samples(&dense, &p2).0.powi(2) + nearest_on_samples(&dense, &p4).0.powi(2)
                })
                .collect()
        })
        .collect();
    for (i, row) in rows.iter().enumerate() {
        score[i * n..(i + 1) * n].copy_from_slice(row);
    }
    let at = |i: usize, j: usize| score[(i % n) * n + (j % n)];
    let mut starts = Vec::new();
    for i in 0..n {
        for j in (i + 2)..n {
            let v = at(i, j);
            if !v.is_finite() {
                continue;
            }
            let strict_min = [
                (n - 1, n - 1),
                (n - 1, 0),
                (n - 1, 1),
                (0, n - 1),
                (0, 1),
                (1, n - 1),
                (1, 0),
                (1, 1),
            ]
            .iter()
            .all(|&(di, dj)| at(i + di, j + dj) >= v);
            if strict_min {
                let (p2, p4) = diag(i, j);
                starts.push([
                    grid[i],
                    nearest_on_samples(&dense, &p2).1,
                    grid[j],
                    nearest_on_samples(&dense, &p4).1,
                ]);
            }
        }
    }
    let floor = 1e-30;
    let accept = 1e-8 * length * length;
    let found: Vec<SquareCandidate> = starts
        .par_iter()
        .map(|&s| {
            let x = pattern_search(curve, s, floor);
            let r = sum_sq(&square_residual(curve, &x)).sqrt();
            SquareCandidate::from_params(curve, x, r)
        })
        .filter(|c| c.residual_norm <= accept && c.sidelength >= min_side)
        .collect();
    dedup_squares(found, dedup_tol)
}
