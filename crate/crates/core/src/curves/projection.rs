use super::PlaneCurve;
use crate::geom::{circle_dist, wrap_angle, Vec2};
use std::f64::consts::TAU;

/// Nearest point on a curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub param: f64,
    pub distance: f64,
    /// Another local minimum at a different parameter is equally close.
    pub ambiguous: bool,
}

const DEFAULT_SEEDS: usize = 512;

/// Nearest point from `DEFAULT_SEEDS` uniform seeds, refined by safeguarded
/// Newton on `(γ(s) - p)·γ'(s) = 0`.
pub fn nearest_point_projection<C: PlaneCurve + ?Sized>(curve: &C, p: &Vec2) -> Projection {
    nearest_point_projection_with(curve, p, DEFAULT_SEEDS)
}

pub fn nearest_point_projection_with<C: PlaneCurve + ?Sized>(curve: &C, p: &Vec2, n: usize) -> Projection {
    let n = n.max(8);
    let h = TAU / n as f64;
    let d2: Vec<f64> = (0..n).map(|k| (curve.point(h * k as f64) - p).norm_squared()).collect();
    let mut minima: Vec<usize> = (0..n)
        .filter(|&k| d2[k] <= d2[(k + n - 1) % n] && d2[k] <= d2[(k + 1) % n])
        .collect();
    minima.sort_by(|&a, &b| d2[a].total_cmp(&d2[b]));
    // refine the closest few; ties beyond that are flagged anyway
    let mut refined: Vec<(f64, f64)> = minima
        .iter()
        .take(6)
        .map(|&k| refine_projection(curve, p, h * k as f64, h))
        .collect();
    refined.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (param, distance) = refined[0];
    let scale = 1e-7 * distance.max(1e-12);
    let mut ambiguous = refined
        .iter()
        .skip(1)
        .any(|&(s, d)| (d - distance).abs() <= scale && circle_dist(s, param) > 1e-6);
    // many unrefined seeds at the same distance (e.g. the centre of a circle)
    if !ambiguous && minima.len() > 6 {
        let d0 = d2[minima[0]].sqrt();
        let ties = minima
            .iter()
            .filter(|&&k| (d2[k].sqrt() - d0).abs() <= 1e-7 * d0.max(1e-12))
            .count();
        ambiguous = ties > 1;
    }
    Projection {
        param: wrap_angle(param),
        distance,
        ambiguous,
    }
}

/// Minimise `|γ(s) - p|` near `s0` within `[s0 - h, s0 + h]`; returns
/// `(param, distance)`.
pub fn refine_projection<C: PlaneCurve + ?Sized>(curve: &C, p: &Vec2, s0: f64, h: f64) -> (f64, f64) {
    let g = |s: f64| (curve.point(s) - p).dot(&curve.derivative(s));
    let dist = |s: f64| (curve.point(s) - p).norm();
    let (mut lo, mut hi) = (s0 - h, s0 + h);
    let (glo, ghi) = (g(lo), g(hi));
    let mut best = (s0, dist(s0));
    if !(glo <= 0.0 && ghi >= 0.0) {
        // no bracketed stationary point; polish with a few guarded Newton steps
        let mut s = s0;
        for _ in 0..20 {
            let gp = curve.derivative(s).norm_squared() + (curve.point(s) - p).dot(&curve.second_derivative(s));
            if gp <= 0.0 {
                break;
            }
            let next = (s - g(s) / gp).clamp(s0 - h, s0 + h);
            let d = dist(next);
            if d >= best.1 {
                break;
            }
            best = (next, d);
            s = next;
        }
        return best;
    }
    let mut s = s0;
    for _ in 0..100 {
        let gs = g(s);
        if gs == 0.0 {
            break;
        }
        if gs < 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let gp = curve.derivative(s).norm_squared() + (curve.point(s) - p).dot(&curve.second_derivative(s));
        let newton = s - gs / gp;
        let next = if gp > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let done = (next - s).abs() < 1e-15 * (1.0 + s.abs()) || hi - lo < 1e-15;
        s = next;
        if done {
            break;
        }
    }
    let d = dist(s);
    if d <= best.1 {
        best = (s, d);
    }
    best
}
