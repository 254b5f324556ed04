use super::{CurveError, PlaneCurve};
use crate::geom::{cross, forward_gap, wrap_angle};
use crate::quadrature::{gk15, integrate};
use std::f64::consts::TAU;

/// Default number of cells in the cumulative arc-length table.
pub const DEFAULT_TABLE_SIZE: usize = 1024;

const SPEED_FLOOR: f64 = 1e-12;

/// `|x'y'' - y'x''| / |γ'|³`.
pub fn unsigned_curvature<C: PlaneCurve + ?Sized>(curve: &C, s: f64) -> Result<f64, CurveError> {
    let d1 = curve.derivative(s);
    let d2 = curve.second_derivative(s);
    let speed = d1.norm();
    if speed < SPEED_FLOOR || !speed.is_finite() {
        return Err(CurveError::DegenerateSpeed { s, speed });
    }
    Ok(cross(&d1, &d2).abs() / (speed * speed * speed))
}

/// Maximum unsigned curvature over `n` uniform samples, refined by
/// golden-section search around the best few samples.
pub fn max_unsigned_curvature<C: PlaneCurve + ?Sized>(curve: &C, n: usize) -> Result<f64, CurveError> {
    let n = n.max(64);
    let h = TAU / n as f64;
    let values = (0..n)
        .map(|k| unsigned_curvature(curve, h * k as f64))
        .collect::<Result<Vec<_>, _>>()?;
    // local maxima, best first
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&k| values[k] >= values[(k + n - 1) % n] && values[k] >= values[(k + 1) % n])
        .collect();
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut best = values.iter().copied().fold(0.0, f64::max);
    for &k in peaks.iter().take(4) {
        let centre = h * k as f64;
        let refined = golden_max(|s| unsigned_curvature(curve, s).unwrap_or(0.0), centre - h, centre + h);
        best = best.max(refined);
    }
    Ok(best)
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd).max(f(0.5 * (a + b)))
}

/// Length of the forward arc from `s0` to `s1` by adaptive quadrature.
///
/// Equal endpoints give the empty arc.
pub fn arc_length<C: PlaneCurve + ?Sized>(curve: &C, s0: f64, s1: f64) -> f64 {
    let gap = forward_gap(s0, s1);
    if gap == 0.0 {
        return 0.0;
    }
    let pts = curve.sample(64);
    let rough: f64 = (0..64).map(|k| (pts[(k + 1) % 64] - pts[k]).norm()).sum();
    let speed = |s: f64| curve.speed(s);
    integrate(&speed, s0, s0 + gap, 1e-10 * rough.max(1e-300))
}

/// Cached curve measurements: κ, total length and a cumulative arc-length
/// table on a uniform parameter grid.
#[derive(Clone, Debug)]
pub struct CurveAnalysis {
    pub max_unsigned_curvature: f64,
    pub total_length: f64,
    pub sample_count: usize,
    /// `arclength_table[k]` is the length from parameter 0 to `2πk/n`,
    /// `k = 0..=n`.
    pub arclength_table: Vec<f64>,
}

impl CurveAnalysis {
    pub fn new<C: PlaneCurve + ?Sized>(curve: &C, n: usize) -> Self {
        let n = n.max(16);
        let h = TAU / n as f64;
        let speed = |s: f64| curve.speed(s);
        let mut table = Vec::with_capacity(n + 1);
        table.push(0.0);
        let mut acc = 0.0;
        for k in 0..n {
            let (a, b) = (h * k as f64, h * (k + 1) as f64);
            let (v, err) = gk15(&speed, a, b);
            let v = if err > 1e-14 * v.abs().max(1.0) {
                integrate(&speed, a, b, 1e-14 * v.abs().max(1e-12))
            } else {
                v
            };
            acc += v;
            table.push(acc);
        }
        let kappa = max_unsigned_curvature(curve, n.max(256)).unwrap_or(f64::INFINITY);
        Self {
            max_unsigned_curvature: kappa,
            total_length: acc,
            sample_count: n,
            arclength_table: table,
        }
    }

    fn cell(&self) -> f64 {
        TAU / self.sample_count as f64
    }

    /// Arc length from parameter 0 to `s`, extended quasi-periodically so
    /// that `arc_position(s + 2π) = arc_position(s) + L`.
    pub fn arc_position<C: PlaneCurve + ?Sized>(&self, curve: &C, s: f64) -> f64 {
        let turns = (s / TAU).floor();
        let r = s - turns * TAU;
        let h = self.cell();
        let i = ((r / h).floor() as usize).min(self.sample_count - 1);
        let base = h * i as f64;
        let partial = if r > base {
            let speed = |x: f64| curve.speed(x);
            gk15(&speed, base, r).0
        } else {
            0.0
        };
        self.arclength_table[i] + partial + turns * self.total_length
    }

    /// Length of the forward arc from `s0` to `s1`; empty when equal.
    pub fn arc_length<C: PlaneCurve + ?Sized>(&self, curve: &C, s0: f64, s1: f64) -> f64 {
        let gap = forward_gap(s0, s1);
        self.arc_position(curve, s0 + gap) - self.arc_position(curve, s0)
    }

    /// Parameter in `[0, 2π)` at arc length `sigma` (taken mod L) from 0.
    pub fn param_at_arc<C: PlaneCurve + ?Sized>(&self, curve: &C, sigma: f64) -> f64 {
        let sigma = sigma.rem_euclid(self.total_length);
        let idx = self
            .arclength_table
            .partition_point(|&v| v <= sigma)
            .clamp(1, self.sample_count);
        let h = self.cell();
        let (mut lo, mut hi) = (h * (idx - 1) as f64, h * idx as f64);
        let mut s = lo
            + h * (sigma - self.arclength_table[idx - 1])
                / (self.arclength_table[idx] - self.arclength_table[idx - 1]).max(1e-300);
        for _ in 0..60 {
            let f = self.arc_position(curve, s) - sigma;
            if f.abs() < 1e-14 * self.total_length {
                break;
            }
            if f > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let speed = curve.speed(s);
            let next = s - f / speed;
            s = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        }
        wrap_angle(s)
    }

    /// Sanity bound for closed curves: `κ_max ≥ 2π / L`.
    pub fn satisfies_total_curvature_bound(&self) -> bool {
        self.max_unsigned_curvature * self.total_length >= TAU * (1.0 - 1e-9)
    }
}

/// Estimate of the radius of an embedded tubular neighbourhood: the smaller
/// of `1/κ` and half the narrowest chord between points at least `π/κ` apart
/// along the curve.
pub fn reach_estimate<C: PlaneCurve + ?Sized>(curve: &C, analysis: &CurveAnalysis, n: usize) -> f64 {
    let kappa = analysis.max_unsigned_curvature;
    let length = analysis.total_length;
    let min_sep = (std::f64::consts::PI / kappa).min(0.5 * length);
    let params: Vec<f64> = (0..n)
        .map(|k| analysis.param_at_arc(curve, length * k as f64 / n as f64))
        .collect();
    let pts: Vec<_> = params.iter().map(|&s| curve.point(s)).collect();
    let step = length / n as f64;
    let mut narrow = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let sep = step * (j - i) as f64;
            if sep.min(length - sep) + 1e-12 < min_sep {
                continue;
            }
            narrow = narrow.min((pts[i] - pts[j]).norm());
        }
    }
    (1.0 / kappa).min(0.5 * narrow)
}
