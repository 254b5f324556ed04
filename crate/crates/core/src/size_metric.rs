//! Oriented length and the size of an inscribed quadrilateral.
//!
//! A correspondence sends parameters of a source curve to parameters of a
//! target curve. The image of a source arc is measured by lifting the
//! correspondence continuously and taking the difference of target arc
//! positions at the two ends: forward travel along the target counts
//! positive, backward travel negative, and back-and-forth cancels.
//!
//! The size of a quadrilateral splits the source circle into the four arcs
//! between consecutive vertices and returns the smallest sum of three
//! `|L_o|` values.

use crate::curves::{nearest_point_projection_with, CurveAnalysis, PlaneCurve, LIFT_TOLERANCE};
use crate::geom::{angle_diff, forward_gap, wrap_angle};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SizeError {
    #[error("correspondence samples {index} and {next} are {gap} apart, too close to π to lift")]
    LiftAmbiguity { index: usize, next: usize, gap: f64 },
    #[error("quadrilateral vertices run against the source orientation")]
    ReflectedOrder,
    #[error("nearest-point projection of source sample {index} is ambiguous")]
    AmbiguousProjection { index: usize },
    #[error("correspondence needs at least 3 samples, got {0}")]
    TooFewSamples(usize),
}

/// A sampled map between parameter circles, stored with its continuous lift.
#[derive(Clone, Debug)]
pub struct ParamCorrespondence {
    /// Target parameters (wrapped to `[0, 2π)`) at `s_k = 2πk/n`.
    target_params: Vec<f64>,
    /// Continuous lift; `lift[n]` closes the loop.
    lift: Vec<f64>,
    /// Name of the target curve, for reports.
    pub target_label: String,
    /// Largest sampled distance between a source point and its image.
    pub max_displacement: f64,
}

impl ParamCorrespondence {
    /// Build from target parameters sampled at the uniform source grid.
    pub fn new<S, T>(
        source: &S,
        target: &T,
        target_params: Vec<f64>,
        target_label: impl Into<String>,
    ) -> Result<Self, SizeError>
    where
        S: PlaneCurve + ?Sized,
        T: PlaneCurve + ?Sized,
    {
        let n = target_params.len();
        if n < 3 {
            return Err(SizeError::TooFewSamples(n));
        }
        let target_params: Vec<f64> = target_params.into_iter().map(wrap_angle).collect();
        let mut lift = Vec::with_capacity(n + 1);
        lift.push(target_params[0]);
        for i in 0..n {
            let j = (i + 1) % n;
            let inc = angle_diff(target_params[i], target_params[j]);
            if inc.abs() >= PI - LIFT_TOLERANCE {
                return Err(SizeError::LiftAmbiguity {
                    index: i,
                    next: j,
                    gap: inc.abs(),
                });
            }
            lift.push(lift[i] + inc);
        }
        let h = TAU / n as f64;
        let max_displacement = target_params
            .iter()
            .enumerate()
            .map(|(k, &t)| (source.point(h * k as f64) - target.point(t)).norm())
            .fold(0.0, f64::max);
        Ok(Self {
            target_params,
            lift,
            target_label: target_label.into(),
            max_displacement,
        })
    }

    /// The identity map of a curve onto itself.
    pub fn identity<C: PlaneCurve + ?Sized>(curve: &C, n: usize) -> Self {
        let n = n.max(3);
        let params = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
        Self::new(curve, curve, params, "identity").expect("identity lifts")
    }

    /// Sample `f` on `n` source parameters.
    pub fn from_fn<S, T, F>(
        source: &S,
        target: &T,
        n: usize,
        f: F,
        target_label: impl Into<String>,
    ) -> Result<Self, SizeError>
    where
        S: PlaneCurve + ?Sized,
        T: PlaneCurve + ?Sized,
        F: Fn(f64) -> f64,
    {
        let params = (0..n).map(|k| f(TAU * k as f64 / n as f64)).collect();
        Self::new(source, target, params, target_label)
    }

    /// Nearest-point projection of source samples onto the target. Fails if
    /// any sample has two equally near target points.
    pub fn from_projection<S, T>(
        source: &S,
        target: &T,
        n: usize,
        target_label: impl Into<String>,
    ) -> Result<Self, SizeError>
    where
        S: PlaneCurve + ?Sized,
        T: PlaneCurve + ?Sized,
    {
        let seeds = (4 * n).clamp(512, 4096);
        let mut params = Vec::with_capacity(n);
        for k in 0..n {
            let p = source.point(TAU * k as f64 / n as f64);
            let pr = nearest_point_projection_with(target, &p, seeds);
            if pr.ambiguous {
                return Err(SizeError::AmbiguousProjection { index: k });
            }
            params.push(pr.param);
        }
        Self::new(source, target, params, target_label)
    }

    pub fn len(&self) -> usize {
        self.target_params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target_params.is_empty()
    }

    pub fn target_params(&self) -> &[f64] {
        &self.target_params
    }

    /// Winding degree of the induced circle map.
    pub fn degree(&self) -> i32 {
        let n = self.len();
        ((self.lift[n] - self.lift[0]) / TAU).round() as i32
    }

    /// Lifted target parameter at any real source parameter, linear between
    /// samples and quasi-periodic: `lift(s + 2π) = lift(s) + 2π · degree`.
    pub fn lift_at(&self, s: f64) -> f64 {
        let n = self.len();
        let turns = (s / TAU).floor();
        let r = s - turns * TAU;
        let x = r / TAU * n as f64;
        let k = (x.floor() as usize).min(n - 1);
        let frac = x - k as f64;
        let period = self.lift[n] - self.lift[0];
        self.lift[k] + frac * (self.lift[k + 1] - self.lift[k]) + turns * period
    }

    /// Target parameter in `[0, 2π)` for a source parameter.
    pub fn map(&self, s: f64) -> f64 {
        wrap_angle(self.lift_at(s))
    }
}

/// Signed length of the image of the forward source arc from `s0` to `s1`.
///
/// With `s1 = s0` the arc is empty. Pass `s1 > s0 + 2π` style endpoints via
/// [`oriented_length_between`] for arcs longer than a full turn.
pub fn oriented_length<T: PlaneCurve + ?Sized>(
    target: &T,
    analysis: &CurveAnalysis,
    corr: &ParamCorrespondence,
    s0: f64,
    s1: f64,
) -> f64 {
    oriented_length_between(target, analysis, corr, s0, s0 + forward_gap(s0, s1))
}

/// Signed image length for the source interval `[a, b]` taken literally
/// (`b < a` reverses the arc and negates the result).
pub fn oriented_length_between<T: PlaneCurve + ?Sized>(
    target: &T,
    analysis: &CurveAnalysis,
    corr: &ParamCorrespondence,
    a: f64,
    b: f64,
) -> f64 {
    analysis.arc_position(target, corr.lift_at(b)) - analysis.arc_position(target, corr.lift_at(a))
}

/// The four source arcs of a quadrilateral as `(start, end)` with
/// `start ≤ end < start + 2π`. Vertices are rotated to start at the smallest
/// parameter; a reflected order is rejected.
pub fn quadrilateral_arcs(params: &[f64; 4]) -> Result<[(f64, f64); 4], SizeError> {
    let p = params.map(wrap_angle);
    let start = (0..4).min_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap_or(0);
    let ordered: [f64; 4] = std::array::from_fn(|k| p[(start + k) % 4]);
    if ordered.windows(2).any(|w| w[1] < w[0]) {
        return Err(SizeError::ReflectedOrder);
    }
    Ok(std::array::from_fn(|k| {
        let a = ordered[k];
        let b = if k == 3 { ordered[0] + TAU } else { ordered[k + 1] };
        (a, b)
    }))
}

fn min_three_of_four(l: [f64; 4]) -> f64 {
    let total: f64 = l.iter().sum();
    l.iter().map(|x| total - x).fold(f64::INFINITY, f64::min)
}

/// The four `|L_o|` values of a quadrilateral's arcs, in arc order.
pub fn arc_image_lengths<T: PlaneCurve + ?Sized>(
    params: &[f64; 4],
    target: &T,
    analysis: &CurveAnalysis,
    corr: &ParamCorrespondence,
) -> Result<[f64; 4], SizeError> {
    let arcs = quadrilateral_arcs(params)?;
    Ok(arcs.map(|(a, b)| oriented_length_between(target, analysis, corr, a, b).abs()))
}

/// Size of the quadrilateral with source parameters `params` with respect to
/// `corr`: `min_i Σ_{j≠i} |L_o(ω_j)|`.
pub fn square_size<T: PlaneCurve + ?Sized>(
    params: &[f64; 4],
    target: &T,
    analysis: &CurveAnalysis,
    corr: &ParamCorrespondence,
) -> Result<f64, SizeError> {
    Ok(min_three_of_four(arc_image_lengths(params, target, analysis, corr)?))
}

/// Size with respect to the identity: total length minus the longest arc.
pub fn square_size_identity<C: PlaneCurve + ?Sized>(curve: &C, analysis: &CurveAnalysis, params: &[f64; 4]) -> f64 {
    let mut p = params.map(wrap_angle);
    p.sort_by(f64::total_cmp);
    let longest = (0..4)
        .map(|k| {
            let end = if k == 3 { p[0] + TAU } else { p[k + 1] };
            analysis.arc_position(curve, end) - analysis.arc_position(curve, p[k])
        })
        .fold(0.0, f64::max);
    analysis.total_length - longest
}
