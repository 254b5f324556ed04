//! End-to-end certification: a polygon close to a smooth Jordan curve, or
//! inside a thin annulus, has an inscribed square of positive sidelength.

use super::lemmas::smooth_jordan;
use super::{CheckReport, VerifyError, Witness, ANALYSIS_SAMPLES};
use crate::curves::{nearest_point_projection_with, winding_degree, CurveAnalysis, FourierCurve, PolylineCurve};
use crate::geom::{point_segment_distance, Vec2};
use crate::size_metric::{ParamCorrespondence, SizeError};
use crate::squares::{find_polyline_squares, SearchConfig, SquareSearch};
use std::f64::consts::SQRT_2;

const PROJECTION_SEEDS: usize = 4096;

const DIRECTION_NOTE: &str = "f is nearest-point projection from the polygon onto the smooth curve";

fn record_squares(report: &mut CheckReport, found: SquareSearch) -> f64 {
    let largest = found
        .squares
        .iter()
        .map(|s| s.sidelength)
        .fold(f64::NEG_INFINITY, f64::max);
    report.hypothesis("squares_found", found.squares.len() as f64);
    report
        .witnesses
        .extend(found.squares.into_iter().map(|square| Witness::Square {
            measured: square.sidelength,
            bound: 0.0,
            square,
        }));
    largest
}

/// Certify that `beta` satisfies the hypotheses of the main theorem with
/// respect to `gamma` and exhibit an inscribed square.
///
/// `f` is nearest-point projection from `beta` onto `gamma`. The hypotheses
/// are a displacement below `1/(10κ)`, with `κ` the maximum curvature of
/// `gamma`, and degree 1 for the induced circle map. The margin is the
/// smaller of the displacement slack and the largest sidelength found; it is
/// `-∞` when no square is found. An ambiguous projection means `beta` left
/// the region where projection is well defined, and is an error.
pub fn certify_main_theorem(
    gamma: &FourierCurve,
    beta: &PolylineCurve,
    search: &SearchConfig,
) -> Result<CheckReport, VerifyError> {
    let mut report = CheckReport::new("main_theorem", 0.0);
    report.notes.push(DIRECTION_NOTE.into());
    if let Err(why) = smooth_jordan(gamma) {
        return Ok(report.inapplicable(format!("gamma: {why}")));
    }
    let analysis = CurveAnalysis::new(gamma, ANALYSIS_SAMPLES);
    let kappa = analysis.max_unsigned_curvature;
    let budget = 1.0 / (10.0 * kappa);
    let samples = (8 * beta.len()).max(1024);
    let f = ParamCorrespondence::from_projection(beta, gamma, samples, "gamma")?;
    // polygon parameters follow arc length, so sample the corners explicitly
    let mut displacement = f.max_displacement;
    for (index, v) in beta.vertices().iter().enumerate() {
        let pr = nearest_point_projection_with(gamma, v, PROJECTION_SEEDS);
        if pr.ambiguous {
            return Err(SizeError::AmbiguousProjection { index }.into());
        }
        displacement = displacement.max(pr.distance);
    }
    let degree = f.degree();
    report
        .hypothesis("kappa", kappa)
        .hypothesis("delta_budget", budget)
        .hypothesis("displacement", displacement)
        .hypothesis("degree", degree as f64)
        .hypothesis("vertices", beta.len() as f64);
    if degree != 1 {
        return Ok(report.inapplicable(format!("circle map has degree {degree}")));
    }
    if displacement >= budget {
        return Ok(report.inapplicable(format!(
            "displacement {displacement:.6} is not below 1/(10κ) = {budget:.6}"
        )));
    }
    let largest = record_squares(&mut report, find_polyline_squares(beta, search));
    Ok(report.conclude((budget - displacement).min(largest)))
}

/// A polygon in the annulus `inner ≤ |x| ≤ outer` about the origin, with
/// `outer ≤ (1+√2)·inner` and winding number 1 about the origin, has an
/// inscribed square.
///
/// All three hypotheses are reported; if any fails the check is
/// inapplicable. Otherwise the margin is the largest sidelength found.
pub fn annulus_scenario(inner: f64, outer: f64, beta: &PolylineCurve, search: &SearchConfig) -> CheckReport {
    let mut report = CheckReport::new("annulus", 0.0);
    let ratio_bound = (1.0 + SQRT_2) * inner;
    let origin = Vec2::zeros();
    let vertices = beta.vertices();
    let max_radius = vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let min_radius = (0..beta.len())
        .map(|i| {
            let (a, b) = beta.edge(i);
            point_segment_distance(&origin, &a, &b).0
        })
        .fold(f64::INFINITY, f64::min);
    let contained = min_radius >= inner && max_radius <= outer;
    let angles: Vec<f64> = vertices.iter().map(|v| v.y.atan2(v.x)).collect();
    let winding = winding_degree(&angles);
    report
        .hypothesis("inner", inner)
        .hypothesis("outer", outer)
        .hypothesis("ratio_bound", ratio_bound)
        .hypothesis("min_radius", min_radius)
        .hypothesis("max_radius", max_radius)
        .hypothesis("contained", f64::from(u8::from(contained)))
        .hypothesis("winding", winding.as_ref().map_or(f64::NAN, |&w| w as f64));
    let mut failed = Vec::new();
    if !(inner > 0.0 && outer >= inner) {
        failed.push(format!("radii {inner} and {outer} do not bound an annulus"));
    }
    if outer > ratio_bound {
        failed.push(format!("outer radius {outer} exceeds (1+√2)·inner = {ratio_bound:.6}"));
    }
    if !contained {
        failed.push(format!("polygon spans radii {min_radius:.6} to {max_radius:.6}"));
    }
    match winding {
        Ok(1) => {}
        Ok(w) => failed.push(format!("winding number about the centre is {w}")),
        Err(e) => failed.push(e.to_string()),
    }
    if !failed.is_empty() {
        return report.inapplicable(failed.join("; "));
    }
    let largest = record_squares(&mut report, find_polyline_squares(beta, search));
    report.conclude(largest)
}
