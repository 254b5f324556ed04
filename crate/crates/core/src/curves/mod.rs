//! Closed plane curves: trigonometric series and polygons.
//!
//! Both kinds are parametrized over the circle `[0, 2π)`. Fourier curves are
//! smooth so curvature and tangents are exact; polylines are parametrized
//! proportionally to arc length and carry corners.

mod analysis;
mod fourier;
mod polyline;
mod projection;
mod simplicity;
mod winding;

pub use analysis::{
    arc_length, max_unsigned_curvature, reach_estimate, unsigned_curvature, CurveAnalysis, DEFAULT_TABLE_SIZE,
};
pub use fourier::{make_circle, make_ellipse, perturb_fourier, FourierCurve, Harmonic};
pub use polyline::PolylineCurve;
pub use projection::{nearest_point_projection, nearest_point_projection_with, refine_projection, Projection};
pub use simplicity::{is_simple, is_simple_closed_polygon, DEFAULT_SIMPLICITY_SAMPLES};
pub use winding::{winding_degree, LIFT_TOLERANCE};

use crate::geom::Vec2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("curve speed {speed:e} at s = {s} is below the regularity tolerance")]
    DegenerateSpeed { s: f64, speed: f64 },
    #[error("circle-map samples {index} and {next} differ by {gap}, too close to π to lift")]
    LiftAmbiguity { index: usize, next: usize, gap: f64 },
    #[error("perturbed curve rejected: {0}")]
    PerturbationRejected(String),
    #[error("polyline needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polyline vertices {0} and {1} coincide")]
    RepeatedVertex(usize, usize),
}

/// A closed curve parametrized over `[0, 2π)`.
///
/// `derivative` is with respect to the parameter, not arc length.
pub trait PlaneCurve: Sync {
    fn point(&self, s: f64) -> Vec2;

    fn derivative(&self, s: f64) -> Vec2;

    fn second_derivative(&self, s: f64) -> Vec2 {
        let h = 1e-5;
        (self.derivative(s + h) - self.derivative(s - h)) / (2.0 * h)
    }

    fn speed(&self, s: f64) -> f64 {
        self.derivative(s).norm()
    }

    /// Uniform parameter samples `s_k = 2πk/n`.
    fn sample(&self, n: usize) -> Vec<Vec2> {
        (0..n)
            .map(|k| self.point(std::f64::consts::TAU * k as f64 / n as f64))
            .collect()
    }
}

impl<C: PlaneCurve + ?Sized> PlaneCurve for &C {
    fn point(&self, s: f64) -> Vec2 {
        (**self).point(s)
    }
    fn derivative(&self, s: f64) -> Vec2 {
        (**self).derivative(s)
    }
    fn second_derivative(&self, s: f64) -> Vec2 {
        (**self).second_derivative(s)
    }
}
