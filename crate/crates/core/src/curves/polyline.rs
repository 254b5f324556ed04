use super::{CurveError, PlaneCurve};
use crate::geom::{wrap_angle, SegmentIndex, Vec2};
use std::f64::consts::TAU;

/// Closed polygon parametrized proportionally to arc length over `[0, 2π)`.
#[derive(Clone, Debug)]
pub struct PolylineCurve {
    vertices: Vec<Vec2>,
    /// cumulative[i] = arc length from vertex 0 to vertex i; last entry = L.
    cumulative: Vec<f64>,
}

impl PolylineCurve {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self, CurveError> {
        let n = vertices.len();
        if n < 3 {
            return Err(CurveError::TooFewVertices(n));
        }
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        for i in 0..n {
            let j = (i + 1) % n;
            let len = (vertices[j] - vertices[i]).norm();
            if len == 0.0 {
                return Err(CurveError::RepeatedVertex(i, j));
            }
            cumulative.push(cumulative[i] + len);
        }
        Ok(Self { vertices, cumulative })
    }

    /// `n` vertices sampled uniformly in parameter from a smooth curve.
    pub fn from_curve<C: PlaneCurve + ?Sized>(curve: &C, n: usize) -> Result<Self, CurveError> {
        Self::new(curve.sample(n))
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.cumulative[self.vertices.len()]
    }

    /// Endpoints of edge `i` (from vertex `i` to vertex `i+1`).
    pub fn edge(&self, i: usize) -> (Vec2, Vec2) {
        let n = self.vertices.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    /// Parameter of the point at fraction `u` along edge `i`.
    pub fn param_on_edge(&self, i: usize, u: f64) -> f64 {
        let n = self.vertices.len();
        let i = i % n;
        let arc = self.cumulative[i] + u * (self.cumulative[i + 1] - self.cumulative[i]);
        wrap_angle(TAU * arc / self.total_length())
    }

    /// Edge index and fraction for a parameter.
    pub fn locate(&self, s: f64) -> (usize, f64) {
        let n = self.vertices.len();
        let arc = wrap_angle(s) / TAU * self.total_length();
        let i = (self.cumulative.partition_point(|&c| c <= arc).max(1) - 1).min(n - 1);
        let len = self.cumulative[i + 1] - self.cumulative[i];
        (i, ((arc - self.cumulative[i]) / len).clamp(0.0, 1.0))
    }

    /// Exact test: no two non-adjacent edges meet and no adjacent pair folds
    /// back on itself.
    pub fn is_simple(&self) -> bool {
        super::is_simple_closed_polygon(&self.vertices)
    }

    pub fn segment_index(&self) -> SegmentIndex {
        SegmentIndex::new(self.vertices.clone())
    }

    pub fn translated(&self, v: Vec2) -> Self {
        Self::new(self.vertices.iter().map(|p| p + v).collect()).expect("translation keeps vertices distinct")
    }
}

impl PlaneCurve for PolylineCurve {
    fn point(&self, s: f64) -> Vec2 {
        let (i, u) = self.locate(s);
        let (a, b) = self.edge(i);
        a + (b - a) * u
    }

    fn derivative(&self, s: f64) -> Vec2 {
        let (i, _) = self.locate(s);
        let (a, b) = self.edge(i);
        (b - a).normalize() * (self.total_length() / TAU)
    }

    fn second_derivative(&self, _s: f64) -> Vec2 {
        Vec2::zeros()
    }
}
