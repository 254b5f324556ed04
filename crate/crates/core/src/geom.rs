//! Small planar helpers shared by every module.

use nalgebra::Vector2;
use rstar::{PointDistance, RTree, RTreeObject, AABB};
use std::f64::consts::{PI, TAU};

/// A point or vector in the plane.
pub type Vec2 = Vector2<f64>;

#[inline]
pub fn vec2(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

#[inline]
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Counterclockwise quarter turn.
#[inline]
pub fn rot90(v: &Vec2) -> Vec2 {
    vec2(-v.y, v.x)
}

/// Clockwise quarter turn.
#[inline]
pub fn rot_neg90(v: &Vec2) -> Vec2 {
    vec2(v.y, -v.x)
}

#[inline]
pub fn rotate(v: &Vec2, angle: f64) -> Vec2 {
    let (s, c) = angle.sin_cos();
    vec2(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// Reduce an angle to `[0, 2π)`.
#[inline]
pub fn wrap_angle(s: f64) -> f64 {
    let r = s.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed difference `b - a` reduced to `(-π, π]`.
#[inline]
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let mut d = (b - a).rem_euclid(TAU);
    if d > PI {
        d -= TAU;
    }
    d
}

/// Forward distance from `a` to `b` on the circle, in `[0, 2π)`.
#[inline]
pub fn forward_gap(a: f64, b: f64) -> f64 {
    wrap_angle(b - a)
}

/// Unsigned distance between two angles on the circle.
#[inline]
pub fn circle_dist(a: f64, b: f64) -> f64 {
    angle_diff(a, b).abs()
}

/// Distance from `p` to the segment `[a, b]` together with the segment
/// parameter of the closest point.
pub fn point_segment_distance(p: &Vec2, a: &Vec2, b: &Vec2) -> (f64, f64) {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let u = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ((a + ab * u - p).norm(), u)
}

#[inline]
fn orient(a: &Vec2, b: &Vec2, c: &Vec2) -> f64 {
    robust::orient2d(
        robust::Coord { x: a.x, y: a.y },
        robust::Coord { x: b.x, y: b.y },
        robust::Coord { x: c.x, y: c.y },
    )
}

#[inline]
fn on_segment(a: &Vec2, b: &Vec2, p: &Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Exact closed-segment intersection test (adaptive-precision orientation).
pub fn segments_intersect(p1: &Vec2, p2: &Vec2, q1: &Vec2, q2: &Vec2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// True when two edges sharing the vertex `shared` fold back onto each other.
pub fn adjacent_edges_overlap(prev: &Vec2, shared: &Vec2, next: &Vec2) -> bool {
    orient(prev, shared, next) == 0.0 && (prev - shared).dot(&(next - shared)) > 0.0
}

/// R*-tree over the edges of a closed polyline for nearest-edge queries.
#[derive(Clone, Debug)]
pub struct SegmentIndex {
    points: Vec<Vec2>,
    tree: RTree<IndexedSegment>,
}

/// Result of a nearest-segment query.
#[derive(Clone, Copy, Debug)]
pub struct SegmentHit {
    pub distance: f64,
    pub segment: usize,
    pub u: f64,
}

#[derive(Clone, Debug)]
struct IndexedSegment {
    a: [f64; 2],
    b: [f64; 2],
    index: usize,
}

impl RTreeObject for IndexedSegment {
    type Envelope = AABB<[f64; 2]>;

    fn envelope(&self) -> Self::Envelope {
        AABB::from_corners(self.a, self.b)
    }
}

impl PointDistance for IndexedSegment {
    fn distance_2(&self, p: &[f64; 2]) -> f64 {
        let (d, _) = point_segment_distance(
            &vec2(p[0], p[1]),
            &vec2(self.a[0], self.a[1]),
            &vec2(self.b[0], self.b[1]),
        );
        d * d
    }
}

impl SegmentIndex {
    /// Index the closed polyline through `points`.
    pub fn new(points: Vec<Vec2>) -> Self {
        let n = points.len();
        let segments = (0..n)
            .map(|i| {
                let (a, b) = (points[i], points[(i + 1) % n]);
                IndexedSegment {
                    a: [a.x, a.y],
                    b: [b.x, b.y],
                    index: i,
                }
            })
            .collect();
        Self {
            points,
            tree: RTree::bulk_load(segments),
        }
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn segment_hit(&self, p: &Vec2, i: usize) -> SegmentHit {
        let n = self.points.len();
        let (distance, u) = point_segment_distance(p, &self.points[i], &self.points[(i + 1) % n]);
        SegmentHit {
            distance,
            segment: i,
            u,
        }
    }

    pub fn nearest(&self, p: &Vec2) -> SegmentHit {
        match self.tree.nearest_neighbor([p.x, p.y]) {
            Some(seg) => self.segment_hit(p, seg.index),
            None => self.nearest_brute(p),
        }
    }

    /// Linear scan; used as a fallback and by tests.
    pub fn nearest_brute(&self, p: &Vec2) -> SegmentHit {
        (0..self.points.len())
            .map(|i| self.segment_hit(p, i))
            .min_by(|a, b| a.distance.total_cmp(&b.distance))
            .expect("non-empty polyline")
    }
}
