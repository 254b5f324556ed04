use super::PlaneCurve;
use crate::geom::{adjacent_edges_overlap, segments_intersect, Vec2};

/// Sampling resolution at which smooth curves are certified simple.
pub const DEFAULT_SIMPLICITY_SAMPLES: usize = 512;

/// Simplicity of the closed polygon through `n ≥ 32` uniform parameter
/// samples of `curve`.
pub fn is_simple<C: PlaneCurve + ?Sized>(curve: &C, n: usize) -> bool {
    is_simple_closed_polygon(&curve.sample(n.max(32)))
}

/// True iff no two non-adjacent edges of the closed polygon intersect and
/// no two adjacent edges overlap.
pub fn is_simple_closed_polygon(pts: &[Vec2]) -> bool {
    let n = pts.len();
    if n < 3 {
        return false;
    }
    let edge = |i: usize| (pts[i], pts[(i + 1) % n]);
    let boxes: Vec<(Vec2, Vec2)> = (0..n)
        .map(|i| {
            let (a, b) = edge(i);
            (a.inf(&b), a.sup(&b))
        })
        .collect();
    for i in 0..n {
        if adjacent_edges_overlap(&pts[(i + n - 1) % n], &pts[i], &pts[(i + 1) % n]) {
            return false;
        }
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (lo1, hi1) = boxes[i];
            let (lo2, hi2) = boxes[j];
            if hi1.x < lo2.x || hi2.x < lo1.x || hi1.y < lo2.y || hi2.y < lo1.y {
                continue;
            }
            let (a, b) = edge(i);
            let (c, d) = edge(j);
            if segments_intersect(&a, &b, &c, &d) {
                return false;
            }
        }
    }
    true
}
