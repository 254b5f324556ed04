//! The square condition as four equations in four curve parameters.
//!
//! With `pᵢ = γ(sᵢ)` and diagonals `p₁p₃`, `p₂p₄`:
//!
//! * `F₁, F₂ = p₁ + p₃ − p₂ − p₄` (the diagonals share a midpoint)
//! * `F₃ = (p₃ − p₁)·(p₄ − p₂)` (they are perpendicular)
//! * `F₄ = |p₃ − p₁|² − |p₄ − p₂|²` (they have equal length)
//!
//! `F = 0` exactly when the four points are the vertices of a square,
//! including the degenerate square where all four coincide.

use crate::curves::PlaneCurve;
use crate::geom::Vec2;
use nalgebra::{Matrix4, Vector4};

pub fn residual_from_points(p: &[Vec2; 4]) -> Vector4<f64> {
    let mid = p[0] + p[2] - p[1] - p[3];
    let d13 = p[2] - p[0];
    let d24 = p[3] - p[1];
    Vector4::new(mid.x, mid.y, d13.dot(&d24), d13.norm_squared() - d24.norm_squared())
}

pub fn square_residual<C: PlaneCurve + ?Sized>(curve: &C, s: &[f64; 4]) -> [f64; 4] {
    let p = s.map(|x| curve.point(x));
    let r = residual_from_points(&p);
    [r[0], r[1], r[2], r[3]]
}

/// Jacobian of the residual with respect to the four parameters, from the
/// points and their parameter derivatives.
pub fn residual_jacobian(p: &[Vec2; 4], dp: &[Vec2; 4]) -> Matrix4<f64> {
    let d13 = p[2] - p[0];
    let d24 = p[3] - p[1];
    let sign = [1.0, -1.0, 1.0, -1.0];
    let mut j = Matrix4::zeros();
    for i in 0..4 {
        j[(0, i)] = sign[i] * dp[i].x;
        j[(1, i)] = sign[i] * dp[i].y;
    }
    j[(2, 0)] = -dp[0].dot(&d24);
    j[(2, 2)] = dp[2].dot(&d24);
    j[(2, 1)] = -d13.dot(&dp[1]);
    j[(2, 3)] = d13.dot(&dp[3]);
    j[(3, 0)] = -2.0 * d13.dot(&dp[0]);
    j[(3, 2)] = 2.0 * d13.dot(&dp[2]);
    j[(3, 1)] = 2.0 * d24.dot(&dp[1]);
    j[(3, 3)] = -2.0 * d24.dot(&dp[3]);
    j
}

/// Residual and Jacobian at `s`.
pub fn residual_and_jacobian<C: PlaneCurve + ?Sized>(curve: &C, s: &[f64; 4]) -> (Vector4<f64>, Matrix4<f64>) {
    let p = s.map(|x| curve.point(x));
    let dp = s.map(|x| curve.derivative(x));
    (residual_from_points(&p), residual_jacobian(&p, &dp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{make_circle, make_ellipse, perturb_fourier};
    use crate::geom::{rotate, vec2};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn symmetric_circle_square_is_a_root() {
        let r = square_residual(&make_circle(1.0), &[0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2]);
        assert!(r.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn coincident_points_are_a_root() {
        let e = make_ellipse(2.0, 1.0);
        assert_eq!(square_residual(&e, &[0.7; 4]), [0.0; 4]);
    }

    #[test]
    fn non_square_is_not_a_root() {
        let r = square_residual(&make_circle(1.0), &[0.0, PI / 3.0, PI, 3.0 * FRAC_PI_2]);
        assert!(r[0] * r[0] + r[1] * r[1] > 0.0);
        // direct evaluation: midpoint defect = -(cos π/3, sin π/3) - (0,-1)
        assert!((r[0] + 0.5).abs() < 1e-15);
        assert!((r[1] - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let c = perturb_fourier(&make_ellipse(2.0, 1.0), 0.05, 6, 5).unwrap();
        let s = [0.3, 1.9, 3.5, 5.0];
        let (_, j) = residual_and_jacobian(&c, &s);
        let h = 1e-6;
        for col in 0..4 {
            let mut sp = s;
            let mut sm = s;
            sp[col] += h;
            sm[col] -= h;
            let fp = square_residual(&c, &sp);
            let fm = square_residual(&c, &sm);
            for row in 0..4 {
                let fd = (fp[row] - fm[row]) / (2.0 * h);
                assert!(
                    (j[(row, col)] - fd).abs() < 1e-7,
                    "({row},{col}) {} vs {fd}",
                    j[(row, col)]
                );
            }
        }
    }

    proptest! {
        #[test]
        fn genuine_squares_vanish(cx in -5.0f64..5.0, cy in -5.0f64..5.0, r in 0.0f64..3.0, phase in 0.0f64..7.0) {
            let c = vec2(cx, cy);
            let p: [Vec2; 4] = std::array::from_fn(|k| c + rotate(&vec2(r, 0.0), phase + k as f64 * FRAC_PI_2));
            let f = residual_from_points(&p);
            prop_assert!(f.norm() <= 1e-12 * (1.0 + r * r + c.norm()));
        }

        #[test]
        fn perturbed_squares_do_not_vanish(
            r in 0.5f64..3.0, phase in 0.0f64..7.0, k in 0usize..4, dx in 0.01f64..0.5, dy in 0.01f64..0.5
        ) {
            let mut p: [Vec2; 4] = std::array::from_fn(|i| rotate(&vec2(r, 0.0), phase + i as f64 * FRAC_PI_2));
            p[k] += vec2(dx, dy);
            prop_assert!(residual_from_points(&p).norm() > 1e-6);
        }
    }
}
