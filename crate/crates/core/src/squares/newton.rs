use super::candidate::SquareCandidate;
use super::residual::{residual_and_jacobian, square_residual};
use crate::curves::PlaneCurve;
use nalgebra::{Matrix4, Vector4};
use thiserror::Error;

/// Jacobians whose condition number exceeds this are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Relative singular-value gap that marks a converged square as part of a
/// continuum.
pub const RANK_DEFICIENCY_RATIO: f64 = 1e-7;

/// Largest parameter change allowed in one Newton step.
const MAX_STEP: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefineError {
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("degenerate Jacobian (condition number {condition:e}) at residual {residual:e}")]
    DegenerateJacobian { condition: f64, residual: f64 },
}

/// Minimum-norm least-squares solution of `J x = b`, discarding singular
/// values below `rel · σ_max`. Returns the solution and the condition number.
pub(crate) fn pseudo_solve(j: &Matrix4<f64>, b: &Vector4<f64>, rel: f64) -> (Vector4<f64>, f64) {
    let svd = j.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cutoff = rel * smax;
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let mut x = Vector4::zeros();
    for k in 0..4 {
        let sk = svd.singular_values[k];
        if sk > cutoff && sk > 0.0 {
            let coef = u.column(k).dot(b) / sk;
            x += vt.row(k).transpose() * coef;
        }
    }
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    (x, cond)
}

fn norm(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton on the square residual with the analytic Jacobian.
///
/// Steps use the SVD pseudo-inverse so a rank-deficient Jacobian (a square
/// continuum) still converges; a degenerate-Jacobian failure is reported
/// only when the step cannot reduce the residual and the condition number
/// exceeds [`MAX_CONDITION`].
pub fn newton_refine<C: PlaneCurve + ?Sized>(
    curve: &C,
    seed: [f64; 4],
    tol: f64,
    max_iter: usize,
) -> Result<SquareCandidate, RefineError> {
    let mut s = seed;
    let mut fnorm = norm(&square_residual(curve, &s));
    for iter in 0..=max_iter {
        if fnorm <= tol {
            let mut cand = SquareCandidate::from_params(curve, s, fnorm);
            cand.rank_deficient = is_rank_deficient(curve, &s);
            return Ok(cand);
        }
        if iter == max_iter {
            break;
        }
        let (f, j) = residual_and_jacobian(curve, &s);
        let (mut step, cond) = pseudo_solve(&j, &(-f), 1e-13);
        let biggest = step.amax();
        if biggest > MAX_STEP {
            step *= MAX_STEP / biggest;
        }
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: [f64; 4] = std::array::from_fn(|k| s[k] + lambda * step[k]);
            let tn = norm(&square_residual(curve, &trial));
            if tn < (1.0 - 1e-4 * lambda) * fnorm {
                s = trial;
                fnorm = tn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            if cond > MAX_CONDITION {
                return Err(RefineError::DegenerateJacobian {
                    condition: cond,
                    residual: fnorm,
                });
            }
            return Err(RefineError::NonConvergence {
                iterations: iter + 1,
                residual: fnorm,
            });
        }
    }
    Err(RefineError::NonConvergence {
        iterations: max_iter,
        residual: fnorm,
    })
}

pub(crate) fn is_rank_deficient<C: PlaneCurve + ?Sized>(curve: &C, s: &[f64; 4]) -> bool {
    let (_, j) = residual_and_jacobian(curve, s);
    let sv = j.singular_values();
    sv.min() <= RANK_DEFICIENCY_RATIO * sv.max()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{make_circle, make_ellipse};
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    #[test]
    fn circle_seed_converges_to_sqrt2_square() {
        let sq = newton_refine(&make_circle(1.0), [0.1, 1.5, 3.2, 4.8], 1e-11, 50).unwrap();
        assert!(sq.residual_norm <= 1e-11);
        assert!((sq.sidelength - SQRT_2).abs() < 1e-9);
        assert!(sq.rank_deficient);
        assert!(sq.is_square_within(1e-7));
    }

    #[test]
    fn exact_solution_needs_no_iterations() {
        let a = (1.0f64 / 5f64.sqrt()).acos();
        let exact = [a, PI - a, PI + a, 2.0 * PI - a];
        // max_iter = 0 only allows the initial verification
        let sq = newton_refine(&make_ellipse(2.0, 1.0), exact, 1e-11, 0).unwrap();
        assert_eq!(sq.params, exact);
        assert!(!sq.rank_deficient);
    }

    #[test]
    fn far_seed_fails_to_converge_quickly() {
        let err = newton_refine(&make_ellipse(2.0, 1.0), [0.0, 0.4, 0.5, 3.0], 1e-11, 3).unwrap_err();
        assert!(
            matches!(err, RefineError::NonConvergence { iterations: 3, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn pseudo_solve_drops_null_directions() {
        let j = Matrix4::from_diagonal(&Vector4::new(2.0, 1.0, 0.0, 0.0));
        let (x, cond) = pseudo_solve(&j, &Vector4::new(4.0, 3.0, 5.0, 0.0), 1e-13);
        assert!((x - Vector4::new(2.0, 3.0, 0.0, 0.0)).norm() < 1e-14);
        assert!(cond.is_infinite());
        let (_, cond) = pseudo_solve(&Matrix4::identity(), &Vector4::zeros(), 1e-13);
        assert_eq!(cond, 1.0);
    }

    #[test]
    fn symmetric_circle_square_is_rank_deficient() {
        let s = [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2];
        assert!(is_rank_deficient(&make_circle(1.0), &s));
    }
}
