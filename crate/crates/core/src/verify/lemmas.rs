//! Size bounds for squares on smooth curves: the lower bound `π/κ`, the
//! chord bound for short arcs, the excluded size `π/(4κ)` and the bound on
//! squares of small size.

use super::{arcsin_envelope_slack, CheckReport, Witness, ANALYSIS_SAMPLES, BAND_FRACTION, DEFAULT_TOLERANCE};
use crate::curves::{is_simple, CurveAnalysis, FourierCurve, PlaneCurve};
use crate::geom::{cross, Vec2};
use crate::size_metric::{
    arc_image_lengths, quadrilateral_arcs, square_size, square_size_identity, ParamCorrespondence,
};
use crate::squares::{find_all_squares_with, SearchConfig, SquareCandidate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, SQRT_2, TAU};

const SIMPLICITY_SAMPLES: usize = 4096;
const REGULARITY_SAMPLES: usize = 2048;

pub(super) fn smooth_jordan(curve: &FourierCurve) -> Result<(), String> {
    curve.check_regular(REGULARITY_SAMPLES).map_err(|e| e.to_string())?;
    if is_simple(curve, SIMPLICITY_SAMPLES) {
        Ok(())
    } else {
        Err("curve is not simple".into())
    }
}

/// Every inscribed square has size at least `π/κ` with respect to the
/// identity.
pub fn check_initial_size_bound(curve: &FourierCurve, search: &SearchConfig) -> CheckReport {
    let mut report = CheckReport::new("initial_size_bound", DEFAULT_TOLERANCE);
    if let Err(why) = smooth_jordan(curve) {
        return report.inapplicable(why);
    }
    let analysis = CurveAnalysis::new(curve, ANALYSIS_SAMPLES);
    let kappa = analysis.max_unsigned_curvature;
    let bound = PI / kappa;
    report.hypothesis("kappa", kappa).hypothesis("bound", bound);
    let squares = find_all_squares_with(curve, &analysis, search).squares;
    if squares.is_empty() {
        return report.inapplicable("no inscribed square found");
    }
    let mut margin = f64::INFINITY;
    for square in squares {
        let size = square_size_identity(curve, &analysis, &square.params);
        margin = margin.min(size - bound);
        report.witnesses.push(Witness::Square {
            square,
            measured: size,
            bound,
        });
    }
    report.conclude(margin)
}

/// End parameter, exact arc length and chord of the arc of length about
/// `ell` starting at `s0`.
pub fn chord_after_arc<C: PlaneCurve + ?Sized>(
    curve: &C,
    analysis: &CurveAnalysis,
    s0: f64,
    ell: f64,
) -> (f64, f64, f64) {
    let s1 = analysis.param_at_arc(curve, analysis.arc_position(curve, s0) + ell);
    // measure the arc actually taken rather than trusting the inversion
    let length = analysis.arc_length(curve, s0, s1);
    (s1, length, (curve.point(s1) - curve.point(s0)).norm())
}

/// Random arcs of length at most `π/(4κ)` have chord at least `ℓ/√2`.
pub fn check_chord_bound(curve: &FourierCurve, trials: usize, seed: u64) -> CheckReport {
    let mut report = CheckReport::new("chord_bound", DEFAULT_TOLERANCE);
    if let Err(why) = curve.check_regular(REGULARITY_SAMPLES) {
        return report.inapplicable(why.to_string());
    }
    let analysis = CurveAnalysis::new(curve, ANALYSIS_SAMPLES);
    let kappa = analysis.max_unsigned_curvature;
    let max_len = PI / (4.0 * kappa);
    report.hypothesis("kappa", kappa).hypothesis("max_arc_length", max_len);
    report.hypothesis("trials", trials as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Option<(f64, Witness)> = None;
    for _ in 0..trials {
        let s0 = rng.gen_range(0.0..TAU);
        let ell = max_len * (1.0 - rng.gen::<f64>());
        let (s1, length, chord) = chord_after_arc(curve, &analysis, s0, ell);
        let margin = chord - length / SQRT_2;
        if worst.as_ref().is_none_or(|(m, _)| margin < *m) {
            let arc = Witness::Arc {
                start: s0,
                end: s1,
                length,
                chord,
            };
            worst = Some((margin, arc));
        }
    }
    match worst {
        Some((margin, arc)) => {
            report.witnesses.push(arc);
            report.conclude(margin)
        }
        None => report.inapplicable("no trials requested"),
    }
}

/// `1 − 16√2/(10π)`, which must exceed `1/4` for the excluded-size argument
/// to close.
pub fn no_intermediate_self_test() -> f64 {
    1.0 - 16.0 * SQRT_2 / (10.0 * PI)
}

/// Angles in `[0, π]` at the second and third of four points, between the
/// segments joining consecutive points.
pub fn corner_angles(p: &[Vec2; 4]) -> (f64, f64) {
    let angle = |a: Vec2, b: Vec2| cross(&a, &b).abs().atan2(a.dot(&b));
    (angle(p[0] - p[1], p[2] - p[1]), angle(p[1] - p[2], p[3] - p[2]))
}

/// Vertex parameters relabelled so that the arc left out of the size runs
/// from the last vertex back to the first.
fn size_chain(params: &[f64; 4], lengths: &[f64; 4]) -> Option<[f64; 4]> {
    let arcs = quadrilateral_arcs(params).ok()?;
    let skip = (0..4).max_by(|&a, &b| lengths[a].total_cmp(&lengths[b]))?;
    Some(std::array::from_fn(|k| arcs[(skip + 1 + k) % 4].0))
}

/// No square on `alpha` has size with respect to `f` within
/// `±1e-3/κ` of `π/(4κ)`, where `κ` belongs to `beta` and `f` moves points
/// by at most `1/(10κ)`.
///
/// The margin is the distance from the nearest size to the band edge.
/// Diagnostics follow the square nearest the critical size: the corner
/// angles `θ, φ` of its image on `beta`, the estimate
/// `π − 4 arcsin(2δ/𝓛)`, and the chord bound `ℓ/√2` against both the chord
/// of the square on `alpha` and the chord of its image on `beta`.
pub fn check_no_intermediate(
    alpha: &FourierCurve,
    beta: &FourierCurve,
    f: &ParamCorrespondence,
    search: &SearchConfig,
) -> CheckReport {
    let mut report = CheckReport::new("no_intermediate", 0.0);
    let beta_analysis = CurveAnalysis::new(beta, ANALYSIS_SAMPLES);
    let kappa = beta_analysis.max_unsigned_curvature;
    let delta = 1.0 / (10.0 * kappa);
    let critical = PI / (4.0 * kappa);
    let band = BAND_FRACTION / kappa;
    report
        .hypothesis("kappa", kappa)
        .hypothesis("delta", delta)
        .hypothesis("displacement", f.max_displacement)
        .hypothesis("critical_size", critical)
        .hypothesis("band_half_width", band);
    report
        .diagnostic("self_test", no_intermediate_self_test())
        .diagnostic("arcsin_envelope_slack", arcsin_envelope_slack(10_000));
    if f.max_displacement > delta {
        return report.inapplicable(format!(
            "displacement {:.6} exceeds 1/(10κ) = {delta:.6}",
            f.max_displacement
        ));
    }
    let alpha_analysis = CurveAnalysis::new(alpha, ANALYSIS_SAMPLES);
    let squares = find_all_squares_with(alpha, &alpha_analysis, search).squares;
    if squares.is_empty() {
        return report.inapplicable("no inscribed square found on alpha");
    }
    let mut closest: Option<(f64, [f64; 4], f64, f64)> = None;
    for square in squares {
        let lengths = match arc_image_lengths(&square.params, beta, &beta_analysis, f) {
            Ok(l) => l,
            Err(e) => {
                report.notes.push(format!("square skipped: {e}"));
                continue;
            }
        };
        let size = lengths.iter().sum::<f64>() - lengths.iter().fold(0.0, |m: f64, &x| m.max(x));
        let gap = (size - critical).abs();
        if closest.is_none_or(|(g, ..)| gap < g) {
            if let Some(chain) = size_chain(&square.params, &lengths) {
                closest = Some((gap, chain, size, square.sidelength));
            }
        }
        report.witnesses.push(Witness::Square {
            square,
            measured: size,
            bound: critical,
        });
    }
    let Some((gap, chain, size, sidelength)) = closest else {
        return report.inapplicable("no square could be measured");
    };
    let on_alpha = chain.map(|s| alpha.point(s));
    let on_beta = chain.map(|s| beta.point(f.map(s)));
    let (theta, phi) = corner_angles(&on_beta);
    report
        .diagnostic("closest_approach", gap)
        .diagnostic("size", size)
        .diagnostic("size_times_kappa", size * kappa)
        .diagnostic("theta", theta)
        .diagnostic("phi", phi)
        .diagnostic("turning_lower_bound", TAU - theta - phi)
        .diagnostic("corner_estimate", PI - 4.0 * (2.0 * delta / sidelength).min(1.0).asin())
        .diagnostic("chord_bound", size / SQRT_2)
        .diagnostic("alpha_chord", (on_alpha[3] - on_alpha[0]).norm())
        .diagnostic("beta_chord", (on_beta[3] - on_beta[0]).norm());
    report.conclude(gap - band)
}

/// `(√2/(5κ) + 1/(100κ), π/(4κ))`: a zero square's size bound, padded by the
/// allowance for the tracking threshold, against the critical size.
pub fn zero_square_arithmetic(kappa: f64) -> (f64, f64) {
    (SQRT_2 / (5.0 * kappa) + 1.0 / (100.0 * kappa), PI / (4.0 * kappa))
}

struct PairContext<'a> {
    alpha: &'a FourierCurve,
    beta: &'a FourierCurve,
    f: &'a ParamCorrespondence,
    alpha_analysis: CurveAnalysis,
    beta_analysis: CurveAnalysis,
    kappa: f64,
}

impl<'a> PairContext<'a> {
    /// `Err` carries the reason the hypotheses fail.
    fn new(
        report: &mut CheckReport,
        alpha: &'a FourierCurve,
        beta: &'a FourierCurve,
        f: &'a ParamCorrespondence,
    ) -> Result<Self, String> {
        let beta_analysis = CurveAnalysis::new(beta, ANALYSIS_SAMPLES);
        let kappa = beta_analysis.max_unsigned_curvature;
        let budget = 1.0 / (10.0 * kappa);
        let (lhs, rhs) = zero_square_arithmetic(kappa);
        report
            .hypothesis("kappa", kappa)
            .hypothesis("delta", f.max_displacement)
            .hypothesis("delta_budget", budget)
            .diagnostic("zero_square_bound", lhs)
            .diagnostic("critical_size", rhs);
        smooth_jordan(alpha).map_err(|e| format!("alpha: {e}"))?;
        smooth_jordan(beta).map_err(|e| format!("beta: {e}"))?;
        if f.max_displacement >= budget {
            return Err(format!(
                "displacement {:.6} is not below 1/(10κ) = {budget:.6}",
                f.max_displacement
            ));
        }
        Ok(Self {
            alpha,
            beta,
            f,
            alpha_analysis: CurveAnalysis::new(alpha, ANALYSIS_SAMPLES),
            beta_analysis,
            kappa,
        })
    }

    /// `(margin, witness, rho, bound with ρ read as the sidelength)`.
    fn measure(&self, square: &SquareCandidate) -> Result<(f64, Witness, f64, f64), String> {
        let rho = square_size_identity(self.alpha, &self.alpha_analysis, &square.params);
        let bound = SQRT_2 / (5.0 * self.kappa) + SQRT_2 * rho;
        let size = square_size(&square.params, self.beta, &self.beta_analysis, self.f).map_err(|e| e.to_string())?;
        let side_bound = SQRT_2 / (5.0 * self.kappa) + SQRT_2 * square.sidelength;
        let witness = Witness::Square {
            square: square.clone(),
            measured: size,
            bound,
        };
        Ok((bound - size, witness, rho, side_bound - size))
    }
}

/// A square of identity size `ρ` on `alpha` has size below
/// `√2/(5κ) + √2ρ` with respect to `f`, where `κ` belongs to `beta`, both
/// curves are Jordan and `f` moves points by less than `1/(10κ)`.
///
/// The diagnostic `margin_with_sidelength_rho` repeats the test with `ρ`
/// read as the sidelength. The two readings agree for zero squares.
pub fn check_small_square_bound(
    alpha: &FourierCurve,
    beta: &FourierCurve,
    f: &ParamCorrespondence,
    square: &SquareCandidate,
) -> CheckReport {
    let mut report = CheckReport::new("small_square_bound", DEFAULT_TOLERANCE);
    let ctx = match PairContext::new(&mut report, alpha, beta, f) {
        Ok(ctx) => ctx,
        Err(why) => return report.inapplicable(why),
    };
    match ctx.measure(square) {
        Ok((margin, witness, rho, side_margin)) => {
            report
                .hypothesis("rho", rho)
                .hypothesis("bound", SQRT_2 / (5.0 * ctx.kappa) + SQRT_2 * rho)
                .diagnostic("sidelength", square.sidelength)
                .diagnostic("margin_with_sidelength_rho", side_margin);
            report.witnesses.push(witness);
            report.conclude(margin)
        }
        Err(why) => report.inapplicable(why),
    }
}

/// [`check_small_square_bound`] for every square found on `alpha`; the
/// margin is the smallest over all of them.
pub fn check_small_square_bounds(
    alpha: &FourierCurve,
    beta: &FourierCurve,
    f: &ParamCorrespondence,
    search: &SearchConfig,
) -> CheckReport {
    let mut report = CheckReport::new("small_square_bound", DEFAULT_TOLERANCE);
    let ctx = match PairContext::new(&mut report, alpha, beta, f) {
        Ok(ctx) => ctx,
        Err(why) => return report.inapplicable(why),
    };
    let squares = find_all_squares_with(alpha, &ctx.alpha_analysis, search).squares;
    let mut margin = f64::INFINITY;
    let mut side_margin = f64::INFINITY;
    for square in &squares {
        match ctx.measure(square) {
            Ok((m, witness, _, sm)) => {
                margin = margin.min(m);
                side_margin = side_margin.min(sm);
                report.witnesses.push(witness);
            }
            Err(why) => report.notes.push(format!("square skipped: {why}")),
        }
    }
    if report.witnesses.is_empty() {
        return report.inapplicable("no square could be measured on alpha");
    }
    report.diagnostic("margin_with_sidelength_rho", side_margin);
    report.conclude(margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli_io::{make_fingered_circle, make_peanut};
    use crate::curves::{make_circle, make_ellipse, perturb_fourier};
    use crate::squares::newton_refine;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn circle_initial_size_margin_is_a_quarter_turn() {
        let r = check_initial_size_bound(&make_circle(1.0), &SearchConfig::default());
        assert!(r.holds());
        assert_abs_diff_eq!(r.margin, FRAC_PI_2, epsilon = 1e-6);
    }

    #[test]
    fn ellipse_initial_size_is_perimeter_minus_longest_arc() {
        let e = make_ellipse(2.0, 1.0);
        let r = check_initial_size_bound(&e, &SearchConfig::default());
        assert!(r.holds());
        assert_abs_diff_eq!(r.hypothesis_values["bound"], FRAC_PI_2, epsilon = 1e-9);
        // independent oracle: Simpson's rule on the speed of (2 cos s, sin s)
        let speed = |s: f64| (4.0 * s.sin().powi(2) + s.cos().powi(2)).sqrt();
        let simpson = |a: f64, b: f64| {
            let n = 20_000;
            let h = (b - a) / n as f64;
            (0..=n)
                .map(|k| {
                    let w = if k == 0 || k == n {
                        1.0
                    } else if k % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    w * speed(a + h * k as f64)
                })
                .sum::<f64>()
                * h
                / 3.0
        };
        // the square's vertices sit at parameters ±s0, π ± s0 with cos s0 = 1/√5
        let s0 = (1.0 / 5f64.sqrt()).acos();
        let longest = simpson(s0, PI - s0).max(simpson(-s0, s0));
        let expected = simpson(0.0, TAU) - longest;
        assert_abs_diff_eq!(r.margin + FRAC_PI_2, expected, epsilon = 1e-8);
    }

    #[test]
    fn peanut_neck_square_is_short_but_large() {
        let p = make_peanut(0.1);
        let r = check_initial_size_bound(&p, &SearchConfig::default());
        assert!(r.holds(), "{:?}", r.margin);
        let short = r
            .witnesses
            .iter()
            .any(|w| matches!(w, Witness::Square { square, .. } if square.sidelength < 0.2));
        assert!(short);
    }

    #[test]
    fn circle_chord_at_critical_length() {
        let c = make_circle(1.0);
        let a = CurveAnalysis::new(&c, ANALYSIS_SAMPLES);
        let (_, len, chord) = chord_after_arc(&c, &a, 0.3, PI / 4.0);
        assert_abs_diff_eq!(len, PI / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(chord, 0.765_366_864_730_179_9, epsilon = 1e-12);
        assert_abs_diff_eq!(len / SQRT_2, 0.555_360_367_269_796_4, epsilon = 1e-12);
    }

    #[test]
    fn chord_margin_at_critical_length_is_scale_free() {
        for r in [0.25, 1.0, 7.0] {
            let c = make_circle(r);
            let a = CurveAnalysis::new(&c, ANALYSIS_SAMPLES);
            let (_, len, chord) = chord_after_arc(&c, &a, 1.0, PI * r / 4.0);
            // κ = 1/r; chord·κ and ℓ·κ are fixed
            assert_abs_diff_eq!(
                (chord - len / SQRT_2) / r,
                0.765_366_864_730_18 - 0.555_360_367_269_80,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn nearly_straight_arcs_have_chord_close_to_length() {
        let e = make_ellipse(40.0, 1.0);
        let a = CurveAnalysis::new(&e, ANALYSIS_SAMPLES);
        // flat side near s = π/2 has curvature 1/1600
        let (_, len, chord) = chord_after_arc(&e, &a, FRAC_PI_2 - 0.01, 0.8);
        assert!(chord <= len && chord > 0.999 * len);
    }

    #[test]
    fn chord_check_holds_on_a_perturbed_ellipse() {
        let c = perturb_fourier(&make_ellipse(2.0, 1.0), 0.05, 6, 3).unwrap();
        let r = check_chord_bound(&c, 2000, 8);
        assert!(r.holds() && r.margin > 0.0);
    }

    #[test]
    fn self_test_value() {
        assert_abs_diff_eq!(no_intermediate_self_test(), 0.279_75, epsilon = 5e-6);
        assert!(no_intermediate_self_test() > 0.25);
    }

    #[test]
    fn ellipse_sizes_stay_away_from_the_critical_size() {
        let e = make_ellipse(2.0, 1.0);
        let id = ParamCorrespondence::identity(&e, 1024);
        let r = check_no_intermediate(&e, &e, &id, &SearchConfig::default());
        assert!(r.holds());
        assert_abs_diff_eq!(r.hypothesis_values["critical_size"], PI / 8.0, epsilon = 1e-9);
        assert!(r.diagnostics["closest_approach"] > 1.0);
        assert!(r.diagnostics["self_test"] > 0.25);
    }

    #[test]
    fn large_displacement_is_inapplicable() {
        let e = make_ellipse(2.0, 1.0);
        let shifted = e.translated(Vec2::new(0.2, 0.0));
        let f = ParamCorrespondence::from_fn(&shifted, &e, 256, |s| s, "ellipse").unwrap();
        assert_abs_diff_eq!(f.max_displacement, 0.2, epsilon = 1e-12);
        let r = check_no_intermediate(&shifted, &e, &f, &SearchConfig::default());
        assert_eq!(r.verdict, super::super::Verdict::Inapplicable);
    }

    #[test]
    fn corner_angles_of_a_square_are_right_angles() {
        let p = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let (t, f) = corner_angles(&p);
        assert_abs_diff_eq!(t, FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(f, FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn zero_square_arithmetic_at_unit_curvature() {
        let (lhs, rhs) = zero_square_arithmetic(1.0);
        assert_abs_diff_eq!(SQRT_2 / 5.0, 0.282_843, epsilon = 1e-6);
        assert_abs_diff_eq!(lhs, 0.292_843, epsilon = 1e-6);
        assert_abs_diff_eq!(rhs, std::f64::consts::FRAC_PI_4, epsilon = 1e-15);
        assert!(lhs < rhs);
    }

    #[test]
    fn finger_square_on_a_circle_meets_the_small_square_bound() {
        let finger = make_fingered_circle(0.04, 0.045);
        let circle = make_circle(1.0);
        let sq = newton_refine(&finger.curve, finger.square_seed, 1e-11, 60).unwrap();
        let f = ParamCorrespondence::from_projection(&finger.curve, &circle, 2048, "circle").unwrap();
        let r = check_small_square_bound(&finger.curve, &circle, &f, &sq);
        assert!(r.holds(), "{:?}", r);
        assert!(r.hypothesis_values["rho"] < 0.2);
        assert!(r.diagnostics["margin_with_sidelength_rho"] > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(6))]

        #[test]
        fn theorem_backed_checks_hold_on_random_curves(seed in 0u64..10_000, amp in 0.0f64..0.05) {
            let c = perturb_fourier(&make_ellipse(1.6, 1.0), amp, 5, seed).unwrap();
            prop_assert!(check_initial_size_bound(&c, &SearchConfig::default()).holds());
            prop_assert!(check_chord_bound(&c, 300, seed).holds());
            let beta = make_ellipse(1.6, 1.0);
            let f = ParamCorrespondence::from_projection(&c, &beta, 512, "beta").unwrap();
            let r = check_small_square_bounds(&c, &beta, &f, &SearchConfig::default());
            prop_assert!(r.verdict != super::super::Verdict::Violated);
        }
    }
}
