use super::HomotopyError;
use crate::curves::{reach_estimate, CurveAnalysis, FourierCurve, Harmonic, PlaneCurve};
use crate::geom::{rot90, Vec2};
use crate::size_metric::{quadrilateral_arcs, square_size_identity, ParamCorrespondence, SizeError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Grid used to validate regularity and displacement bounds.
const CHECK_S: usize = 256;
const CHECK_T: usize = 41;
const MAX_RETRIES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomotopyKind {
    FourierLinear,
    TwoStep,
}

/// `6x⁵ − 15x⁴ + 10x³` on `[0, 1]`: a ramp with vanishing first and second
/// derivatives at both ends.
pub fn smooth_ramp(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (x * (6.0 * x - 15.0) + 10.0)
}

/// Scalar trigonometric series `c₀ + Σ aₖ cos ks + bₖ sin ks`.
#[derive(Clone, Debug)]
pub(crate) struct ScalarSeries {
    constant: f64,
    terms: Vec<(f64, f64)>,
}

impl ScalarSeries {
    /// Least-squares fit of degree `k` to values on the uniform grid (for a
    /// uniform grid this is the truncated discrete Fourier transform).
    fn fit(values: &[f64], k: usize) -> Self {
        let n = values.len();
        let h = TAU / n as f64;
        let constant = values.iter().sum::<f64>() / n as f64;
        let terms = (1..=k)
            .map(|m| {
                let (mut a, mut b) = (0.0, 0.0);
                for (j, v) in values.iter().enumerate() {
                    let x = m as f64 * h * j as f64;
                    a += v * x.cos();
                    b += v * x.sin();
                }
                (2.0 * a / n as f64, 2.0 * b / n as f64)
            })
            .collect();
        Self { constant, terms }
    }

    fn eval(&self, s: f64) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .enumerate()
                .map(|(i, (a, b))| {
                    let x = (i + 1) as f64 * s;
                    a * x.cos() + b * x.sin()
                })
                .sum::<f64>()
    }

    fn max_abs_on_grid(&self, n: usize) -> f64 {
        (0..n)
            .map(|k| self.eval(TAU * k as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    }
}

/// Data of the two-stage construction from a smooth reference `β` to a
/// target `α` near it.
///
/// With `φ(s) = s + d(s)` a smooth fit to the correspondence and
/// `e(s)` the normal offset of `α(s)` from `β(φ(s))`:
///
/// * stage 1 (`t ≤ t_b`, `τ` ramping 0 → 1):
///   `H = β(φ_τ(s)) + τ e(s) N(φ_τ(s))`, `φ_τ = s + τ d(s)`, `P = φ_τ`;
/// * stage 2 (`σ` ramping 0 → 1): `H = (1 − σ) H(·, t_b) + σ α`, `P = φ`.
///
/// Every point of stage 1 lies on the normal line of `β` through its
/// `P`-image, inside the tube of radius `max |e|`.
#[derive(Clone, Debug)]
pub struct TwoStepData {
    pub beta: FourierCurve,
    pub target: FourierCurve,
    pub stage_boundary: f64,
    pub eta: f64,
    /// Largest `|β(P(s,t)) − H(s,t)|` seen on the validation grid.
    pub displacement_bound: f64,
    /// Reach estimate of `β` used for the tube check.
    pub tube_radius: f64,
    shift: ScalarSeries,
    offset_cap: f64,
}

impl TwoStepData {
    fn tau(&self, t: f64) -> f64 {
        smooth_ramp(t / self.stage_boundary)
    }

    fn sigma(&self, t: f64) -> f64 {
        smooth_ramp((t - self.stage_boundary) / (1.0 - self.stage_boundary))
    }

    fn normal(&self, s: f64) -> Vec2 {
        let d = self.beta.derivative(s);
        rot90(&d) / d.norm()
    }

    fn offset(&self, s: f64) -> f64 {
        let phi = s + self.shift.eval(s);
        (self.target.point(s) - self.beta.point(phi))
            .dot(&self.normal(phi))
            .clamp(-self.offset_cap, self.offset_cap)
    }

    fn stage_one(&self, s: f64, tau: f64) -> Vec2 {
        let phi = s + tau * self.shift.eval(s);
        self.beta.point(phi) + self.normal(phi) * (tau * self.offset(s))
    }

    /// `P(s, t)` as a real number (lifted, so `P(s + 2π, t) = P(s, t) + 2π`).
    pub fn p(&self, s: f64, t: f64) -> f64 {
        let tau = if t <= self.stage_boundary { self.tau(t) } else { 1.0 };
        s + tau * self.shift.eval(s)
    }

    pub fn point(&self, s: f64, t: f64) -> Vec2 {
        if t <= self.stage_boundary {
            self.stage_one(s, self.tau(t))
        } else {
            let sigma = self.sigma(t);
            self.stage_one(s, 1.0) * (1.0 - sigma) + self.target.point(s) * sigma
        }
    }
}

/// A homotopy of closed curves `H(s, t)`, `t ∈ [0, 1]`, with a parameter
/// correspondence `P(·, t)` onto a reference curve used for sizes.
///
/// For coefficient interpolation the reference is the slice itself and `P`
/// is the identity; for the two-stage construction the reference is `β`.
#[derive(Clone, Debug)]
pub struct Homotopy {
    pub kind: HomotopyKind,
    pub start: FourierCurve,
    pub end: FourierCurve,
    /// Mid-path bump `4t(1−t)·bump` added after failed regularity checks.
    pub bump: Option<FourierCurve>,
    /// Regularity retries used while building a linear homotopy.
    pub retries: usize,
    pub two_step: Option<TwoStepData>,
    /// Typical curve length, for tolerances.
    pub length_scale: f64,
    reference_analysis: Option<CurveAnalysis>,
}

/// The curve `H(·, t)`.
#[derive(Clone, Debug)]
pub enum HomotopySlice<'a> {
    Fourier(FourierCurve),
    TwoStep { data: &'a TwoStepData, t: f64 },
}

/// Step for finite-difference derivatives of two-stage slices.
const FD_STEP: f64 = 1e-3;

fn five_point<F: Fn(f64) -> Vec2>(f: F, x: f64, h: f64) -> Vec2 {
    (f(x - 2.0 * h) - f(x + 2.0 * h) + (f(x + h) - f(x - h)) * 8.0) / (12.0 * h)
}

impl PlaneCurve for HomotopySlice<'_> {
    fn point(&self, s: f64) -> Vec2 {
        match self {
            Self::Fourier(c) => c.point(s),
            Self::TwoStep { data, t } => data.point(s, *t),
        }
    }

    fn derivative(&self, s: f64) -> Vec2 {
        match self {
            Self::Fourier(c) => c.derivative(s),
            Self::TwoStep { data, t } => five_point(|x| data.point(x, *t), s, FD_STEP),
        }
    }

    fn second_derivative(&self, s: f64) -> Vec2 {
        match self {
            Self::Fourier(c) => c.second_derivative(s),
            Self::TwoStep { .. } => five_point(|x| self.derivative(x), s, FD_STEP),
        }
    }
}

fn random_bump(degree: usize, amplitude: f64, seed: u64) -> FourierCurve {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = vec![Harmonic::zero()];
    for _ in 1..=degree {
        let d: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-amplitude..=amplitude));
        h.push(Harmonic::from_array(d));
    }
    FourierCurve::new(h)
}

impl Homotopy {
    /// Coefficient interpolation from `start` to `end`.
    ///
    /// Regularity is checked on a grid in `(s, t)`. When it fails, a seeded
    /// bump vanishing at both ends is added and the check repeated, up to
    /// five times.
    pub fn linear(start: &FourierCurve, end: &FourierCurve, seed: u64) -> Result<Self, HomotopyError> {
        let la = CurveAnalysis::new(start, 256).total_length;
        let lb = CurveAnalysis::new(end, 256).total_length;
        let floor = 1e-8 * la.min(lb) / TAU;
        let mut h = Self {
            kind: HomotopyKind::FourierLinear,
            start: start.clone(),
            end: end.clone(),
            bump: None,
            retries: 0,
            two_step: None,
            length_scale: la.max(lb),
            reference_analysis: None,
        };
        if h.min_speed_on_grid() >= floor.max(1e-300) {
            return Ok(h);
        }
        let degree = start.degree().max(end.degree()).max(2);
        for retry in 0..MAX_RETRIES {
            h.retries = retry + 1;
            h.bump = Some(random_bump(
                degree,
                1e-2 * h.length_scale / TAU,
                seed.wrapping_add(retry as u64),
            ));
            if h.min_speed_on_grid() >= floor.max(1e-300) {
                return Ok(h);
            }
        }
        Err(HomotopyError::Irregular { retries: MAX_RETRIES })
    }

    /// A copy of a coefficient-interpolation homotopy with a fresh seeded
    /// mid-path bump, used to break non-generic paths. Endpoints are kept.
    pub fn perturbed(&self, seed: u64) -> Result<Self, HomotopyError> {
        if self.kind != HomotopyKind::FourierLinear {
            return Ok(self.clone());
        }
        let degree = self.start.degree().max(self.end.degree()).max(2);
        let floor = 1e-8 * self.length_scale / TAU;
        for retry in 0..MAX_RETRIES {
            let mut h = self.clone();
            let extra = random_bump(degree, 1e-3 * self.length_scale / TAU, seed.wrapping_add(retry as u64));
            h.bump = Some(match &self.bump {
                Some(b) => b.plus(&extra),
                None => extra,
            });
            if h.min_speed_on_grid() >= floor {
                return Ok(h);
            }
        }
        Err(HomotopyError::Irregular { retries: MAX_RETRIES })
    }

    fn min_speed_on_grid(&self) -> f64 {
        let mut m = f64::INFINITY;
        for j in 0..CHECK_T {
            let slice = self.slice(j as f64 / (CHECK_T - 1) as f64);
            for k in 0..CHECK_S {
                m = m.min(slice.speed(TAU * k as f64 / CHECK_S as f64));
            }
        }
        m
    }

    /// The two-stage homotopy from `beta` to `target`, where `f` maps
    /// target parameters to `beta` parameters.
    ///
    /// Requires `f` to have degree 1 and displacement below `eta`, and `beta`
    /// to have a tubular neighbourhood wider than that displacement.
    pub fn two_step(
        beta: &FourierCurve,
        target: &FourierCurve,
        f: &ParamCorrespondence,
        eta: f64,
    ) -> Result<Self, HomotopyError> {
        if f.degree() != 1 {
            return Err(HomotopyError::DegreeNotOne { degree: f.degree() });
        }
        if f.max_displacement >= eta {
            return Err(HomotopyError::DisplacementBudgetExceeded {
                displacement: f.max_displacement,
                eta,
            });
        }
        let beta_analysis = CurveAnalysis::new(beta, 1024);
        let tube_radius = reach_estimate(beta, &beta_analysis, 512);
        if tube_radius <= f.max_displacement {
            return Err(HomotopyError::TubeTooSmall {
                reach: tube_radius,
                required: f.max_displacement,
            });
        }
        let n = f.len();
        let h = TAU / n as f64;
        let mut shift: Vec<f64> = (0..n).map(|k| f.lift_at(h * k as f64) - h * k as f64).collect();
        // keep φ close to the identity rather than a full turn away
        let turns = (shift.iter().sum::<f64>() / n as f64 / TAU).round();
        shift.iter_mut().for_each(|d| *d -= turns * TAU);
        let shift = ScalarSeries::fit(&shift, (n / 4).clamp(4, 48));
        let mut data = TwoStepData {
            beta: beta.clone(),
            target: target.clone(),
            stage_boundary: 0.5,
            eta,
            displacement_bound: 0.0,
            tube_radius,
            shift,
            offset_cap: f.max_displacement.max(1e-300).min(0.999 * tube_radius),
        };
        let mut worst: f64 = 0.0;
        for j in 0..CHECK_T {
            let t = j as f64 / (CHECK_T - 1) as f64;
            for k in 0..CHECK_S {
                let s = TAU * k as f64 / CHECK_S as f64;
                worst = worst.max((beta.point(data.p(s, t)) - data.point(s, t)).norm());
            }
        }
        data.displacement_bound = worst;
        if worst >= eta {
            return Err(HomotopyError::DisplacementBudgetExceeded {
                displacement: worst,
                eta,
            });
        }
        let mut hom = Self {
            kind: HomotopyKind::TwoStep,
            start: beta.clone(),
            end: target.clone(),
            bump: None,
            retries: 0,
            two_step: Some(data),
            length_scale: beta_analysis.total_length,
            reference_analysis: Some(beta_analysis),
        };
        let floor = 1e-8 * hom.length_scale / TAU;
        if hom.min_speed_on_grid() < floor {
            return Err(HomotopyError::Irregular { retries: 0 });
        }
        hom.length_scale = hom.length_scale.max(CurveAnalysis::new(target, 256).total_length);
        Ok(hom)
    }

    pub fn slice(&self, t: f64) -> HomotopySlice<'_> {
        match &self.two_step {
            Some(data) => HomotopySlice::TwoStep { data, t },
            None => {
                let base = self.start.lerp(&self.end, t);
                HomotopySlice::Fourier(match &self.bump {
                    Some(b) => base.plus(&b.scaled(4.0 * t * (1.0 - t))),
                    None => base,
                })
            }
        }
    }

    pub fn point(&self, s: f64, t: f64) -> Vec2 {
        self.slice(t).point(s)
    }

    /// `∂H/∂t` at `(s, t)`.
    pub fn time_derivative(&self, s: f64, t: f64) -> Vec2 {
        match &self.two_step {
            Some(data) => {
                let h = 1e-5;
                let (lo, hi) = ((t - h).max(0.0), (t + h).min(1.0));
                (data.point(s, hi) - data.point(s, lo)) / (hi - lo)
            }
            None => {
                let mut v = self.end.point(s) - self.start.point(s);
                if let Some(b) = &self.bump {
                    v += b.point(s) * (4.0 - 8.0 * t);
                }
                v
            }
        }
    }

    /// Smooth reference curve for the size metric (`β` for the two-stage
    /// construction); `None` when the slice is its own reference.
    pub fn reference(&self) -> Option<&FourierCurve> {
        self.two_step.as_ref().map(|d| &d.beta)
    }

    /// `P(·, t)` sampled on `n` points as a correspondence onto the reference.
    pub fn correspondence_at(&self, t: f64, n: usize) -> Result<ParamCorrespondence, SizeError> {
        let slice = self.slice(t);
        match &self.two_step {
            Some(data) => ParamCorrespondence::from_fn(&slice, &data.beta, n, |s| data.p(s, t), "beta"),
            None => Ok(ParamCorrespondence::identity(&slice, n)),
        }
    }

    /// Size of the square with parameters `params` on `H(·, t)` with respect
    /// to `P(·, t)`.
    pub fn size_wrt_p(&self, t: f64, params: &[f64; 4]) -> Result<f64, SizeError> {
        match (&self.two_step, &self.reference_analysis) {
            (Some(data), Some(analysis)) => {
                let arcs = quadrilateral_arcs(params)?;
                let l = arcs.map(|(a, b)| {
                    (analysis.arc_position(&data.beta, data.p(b, t)) - analysis.arc_position(&data.beta, data.p(a, t)))
                        .abs()
                });
                let total: f64 = l.iter().sum();
                Ok(l.iter().map(|x| total - x).fold(f64::INFINITY, f64::min))
            }
            _ => {
                let slice = self.slice(t);
                let analysis = CurveAnalysis::new(&slice, 256);
                Ok(square_size_identity(&slice, &analysis, params))
            }
        }
    }

    /// Maximum unsigned curvature of the reference: `β` for the two-stage
    /// construction, otherwise the largest over a grid of slices.
    pub fn reference_kappa(&self) -> f64 {
        match &self.reference_analysis {
            Some(a) => a.max_unsigned_curvature,
            None => (0..=16)
                .map(|j| CurveAnalysis::new(&self.slice(j as f64 / 16.0), 256).max_unsigned_curvature)
                .fold(0.0, f64::max),
        }
    }

    /// Lipschitz constant for sizes along a trace, per unit of
    /// `|Δs|∞ + |Δt|`, estimated from the arc-position map on a grid.
    pub fn size_lipschitz(&self) -> f64 {
        let ns = 128;
        let nt = 17;
        let mut cs: f64 = 0.0;
        let mut ct: f64 = 0.0;
        match (&self.two_step, &self.reference_analysis) {
            (Some(data), Some(_)) => {
                // P(s, t) = s + τ(t) d(s) with max τ' = 15/8 per unit of t/t_b
                let dtau = 15.0 / 8.0 / data.stage_boundary;
                let h = TAU / ns as f64;
                let beta_speed = (0..ns).map(|k| data.beta.speed(h * k as f64)).fold(0.0, f64::max);
                for k in 0..ns {
                    let s = h * k as f64;
                    let slope = (data.shift.eval(s + 1e-4) - data.shift.eval(s - 1e-4)) / 2e-4;
                    cs = cs.max(beta_speed * (1.0 + slope.abs()));
                    ct = ct.max(beta_speed * data.shift.eval(s).abs() * dtau);
                }
            }
            _ => {
                let lengths: Vec<CurveAnalysis> = (0..nt)
                    .map(|j| CurveAnalysis::new(&self.slice(j as f64 / (nt - 1) as f64), 128))
                    .collect();
                for (j, a) in lengths.iter().enumerate() {
                    let slice = self.slice(j as f64 / (nt - 1) as f64);
                    for k in 0..ns {
                        cs = cs.max(slice.speed(TAU * k as f64 / ns as f64));
                    }
                    if j > 0 {
                        let prev = &lengths[j - 1];
                        let dt = 1.0 / (nt - 1) as f64;
                        for (x, y) in a.arclength_table.iter().zip(&prev.arclength_table) {
                            ct = ct.max((x - y).abs() / dt);
                        }
                    }
                }
                // the tabulated t-slope misses variation between grid times
                ct *= 2.0;
            }
        }
        6.0 * 1.5 * cs.max(ct)
    }

    pub fn shift_magnitude(&self) -> f64 {
        self.two_step.as_ref().map_or(0.0, |d| d.shift.max_abs_on_grid(256))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{make_ellipse, perturb_fourier};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn ramp_is_c2_at_the_ends() {
        assert_eq!(smooth_ramp(0.0), 0.0);
        assert_eq!(smooth_ramp(1.0), 1.0);
        let h = 1e-4;
        let d1 = |x: f64| (smooth_ramp(x + h) - smooth_ramp(x - h)) / (2.0 * h);
        assert!(d1(1e-3).abs() < 1e-4 && d1(1.0 - 1e-3).abs() < 1e-4);
        assert!((d1(0.5) - 15.0 / 8.0).abs() < 1e-6);
    }

    #[test]
    fn constant_linear_homotopy() {
        let e = make_ellipse(2.0, 1.0);
        let h = Homotopy::linear(&e, &e, 0).unwrap();
        assert_eq!(h.retries, 0);
        for s in [0.0, 1.0, 4.0] {
            assert!((h.point(s, 0.37) - e.point(s)).norm() < 1e-15);
            assert!(h.time_derivative(s, 0.37).norm() < 1e-15);
        }
    }

    #[test]
    fn quarter_turn_needs_no_retry_half_turn_does() {
        let e = make_ellipse(2.0, 1.0);
        let h = Homotopy::linear(&e, &e.rotated(FRAC_PI_2), 0).unwrap();
        assert_eq!(h.retries, 0);
        // a half turn passes through the constant curve at t = 1/2
        let h = Homotopy::linear(&e, &e.rotated(std::f64::consts::PI), 0).unwrap();
        assert!(h.retries >= 1);
        assert!((h.point(0.3, 0.0) - e.point(0.3)).norm() < 1e-12);
        assert!((h.point(0.3, 1.0) - e.rotated(std::f64::consts::PI).point(0.3)).norm() < 1e-12);
    }

    #[test]
    fn linear_time_derivative_matches_differences() {
        let e = make_ellipse(2.0, 1.0);
        let h = Homotopy::linear(&e, &e.rotated(std::f64::consts::PI), 3).unwrap();
        let d = 1e-6;
        for (s, t) in [(0.3, 0.2), (2.0, 0.5), (5.0, 0.9)] {
            let fd = (h.point(s, t + d) - h.point(s, t - d)) / (2.0 * d);
            assert!((fd - h.time_derivative(s, t)).norm() < 1e-8);
        }
    }

    #[test]
    fn two_step_identity_is_constant() {
        let e = make_ellipse(2.0, 1.0);
        let id = ParamCorrespondence::identity(&e, 256);
        let h = Homotopy::two_step(&e, &e, &id, 0.05).unwrap();
        for t in [0.0, 0.3, 0.5, 0.8, 1.0] {
            for s in [0.0, 1.3, 4.4] {
                assert!((h.point(s, t) - e.point(s)).norm() < 1e-12);
                assert!((h.two_step.as_ref().unwrap().p(s, t) - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_step_endpoints_and_bound() {
        let beta = make_ellipse(2.0, 1.0);
        let target = perturb_fourier(&beta, 0.02 / 4.0, 6, 11).unwrap();
        let f = ParamCorrespondence::from_projection(&target, &beta, 512, "beta").unwrap();
        assert!(f.max_displacement < 0.05);
        let h = Homotopy::two_step(&beta, &target, &f, 0.05).unwrap();
        let data = h.two_step.as_ref().unwrap();
        assert!(data.displacement_bound < 0.05);
        for k in 0..64 {
            let s = TAU * k as f64 / 64.0;
            assert!((h.point(s, 0.0) - beta.point(s)).norm() < 1e-9);
            assert!((h.point(s, 1.0) - target.point(s)).norm() < 1e-9);
            assert!((data.p(s, 0.0) - s).abs() < 1e-15);
        }
    }

    #[test]
    fn two_step_rejects_small_budget() {
        let beta = make_ellipse(2.0, 1.0);
        let target = make_ellipse(2.1, 1.1);
        let f = ParamCorrespondence::from_projection(&target, &beta, 256, "beta").unwrap();
        let err = Homotopy::two_step(&beta, &target, &f, 0.05).unwrap_err();
        assert!(
            matches!(err, HomotopyError::DisplacementBudgetExceeded { .. }),
            "{err:?}"
        );
    }
}
