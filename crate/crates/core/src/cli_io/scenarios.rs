//! Deterministic curve generators for experiments and test suites.

use super::files::AnyCurve;
use crate::curves::{is_simple, make_ellipse, perturb_fourier, FourierCurve, Harmonic, PlaneCurve, PolylineCurve};
use crate::geom::{vec2, Vec2};
use crate::quadrature::gk15;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error("invalid scenario parameters: {0}")]
    InvalidParameters(String),
    #[error("generated curve is not simple")]
    NotSimple,
    #[error("generated curve rejected: {0}")]
    Rejected(String),
}

/// A named curve generator. The seed, where present, fixes the output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSpec {
    Ellipse {
        a: f64,
        b: f64,
    },
    Perturbed {
        a: f64,
        b: f64,
        amplitude: f64,
        harmonics: usize,
        seed: u64,
    },
    Peanut {
        neck: f64,
    },
    NoisyPolyline {
        a: f64,
        b: f64,
        vertices: usize,
        amplitude: f64,
        seed: u64,
    },
    AnnulusStar {
        inner: f64,
        outer: f64,
        points: usize,
        vertices: usize,
    },
}

impl ScenarioSpec {
    pub fn name(&self) -> String {
        match self {
            Self::Ellipse { a, b } => format!("ellipse_{a}_{b}"),
            Self::Perturbed {
                a,
                b,
                amplitude,
                harmonics,
                seed,
            } => {
                format!("perturbed_{a}_{b}_amp{amplitude}_h{harmonics}_seed{seed}")
            }
            Self::Peanut { neck } => format!("peanut_neck{neck}"),
            Self::NoisyPolyline {
                a,
                b,
                vertices,
                amplitude,
                seed,
            } => {
                format!("noisy_{a}_{b}_n{vertices}_amp{amplitude}_seed{seed}")
            }
            Self::AnnulusStar {
                inner,
                outer,
                points,
                vertices,
            } => {
                format!("star_{inner}_{outer}_p{points}_n{vertices}")
            }
        }
    }
}

pub fn generate(spec: &ScenarioSpec) -> Result<AnyCurve, GenerateError> {
    let positive = |name: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(GenerateError::InvalidParameters(format!(
                "{name} must be positive, got {v}"
            )))
        }
    };
    let curve = match *spec {
        ScenarioSpec::Ellipse { a, b } => {
            positive("a", a)?;
            positive("b", b)?;
            AnyCurve::Fourier(make_ellipse(a, b))
        }
        ScenarioSpec::Perturbed {
            a,
            b,
            amplitude,
            harmonics,
            seed,
        } => {
            positive("a", a)?;
            positive("b", b)?;
            if amplitude.is_nan() || amplitude < 0.0 {
                return Err(GenerateError::InvalidParameters(
                    "amplitude must be non-negative".into(),
                ));
            }
            let c = perturb_fourier(&make_ellipse(a, b), amplitude, harmonics, seed)
                .map_err(|e| GenerateError::Rejected(e.to_string()))?;
            AnyCurve::Fourier(c)
        }
        ScenarioSpec::Peanut { neck } => {
            if !(neck > 0.0 && neck < 1.0) {
                return Err(GenerateError::InvalidParameters(format!(
                    "neck must lie in (0, 1), got {neck}"
                )));
            }
            AnyCurve::Fourier(make_peanut(neck))
        }
        ScenarioSpec::NoisyPolyline {
            a,
            b,
            vertices,
            amplitude,
            seed,
        } => {
            positive("a", a)?;
            positive("b", b)?;
            AnyCurve::Polyline(noisy_polyline(&make_ellipse(a, b), vertices, amplitude, seed)?)
        }
        ScenarioSpec::AnnulusStar {
            inner,
            outer,
            points,
            vertices,
        } => {
            positive("inner", inner)?;
            if outer.is_nan() || outer < inner {
                return Err(GenerateError::InvalidParameters(
                    "outer radius below inner radius".into(),
                ));
            }
            AnyCurve::Polyline(annulus_star(inner, outer, points, vertices)?)
        }
    };
    let simple = match &curve {
        AnyCurve::Fourier(c) => is_simple(c, 2048),
        AnyCurve::Polyline(p) => p.is_simple(),
    };
    if simple {
        Ok(curve)
    } else {
        Err(GenerateError::NotSimple)
    }
}

/// Integral of [`smooth_ramp`](crate::continuation::smooth_ramp) from 0 to `x`.
fn ramp_integral(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        x - 0.5
    } else {
        x.powi(4) * (x * (x - 3.0) + 2.5)
    }
}

/// Arc-length model of a curve before fitting: base curvature plus jumps,
/// each jump replaced by a smooth ramp of width `2ε`.
struct TurningProfile {
    /// `(arc length, curvature change)`, away from both ends.
    jumps: Vec<(f64, f64)>,
    base_kappa: f64,
    heading: f64,
    eps: f64,
    total: f64,
    start: Vec2,
}

impl TurningProfile {
    /// Tangent angle at arc length `sigma`.
    fn turning(&self, sigma: f64) -> f64 {
        let e = self.eps;
        self.heading
            + self.base_kappa * sigma
            + self
                .jumps
                .iter()
                .map(|&(at, d)| d * 2.0 * e * ramp_integral((sigma - at + e) / (2.0 * e)))
                .sum::<f64>()
    }

    fn advance(&self, p: Vec2, a: f64, b: f64) -> Vec2 {
        p + vec2(
            gk15(&|s| self.turning(s).cos(), a, b).0,
            gk15(&|s| self.turning(s).sin(), a, b).0,
        )
    }

    fn position(&self, sigma: f64) -> Vec2 {
        let pieces = 64;
        let h = sigma / pieces as f64;
        (0..pieces).fold(self.start, |p, k| self.advance(p, k as f64 * h, (k + 1) as f64 * h))
    }

    fn points(&self, n: usize) -> Vec<Vec2> {
        let h = self.total / n as f64;
        let mut points: Vec<Vec2> = Vec::with_capacity(n);
        let mut p = self.start;
        for k in 0..n {
            points.push(p);
            p = self.advance(p, k as f64 * h, (k + 1) as f64 * h);
        }
        // closure error is quadrature noise; spread it evenly
        let gap = p - self.start;
        for (k, q) in points.iter_mut().enumerate() {
            *q -= gap * (k as f64 / n as f64);
        }
        points
    }

    /// Fit of degree `degree`, recentred on the centroid of the samples.
    fn fit(&self, degree: usize) -> FourierCurve {
        let mut points = self.points(16 * degree);
        let centroid = points.iter().sum::<Vec2>() / points.len() as f64;
        points.iter_mut().for_each(|p| *p -= centroid);
        fit_fourier(&points, degree)
    }
}

/// Lobes are unit circles centred at `(±c, 0)`; the neck sides are concave
/// unit circles centred at `(0, ±(1 + gap/2))`, tangent to both. Returns the
/// profile and the arc length of the top of the neck.
fn peanut_profile(gap: f64) -> (TurningProfile, f64) {
    let b = 1.0 + gap / 2.0;
    let c = (4.0 - b * b).sqrt();
    let psi = b.atan2(c);
    let lobe = PI - psi;
    let bridge = PI - 2.0 * psi;
    // curvature switches between +1 and -1, starting from the rightmost
    // point heading up
    let profile = TurningProfile {
        jumps: vec![
            (lobe, -2.0),
            (lobe + bridge, 2.0),
            (3.0 * lobe + bridge, -2.0),
            (3.0 * lobe + 2.0 * bridge, 2.0),
        ],
        base_kappa: 1.0,
        heading: FRAC_PI_2,
        eps: 0.2 * bridge.min(lobe),
        total: 4.0 * lobe + 2.0 * bridge,
        start: vec2(c + 1.0, 0.0),
    };
    (profile, lobe + bridge / 2.0)
}

fn peanut_neck_width(gap: f64) -> f64 {
    let (profile, neck_top) = peanut_profile(gap);
    2.0 * profile.position(neck_top).y
}

/// Harmonics per coordinate in the peanut fit.
const PEANUT_DEGREE: usize = 64;

/// Two unit-circle lobes joined by a neck whose sides are concave
/// unit-circle arcs, with the curvature jumps between arcs smoothed and the
/// result fitted by a trigonometric series. The neck is `neck` wide at its
/// narrowest point.
///
/// Smoothing averages the curvature, so `|κ|` stays near 1 everywhere while
/// the neck carries a square of sidelength close to `neck`. Negative `neck`
/// overlaps the two sides and gives a self-intersecting curve.
pub fn make_peanut(neck: f64) -> FourierCurve {
    assert!(neck > -0.8 && neck < 1.5, "neck out of range");
    // smoothing widens the neck by a nearly constant amount; solve for the
    // unsmoothed gap by secant steps
    let mut gap = neck;
    let mut width = peanut_neck_width(gap);
    let mut prev = (gap - 0.01, peanut_neck_width(gap - 0.01));
    for _ in 0..20 {
        if (width - neck).abs() < 1e-13 {
            break;
        }
        let slope = (width - prev.1) / (gap - prev.0);
        prev = (gap, width);
        gap -= (width - neck) / slope;
        width = peanut_neck_width(gap);
    }
    peanut_profile(gap).0.fit(PEANUT_DEGREE)
}

/// A unit circle with a thin finger on top, and a Newton seed for the small
/// square that sits between the finger's walls.
#[derive(Clone, Debug)]
pub struct FingeredCircle {
    pub curve: FourierCurve,
    pub square_seed: [f64; 4],
}

/// Harmonics per coordinate in the finger fit.
const FINGER_DEGREE: usize = 256;

/// Unit circle with a finger of the given `width` and straight wall length
/// `wall`, joined by concave fillets of radius `width / 2` and capped by a
/// half circle. The finger rises about `wall + 1.5 · width` above the circle.
pub fn make_fingered_circle(width: f64, wall: f64) -> FingeredCircle {
    assert!(width > 0.0 && width < 0.2 && wall >= width, "finger out of range");
    let rf = width / 2.0;
    // the fillet leaves the circle at angle th and ends on the wall x = width/2
    let th = ((width / 2.0 + rf) / (1.0 + rf)).acos();
    let circle = th + FRAC_PI_2;
    let fillet = rf * th;
    let tip = PI * width / 2.0;
    let wall_start = circle + fillet;
    let tip_start = wall_start + wall;
    let left_wall = tip_start + tip;
    let left_fillet = left_wall + wall;
    let total = 2.0 * circle + 2.0 * fillet + 2.0 * wall + tip;
    let profile = TurningProfile {
        jumps: vec![
            (circle, -1.0 - 1.0 / rf),
            (wall_start, 1.0 / rf),
            (tip_start, 2.0 / width),
            (left_wall, -2.0 / width),
            (left_fillet, -1.0 / rf),
            (left_fillet + fillet, 1.0 + 1.0 / rf),
        ],
        base_kappa: 1.0,
        heading: 0.0,
        eps: 0.2 * fillet.min(wall).min(tip),
        total,
        start: vec2(0.0, -1.0),
    };
    // a square of side `width` spanning the middle of the walls
    let lift = 0.5 * (wall - width);
    let to_param = |sigma: f64| TAU * sigma / total;
    let square_seed = [
        to_param(wall_start + lift),
        to_param(wall_start + lift + width),
        to_param(left_wall + wall - lift - width),
        to_param(left_wall + wall - lift),
    ];
    FingeredCircle {
        curve: profile.fit(FINGER_DEGREE),
        square_seed,
    }
}

/// Least-squares trigonometric fit of degree `degree` to points sampled
/// uniformly in parameter.
pub fn fit_fourier(points: &[Vec2], degree: usize) -> FourierCurve {
    let n = points.len();
    assert!(n > 2 * degree, "too few samples for the requested degree");
    let mean = points.iter().sum::<Vec2>() / n as f64;
    let mut harmonics = vec![Harmonic::new(mean, Vec2::zeros())];
    for m in 1..=degree {
        let (mut cos, mut sin) = (Vec2::zeros(), Vec2::zeros());
        for (j, p) in points.iter().enumerate() {
            let x = TAU * (m * j % n) as f64 / n as f64;
            cos += p * x.cos();
            sin += p * x.sin();
        }
        harmonics.push(Harmonic::new(cos * (2.0 / n as f64), sin * (2.0 / n as f64)));
    }
    FourierCurve::new(harmonics)
}

/// `n` vertices of `base` sampled uniformly in parameter, each moved along
/// its radial direction by seeded uniform noise in `[-amplitude, amplitude]`.
pub fn noisy_polyline(
    base: &FourierCurve,
    n: usize,
    amplitude: f64,
    seed: u64,
) -> Result<PolylineCurve, GenerateError> {
    if n < 3 || amplitude.is_nan() || amplitude < 0.0 {
        return Err(GenerateError::InvalidParameters(format!(
            "n = {n}, amplitude = {amplitude}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertices = base
        .sample(n)
        .into_iter()
        .map(|p| {
            let u: f64 = rng.gen_range(-1.0..=1.0);
            p + p.normalize() * (amplitude * u)
        })
        .collect();
    PolylineCurve::new(vertices).map_err(|e| GenerateError::Rejected(e.to_string()))
}

/// Star polygon `r(θ) = m + w cos(pθ)` with `m` the mid radius and `w` 90%
/// of the half-width of the annulus `inner ≤ r ≤ outer`.
pub fn annulus_star(inner: f64, outer: f64, points: usize, n: usize) -> Result<PolylineCurve, GenerateError> {
    if n < 3 {
        return Err(GenerateError::InvalidParameters(format!("n = {n}")));
    }
    let mid = 0.5 * (inner + outer);
    let swing = 0.45 * (outer - inner);
    let vertices = (0..n)
        .map(|k| {
            let th = TAU * k as f64 / n as f64;
            let r = mid + swing * (points as f64 * th).cos();
            vec2(r * th.cos(), r * th.sin())
        })
        .collect();
    PolylineCurve::new(vertices).map_err(|e| GenerateError::Rejected(e.to_string()))
}
