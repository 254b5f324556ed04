use super::{is_simple, CurveAnalysis, CurveError, PlaneCurve, DEFAULT_SIMPLICITY_SAMPLES};
use crate::geom::{rotate, vec2, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One term `cos·cos(ks) + sin·sin(ks)` of a planar trigonometric series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Harmonic {
    pub cos: Vec2,
    pub sin: Vec2,
}

impl Harmonic {
    pub fn new(cos: Vec2, sin: Vec2) -> Self {
        Self { cos, sin }
    }

    pub fn zero() -> Self {
        Self::new(Vec2::zeros(), Vec2::zeros())
    }

    /// `[cos.x, cos.y, sin.x, sin.y]`, the on-disk layout.
    pub fn to_array(&self) -> [f64; 4] {
        [self.cos.x, self.cos.y, self.sin.x, self.sin.y]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(vec2(a[0], a[1]), vec2(a[2], a[3]))
    }
}

/// Smooth closed curve `s ↦ a₀ + Σₖ aₖ cos(ks) + bₖ sin(ks)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCurve {
    harmonics: Vec<Harmonic>,
}

impl FourierCurve {
    /// `harmonics[k]` holds the k-th term; the sine part of the constant term
    /// is ignored.
    pub fn new(mut harmonics: Vec<Harmonic>) -> Self {
        if harmonics.is_empty() {
            harmonics.push(Harmonic::zero());
        }
        harmonics[0].sin = Vec2::zeros();
        Self { harmonics }
    }

    pub fn from_coeffs(coeffs: &[[f64; 4]]) -> Self {
        Self::new(coeffs.iter().copied().map(Harmonic::from_array).collect())
    }

    pub fn coeffs(&self) -> Vec<[f64; 4]> {
        self.harmonics.iter().map(Harmonic::to_array).collect()
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    /// Highest harmonic index K.
    pub fn degree(&self) -> usize {
        self.harmonics.len() - 1
    }

    /// Point and first two parameter derivatives in one pass.
    pub fn eval_all(&self, s: f64) -> (Vec2, Vec2, Vec2) {
        let (s1, c1) = s.sin_cos();
        let (mut sk, mut ck) = (0.0_f64, 1.0_f64);
        let mut p = self.harmonics[0].cos;
        let mut d1 = Vec2::zeros();
        let mut d2 = Vec2::zeros();
        for (k, h) in self.harmonics.iter().enumerate().skip(1) {
            // advance cos(ks), sin(ks) by angle addition
            let (nc, ns) = (ck * c1 - sk * s1, sk * c1 + ck * s1);
            ck = nc;
            sk = ns;
            if k % 16 == 0 {
                let (es, ec) = (k as f64 * s).sin_cos();
                sk = es;
                ck = ec;
            }
            let kf = k as f64;
            let term = h.cos * ck + h.sin * sk;
            p += term;
            d1 += (h.sin * ck - h.cos * sk) * kf;
            d2 -= term * (kf * kf);
        }
        (p, d1, d2)
    }

    pub fn eval(&self, s: f64) -> Vec2 {
        self.eval_all(s).0
    }

    pub fn translated(&self, v: Vec2) -> Self {
        let mut h = self.harmonics.clone();
        h[0].cos += v;
        Self::new(h)
    }

    /// Rotation about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        Self::new(
            self.harmonics
                .iter()
                .map(|h| Harmonic::new(rotate(&h.cos, angle), rotate(&h.sin, angle)))
                .collect(),
        )
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(
            self.harmonics
                .iter()
                .map(|h| Harmonic::new(h.cos * factor, h.sin * factor))
                .collect(),
        )
    }

    /// Same image traversed backwards, `s ↦ γ(-s)`.
    pub fn reversed(&self) -> Self {
        Self::new(self.harmonics.iter().map(|h| Harmonic::new(h.cos, -h.sin)).collect())
    }

    /// Same image with the parameter shifted, `s ↦ γ(s + phase)`.
    pub fn reparametrized(&self, phase: f64) -> Self {
        Self::new(
            self.harmonics
                .iter()
                .enumerate()
                .map(|(k, h)| {
                    let (sn, cs) = (k as f64 * phase).sin_cos();
                    Harmonic::new(h.cos * cs + h.sin * sn, h.sin * cs - h.cos * sn)
                })
                .collect(),
        )
    }

    /// Coefficientwise `(1-t)·self + t·other`, padding the shorter series.
    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        let n = self.harmonics.len().max(other.harmonics.len());
        let get = |c: &Self, k: usize| c.harmonics.get(k).copied().unwrap_or_else(Harmonic::zero);
        Self::new(
            (0..n)
                .map(|k| {
                    let (a, b) = (get(self, k), get(other, k));
                    Harmonic::new(a.cos * (1.0 - t) + b.cos * t, a.sin * (1.0 - t) + b.sin * t)
                })
                .collect(),
        )
    }

    /// Add `extra` coefficientwise.
    pub fn plus(&self, extra: &Self) -> Self {
        let n = self.harmonics.len().max(extra.harmonics.len());
        let get = |c: &Self, k: usize| c.harmonics.get(k).copied().unwrap_or_else(Harmonic::zero);
        Self::new(
            (0..n)
                .map(|k| {
                    let (a, b) = (get(self, k), get(extra, k));
                    Harmonic::new(a.cos + b.cos, a.sin + b.sin)
                })
                .collect(),
        )
    }

    /// Minimum parameter speed on an `n`-point grid.
    pub fn min_speed(&self, n: usize) -> f64 {
        (0..n)
            .map(|k| self.speed(std::f64::consts::TAU * k as f64 / n as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// Regularity on the sample grid: `|γ'| ≥ 1e-8 · L/2π`.
    pub fn check_regular(&self, n: usize) -> Result<(), CurveError> {
        let length = CurveAnalysis::new(self, n.max(64)).total_length;
        let floor = 1e-8 * length / std::f64::consts::TAU;
        for k in 0..n {
            let s = std::f64::consts::TAU * k as f64 / n as f64;
            let speed = self.speed(s);
            if speed < floor || !speed.is_finite() {
                return Err(CurveError::DegenerateSpeed { s, speed });
            }
        }
        Ok(())
    }
}

impl PlaneCurve for FourierCurve {
    fn point(&self, s: f64) -> Vec2 {
        self.eval_all(s).0
    }
    fn derivative(&self, s: f64) -> Vec2 {
        self.eval_all(s).1
    }
    fn second_derivative(&self, s: f64) -> Vec2 {
        self.eval_all(s).2
    }
}

/// Axis-aligned ellipse `(a cos s, b sin s)` centred at the origin.
pub fn make_ellipse(a: f64, b: f64) -> FourierCurve {
    assert!(a > 0.0 && b > 0.0, "ellipse semi-axes must be positive");
    FourierCurve::new(vec![Harmonic::zero(), Harmonic::new(vec2(a, 0.0), vec2(0.0, b))])
}

pub fn make_circle(r: f64) -> FourierCurve {
    make_ellipse(r, r)
}

/// Add seeded uniform noise in `[-amplitude, amplitude]` to every coefficient
/// of harmonics `2..=max_harmonic`.
///
/// The result must be regular; if the input passes the simplicity test the
/// result must as well.
pub fn perturb_fourier(
    curve: &FourierCurve,
    amplitude: f64,
    max_harmonic: usize,
    seed: u64,
) -> Result<FourierCurve, CurveError> {
    assert!(amplitude >= 0.0, "amplitude must be non-negative");
    if amplitude == 0.0 || max_harmonic < 2 {
        return Ok(curve.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = curve.harmonics.clone();
    if h.len() <= max_harmonic {
        h.resize(max_harmonic + 1, Harmonic::zero());
    }
    for term in h.iter_mut().take(max_harmonic + 1).skip(2) {
        let d: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-amplitude..=amplitude));
        term.cos += vec2(d[0], d[1]);
        term.sin += vec2(d[2], d[3]);
    }
    let out = FourierCurve::new(h);
    out.check_regular(1024)
        .map_err(|e| CurveError::PerturbationRejected(e.to_string()))?;
    if is_simple(curve, DEFAULT_SIMPLICITY_SAMPLES) && !is_simple(&out, DEFAULT_SIMPLICITY_SAMPLES) {
        return Err(CurveError::PerturbationRejected("self-intersection introduced".into()));
    }
    Ok(out)
}
