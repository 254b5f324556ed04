//! Pseudo-arclength continuation of squares in `(s₁, s₂, s₃, s₄, t)`.
//!
//! A path of solutions of `F(H(·, t), s) = 0` is followed with a tangent
//! predictor and a Newton corrector constrained to the hyperplane normal to
//! the tangent. The path is cut where its `t`-direction reverses (folds) and
//! where the square degenerates, and each piece is reported oriented by
//! increasing `t`.

use super::homotopy::Homotopy;
use super::{ContinuationTrace, TraceEvent, TraceSample, TrackError, TrackedPath};
use crate::curves::PlaneCurve;
use crate::geom::{cross, wrap_angle};
use crate::squares::{residual_from_points, residual_jacobian, SquareCandidate};
use nalgebra::{SMatrix, SVector};

type Vec5 = SVector<f64, 5>;
type Mat45 = SMatrix<f64, 4, 5>;
type Mat5 = SMatrix<f64, 5, 5>;

/// Step-size control for [`track_square`].
#[derive(Clone, Debug, PartialEq)]
pub struct StepControl {
    pub initial: f64,
    pub max: f64,
    /// Below this step the path is declared lost.
    pub min: f64,
    pub max_steps: usize,
    /// Zero-square threshold as a fraction of the curve length.
    pub zero_fraction: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            initial: 0.01,
            max: 0.05,
            min: 1e-7,
            max_steps: 20_000,
            zero_fraction: 1e-4,
        }
    }
}

/// Where a path piece stops.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Stop {
    TimeZero,
    TimeOne,
    /// `t` has a local maximum along the path.
    FoldMax,
    /// `t` has a local minimum along the path.
    FoldMin,
    Zero,
}

impl Stop {
    fn low_end(self) -> TraceEvent {
        match self {
            Stop::TimeZero => TraceEvent::ReachedT0,
            Stop::FoldMin => TraceEvent::FoldSplit,
            Stop::Zero => TraceEvent::ZeroSquareBirth,
            // cannot occur at the low-t end of a piece
            Stop::TimeOne => TraceEvent::ReachedT1,
            Stop::FoldMax => TraceEvent::FoldMerge,
        }
    }

    fn high_end(self) -> TraceEvent {
        match self {
            Stop::TimeOne => TraceEvent::ReachedT1,
            Stop::FoldMax => TraceEvent::FoldMerge,
            Stop::Zero => TraceEvent::ZeroSquareDeath,
            Stop::TimeZero => TraceEvent::ReachedT0,
            Stop::FoldMin => TraceEvent::FoldSplit,
        }
    }
}

struct Tracker<'a> {
    h: &'a Homotopy,
    control: StepControl,
    tol: f64,
    zero_side: f64,
    lipschitz: f64,
}

/// A raw piece in path order, with its travel direction in `t`.
struct Piece {
    points: Vec<Vec5>,
    direction: f64,
    first: Stop,
    last: Stop,
}

impl<'a> Tracker<'a> {
    fn params(x: &Vec5) -> [f64; 4] {
        [x[0], x[1], x[2], x[3]]
    }

    fn residual(&self, x: &Vec5) -> SVector<f64, 4> {
        let slice = self.h.slice(x[4]);
        let p = Self::params(x).map(|s| slice.point(s));
        residual_from_points(&p)
    }

    fn jacobian(&self, x: &Vec5) -> (SVector<f64, 4>, Mat45) {
        let t = x[4];
        let slice = self.h.slice(t);
        let s = Self::params(x);
        let p = s.map(|v| slice.point(v));
        let dp = s.map(|v| slice.derivative(v));
        let dt = s.map(|v| self.h.time_derivative(v, t));
        let js = residual_jacobian(&p, &dp);
        let jt = residual_jacobian(&p, &dt);
        let mut j = Mat45::zeros();
        j.fixed_view_mut::<4, 4>(0, 0).copy_from(&js);
        for r in 0..4 {
            j[(r, 4)] = (0..4).map(|c| jt[(r, c)]).sum();
        }
        (residual_from_points(&p), j)
    }

    /// Unit null vector of the 4×5 Jacobian, oriented along `reference`.
    fn tangent(&self, x: &Vec5, reference: &Vec5) -> Option<(Vec5, f64)> {
        let (_, j) = self.jacobian(x);
        let mut sq = Mat5::zeros();
        sq.fixed_view_mut::<4, 5>(0, 0).copy_from(&j);
        let svd = sq.svd(false, true);
        let vt = svd.v_t?;
        let k = (0..5).min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))?;
        let mut t: Vec5 = vt.row(k).transpose();
        t /= t.norm();
        if t.dot(reference) < 0.0 {
            t = -t;
        }
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(f64::total_cmp);
        // sv[0] is the null direction; sv[1] measures transversality
        let gap = sv[1] / sv[4].max(1e-300);
        Some((t, gap))
    }

    /// Newton on `F = 0` plus one linear constraint `c·x = c·anchor`.
    fn correct(&self, start: Vec5, c: &Vec5, anchor: &Vec5) -> Option<Vec5> {
        let mut x = start;
        let target = c.dot(anchor);
        for _ in 0..12 {
            let (f, j) = self.jacobian(&x);
            let mut a = Mat5::zeros();
            a.fixed_view_mut::<4, 5>(0, 0).copy_from(&j);
            a.set_row(4, &c.transpose());
            let mut rhs = Vec5::zeros();
            rhs.fixed_rows_mut::<4>(0).copy_from(&(-f));
            rhs[4] = target - c.dot(&x);
            let dx = a.lu().solve(&rhs)?;
            x += dx;
            if !x.iter().all(|v| v.is_finite()) {
                return None;
            }
            if dx.norm() < 1e-13 * (1.0 + x.norm()) || self.residual(&x).norm() <= 0.1 * self.tol {
                break;
            }
        }
        (self.residual(&x).norm() <= self.tol).then_some(x)
    }

    fn candidate(&self, x: &Vec5) -> SquareCandidate {
        let slice = self.h.slice(x[4]);
        let r = self.residual(x).norm();
        let params = Self::params(x).map(wrap_angle);
        SquareCandidate::from_parts(params, params.map(|s| slice.point(s)), r)
    }

    fn sidelength(&self, x: &Vec5) -> f64 {
        let slice = self.h.slice(x[4]);
        (slice.point(x[1]) - slice.point(x[0])).norm()
    }

    /// Rate of change of the first side along the path direction `dir`.
    fn side_slope(&self, x: &Vec5, dir: &Vec5) -> f64 {
        let t = x[4];
        let slice = self.h.slice(t);
        let velocity = |k: usize| slice.derivative(x[k]) * dir[k] + self.h.time_derivative(x[k], t) * dir[4];
        let side = slice.point(x[1]) - slice.point(x[0]);
        side.dot(&(velocity(1) - velocity(0))) / side.norm().max(1e-300)
    }

    /// Whether the sidelength may dip below the zero threshold between `x`
    /// and `y`: the tangent lines at both ends, which bound a convex dip
    /// from below, meet under the threshold.
    fn may_hide_zero(&self, x: &Vec5, tx: &Vec5, y: &Vec5, ty: &Vec5) -> bool {
        let (sx, sy) = (self.side_slope(x, tx), self.side_slope(y, ty));
        if !(sx < 0.0 && sy > 0.0) {
            return false;
        }
        let (a, b) = (self.sidelength(x), self.sidelength(y));
        let span = (y - x).norm();
        let u = ((b - sy * span - a) / (sx - sy)).clamp(0.0, span);
        a + sx * u <= self.zero_side
    }

    /// Signed area of the quadrilateral in path labeling. It changes sign
    /// only where the square passes through a point.
    fn signed_area(&self, x: &Vec5) -> f64 {
        let slice = self.h.slice(x[4]);
        let p = Self::params(x).map(|s| slice.point(s));
        0.5 * (0..4).map(|i| cross(&p[i], &p[(i + 1) % 4])).sum::<f64>()
    }

    fn size(&self, x: &Vec5) -> f64 {
        let c = self.candidate(x);
        self.h.size_wrt_p(x[4], &c.params).unwrap_or(f64::NAN)
    }

    /// Follow the path from `x0` with initial travel direction `dir` in `t`
    /// until it stops. Returns the pieces in path order.
    fn run(&self, x0: Vec5, dir: f64, first: Stop) -> Result<Vec<Piece>, TrackError> {
        let mut reference = Vec5::zeros();
        reference[4] = dir;
        let (mut tan, _) = self.tangent(&x0, &reference).ok_or(TrackError::PathLost {
            t: x0[4],
            params: Self::params(&x0),
            step: 0.0,
        })?;
        if tan[4] * dir < 0.0 {
            tan = -tan;
        }
        let mut pieces = Vec::new();
        let mut current = Piece {
            points: vec![x0],
            direction: dir,
            first,
            last: first,
        };
        let mut x = x0;
        let mut size = self.size(&x);
        let mut area = self.signed_area(&x);
        let mut step = self.control.initial;
        let mut degenerate_run = 0;
        for _ in 0..self.control.max_steps {
            let going = current.direction;
            // land exactly on the boundary when the step would cross it
            let bound = if going > 0.0 { 1.0 } else { 0.0 };
            let crossing = (x[4] + step * tan[4] - bound) * going >= 0.0 && tan[4] * going > 0.0;
            let (h, constraint, anchor) = if crossing {
                let h = (bound - x[4]) / tan[4];
                let mut c = Vec5::zeros();
                c[4] = 1.0;
                let mut a = x + tan * h;
                a[4] = bound;
                (h, c, a)
            } else {
                (step, tan, x + tan * step)
            };
            let accepted = self.correct(anchor, &constraint, &anchor).and_then(|y| {
                let (t_new, gap) = self.tangent(&y, &tan)?;
                let turn = t_new.dot(&tan);
                let moved = (y - x).norm();
                let ds = (0..4).map(|k| (y[k] - x[k]).abs()).fold(0.0, f64::max);
                let new_size = self.size(&y);
                let budget = self.lipschitz * (ds + (y[4] - x[4]).abs()) + 1e-6;
                // sizes are undefined when the labeling leaves cyclic order
                let continuous = new_size.is_nan() || size.is_nan() || (new_size - size).abs() <= budget;
                // a step may not pass through a zero square; shorter steps
                // approach it until the zero threshold stops the path
                let same_side = self.signed_area(&y) * area > 0.0 && !self.may_hide_zero(&x, &tan, &y, &t_new);
                (turn > 0.9 && moved <= 2.0 * h.abs().max(1e-12) && continuous && same_side)
                    .then_some((y, t_new, new_size, gap))
            });
            let Some((y, t_new, new_size, gap)) = accepted else {
                step *= 0.5;
                if step < self.control.min {
                    return Err(TrackError::PathLost {
                        t: x[4],
                        params: Self::params(&x),
                        step,
                    });
                }
                continue;
            };
            degenerate_run = if gap < 1e-9 { degenerate_run + 1 } else { 0 };
            if degenerate_run >= 3 {
                return Err(TrackError::NonTransversal { t: y[4] });
            }
            let fold = t_new[4] * going < 0.0;
            x = y;
            tan = t_new;
            size = new_size;
            area = self.signed_area(&x);
            current.points.push(x);
            if crossing {
                current.last = if going > 0.0 { Stop::TimeOne } else { Stop::TimeZero };
                pieces.push(current);
                return Ok(pieces);
            }
            if self.sidelength(&x) <= self.zero_side {
                current.last = Stop::Zero;
                pieces.push(current);
                return Ok(pieces);
            }
            if fold {
                let stop = if going > 0.0 { Stop::FoldMax } else { Stop::FoldMin };
                current.last = stop;
                pieces.push(current);
                current = Piece {
                    points: vec![x],
                    direction: -going,
                    first: stop,
                    last: stop,
                };
            }
            step = (step * 1.5).min(self.control.max);
        }
        Err(TrackError::StepLimit {
            steps: self.control.max_steps,
        })
    }

    fn to_trace(&self, piece: &Piece) -> ContinuationTrace {
        let mut pts = piece.points.clone();
        let (start_event, end_event) = if piece.direction > 0.0 {
            (piece.first.low_end(), piece.last.high_end())
        } else {
            pts.reverse();
            (piece.last.low_end(), piece.first.high_end())
        };
        let samples = pts
            .iter()
            .map(|x| {
                let square = self.candidate(x);
                let size_wrt_p = self.h.size_wrt_p(x[4], &square.params).unwrap_or(f64::NAN);
                TraceSample {
                    t: x[4],
                    square,
                    size_wrt_p,
                }
            })
            .collect();
        ContinuationTrace {
            samples,
            start_event,
            end_event,
            partner: None,
        }
    }
}

/// Follow `square0`, a solution on `H(·, t0)`, through the homotopy.
///
/// From `t0 = 0` the path is followed forward, from `t0 = 1` backward, and
/// from an interior time in both directions. The result lists the path's
/// monotone pieces; fold partners point at the adjacent piece.
pub fn track_square(
    h: &Homotopy,
    square0: &SquareCandidate,
    t0: f64,
    control: &StepControl,
) -> Result<TrackedPath, TrackError> {
    let tracker = Tracker {
        h,
        control: control.clone(),
        tol: 1e-10 * h.length_scale,
        zero_side: control.zero_fraction * h.length_scale,
        lipschitz: h.size_lipschitz(),
    };
    let mut x0 = Vec5::zeros();
    for k in 0..4 {
        x0[k] = square0.params[k];
    }
    x0[4] = t0;
    let residual = tracker.residual(&x0).norm();
    if residual > tracker.tol {
        // polish at fixed t before giving up
        let mut c = Vec5::zeros();
        c[4] = 1.0;
        x0 = tracker
            .correct(x0, &c, &x0)
            .ok_or(TrackError::NotASquare { residual })?;
    }
    let at_start = if t0 <= 0.0 {
        Some(Stop::TimeZero)
    } else if t0 >= 1.0 {
        Some(Stop::TimeOne)
    } else {
        None
    };
    let mut pieces: Vec<Piece> = Vec::new();
    let mut origin = 0;
    match at_start {
        Some(Stop::TimeZero) => pieces = tracker.run(x0, 1.0, Stop::TimeZero)?,
        Some(_) => pieces = tracker.run(x0, -1.0, Stop::TimeOne)?,
        None => {
            // interior start: backward first, then forward; stitch
            let back = tracker.run(x0, -1.0, Stop::Zero)?;
            let fwd = tracker.run(x0, 1.0, Stop::Zero)?;
            for p in back.into_iter().rev() {
                pieces.push(Piece {
                    points: p.points.into_iter().rev().collect(),
                    direction: -p.direction,
                    first: p.last,
                    last: p.first,
                });
            }
            let mut fwd = fwd.into_iter();
            if let (Some(last), Some(first_fwd)) = (pieces.last_mut(), fwd.next()) {
                // the two halves share x0 and both move forward in t there
                last.points.extend(first_fwd.points.into_iter().skip(1));
                last.last = first_fwd.last;
            }
            origin = pieces.len() - 1;
            pieces.extend(fwd);
        }
    }
    let mut traces: Vec<ContinuationTrace> = pieces.iter().map(|p| tracker.to_trace(p)).collect();
    for k in 0..traces.len().saturating_sub(1) {
        let shared = pieces[k].last;
        if matches!(shared, Stop::FoldMax | Stop::FoldMin) {
            traces[k].partner = Some(k + 1);
            traces[k + 1].partner = Some(k);
        }
    }
    Ok(TrackedPath { traces, origin })
}
