//! Homotopies between curves and continuation of inscribed squares through
//! them.
//!
//! A square followed through `H(·, t)` can only appear or disappear in four
//! ways: two squares meet and annihilate, one splits into two, a square
//! shrinks to a point, or one grows out of a point. Traces carry these as
//! their end labels, alongside the two boundary labels `reached_t0` and
//! `reached_t1`.

mod census;
mod homotopy;
mod track;

pub use census::{census, CensusConfig, CensusReport, CensusSlice, SizeCrossing, TrackFailure, ZeroEvent};
pub use homotopy::{smooth_ramp, Homotopy, HomotopyKind, HomotopySlice, TwoStepData};
pub use track::{track_square, StepControl};

use crate::squares::SquareCandidate;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomotopyError {
    #[error("homotopy is irregular after {retries} perturbation retries")]
    Irregular { retries: usize },
    #[error("reference tube radius {reach} does not cover displacement {required}")]
    TubeTooSmall { reach: f64, required: f64 },
    #[error("displacement {displacement} exceeds the budget η = {eta}")]
    DisplacementBudgetExceeded { displacement: f64, eta: f64 },
    #[error("correspondence has degree {degree}, expected 1")]
    DegreeNotOne { degree: i32 },
}

#[derive(Debug, Error, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrackError {
    #[error("path lost at t = {t} (step {step:e} below floor); last good parameters {params:?}")]
    PathLost { t: f64, params: [f64; 4], step: f64 },
    #[error("step limit {steps} reached")]
    StepLimit { steps: usize },
    #[error("path is not transversal near t = {t}")]
    NonTransversal { t: f64 },
    #[error("starting point is not a square (residual {residual:e})")]
    NotASquare { residual: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceEvent {
    ReachedT0,
    ReachedT1,
    FoldMerge,
    FoldSplit,
    ZeroSquareBirth,
    ZeroSquareDeath,
}

impl TraceEvent {
    pub fn is_start_label(self) -> bool {
        matches!(self, Self::ReachedT0 | Self::FoldSplit | Self::ZeroSquareBirth)
    }

    pub fn is_end_label(self) -> bool {
        matches!(self, Self::ReachedT1 | Self::FoldMerge | Self::ZeroSquareDeath)
    }

    pub fn is_fold(self) -> bool {
        matches!(self, Self::FoldMerge | Self::FoldSplit)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceSample {
    pub t: f64,
    pub square: SquareCandidate,
    pub size_wrt_p: f64,
}

/// A piece of a square's path on which `t` increases strictly.
#[derive(Clone, Debug, Serialize)]
pub struct ContinuationTrace {
    pub samples: Vec<TraceSample>,
    pub start_event: TraceEvent,
    pub end_event: TraceEvent,
    /// Index of the trace meeting this one at a fold.
    pub partner: Option<usize>,
}

impl ContinuationTrace {
    pub fn first(&self) -> &TraceSample {
        &self.samples[0]
    }

    pub fn last(&self) -> &TraceSample {
        &self.samples[self.samples.len() - 1]
    }
}

/// A whole path split into monotone traces, in path order.
#[derive(Clone, Debug, Serialize)]
pub struct TrackedPath {
    pub traces: Vec<ContinuationTrace>,
    /// Trace containing the starting square.
    pub origin: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli_io::make_peanut;
    use crate::curves::{make_ellipse, perturb_fourier};
    use crate::squares::{find_all_squares, SearchConfig};

    #[test]
    fn constant_homotopy_keeps_the_ellipse_square() {
        let e = make_ellipse(2.0, 1.0);
        let h = Homotopy::linear(&e, &e, 0).unwrap();
        let sq = find_all_squares(&e, &SearchConfig::default()).squares[0].clone();
        let path = track_square(&h, &sq, 0.0, &StepControl::default()).unwrap();
        assert_eq!(path.traces.len(), 1);
        let tr = &path.traces[0];
        assert_eq!(tr.start_event, TraceEvent::ReachedT0);
        assert_eq!(tr.end_event, TraceEvent::ReachedT1);
        assert_eq!(tr.last().t, 1.0);
        let s0 = tr.first().size_wrt_p;
        assert!(tr.samples.iter().all(|x| (x.size_wrt_p - s0).abs() < 1e-9));
        assert!(tr.samples.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn ellipse_to_perturbed_curve_lands_on_a_final_square() {
        let start = make_ellipse(1.5, 1.0);
        let end = perturb_fourier(&start, 0.02, 6, 7).unwrap();
        let h = Homotopy::linear(&start, &end, 0).unwrap();
        let sq = find_all_squares(&start, &SearchConfig::default()).squares[0].clone();
        let path = track_square(&h, &sq, 0.0, &StepControl::default()).unwrap();
        let last = path.traces.last().unwrap();
        assert_eq!(last.end_event, TraceEvent::ReachedT1);
        let finals = find_all_squares(&end, &SearchConfig::default()).squares;
        assert!(finals.iter().any(|f| f.vertex_distance(&last.last().square) < 1e-5));
    }

    #[test]
    fn closing_a_neck_kills_its_square_at_zero_size() {
        // the neck closes at t = 1/2 and the two sides overlap afterwards
        let start = make_peanut(0.1);
        let h = Homotopy::linear(&start, &make_peanut(-0.1), 0).unwrap();
        let found = find_all_squares(&start, &SearchConfig::default()).squares;
        let neck = found.iter().find(|s| s.sidelength < 0.2).unwrap();
        let path = track_square(&h, neck, 0.0, &StepControl::default()).unwrap();
        assert_eq!(path.traces.len(), 1);
        let tr = &path.traces[0];
        assert_eq!(tr.end_event, TraceEvent::ZeroSquareDeath);
        assert!((tr.last().t - 0.5).abs() < 0.01, "{}", tr.last().t);
        assert!(tr.last().square.sidelength <= 1e-4 * h.length_scale);
        let sides: Vec<f64> = tr.samples.iter().map(|s| s.square.sidelength).collect();
        assert!(sides.windows(2).all(|w| w[1] < w[0]));
    }
}
