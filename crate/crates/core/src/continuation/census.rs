//! Square counts along a homotopy and the sizes of tracked squares relative
//! to the critical size `π/(4κ)`.

use super::homotopy::{Homotopy, HomotopyKind};
use super::track::{track_square, StepControl};
use super::{ContinuationTrace, TraceEvent, TrackError, TrackedPath};
use crate::curves::CurveAnalysis;
use crate::size_metric::square_size_identity;
use crate::squares::{find_all_squares, SearchConfig, SearchWarning, SquareCandidate};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, SQRT_2};

#[derive(Clone, Debug)]
pub struct CensusConfig {
    pub search: SearchConfig,
    pub control: StepControl,
    /// Half-width of the critical band in units of `1/κ`.
    pub band_fraction: f64,
    /// Vertex distance for matching trace endpoints with found squares;
    /// default `1e-6 · L`.
    pub endpoint_tol: Option<f64>,
    /// Seed for perturbing non-generic linear homotopies.
    pub seed: u64,
    pub max_perturbations: usize,
}

impl Default for CensusConfig {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            control: StepControl::default(),
            band_fraction: 1e-3,
            endpoint_tol: None,
            seed: 0,
            max_perturbations: 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusSlice {
    pub t: f64,
    pub count: usize,
    pub odd: bool,
    pub sizes_wrt_p: Vec<f64>,
    pub squares: Vec<SquareCandidate>,
    pub warnings: Vec<SearchWarning>,
}

/// A pair of successive samples on opposite sides of the critical size.
#[derive(Clone, Debug, Serialize)]
pub struct SizeCrossing {
    pub trace: usize,
    pub t_before: f64,
    pub t_after: f64,
    pub size_before: f64,
    pub size_after: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroEvent {
    pub trace: usize,
    pub event: TraceEvent,
    pub t: f64,
    pub sidelength: f64,
    pub identity_size: f64,
    pub size_wrt_p: f64,
    /// `√2/(5κ) + √2·threshold`: a bound on the size with respect to `P`
    /// whenever the event curve is a Jordan curve and `P` moves points by
    /// less than `1/(10κ)`.
    pub size_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrackFailure {
    pub start_t: f64,
    pub params: [f64; 4],
    pub error: TrackError,
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusReport {
    pub kind: HomotopyKind,
    pub kappa: f64,
    pub critical_size: f64,
    pub band_half_width: f64,
    pub slices: Vec<CensusSlice>,
    pub traces: Vec<ContinuationTrace>,
    /// Smallest `|size − π/(4κ)|` over all trace samples.
    pub closest_approach: f64,
    pub crossings: Vec<SizeCrossing>,
    pub band_entries: usize,
    pub zero_events: Vec<ZeroEvent>,
    /// Squares found at `t = 1` that no trace reaches.
    pub unreached_final_squares: usize,
    /// Trace endpoints at `t = 1` that match no found square.
    pub unmatched_trace_endpoints: usize,
    pub unpaired_folds: usize,
    pub failures: Vec<TrackFailure>,
    /// Seeded perturbations applied to restore transversality.
    pub perturbations: usize,
}

impl CensusReport {
    pub fn endpoints_consistent(&self) -> bool {
        self.unreached_final_squares == 0 && self.unmatched_trace_endpoints == 0
    }

    pub fn parity_at(&self, t: f64) -> Option<bool> {
        self.slices.iter().find(|s| s.t == t).map(|s| s.odd)
    }
}

fn census_slice(h: &Homotopy, t: f64, config: &SearchConfig) -> CensusSlice {
    let slice = h.slice(t);
    let found = find_all_squares(&slice, config);
    let sizes_wrt_p = found
        .squares
        .iter()
        .map(|sq| h.size_wrt_p(t, &sq.params).unwrap_or(f64::NAN))
        .collect();
    CensusSlice {
        t,
        count: found.squares.len(),
        odd: found.squares.len() % 2 == 1,
        sizes_wrt_p,
        squares: found.squares,
        warnings: found.warnings,
    }
}

fn endpoint_at(trace: &ContinuationTrace, t: f64) -> Option<&SquareCandidate> {
    if t == 0.0 && trace.start_event == TraceEvent::ReachedT0 {
        Some(&trace.first().square)
    } else if t == 1.0 && trace.end_event == TraceEvent::ReachedT1 {
        Some(&trace.last().square)
    } else {
        None
    }
}

fn reaches(paths: &[TrackedPath], t: f64, sq: &SquareCandidate, tol: f64) -> bool {
    paths
        .iter()
        .flat_map(|p| &p.traces)
        .filter_map(|tr| endpoint_at(tr, t))
        .any(|e| e.vertex_distance(sq) <= tol)
}

/// Count squares on `H(·, t)` for each of `times`, track every square found
/// at either end through the homotopy, and compare tracked sizes with the
/// critical size `π/(4κ)` of the reference curve.
///
/// Paths are tracked forward from the `t = 0` squares, then backward from
/// any `t = 1` square not yet reached. A non-transversal path on a linear
/// homotopy triggers a seeded perturbation and a fresh run.
pub fn census(h: &Homotopy, times: &[f64], config: &CensusConfig) -> CensusReport {
    let mut current = h.clone();
    let mut perturbations = 0;
    loop {
        let report = census_once(&current, times, config, perturbations);
        let non_transversal = report
            .failures
            .iter()
            .any(|f| matches!(f.error, TrackError::NonTransversal { .. }));
        if !non_transversal || current.kind != HomotopyKind::FourierLinear || perturbations >= config.max_perturbations
        {
            return report;
        }
        perturbations += 1;
        match h.perturbed(config.seed.wrapping_add(1000 * perturbations as u64)) {
            Ok(p) => current = p,
            Err(_) => return report,
        }
    }
}

fn census_once(h: &Homotopy, times: &[f64], config: &CensusConfig, perturbations: usize) -> CensusReport {
    let mut times: Vec<f64> = times.iter().map(|t| t.clamp(0.0, 1.0)).chain([0.0, 1.0]).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let slices: Vec<CensusSlice> = times.iter().map(|&t| census_slice(h, t, &config.search)).collect();
    let kappa = h.reference_kappa();
    let critical_size = PI / (4.0 * kappa);
    let band_half_width = config.band_fraction / kappa;
    let tol = config.endpoint_tol.unwrap_or(1e-6 * h.length_scale);
    let start = &slices[0];
    let end = &slices[slices.len() - 1];

    let mut failures = Vec::new();
    let forward: Vec<Result<TrackedPath, TrackError>> = start
        .squares
        .par_iter()
        .map(|sq| track_square(h, sq, 0.0, &config.control))
        .collect();
    let mut paths: Vec<TrackedPath> = Vec::new();
    for (sq, res) in start.squares.iter().zip(forward) {
        match res {
            // a fold pair returning to t = 0 is already covered by its partner
            Ok(path) if !reaches(&paths, 0.0, sq, tol) => paths.push(path),
            Ok(_) => {}
            Err(e) => failures.push(TrackFailure {
                start_t: 0.0,
                params: sq.params,
                error: e,
            }),
        }
    }
    for sq in &end.squares {
        if reaches(&paths, 1.0, sq, tol) {
            continue;
        }
        match track_square(h, sq, 1.0, &config.control) {
            Ok(path) => paths.push(path),
            Err(e) => failures.push(TrackFailure {
                start_t: 1.0,
                params: sq.params,
                error: e,
            }),
        }
    }

    let mut traces: Vec<ContinuationTrace> = Vec::new();
    for path in paths.iter() {
        let offset = traces.len();
        traces.extend(path.traces.iter().cloned().map(|mut tr| {
            tr.partner = tr.partner.map(|p| p + offset);
            tr
        }));
    }

    let mut closest_approach = f64::INFINITY;
    let mut band_entries = 0;
    let mut crossings = Vec::new();
    for (k, tr) in traces.iter().enumerate() {
        for s in &tr.samples {
            if s.size_wrt_p.is_finite() {
                let gap = (s.size_wrt_p - critical_size).abs();
                closest_approach = closest_approach.min(gap);
                band_entries += usize::from(gap <= band_half_width);
            }
        }
        for w in tr.samples.windows(2) {
            let (a, b) = (w[0].size_wrt_p - critical_size, w[1].size_wrt_p - critical_size);
            if a * b < 0.0 {
                crossings.push(SizeCrossing {
                    trace: k,
                    t_before: w[0].t,
                    t_after: w[1].t,
                    size_before: w[0].size_wrt_p,
                    size_after: w[1].size_wrt_p,
                });
            }
        }
    }

    let threshold = config.control.zero_fraction * h.length_scale;
    let size_bound = SQRT_2 / (5.0 * kappa) + SQRT_2 * threshold;
    let mut zero_events = Vec::new();
    for (k, tr) in traces.iter().enumerate() {
        let ends = [(tr.start_event, tr.first()), (tr.end_event, tr.last())];
        for (event, sample) in ends {
            if matches!(event, TraceEvent::ZeroSquareBirth | TraceEvent::ZeroSquareDeath) {
                let slice = h.slice(sample.t);
                let analysis = CurveAnalysis::new(&slice, 1024);
                zero_events.push(ZeroEvent {
                    trace: k,
                    event,
                    t: sample.t,
                    sidelength: sample.square.sidelength,
                    identity_size: square_size_identity(&slice, &analysis, &sample.square.params),
                    size_wrt_p: sample.size_wrt_p,
                    size_bound,
                });
            }
        }
    }

    let unreached_final_squares = end.squares.iter().filter(|sq| !reaches(&paths, 1.0, sq, tol)).count();
    let unmatched_trace_endpoints = traces
        .iter()
        .filter_map(|tr| endpoint_at(tr, 1.0))
        .filter(|e| !end.squares.iter().any(|sq| sq.vertex_distance(e) <= tol))
        .count();
    let unpaired_folds = traces
        .iter()
        .enumerate()
        .filter(|(k, tr)| {
            let has_fold = tr.start_event.is_fold() || tr.end_event.is_fold();
            has_fold && tr.partner.and_then(|p| traces.get(p)).and_then(|p| p.partner) != Some(*k)
        })
        .count();

    CensusReport {
        kind: h.kind,
        kappa,
        critical_size,
        band_half_width,
        slices,
        traces,
        closest_approach,
        crossings,
        band_entries,
        zero_events,
        unreached_final_squares,
        unmatched_trace_endpoints,
        unpaired_folds,
        failures,
        perturbations,
    }
}
