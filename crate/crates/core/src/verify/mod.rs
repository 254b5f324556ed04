//! Checkers for the quantitative size bounds and the end-to-end
//! certification of polygons that closely follow a smooth curve.
//!
//! Every check returns a [`CheckReport`]. `margin` is bound minus measured,
//! so positive means the statement holds with room to spare; the verdict is
//! `holds` exactly when `margin ≥ -tolerance`. A check whose hypotheses fail
//! is `inapplicable` and says nothing about the bound.
//!
//! `κ` is always the maximum unsigned curvature of the smooth reference
//! curve, named in each report.

mod lemmas;
mod suite;
mod theorem;

pub use lemmas::{
    check_chord_bound, check_initial_size_bound, check_no_intermediate, check_small_square_bound,
    check_small_square_bounds, chord_after_arc, corner_angles, no_intermediate_self_test, zero_square_arithmetic,
};
pub use suite::{run_suite, CheckSpec, SuiteFile, SuiteReport};
pub use theorem::{annulus_scenario, certify_main_theorem};

use crate::cli_io::IoError;
use crate::size_metric::SizeError;
use crate::squares::SquareCandidate;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

/// Absolute tolerance for the theorem-backed bounds.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
/// Samples for curvature and arc-length tables in checks.
pub const ANALYSIS_SAMPLES: usize = 4096;
/// Half-width of the band around `π/(4κ)`, in units of `1/κ`.
pub const BAND_FRACTION: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("cannot build the correspondence: {0}")]
    Correspondence(#[from] SizeError),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl VerifyError {
    pub fn is_input_error(&self) -> bool {
        matches!(self, Self::Io(e) if e.is_input_error())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Inapplicable,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A square with the quantity measured on it and the bound it meets.
    Square {
        square: SquareCandidate,
        measured: f64,
        bound: f64,
    },
    /// A subarc from parameter `start` to `end`.
    Arc {
        start: f64,
        end: f64,
        length: f64,
        chord: f64,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check_name: String,
    /// Every symbol the bound uses, by name.
    pub hypothesis_values: BTreeMap<String, f64>,
    pub verdict: Verdict,
    /// Bound minus measured; `NaN` (null in JSON) when inapplicable.
    pub margin: f64,
    pub tolerance: f64,
    pub witnesses: Vec<Witness>,
    /// Quantities reported for inspection only; they do not affect the verdict.
    pub diagnostics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl CheckReport {
    fn new(check_name: &str, tolerance: f64) -> Self {
        Self {
            check_name: check_name.into(),
            hypothesis_values: BTreeMap::new(),
            verdict: Verdict::Inapplicable,
            margin: f64::NAN,
            tolerance,
            witnesses: Vec::new(),
            diagnostics: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn hypothesis(&mut self, name: &str, value: f64) -> &mut Self {
        self.hypothesis_values.insert(name.into(), value);
        self
    }

    fn diagnostic(&mut self, name: &str, value: f64) -> &mut Self {
        self.diagnostics.insert(name.into(), value);
        self
    }

    fn inapplicable(mut self, why: impl Into<String>) -> Self {
        self.verdict = Verdict::Inapplicable;
        self.margin = f64::NAN;
        self.notes.push(why.into());
        self
    }

    /// Set the margin and derive the verdict from it.
    fn conclude(mut self, margin: f64) -> Self {
        self.margin = margin;
        self.verdict = if margin >= -self.tolerance {
            Verdict::Holds
        } else {
            Verdict::Violated
        };
        self
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

/// `arcsin(x) ≤ πx/2` on `n + 1` evenly spaced points of `[0, 1]`; returns
/// the smallest slack.
pub fn arcsin_envelope_slack(n: usize) -> f64 {
    (0..=n)
        .map(|k| {
            let x = k as f64 / n as f64;
            std::f64::consts::FRAC_PI_2 * x - x.asin()
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arcsin_envelope_holds_on_the_unit_interval() {
        let slack = arcsin_envelope_slack(10_000);
        // equality at both ends
        assert!(slack >= -1e-15, "{slack}");
        assert!(slack <= 1e-15);
    }

    #[test]
    fn verdict_follows_margin() {
        let r = CheckReport::new("t", 1e-6).conclude(-5e-7);
        assert_eq!(r.verdict, Verdict::Holds);
        let r = CheckReport::new("t", 1e-6).conclude(-2e-6);
        assert_eq!(r.verdict, Verdict::Violated);
        let r = CheckReport::new("t", 1e-6).inapplicable("no");
        assert!(r.margin.is_nan());
        assert_eq!(serde_json::to_value(&r).unwrap()["margin"], serde_json::Value::Null);
    }
}
