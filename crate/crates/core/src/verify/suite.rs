//! Batteries of checks described by a JSON file.

use super::{
    annulus_scenario, certify_main_theorem, check_chord_bound, check_initial_size_bound, check_no_intermediate,
    check_small_square_bounds, CheckReport, Verdict, VerifyError,
};
use crate::cli_io::files::read_json;
use crate::cli_io::{read_curve, read_fourier, AnyCurve, IoError};
use crate::size_metric::ParamCorrespondence;
use crate::squares::SearchConfig;
use crate::PolylineCurve;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Samples of the projection from `alpha` onto `beta`.
const PAIR_SAMPLES: usize = 2048;

fn default_trials() -> usize {
    10_000
}

/// One check with its input files. Relative paths resolve against a base
/// directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    InitialSizeBound {
        curve: PathBuf,
    },
    ChordBound {
        curve: PathBuf,
        #[serde(default = "default_trials")]
        trials: usize,
        #[serde(default)]
        seed: u64,
    },
    /// `f` is nearest-point projection from `alpha` onto `beta`.
    NoIntermediate {
        alpha: PathBuf,
        beta: PathBuf,
    },
    SmallSquareBound {
        alpha: PathBuf,
        beta: PathBuf,
    },
    MainTheorem {
        gamma: PathBuf,
        beta: PathBuf,
    },
    Annulus {
        inner: f64,
        outer: f64,
        beta: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteFile {
    pub checks: Vec<CheckSpec>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub reports: Vec<CheckReport>,
    pub holds: usize,
    pub violated: usize,
    pub inapplicable: usize,
}

impl SuiteReport {
    pub fn from_reports(reports: Vec<CheckReport>) -> Self {
        let count = |v: Verdict| reports.iter().filter(|r| r.verdict == v).count();
        Self {
            holds: count(Verdict::Holds),
            violated: count(Verdict::Violated),
            inapplicable: count(Verdict::Inapplicable),
            reports,
        }
    }
}

fn read_polyline(path: &Path) -> Result<PolylineCurve, IoError> {
    match read_curve(path)? {
        AnyCurve::Polyline(p) => Ok(p),
        AnyCurve::Fourier(_) => Err(IoError::NotPolyline {
            path: path.to_path_buf(),
        }),
    }
}

impl CheckSpec {
    pub fn run(&self, dir: &Path, search: &SearchConfig) -> Result<CheckReport, VerifyError> {
        let fourier = |p: &PathBuf| read_fourier(&dir.join(p));
        let pair = |alpha: &PathBuf, beta: &PathBuf| -> Result<_, VerifyError> {
            let (a, b) = (fourier(alpha)?, fourier(beta)?);
            let f = ParamCorrespondence::from_projection(&a, &b, PAIR_SAMPLES, beta.display().to_string())?;
            Ok((a, b, f))
        };
        Ok(match self {
            Self::InitialSizeBound { curve } => check_initial_size_bound(&fourier(curve)?, search),
            Self::ChordBound { curve, trials, seed } => check_chord_bound(&fourier(curve)?, *trials, *seed),
            Self::NoIntermediate { alpha, beta } => {
                let (a, b, f) = pair(alpha, beta)?;
                check_no_intermediate(&a, &b, &f, search)
            }
            Self::SmallSquareBound { alpha, beta } => {
                let (a, b, f) = pair(alpha, beta)?;
                check_small_square_bounds(&a, &b, &f, search)
            }
            Self::MainTheorem { gamma, beta } => {
                certify_main_theorem(&fourier(gamma)?, &read_polyline(&dir.join(beta))?, search)?
            }
            Self::Annulus { inner, outer, beta } => {
                annulus_scenario(*inner, *outer, &read_polyline(&dir.join(beta))?, search)
            }
        })
    }
}

/// Run every check of a suite file; paths resolve against its directory.
/// Checks run concurrently and reports keep the file's order.
pub fn run_suite(path: &Path, search: &SearchConfig) -> Result<SuiteReport, VerifyError> {
    let suite: SuiteFile = read_json(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let reports = suite
        .checks
        .par_iter()
        .map(|spec| spec.run(dir, search))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SuiteReport::from_reports(reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli_io::files::write_json;
    use crate::cli_io::{noisy_polyline, write_curve};
    use crate::curves::{make_circle, make_ellipse};

    #[test]
    fn suite_runs_in_file_order() {
        let dir = tempfile::tempdir().unwrap();
        let e = make_ellipse(2.0, 1.0);
        write_curve(&dir.path().join("e.json"), &AnyCurve::Fourier(e.clone())).unwrap();
        write_curve(&dir.path().join("c.json"), &AnyCurve::Fourier(make_circle(1.0))).unwrap();
        let noisy = noisy_polyline(&e, 200, 0.01, 2).unwrap();
        write_curve(&dir.path().join("p.json"), &AnyCurve::Polyline(noisy)).unwrap();
        let suite = SuiteFile {
            checks: vec![
                CheckSpec::ChordBound {
                    curve: "c.json".into(),
                    trials: 100,
                    seed: 1,
                },
                CheckSpec::InitialSizeBound { curve: "e.json".into() },
                CheckSpec::NoIntermediate {
                    alpha: "e.json".into(),
                    beta: "e.json".into(),
                },
                CheckSpec::MainTheorem {
                    gamma: "e.json".into(),
                    beta: "p.json".into(),
                },
            ],
        };
        write_json(&dir.path().join("suite.json"), &suite).unwrap();
        let report = run_suite(&dir.path().join("suite.json"), &SearchConfig::default()).unwrap();
        let names: Vec<&str> = report.reports.iter().map(|r| r.check_name.as_str()).collect();
        assert_eq!(
            names,
            ["chord_bound", "initial_size_bound", "no_intermediate", "main_theorem"]
        );
        assert_eq!(report.holds, 4);
    }

    #[test]
    fn unknown_check_is_rejected() {
        let text = r#"{"checks": [{"check": "collatz", "curve": "a.json"}]}"#;
        assert!(serde_json::from_str::<SuiteFile>(text).is_err());
    }

    #[test]
    fn missing_file_is_an_input_error() {
        let spec = CheckSpec::InitialSizeBound {
            curve: "missing.json".into(),
        };
        let err = spec
            .run(Path::new("/nonexistent"), &SearchConfig::default())
            .unwrap_err();
        assert!(err.is_input_error());
    }
}
