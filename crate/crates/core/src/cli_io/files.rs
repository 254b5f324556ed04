//! JSON files for curves and homotopy specifications.
//!
//! Curves are `{"type": "fourier", "coeffs": [[ax, ay, bx, by], ...]}` with
//! harmonic `k` contributing `(ax, ay) cos ks + (bx, by) sin ks`, or
//! `{"type": "polyline", "points": [[x, y], ...]}`. Floats are written in
//! shortest round-trip form, so write-then-read is exact.

use crate::continuation::{Homotopy, HomotopyError, HomotopyKind};
use crate::curves::{CurveAnalysis, CurveError, FourierCurve, PlaneCurve, PolylineCurve};
use crate::geom::{vec2, Vec2};
use crate::size_metric::{ParamCorrespondence, SizeError};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    InvalidCurve { path: PathBuf, source: CurveError },
    #[error("{path}: expected a fourier curve")]
    NotFourier { path: PathBuf },
    #[error("{path}: expected a polyline")]
    NotPolyline { path: PathBuf },
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
    #[error(transparent)]
    Correspondence(#[from] SizeError),
}

impl IoError {
    /// Errors caused by the input files rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        // a homotopy whose curves violate its hypotheses is a bad input;
        // only failure to restore regularity is numerical
        !matches!(
            self,
            Self::Homotopy(HomotopyError::Irregular { .. }) | Self::Correspondence(_)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum CurveFile {
    Fourier { coeffs: Vec<[f64; 4]> },
    Polyline { points: Vec<[f64; 2]> },
}

/// A curve of either kind.
#[derive(Clone, Debug)]
pub enum AnyCurve {
    Fourier(FourierCurve),
    Polyline(PolylineCurve),
}

impl AnyCurve {
    pub fn to_file(&self) -> CurveFile {
        match self {
            Self::Fourier(c) => CurveFile::Fourier { coeffs: c.coeffs() },
            Self::Polyline(p) => CurveFile::Polyline {
                points: p.vertices().iter().map(|v| [v.x, v.y]).collect(),
            },
        }
    }

    pub fn from_file(file: &CurveFile) -> Result<Self, CurveError> {
        Ok(match file {
            CurveFile::Fourier { coeffs } => Self::Fourier(FourierCurve::from_coeffs(coeffs)),
            CurveFile::Polyline { points } => {
                Self::Polyline(PolylineCurve::new(points.iter().map(|p| vec2(p[0], p[1])).collect())?)
            }
        })
    }

    pub fn as_fourier(&self) -> Option<&FourierCurve> {
        match self {
            Self::Fourier(c) => Some(c),
            Self::Polyline(_) => None,
        }
    }
}

impl PlaneCurve for AnyCurve {
    fn point(&self, s: f64) -> Vec2 {
        match self {
            Self::Fourier(c) => c.point(s),
            Self::Polyline(p) => p.point(s),
        }
    }

    fn derivative(&self, s: f64) -> Vec2 {
        match self {
            Self::Fourier(c) => c.derivative(s),
            Self::Polyline(p) => p.derivative(s),
        }
    }

    fn second_derivative(&self, s: f64) -> Vec2 {
        match self {
            Self::Fourier(c) => c.second_derivative(s),
            Self::Polyline(p) => p.second_derivative(s),
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_curve(text: &str) -> Result<AnyCurve, IoError> {
    let file: CurveFile = serde_json::from_str(text).map_err(|source| IoError::Json {
        path: PathBuf::from("<input>"),
        source,
    })?;
    AnyCurve::from_file(&file).map_err(|source| IoError::InvalidCurve {
        path: PathBuf::from("<input>"),
        source,
    })
}

pub fn read_curve(path: &Path) -> Result<AnyCurve, IoError> {
    let file: CurveFile = read_json(path)?;
    AnyCurve::from_file(&file).map_err(|source| IoError::InvalidCurve {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_fourier(path: &Path) -> Result<FourierCurve, IoError> {
    match read_curve(path)? {
        AnyCurve::Fourier(c) => Ok(c),
        AnyCurve::Polyline(_) => Err(IoError::NotFourier {
            path: path.to_path_buf(),
        }),
    }
}

pub fn write_curve(path: &Path, curve: &AnyCurve) -> Result<(), IoError> {
    write_json(path, &curve.to_file())
}

/// A homotopy between two Fourier curve files. Relative paths resolve
/// against the directory of the homotopy file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomotopySpec {
    pub start: PathBuf,
    pub end: PathBuf,
    pub kind: HomotopyKind,
    /// Displacement budget for `two_step`; default `1/(10κ)` of the start
    /// curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

/// Samples of the correspondence used to build two-stage homotopies.
pub const CORRESPONDENCE_SAMPLES: usize = 512;

impl HomotopySpec {
    /// Build the homotopy from already loaded curves.
    pub fn build(&self, start: &FourierCurve, end: &FourierCurve) -> Result<Homotopy, IoError> {
        Ok(match self.kind {
            HomotopyKind::FourierLinear => Homotopy::linear(start, end, self.seed)?,
            HomotopyKind::TwoStep => {
                let eta = self.eta.unwrap_or_else(|| {
                    let kappa = CurveAnalysis::new(start, 2048).max_unsigned_curvature;
                    1.0 / (10.0 * kappa)
                });
                let f = ParamCorrespondence::from_projection(end, start, CORRESPONDENCE_SAMPLES, "start")?;
                Homotopy::two_step(start, end, &f, eta)?
            }
        })
    }
}

pub fn read_homotopy(path: &Path) -> Result<(HomotopySpec, Homotopy), IoError> {
    let spec: HomotopySpec = read_json(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let start = read_fourier(&dir.join(&spec.start))?;
    let end = read_fourier(&dir.join(&spec.end))?;
    let h = spec.build(&start, &end)?;
    Ok((spec, h))
}
