//! File formats, scenario generators and SVG rendering behind the
//! command-line tool.

pub mod files;
pub mod scenarios;
pub mod svg;

pub use files::{read_curve, read_fourier, read_homotopy, write_curve, AnyCurve, CurveFile, HomotopySpec, IoError};
pub use scenarios::{
    annulus_star, fit_fourier, generate, make_fingered_circle, make_peanut, noisy_polyline, FingeredCircle,
    GenerateError, ScenarioSpec,
};
pub use svg::{render_svg, SquareMark};
