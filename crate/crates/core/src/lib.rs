//! Inscribed squares in closed plane curves.
//!
//! The crate finds inscribed squares of smooth and polygonal closed curves,
//! measures them with the oriented-length size metric, follows them through
//! homotopies of curves, and checks the quantitative bounds that control
//! how their sizes may evolve.

pub mod cli_io;
pub mod continuation;
pub mod curves;
pub mod geom;
pub mod quadrature;
pub mod size_metric;
pub mod squares;
pub mod verify;

pub use curves::{FourierCurve, PlaneCurve, PolylineCurve};
pub use geom::Vec2;
