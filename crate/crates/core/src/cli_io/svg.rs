//! Deterministic SVG figures of curves and squares.

use super::files::AnyCurve;
use crate::continuation::{CensusReport, Homotopy};
use crate::curves::PlaneCurve;
use crate::geom::Vec2;
use crate::squares::SquareCandidate;
use std::fmt::Write;

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 40.0;
/// Samples per smooth curve outline.
pub const OUTLINE_SAMPLES: usize = 720;

/// A square to draw, with an optional size shown next to its sidelength.
#[derive(Clone, Debug)]
pub struct SquareMark {
    pub square: SquareCandidate,
    pub size: Option<f64>,
}

impl From<&SquareCandidate> for SquareMark {
    fn from(square: &SquareCandidate) -> Self {
        Self {
            square: square.clone(),
            size: None,
        }
    }
}

/// Closed outline of a smooth curve from uniform parameter samples.
pub fn outline<C: PlaneCurve + ?Sized>(curve: &C) -> Vec<Vec2> {
    curve.sample(OUTLINE_SAMPLES)
}

/// Closed outline of either curve kind; polygons keep their exact vertices.
pub fn curve_outline(curve: &AnyCurve) -> Vec<Vec2> {
    match curve {
        AnyCurve::Fourier(c) => outline(c),
        AnyCurve::Polyline(p) => p.vertices().to_vec(),
    }
}

struct Frame {
    min: Vec2,
    scale: f64,
}

impl Frame {
    fn fit<'a>(points: impl Iterator<Item = &'a Vec2>) -> Self {
        let (mut lo, mut hi) = (Vec2::repeat(f64::INFINITY), Vec2::repeat(f64::NEG_INFINITY));
        for p in points {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        if !lo.x.is_finite() {
            return Self {
                min: Vec2::zeros(),
                scale: 1.0,
            };
        }
        let span = (hi - lo).max().max(1e-12);
        let scale = (CANVAS - 2.0 * MARGIN) / span;
        // centre the drawing on the canvas
        let pad = (Vec2::repeat(span) - (hi - lo)) * 0.5;
        Self { min: lo - pad, scale }
    }

    fn map(&self, p: &Vec2) -> (f64, f64) {
        (
            MARGIN + (p.x - self.min.x) * self.scale,
            CANVAS - MARGIN - (p.y - self.min.y) * self.scale,
        )
    }
}

/// Render outlines, squares and text annotations on a fixed 800×800 canvas.
/// Identical inputs give byte-identical output.
pub fn render_svg(outlines: &[Vec<Vec2>], squares: &[SquareMark], annotations: &[String]) -> String {
    let frame = Frame::fit(
        outlines
            .iter()
            .flatten()
            .chain(squares.iter().flat_map(|m| m.square.vertices.iter())),
    );
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{c}" height="{c}" viewBox="0 0 {c} {c}">"#,
        c = CANVAS
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for pts in outlines {
        let mut d = String::new();
        for (k, p) in pts.iter().enumerate() {
            let (x, y) = frame.map(p);
            let _ = write!(d, "{}{x:.3} {y:.3} ", if k == 0 { "M" } else { "L" });
        }
        d.push('Z');
        let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="black" stroke-width="1.5"/>"#);
    }
    for (k, mark) in squares.iter().enumerate() {
        let pts: Vec<String> = mark
            .square
            .vertices
            .iter()
            .map(|p| {
                let (x, y) = frame.map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="none" stroke="crimson" stroke-width="1.2"/>"#,
            pts.join(" ")
        );
        let (cx, cy) = frame.map(&mark.square.center());
        let mut label = format!("#{k} side {:.4}", mark.square.sidelength);
        if let Some(size) = mark.size {
            let _ = write!(label, " size {size:.4}");
        }
        let _ = writeln!(
            out,
            r#"<text x="{cx:.3}" y="{cy:.3}" font-family="monospace" font-size="11" text-anchor="middle">{label}</text>"#
        );
    }
    for (k, line) in annotations.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="10" y="{}" font-family="monospace" font-size="13">{}</text>"#,
            18 + 16 * k,
            escape(line)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One frame per census time: the slice `H(·, t)` with the squares found on
/// it and their sizes with respect to `P`. Returns `(file name, document)`.
pub fn census_frames(h: &Homotopy, report: &CensusReport) -> Vec<(String, String)> {
    report
        .slices
        .iter()
        .enumerate()
        .map(|(k, slice)| {
            let marks: Vec<SquareMark> = slice
                .squares
                .iter()
                .zip(&slice.sizes_wrt_p)
                .map(|(sq, &size)| SquareMark {
                    square: sq.clone(),
                    size: Some(size),
                })
                .collect();
            let notes = vec![
                format!("t = {:.4}", slice.t),
                format!("squares: {}", slice.count),
                format!("critical size {:.6}", report.critical_size),
            ];
            let svg = render_svg(&[outline(&h.slice(slice.t))], &marks, &notes);
            (format!("frame_{k:04}.svg"), svg)
        })
        .collect()
}
