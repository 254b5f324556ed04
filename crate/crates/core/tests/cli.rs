//! The command-line tool end to end: files in, JSON out, exit codes.

use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn squarepeg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_squarepeg"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn generate(dir: &Path, args: &[&str]) {
    let out = squarepeg(dir, args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn ellipse_square_through_the_cli() {
    let dir = TempDir::new().unwrap();
    generate(
        dir.path(),
        &["generate", "ellipse", "--a", "2", "--b", "1", "-o", "e.json"],
    );
    let found = json(&squarepeg(dir.path(), &["--json", "find-squares", "e.json"]));
    let squares = found["squares"].as_array().unwrap();
    assert_eq!(squares.len(), 1);
    let side = squares[0]["sidelength"].as_f64().unwrap();
    assert!((side - 4.0 / 5f64.sqrt()).abs() < 1e-6, "{side}");
}

#[test]
fn analyze_reports_curvature_and_simplicity() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), &["generate", "ellipse", "-o", "e.json"]);
    let text = String::from_utf8(squarepeg(dir.path(), &["analyze", "e.json"]).stdout).unwrap();
    assert!(text.contains("simple"), "{text}");
    let report = json(&squarepeg(dir.path(), &["--json", "analyze", "e.json"]));
    let kappa = report["max_unsigned_curvature"].as_f64().unwrap();
    assert!((kappa - 2.0).abs() < 1e-6, "{kappa}");
}

#[test]
fn size_onto_a_second_curve() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), &["generate", "ellipse", "--a", "1.5", "-o", "s.json"]);
    generate(
        dir.path(),
        &[
            "--seed",
            "3",
            "generate",
            "perturbed",
            "--a",
            "1.5",
            "--amplitude",
            "0.01",
            "-o",
            "t.json",
        ],
    );
    let sizes = json(&squarepeg(
        dir.path(),
        &["--json", "size", "t.json", "--onto", "s.json"],
    ));
    let first = &sizes.as_array().unwrap()[0];
    assert!(first["size_identity"].as_f64().unwrap() > 0.0);
    assert!(first["size_wrt_f"].as_f64().unwrap() > 0.0);
}

#[test]
fn census_of_a_two_step_homotopy() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), &["generate", "ellipse", "--a", "1.5", "-o", "s.json"]);
    generate(
        dir.path(),
        &[
            "--seed",
            "3",
            "generate",
            "perturbed",
            "--a",
            "1.5",
            "--amplitude",
            "0.01",
            "-o",
            "t.json",
        ],
    );
    std::fs::write(
        dir.path().join("h.json"),
        r#"{"start": "s.json", "end": "t.json", "kind": "two_step"}"#,
    )
    .unwrap();
    let report = json(&squarepeg(dir.path(), &["--json", "census", "h.json", "--slices", "3"]));
    assert_eq!(report["band_entries"], 0);
    assert_eq!(report["slices"].as_array().unwrap().len(), 3);
    assert!(report["failures"].as_array().unwrap().is_empty());
}

#[test]
fn two_step_beyond_its_budget_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), &["generate", "ellipse", "--a", "1.5", "-o", "s.json"]);
    generate(dir.path(), &["generate", "ellipse", "--a", "2.5", "-o", "t.json"]);
    std::fs::write(
        dir.path().join("h.json"),
        r#"{"start": "s.json", "end": "t.json", "kind": "two_step"}"#,
    )
    .unwrap();
    let out = squarepeg(dir.path(), &["census", "h.json"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_checks_exit_zero_when_they_hold() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), &["generate", "peanut", "--neck", "0.2", "-o", "p.json"]);
    let r = json(&squarepeg(
        dir.path(),
        &["--json", "verify", "initial-size-bound", "p.json"],
    ));
    assert_eq!(r["verdict"], "holds");
    let r = json(&squarepeg(
        dir.path(),
        &["--json", "verify", "chord-bound", "p.json", "--trials", "200"],
    ));
    assert_eq!(r["verdict"], "holds");
}

#[test]
fn main_theorem_on_a_noisy_polygon() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), &["generate", "ellipse", "-o", "g.json"]);
    generate(
        dir.path(),
        &["--seed", "2", "generate", "noisy-polyline", "-o", "b.json"],
    );
    let r = json(&squarepeg(
        dir.path(),
        &["--json", "verify", "main-theorem", "g.json", "b.json"],
    ));
    assert_eq!(r["verdict"], "holds");
    assert_eq!(r["hypothesis_values"]["degree"], 1.0);
    assert!(r["margin"].as_f64().unwrap() > 0.0);
}

#[test]
fn inapplicable_annulus_still_exits_zero_with_null_margin() {
    let dir = TempDir::new().unwrap();
    generate(
        dir.path(),
        &[
            "generate",
            "annulus-star",
            "--inner",
            "1",
            "--outer",
            "2.2",
            "-o",
            "star.json",
        ],
    );
    let r = json(&squarepeg(
        dir.path(),
        &["--json", "verify", "annulus", "1", "3", "star.json"],
    ));
    assert_eq!(r["verdict"], "inapplicable");
    assert!(r["margin"].is_null());
    let r = json(&squarepeg(
        dir.path(),
        &["--json", "verify", "annulus", "1", "2.2", "star.json"],
    ));
    assert_eq!(r["verdict"], "holds");
}

#[test]
fn suite_file_runs_in_order() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), &["generate", "ellipse", "-o", "e.json"]);
    std::fs::write(
        dir.path().join("suite.json"),
        r#"{"checks": [
            {"check": "initial_size_bound", "curve": "e.json"},
            {"check": "chord_bound", "curve": "e.json", "trials": 100},
            {"check": "no_intermediate", "alpha": "e.json", "beta": "e.json"}
        ]}"#,
    )
    .unwrap();
    let r = json(&squarepeg(
        dir.path(),
        &["--json", "verify", "all", "--suite", "suite.json"],
    ));
    let names: Vec<&str> = r["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["check_name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["initial_size_bound", "chord_bound", "no_intermediate"]);
    assert_eq!(r["violated"], 0);
}

#[test]
fn render_writes_svg() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), &["generate", "ellipse", "-o", "e.json"]);
    let out = squarepeg(dir.path(), &["render", "e.json", "-o", "e.svg"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(dir.path().join("e.svg")).unwrap();
    assert!(svg.contains("<svg") && svg.contains("</svg>"));
}

#[test]
fn input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\"type\": \"spline\"}").unwrap();
    std::fs::write(dir.path().join("trunc.json"), "{\"type\": \"fourier\", ").unwrap();
    for args in [
        &["find-squares", "missing.json"][..],
        &["find-squares", "bad.json"],
        &["analyze", "trunc.json"],
        &["no-such-command"],
        &["generate", "ellipse"],
    ] {
        let out = squarepeg(dir.path(), args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn polyline_where_a_smooth_curve_is_needed_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), &["generate", "noisy-polyline", "-o", "b.json"]);
    let out = squarepeg(dir.path(), &["verify", "main-theorem", "b.json", "b.json"]);
    assert_eq!(out.status.code(), Some(2));
}
