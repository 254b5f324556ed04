use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use squarepeg::cli_io::svg::{census_frames, curve_outline};
use squarepeg::cli_io::{
    generate, read_curve, read_homotopy, render_svg, write_curve, AnyCurve, ScenarioSpec, SquareMark,
};
use squarepeg::continuation::{census, CensusConfig, CensusReport};
use squarepeg::curves::{is_simple, reach_estimate, CurveAnalysis, DEFAULT_TABLE_SIZE};
use squarepeg::size_metric::{square_size, square_size_identity, ParamCorrespondence};
use squarepeg::squares::{find_all_squares, find_polyline_squares, SearchConfig, SquareSearch};
use squarepeg::verify::{run_suite, CheckReport, CheckSpec, SuiteReport, Verdict, VerifyError};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Inscribed squares in closed plane curves.
#[derive(Parser)]
#[command(name = "squarepeg", version)]
struct Cli {
    /// Residual tolerance for square refinement.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Diagonal seeding grid resolution.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Seed for random choices (perturbations, sampling).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Length, curvature, simplicity and reach of a curve.
    Analyze { curve: PathBuf },
    /// All inscribed squares of a curve.
    FindSquares {
        curve: PathBuf,
        /// Also draw the curve and its squares.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Sizes of a curve's squares, with respect to the identity and
    /// optionally to nearest-point projection onto a second curve.
    Size {
        curve: PathBuf,
        #[arg(long)]
        onto: Option<PathBuf>,
    },
    /// Track every square through a homotopy and classify path ends.
    Track {
        homotopy: PathBuf,
        /// Write one SVG frame per census time.
        #[arg(long)]
        svg_dir: Option<PathBuf>,
        /// Comma-separated times at which to count squares.
        #[arg(long, value_delimiter = ',')]
        census: Vec<f64>,
    },
    /// Square counts and parity on evenly spaced slices of a homotopy.
    Census {
        homotopy: PathBuf,
        /// Number of slices, endpoints included.
        #[arg(long, default_value_t = 11)]
        slices: usize,
        #[arg(long)]
        svg_dir: Option<PathBuf>,
    },
    /// Check a size bound or certify the main theorem's hypotheses.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
    /// Write a generated curve file.
    Generate {
        #[command(subcommand)]
        scenario: GenerateCommand,
        /// Output curve file (required).
        #[arg(long, short, global = true)]
        out: Option<PathBuf>,
    },
    /// Draw a curve and, unless disabled, its squares.
    Render {
        curve: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        no_squares: bool,
    },
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Every square has size at least π/κ.
    InitialSizeBound { curve: PathBuf },
    /// Random short arcs have chord at least length/√2.
    ChordBound {
        curve: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// `f` is nearest-point projection from ALPHA onto BETA.
    NoIntermediate { alpha: PathBuf, beta: PathBuf },
    /// Squares of ALPHA are small with respect to projection onto BETA.
    SmallSquareBound { alpha: PathBuf, beta: PathBuf },
    /// GAMMA is a smooth curve file, BETA a polyline file.
    MainTheorem { gamma: PathBuf, beta: PathBuf },
    /// A polygon in a thin annulus about the origin has a square.
    Annulus { inner: f64, outer: f64, beta: PathBuf },
    /// Run every check listed in a suite file.
    All {
        #[arg(long)]
        suite: PathBuf,
    },
}

#[derive(Args)]
struct Axes {
    #[arg(long, default_value_t = 2.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
}

#[derive(Subcommand)]
enum GenerateCommand {
    Ellipse {
        #[command(flatten)]
        axes: Axes,
    },
    /// Ellipse plus seeded random harmonics.
    Perturbed {
        #[command(flatten)]
        axes: Axes,
        #[arg(long, default_value_t = 0.01)]
        amplitude: f64,
        #[arg(long, default_value_t = 6)]
        harmonics: usize,
    },
    /// Two unit lobes joined by a narrow neck.
    Peanut {
        #[arg(long, default_value_t = 0.1)]
        neck: f64,
    },
    /// Polygon sampled from an ellipse with seeded radial noise.
    NoisyPolyline {
        #[command(flatten)]
        axes: Axes,
        #[arg(long, default_value_t = 400)]
        vertices: usize,
        #[arg(long, default_value_t = 0.02)]
        amplitude: f64,
    },
    /// Star polygon inside the annulus `inner ≤ r ≤ outer`.
    AnnulusStar {
        #[arg(long)]
        inner: f64,
        #[arg(long)]
        outer: f64,
        #[arg(long, default_value_t = 5)]
        points: usize,
        #[arg(long, default_value_t = 400)]
        vertices: usize,
    },
    /// Scenario described by a JSON file.
    Spec { file: PathBuf },
}

/// Error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

const VIOLATED: u8 = 1;
const INPUT: u8 = 2;
const NUMERICAL: u8 = 3;

fn input(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: INPUT,
        error: error.into(),
    }
}

fn numerical(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: NUMERICAL,
        error: error.into(),
    }
}

fn from_verify(error: VerifyError) -> Failure {
    if error.is_input_error() {
        input(error)
    } else {
        numerical(error)
    }
}

fn emit<T: Serialize>(json: bool, value: &T, text: impl FnOnce() -> String) -> Result<(), Failure> {
    if json {
        let out = serde_json::to_string_pretty(value).map_err(numerical)?;
        println!("{out}");
    } else {
        print!("{}", text());
    }
    Ok(())
}

fn search_config(cli: &Cli) -> SearchConfig {
    SearchConfig {
        grid_n: cli.grid,
        tol: cli.tol,
        ..SearchConfig::default()
    }
}

fn find_squares(curve: &AnyCurve, config: &SearchConfig) -> SquareSearch {
    match curve {
        AnyCurve::Fourier(c) => find_all_squares(c, config),
        AnyCurve::Polyline(p) => find_polyline_squares(p, config),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(input)
}

#[derive(Serialize)]
struct CurveSummary {
    kind: &'static str,
    total_length: f64,
    simple: bool,
    /// Smooth curves only.
    max_unsigned_curvature: Option<f64>,
    regular: Option<bool>,
    reach: Option<f64>,
    vertices: Option<usize>,
}

fn analyze(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let curve = read_curve(path).map_err(input)?;
    let summary = match &curve {
        AnyCurve::Fourier(c) => {
            let a = CurveAnalysis::new(c, DEFAULT_TABLE_SIZE);
            CurveSummary {
                kind: "fourier",
                total_length: a.total_length,
                simple: is_simple(c, 2048),
                max_unsigned_curvature: Some(a.max_unsigned_curvature),
                regular: Some(c.check_regular(2048).is_ok()),
                reach: Some(reach_estimate(c, &a, 512)),
                vertices: None,
            }
        }
        AnyCurve::Polyline(p) => CurveSummary {
            kind: "polyline",
            total_length: p.total_length(),
            simple: p.is_simple(),
            max_unsigned_curvature: None,
            regular: None,
            reach: None,
            vertices: Some(p.len()),
        },
    };
    emit(cli.json, &summary, || {
        let mut s = format!(
            "{} curve, length {:.9}, simple: {}\n",
            summary.kind, summary.total_length, summary.simple
        );
        if let (Some(k), Some(r), Some(reach)) = (summary.max_unsigned_curvature, summary.regular, summary.reach) {
            s += &format!("max unsigned curvature {k:.9}, regular: {r}, reach estimate {reach:.6}\n");
        }
        if let Some(n) = summary.vertices {
            s += &format!("{n} vertices\n");
        }
        s
    })
}

fn square_lines(search: &SquareSearch) -> String {
    let mut s = format!("{} square(s)\n", search.squares.len());
    for (k, sq) in search.squares.iter().enumerate() {
        s += &format!(
            "#{k}: side {:.9}, residual {:.2e}, params [{}]\n",
            sq.sidelength,
            sq.residual_norm,
            sq.params.map(|p| format!("{p:.9}")).join(", ")
        );
        for v in &sq.vertices {
            s += &format!("    ({:.9}, {:.9})\n", v.x, v.y);
        }
    }
    for w in &search.warnings {
        s += &format!("warning: {w:?}\n");
    }
    s
}

fn find_squares_cmd(cli: &Cli, path: &Path, svg: Option<&Path>) -> Result<(), Failure> {
    let curve = read_curve(path).map_err(input)?;
    let found = find_squares(&curve, &search_config(cli));
    if let Some(out) = svg {
        let marks: Vec<SquareMark> = found.squares.iter().map(SquareMark::from).collect();
        write_text(out, &render_svg(&[curve_outline(&curve)], &marks, &[]))?;
    }
    emit(cli.json, &found, || square_lines(&found))
}

#[derive(Serialize)]
struct SquareSize {
    params: [f64; 4],
    sidelength: f64,
    size_identity: f64,
    size_wrt_f: Option<f64>,
}

fn size_cmd(cli: &Cli, path: &Path, onto: Option<&Path>) -> Result<(), Failure> {
    let curve = read_curve(path).map_err(input)?;
    let analysis = CurveAnalysis::new(&curve, DEFAULT_TABLE_SIZE);
    let target = onto.map(read_curve).transpose().map_err(input)?;
    let projection = match &target {
        Some(t) => {
            let f = ParamCorrespondence::from_projection(&curve, t, 2048, "onto").map_err(numerical)?;
            Some((t, CurveAnalysis::new(t, DEFAULT_TABLE_SIZE), f))
        }
        None => None,
    };
    let found = find_squares(&curve, &search_config(cli));
    let mut sizes = Vec::new();
    for sq in &found.squares {
        let size_wrt_f = match &projection {
            Some((t, a, f)) => Some(square_size(&sq.params, *t, a, f).map_err(numerical)?),
            None => None,
        };
        sizes.push(SquareSize {
            params: sq.params,
            sidelength: sq.sidelength,
            size_identity: square_size_identity(&curve, &analysis, &sq.params),
            size_wrt_f,
        });
    }
    emit(cli.json, &sizes, || {
        let mut s = String::new();
        for (k, q) in sizes.iter().enumerate() {
            s += &format!("#{k}: side {:.9}, size (identity) {:.9}", q.sidelength, q.size_identity);
            if let Some(v) = q.size_wrt_f {
                s += &format!(", size (projection) {v:.9}");
            }
            s.push('\n');
        }
        s
    })
}

fn census_text(report: &CensusReport) -> String {
    let mut s = format!(
        "kind {:?}, kappa {:.6}, critical size {:.6} (band ±{:.2e})\n",
        report.kind, report.kappa, report.critical_size, report.band_half_width
    );
    for slice in &report.slices {
        s += &format!(
            "t = {:.4}: {} square(s){}\n",
            slice.t,
            slice.count,
            if slice.odd { "" } else { " (even)" }
        );
    }
    for (k, tr) in report.traces.iter().enumerate() {
        s += &format!(
            "trace {k}: {:?} at t = {:.6} -> {:?} at t = {:.6}, {} samples\n",
            tr.start_event,
            tr.first().t,
            tr.end_event,
            tr.last().t,
            tr.samples.len()
        );
    }
    s += &format!(
        "closest approach to critical size {:.6}, crossings {}, band entries {}, zero events {}\n",
        report.closest_approach,
        report.crossings.len(),
        report.band_entries,
        report.zero_events.len()
    );
    s += &format!(
        "unreached final squares {}, unmatched endpoints {}, unpaired folds {}, perturbations {}\n",
        report.unreached_final_squares, report.unmatched_trace_endpoints, report.unpaired_folds, report.perturbations
    );
    for f in &report.failures {
        s += &format!("failure from t = {}: {}\n", f.start_t, f.error);
    }
    s
}

fn census_cmd(cli: &Cli, path: &Path, times: &[f64], svg_dir: Option<&Path>) -> Result<(), Failure> {
    let (_, h) = read_homotopy(path).map_err(|e| if e.is_input_error() { input(e) } else { numerical(e) })?;
    let config = CensusConfig {
        search: search_config(cli),
        seed: cli.seed,
        ..CensusConfig::default()
    };
    let report = census(&h, times, &config);
    if let Some(dir) = svg_dir {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(input)?;
        for (name, svg) in census_frames(&h, &report) {
            write_text(&dir.join(name), &svg)?;
        }
    }
    emit(cli.json, &report, || census_text(&report))?;
    if report.failures.is_empty() {
        Ok(())
    } else {
        Err(numerical(anyhow!(
            "{} path(s) could not be tracked",
            report.failures.len()
        )))
    }
}

fn report_text(r: &CheckReport) -> String {
    let mut s = format!("{}: {:?}, margin {:.6e}\n", r.check_name, r.verdict, r.margin);
    for (k, v) in &r.hypothesis_values {
        s += &format!("  {k} = {v:.9}\n");
    }
    for (k, v) in &r.diagnostics {
        s += &format!("  [diagnostic] {k} = {v:.9}\n");
    }
    for n in &r.notes {
        s += &format!("  note: {n}\n");
    }
    s
}

fn verify_cmd(cli: &Cli, check: &VerifyCommand) -> Result<(), Failure> {
    let search = search_config(cli);
    let spec = match check {
        VerifyCommand::All { suite } => {
            let report = run_suite(suite, &search).map_err(from_verify)?;
            emit(cli.json, &report, || suite_text(&report))?;
            return verdict_exit(report.violated > 0);
        }
        VerifyCommand::InitialSizeBound { curve } => CheckSpec::InitialSizeBound { curve: curve.clone() },
        VerifyCommand::ChordBound { curve, trials } => CheckSpec::ChordBound {
            curve: curve.clone(),
            trials: *trials,
            seed: cli.seed,
        },
        VerifyCommand::NoIntermediate { alpha, beta } => CheckSpec::NoIntermediate {
            alpha: alpha.clone(),
            beta: beta.clone(),
        },
        VerifyCommand::SmallSquareBound { alpha, beta } => CheckSpec::SmallSquareBound {
            alpha: alpha.clone(),
            beta: beta.clone(),
        },
        VerifyCommand::MainTheorem { gamma, beta } => CheckSpec::MainTheorem {
            gamma: gamma.clone(),
            beta: beta.clone(),
        },
        VerifyCommand::Annulus { inner, outer, beta } => CheckSpec::Annulus {
            inner: *inner,
            outer: *outer,
            beta: beta.clone(),
        },
    };
    let report = spec.run(Path::new("."), &search).map_err(from_verify)?;
    emit(cli.json, &report, || report_text(&report))?;
    verdict_exit(report.verdict == Verdict::Violated)
}

fn suite_text(report: &SuiteReport) -> String {
    let mut s: String = report.reports.iter().map(report_text).collect();
    s += &format!(
        "{} hold, {} violated, {} inapplicable\n",
        report.holds, report.violated, report.inapplicable
    );
    s
}

fn verdict_exit(violated: bool) -> Result<(), Failure> {
    if violated {
        Err(Failure {
            code: VIOLATED,
            error: anyhow!("a check was violated"),
        })
    } else {
        Ok(())
    }
}

fn scenario(cli: &Cli, command: &GenerateCommand) -> Result<ScenarioSpec, Failure> {
    Ok(match command {
        GenerateCommand::Ellipse { axes } => ScenarioSpec::Ellipse { a: axes.a, b: axes.b },
        GenerateCommand::Perturbed {
            axes,
            amplitude,
            harmonics,
        } => ScenarioSpec::Perturbed {
            a: axes.a,
            b: axes.b,
            amplitude: *amplitude,
            harmonics: *harmonics,
            seed: cli.seed,
        },
        GenerateCommand::Peanut { neck } => ScenarioSpec::Peanut { neck: *neck },
        GenerateCommand::NoisyPolyline {
            axes,
            vertices,
            amplitude,
        } => ScenarioSpec::NoisyPolyline {
            a: axes.a,
            b: axes.b,
            vertices: *vertices,
            amplitude: *amplitude,
            seed: cli.seed,
        },
        GenerateCommand::AnnulusStar {
            inner,
            outer,
            points,
            vertices,
        } => ScenarioSpec::AnnulusStar {
            inner: *inner,
            outer: *outer,
            points: *points,
            vertices: *vertices,
        },
        GenerateCommand::Spec { file } => {
            let text = std::fs::read_to_string(file)
                .with_context(|| format!("reading {}", file.display()))
                .map_err(input)?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", file.display()))
                .map_err(input)?
        }
    })
}

fn generate_cmd(cli: &Cli, command: &GenerateCommand, out: &Path) -> Result<(), Failure> {
    let spec = scenario(cli, command)?;
    let curve = generate(&spec).map_err(input)?;
    write_curve(out, &curve).map_err(input)?;
    // the scenario description is echoed so the file can be regenerated
    emit(cli.json, &spec, || format!("{} -> {}\n", spec.name(), out.display()))
}

fn render_cmd(cli: &Cli, path: &Path, out: &Path, no_squares: bool) -> Result<(), Failure> {
    let curve = read_curve(path).map_err(input)?;
    let marks: Vec<SquareMark> = if no_squares {
        Vec::new()
    } else {
        find_squares(&curve, &search_config(cli))
            .squares
            .iter()
            .map(SquareMark::from)
            .collect()
    };
    write_text(out, &render_svg(&[curve_outline(&curve)], &marks, &[]))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Analyze { curve } => analyze(cli, curve),
        Command::FindSquares { curve, svg } => find_squares_cmd(cli, curve, svg.as_deref()),
        Command::Size { curve, onto } => size_cmd(cli, curve, onto.as_deref()),
        Command::Track {
            homotopy,
            svg_dir,
            census,
        } => census_cmd(cli, homotopy, census, svg_dir.as_deref()),
        Command::Census {
            homotopy,
            slices,
            svg_dir,
        } => {
            let n = (*slices).max(2);
            let times: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
            census_cmd(cli, homotopy, &times, svg_dir.as_deref())
        }
        Command::Verify { check } => verify_cmd(cli, check),
        Command::Generate { scenario, out } => {
            let out = out.as_deref().ok_or_else(|| input(anyhow!("generate needs --out")))?;
            generate_cmd(cli, scenario, out)
        }
        Command::Render { curve, out, no_squares } => render_cmd(cli, curve, out, *no_squares),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INPUT } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            // library errors already embed their sources in the message
            let mut message = error.to_string();
            for cause in error.chain().skip(1) {
                let cause = cause.to_string();
                if !message.contains(&cause) {
                    message = format!("{message}: {cause}");
                }
            }
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
