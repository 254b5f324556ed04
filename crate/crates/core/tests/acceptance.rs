//! Acceptance criteria 1 to 10, one PASS/FAIL line each. Exits non-zero if
//! any criterion fails.

mod common;

use common::{curve_suite, perturbed, small_suite};
use rayon::prelude::*;
use squarepeg::cli_io::{make_fingered_circle, make_peanut, noisy_polyline};
use squarepeg::continuation::{census, CensusConfig, Homotopy, TraceEvent};
use squarepeg::curves::{is_simple, make_ellipse, CurveAnalysis, DEFAULT_TABLE_SIZE};
use squarepeg::size_metric::{square_size_identity, ParamCorrespondence};
use squarepeg::squares::{brute_force_oracle, find_all_squares, newton_refine, SearchConfig, SquareCandidate};
use squarepeg::verify::{
    certify_main_theorem, check_chord_bound, check_initial_size_bound, check_small_square_bound,
    check_small_square_bounds, chord_after_arc, zero_square_arithmetic, Verdict, Witness, ANALYSIS_SAMPLES,
};
use squarepeg::FourierCurve;
use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.1?}, limit {limit:?}"))
}

fn ellipse_golden_case() -> Outcome {
    let clock = Instant::now();
    let found = find_all_squares(&make_ellipse(2.0, 1.0), &SearchConfig::default());
    let elapsed = clock.elapsed();
    ensure(found.squares.len() == 1, || format!("{} squares", found.squares.len()))?;
    let sq = &found.squares[0];
    let side = 4.0 / 5f64.sqrt();
    ensure((sq.sidelength - side).abs() < 1e-6, || {
        format!("side {}", sq.sidelength)
    })?;
    let c = 2.0 / 5f64.sqrt();
    let vertex_err = sq
        .vertices
        .iter()
        .map(|v| (v.x.abs() - c).abs().max((v.y.abs() - c).abs()))
        .fold(0.0, f64::max);
    ensure(vertex_err < 1e-6, || format!("vertex error {vertex_err:e}"))?;
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!(
        "side {:.9}, vertex error {vertex_err:.1e}, {elapsed:.2?}",
        sq.sidelength
    ))
}

fn parity_suite() -> Outcome {
    let clock = Instant::now();
    let mut counts = Vec::new();
    for k in 0..20u64 {
        let a = [1.1, 1.3, 1.6, 2.0][k as usize % 4];
        let amp = 0.01 * (1 + k % 5) as f64;
        let harmonics = 2 + (k % 5) as usize;
        let c = perturbed(a, amp, harmonics, 1000 + k);
        ensure(is_simple(&c, 2048) && c.check_regular(2048).is_ok(), || {
            format!("curve {k} not admissible")
        })?;
        let n = find_all_squares(&c, &SearchConfig::default()).squares.len();
        ensure(n % 2 == 1, || {
            format!("curve {k} (a {a}, amp {amp}, seed {}) has {n} squares", 1000 + k)
        })?;
        counts.push(n);
    }
    let elapsed = clock.elapsed();
    within(elapsed, Duration::from_secs(120))?;
    Ok(format!("counts {counts:?}, {elapsed:.1?}"))
}

fn initial_size_bound() -> Outcome {
    let suite = curve_suite();
    let results: Vec<(String, f64, Verdict, usize)> = suite
        .par_iter()
        .map(|c| {
            let r = check_initial_size_bound(&c.curve, &SearchConfig::default());
            (c.name.clone(), r.margin, r.verdict, r.witnesses.len())
        })
        .collect();
    let mut squares = 0;
    let mut worst = f64::INFINITY;
    for (name, margin, verdict, n) in &results {
        ensure(*verdict == Verdict::Holds && *margin >= -1e-6, || {
            format!("{name}: {verdict:?}, margin {margin}")
        })?;
        squares += n;
        worst = worst.min(*margin);
    }
    ensure(results.iter().any(|r| r.0.starts_with("peanut")), || {
        "peanut missing".into()
    })?;
    Ok(format!(
        "{} curves, {squares} squares, smallest margin {worst:.6}",
        results.len()
    ))
}

fn chord_bound() -> Outcome {
    let circle = squarepeg::curves::make_circle(1.0);
    let analysis = CurveAnalysis::new(&circle, ANALYSIS_SAMPLES);
    let (_, length, chord) = chord_after_arc(&circle, &analysis, 0.0, PI / 4.0);
    ensure((chord - 0.765_367).abs() < 1e-6, || format!("circle chord {chord}"))?;
    ensure((length / SQRT_2 - 0.555_360).abs() < 1e-6, || {
        format!("circle bound {}", length / SQRT_2)
    })?;
    let suite = curve_suite();
    let total = 10_000;
    let per_curve = total / suite.len();
    let extra = total - per_curve * suite.len();
    let margins: Vec<(String, f64)> = suite
        .par_iter()
        .enumerate()
        .map(|(k, c)| {
            let trials = per_curve + usize::from(k < extra);
            (c.name.clone(), check_chord_bound(&c.curve, trials, 7 + k as u64).margin)
        })
        .collect();
    let (name, worst) = margins
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .cloned()
        .unwrap_or_default();
    ensure(worst >= -1e-9, || format!("{name}: margin {worst:e}"))?;
    Ok(format!(
        "circle chord {chord:.6} vs {:.6}; {total} arcs on {} curves, smallest margin {worst:.6} ({name})",
        length / SQRT_2,
        suite.len()
    ))
}

struct Pair {
    name: String,
    alpha: FourierCurve,
    beta: FourierCurve,
}

fn small_square_pairs() -> Vec<Pair> {
    let mut pairs = Vec::new();
    for k in 0..6u64 {
        let a = [1.5, 2.0, 3.0][k as usize % 3];
        let beta = if k < 3 {
            make_ellipse(a, 1.0)
        } else {
            perturbed(a, 0.02, 5, 300 + k)
        };
        let alpha = squarepeg::curves::perturb_fourier(&beta, 0.002, 8, 400 + k).expect("perturbation accepted");
        pairs.push(Pair {
            name: format!("pair {k} (a {a})"),
            alpha,
            beta,
        });
    }
    pairs.push(Pair {
        name: "peanut 0.1 near peanut 0.12".into(),
        alpha: make_peanut(0.1),
        beta: make_peanut(0.12),
    });
    pairs.push(Pair {
        name: "ellipse against itself".into(),
        alpha: make_ellipse(2.0, 1.0),
        beta: make_ellipse(2.0, 1.0),
    });
    pairs.push(Pair {
        name: "scaled ellipse".into(),
        alpha: make_ellipse(2.0, 1.0).scaled(1.02),
        beta: make_ellipse(2.0, 1.0),
    });
    pairs
}

fn small_square_bound() -> Outcome {
    let (lhs, rhs) = zero_square_arithmetic(1.0);
    ensure(
        lhs < rhs && (lhs - 0.29284).abs() < 1e-5 && (rhs - FRAC_PI_4).abs() < 1e-12,
        || format!("arithmetic {lhs} vs {rhs}"),
    )?;
    let mut lines = Vec::new();
    let mut worst = f64::INFINITY;
    for pair in small_square_pairs() {
        let f =
            ParamCorrespondence::from_projection(&pair.alpha, &pair.beta, 2048, "beta").map_err(|e| e.to_string())?;
        let r = check_small_square_bounds(&pair.alpha, &pair.beta, &f, &SearchConfig::default());
        ensure(r.verdict == Verdict::Holds, || {
            format!("{}: {:?} {:?}", pair.name, r.verdict, r.notes)
        })?;
        worst = worst.min(r.margin);
        lines.push(r.witnesses.len());
    }
    // the tenth pair: a thin finger on a circle carries a square of
    // near-zero identity size
    let finger = make_fingered_circle(0.04, 0.045);
    let circle = squarepeg::curves::make_circle(1.0);
    let f = ParamCorrespondence::from_projection(&finger.curve, &circle, 2048, "circle").map_err(|e| e.to_string())?;
    let sq = newton_refine(&finger.curve, finger.square_seed, 1e-11, 60).map_err(|e| e.to_string())?;
    let r = check_small_square_bound(&finger.curve, &circle, &f, &sq);
    ensure(r.verdict == Verdict::Holds, || {
        format!("finger: {:?} {:?}", r.verdict, r.notes)
    })?;
    worst = worst.min(r.margin);
    Ok(format!(
        "10 pairs, squares per pair {lines:?} + 1 finger square (rho {:.4}), smallest margin {worst:.6}; {lhs:.5} < {rhs:.5}",
        r.hypothesis_values["rho"]
    ))
}

fn no_intermediate_band() -> Outcome {
    let beta = make_ellipse(1.02, 1.0);
    let kappa = CurveAnalysis::new(&beta, DEFAULT_TABLE_SIZE).max_unsigned_curvature;
    let eta = 1.0 / (10.0 * kappa);
    let times: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let mut summary = Vec::new();
    let mut folds = 0;
    for seed in 1..=10u64 {
        let end = squarepeg::curves::perturb_fourier(&beta, 0.012, 6, seed).map_err(|e| e.to_string())?;
        let f = ParamCorrespondence::from_projection(&end, &beta, 512, "start").map_err(|e| e.to_string())?;
        ensure(f.max_displacement < eta, || {
            format!("seed {seed}: displacement {}", f.max_displacement)
        })?;
        let h = Homotopy::two_step(&beta, &end, &f, eta).map_err(|e| format!("seed {seed}: {e}"))?;
        let r = census(&h, &times, &CensusConfig::default());
        ensure(r.failures.is_empty(), || {
            format!("seed {seed}: {} tracking failures", r.failures.len())
        })?;
        ensure(r.band_entries == 0 && r.crossings.is_empty(), || {
            format!(
                "seed {seed}: {} band entries, {} crossings",
                r.band_entries,
                r.crossings.len()
            )
        })?;
        folds += r
            .traces
            .iter()
            .filter(|t| t.start_event.is_fold() || t.end_event.is_fold())
            .count();
        summary.push(format!("{:.3}", r.closest_approach / r.critical_size));
    }
    Ok(format!(
        "closest approach / critical size per homotopy [{}], {folds} fold-ended traces",
        summary.join(", ")
    ))
}

fn oracle_equivalence() -> Outcome {
    let suite = small_suite();
    let results: Vec<Result<usize, String>> = suite
        .par_iter()
        .map(|c| {
            let fast = find_all_squares(&c.curve, &SearchConfig::default()).squares;
            let slow = brute_force_oracle(&c.curve, 64);
            if fast.len() != slow.len() {
                return Err(format!("{}: {} vs {} squares", c.name, fast.len(), slow.len()));
            }
            // bijective: each fast square has a distinct oracle partner
            let mut used = vec![false; slow.len()];
            for sq in &fast {
                let partner = (0..slow.len())
                    .filter(|&j| !used[j])
                    .min_by(|&a, &b| sq.vertex_distance(&slow[a]).total_cmp(&sq.vertex_distance(&slow[b])));
                match partner {
                    Some(j) if sq.vertex_distance(&slow[j]) <= 1e-4 => used[j] = true,
                    _ => return Err(format!("{}: unmatched square of side {}", c.name, sq.sidelength)),
                }
            }
            Ok(fast.len())
        })
        .collect();
    let counts = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(format!("{} curves, square counts {counts:?}", counts.len()))
}

fn track_to(end_curve: &FourierCurve, seed: u64) -> Result<String, String> {
    let start = make_ellipse(1.5, 1.0);
    let h = Homotopy::linear(&start, end_curve, seed).map_err(|e| e.to_string())?;
    let times: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let r = census(&h, &times, &CensusConfig::default());
    ensure(r.failures.is_empty(), || {
        format!("{} tracking failures", r.failures.len())
    })?;
    ensure(r.endpoints_consistent(), || {
        format!(
            "{} unreached final squares, {} unmatched endpoints",
            r.unreached_final_squares, r.unmatched_trace_endpoints
        )
    })?;
    // independent of the census bookkeeping: every square of the final curve
    // is the t = 1 endpoint of some trace, and conversely
    let finals = find_all_squares(&h.slice(1.0), &SearchConfig::default()).squares;
    let arrived: Vec<_> = r
        .traces
        .iter()
        .filter(|t| t.end_event == TraceEvent::ReachedT1)
        .map(|t| &t.last().square)
        .collect();
    // the finder's default deduplication tolerance
    let dedup = 1e-6 * CurveAnalysis::new(end_curve, DEFAULT_TABLE_SIZE).total_length;
    let close = |a: &SquareCandidate, b: &SquareCandidate| a.vertex_distance(b) <= dedup;
    ensure(finals.len() == arrived.len(), || {
        format!("{} final squares, {} arrivals", finals.len(), arrived.len())
    })?;
    ensure(finals.iter().all(|f| arrived.iter().any(|a| close(f, a))), || {
        "final square never reached".into()
    })?;
    ensure(arrived.iter().all(|a| finals.iter().any(|f| close(f, a))), || {
        "arrival is not a final square".into()
    })?;
    let labels_ok = r
        .traces
        .iter()
        .all(|t| t.start_event.is_start_label() && t.end_event.is_end_label());
    ensure(labels_ok, || "trace with a misplaced label".into())?;
    ensure(r.unpaired_folds == 0, || format!("{} unpaired folds", r.unpaired_folds))?;
    let folds = r
        .traces
        .iter()
        .map(|t| usize::from(t.start_event.is_fold()) + usize::from(t.end_event.is_fold()))
        .sum::<usize>();
    Ok(format!(
        "{} traces, {} final squares, {folds} fold endpoints",
        r.traces.len(),
        finals.len()
    ))
}

fn continuation_consistency() -> Outcome {
    let mild = track_to(&perturbed(1.5, 0.05, 6, 7), 7).map_err(|e| format!("mild end curve: {e}"))?;
    let rich = track_to(&perturbed(1.1, 0.05, 6, 1004), 8).map_err(|e| format!("five-square end curve: {e}"))?;
    Ok(format!("mild end curve: {mild}; five-square end curve: {rich}"))
}

fn peanut_demonstration() -> Outcome {
    let p = make_peanut(0.1);
    let analysis = CurveAnalysis::new(&p, ANALYSIS_SAMPLES);
    let kappa = analysis.max_unsigned_curvature;
    let squares = find_all_squares(&p, &SearchConfig::default()).squares;
    let neck = squares
        .iter()
        .filter(|s| s.sidelength < 0.2)
        .map(|s| (s.sidelength, square_size_identity(&p, &analysis, &s.params)))
        .next();
    let Some((side, size)) = neck else {
        return Err(format!("no short square among {} squares", squares.len()));
    };
    ensure(size >= PI / kappa, || format!("size {size} below π/κ = {}", PI / kappa))?;
    Ok(format!(
        "kappa {kappa:.5}, side {side:.5} < 0.2, size {size:.5} >= pi/kappa = {:.5}",
        PI / kappa
    ))
}

fn main_theorem() -> Outcome {
    let gamma = make_ellipse(2.0, 1.0);
    let mut lines = Vec::new();
    for seed in 1..=5u64 {
        let clock = Instant::now();
        let beta = noisy_polyline(&gamma, 400, 0.02, seed).map_err(|e| e.to_string())?;
        let r = certify_main_theorem(&gamma, &beta, &SearchConfig::default()).map_err(|e| e.to_string())?;
        let elapsed = clock.elapsed();
        ensure(r.verdict == Verdict::Holds, || {
            format!("seed {seed}: {:?} {:?}", r.verdict, r.notes)
        })?;
        let displacement = r.hypothesis_values["displacement"];
        ensure(
            displacement <= 0.02 + 1e-12 && r.hypothesis_values["degree"] == 1.0,
            || format!("seed {seed}: displacement {displacement}"),
        )?;
        let side = r
            .witnesses
            .iter()
            .filter_map(|w| match w {
                Witness::Square { square, .. } => Some(square.sidelength),
                Witness::Arc { .. } => None,
            })
            .fold(0.0, f64::max);
        ensure(side > 0.0, || format!("seed {seed}: no square witness"))?;
        within(elapsed, Duration::from_secs(60))?;
        lines.push(format!(
            "seed {seed}: disp {displacement:.4}, side {side:.4}, {elapsed:.1?}"
        ));
    }
    Ok(lines.join("; "))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("ellipse golden case", ellipse_golden_case),
        ("parity suite", parity_suite),
        ("initial size bound", initial_size_bound),
        ("chord bound", chord_bound),
        ("small square bound", small_square_bound),
        ("no intermediate band", no_intermediate_band),
        ("oracle equivalence", oracle_equivalence),
        ("continuation consistency", continuation_consistency),
        ("peanut demonstration", peanut_demonstration),
        ("end-to-end main theorem", main_theorem),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let clock = Instant::now();
        let outcome = run();
        let elapsed = clock.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS [{elapsed:.1?}] {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL [{elapsed:.1?}] {detail}", k + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
