//! Curve families shared by the integration tests.
#![allow(dead_code)]

use squarepeg::cli_io::make_peanut;
use squarepeg::curves::{make_circle, make_ellipse, perturb_fourier};
use squarepeg::FourierCurve;

pub struct Named {
    pub name: String,
    pub curve: FourierCurve,
}

fn named(name: String, curve: FourierCurve) -> Named {
    Named { name, curve }
}

/// Perturbed ellipse `(a, 1)`; panics if the seed is rejected.
pub fn perturbed(a: f64, amplitude: f64, harmonics: usize, seed: u64) -> FourierCurve {
    perturb_fourier(&make_ellipse(a, 1.0), amplitude, harmonics, seed).expect("perturbation accepted")
}

/// Thirty-one smooth Jordan curves: a circle, four ellipses, three peanuts
/// and twenty-three perturbed ellipses.
pub fn curve_suite() -> Vec<Named> {
    let mut suite = vec![named("circle".into(), make_circle(1.0))];
    for a in [1.2, 1.5, 2.0, 3.0] {
        suite.push(named(format!("ellipse({a},1)"), make_ellipse(a, 1.0)));
    }
    for neck in [0.1, 0.2, 0.4] {
        suite.push(named(format!("peanut({neck})"), make_peanut(neck)));
    }
    for k in 0..23u64 {
        let a = [1.2, 1.5, 2.0][k as usize % 3];
        let amp = 0.01 + 0.01 * (k % 5) as f64;
        let seed = 100 + k;
        suite.push(named(
            format!("perturbed({a},{amp},6,{seed})"),
            perturbed(a, amp, 6, seed),
        ));
    }
    suite
}

/// Ten curves small enough for the brute-force oracle, two of them near
/// circles with several squares.
pub fn small_suite() -> Vec<Named> {
    let mut suite = Vec::new();
    for a in [1.5, 2.0, 3.0] {
        suite.push(named(format!("ellipse({a},1)"), make_ellipse(a, 1.0)));
    }
    suite.push(named(
        "perturbed(1.1,0.05,6,1004)".into(),
        perturbed(1.1, 0.05, 6, 1004),
    ));
    suite.push(named("peanut(0.2)".into(), make_peanut(0.2)));
    for k in 0..5u64 {
        let a = [1.5, 2.0, 3.0][k as usize % 3];
        let amp = 0.02 + 0.005 * k as f64;
        suite.push(named(
            format!("perturbed({a},{amp},5,{})", 200 + k),
            perturbed(a, amp, 5, 200 + k),
        ));
    }
    suite
}
