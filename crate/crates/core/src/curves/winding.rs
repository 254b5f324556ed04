use super::CurveError;
use crate::geom::angle_diff;
use std::f64::consts::{PI, TAU};

/// Successive lifted samples must differ by less than `π - LIFT_TOLERANCE`.
pub const LIFT_TOLERANCE: f64 = 1e-6;

/// Degree of a circle map given its values on a uniform grid of the source
/// circle.
///
/// Successive samples (including the closing step from the last back to the
/// first) are lifted with increments in `(-π, π]`; the degree is the total
/// lift divided by 2π.
pub fn winding_degree(samples: &[f64]) -> Result<i32, CurveError> {
    let n = samples.len();
    if n < 2 {
        return Ok(0);
    }
    let mut total = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        let inc = angle_diff(samples[i], samples[j]);
        if inc.abs() >= PI - LIFT_TOLERANCE {
            return Err(CurveError::LiftAmbiguity {
                index: i,
                next: j,
                gap: inc.abs(),
            });
        }
        total += inc;
    }
    Ok((total / TAU).round() as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|k| TAU * k as f64 / n as f64).collect()
    }

    #[test]
    fn identity_reversal_doubling() {
        let s = grid(64);
        assert_eq!(winding_degree(&s).unwrap(), 1);
        assert_eq!(winding_degree(&s.iter().map(|x| -x).collect::<Vec<_>>()).unwrap(), -1);
        assert_eq!(
            winding_degree(&s.iter().map(|x| 2.0 * x).collect::<Vec<_>>()).unwrap(),
            2
        );
        assert_eq!(winding_degree(&[0.3; 10]).unwrap(), 0);
    }

    #[test]
    fn coarse_sampling_is_rejected() {
        let s: Vec<f64> = grid(4).iter().map(|x| 2.0 * x).collect();
        assert!(matches!(winding_degree(&s), Err(CurveError::LiftAmbiguity { .. })));
    }

    proptest! {
        #[test]
        fn orientation_preserving_reparametrization_keeps_degree(
            amp in 0.0f64..0.9, phase in 0.0f64..TAU, degree in -3i32..=3
        ) {
            // s ↦ s + amp·sin(s + phase) is an orientation-preserving
            // diffeomorphism of the circle for amp < 1
            let n = 256;
            let samples: Vec<f64> = grid(n)
                .iter()
                .map(|&s| degree as f64 * (s + amp * (s + phase).sin()))
                .collect();
            prop_assert_eq!(winding_degree(&samples).unwrap(), degree);
        }
    }
}
