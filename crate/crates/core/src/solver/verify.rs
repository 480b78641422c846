use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Result};
use crate::exponents::{derive_exponents, CknParams};
use crate::radial::{grad_energy, weighted_lq, RadialFunction, RadialGrid};

/// Relative slack allowed above the candidate constant before a sample counts as a violation.
pub const VERIFY_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub c: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub worst_ratio: f64,
    /// Index of the sample attaining `worst_ratio`.
    pub worst_index: Option<usize>,
    /// Samples with ratio above `c (1 + tolerance)`.
    pub violations: usize,
}

fn ratio_with(u: &RadialFunction, params: &CknParams, a: f64) -> f64 {
    let target = weighted_lq(u, params.r, params.s).powf(1.0 / params.r);
    let grad = grad_energy(u, params.p, params.mu).powf(1.0 / params.p);
    let mass = weighted_lq(u, params.q, params.sigma).powf(1.0 / params.q);
    target / (grad.powf(a) * mass.powf(1.0 - a))
}

/// `|u|_{r,s} / (||u||^a |u|_{q,sigma}^{1-a})`.
pub fn ckn_ratio(u: &RadialFunction, params: &CknParams) -> Result<f64> {
    let a = derive_exponents(params)?.a;
    Ok(ratio_with(u, params, a))
}

/// Ratios of the given profiles against `c`.
pub fn verify_profiles<'a>(
    params: &CknParams,
    profiles: impl IntoIterator<Item = &'a RadialFunction>,
    c: f64,
) -> Result<VerifyReport> {
    ensure_positive("C", c)?;
    let a = derive_exponents(params)?.a;
    let mut report = VerifyReport {
        c,
        tolerance: VERIFY_TOLERANCE,
        samples: 0,
        worst_ratio: 0.0,
        worst_index: None,
        violations: 0,
    };
    for (i, u) in profiles.into_iter().enumerate() {
        let ratio = ratio_with(u, params, a);
        report.samples += 1;
        if ratio.is_finite() && ratio > report.worst_ratio {
            report.worst_ratio = ratio;
            report.worst_index = Some(i);
        }
        if ratio > c * (1.0 + VERIFY_TOLERANCE) {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// Checks `c` against `n_samples` seeded random radial profiles.
///
/// Each sample is drawn from one of three families in `tau = ln|x|`:
/// a mixture of one to three Gaussian bumps, a power law
/// `(1 + (|x|/x0)^k)^{-m}` under a broad Gaussian window, or a stretched
/// exponential `exp(-(|x|/x0)^k)`.
pub fn verify_inequality(
    params: &CknParams,
    grid: &RadialGrid,
    c: f64,
    n_samples: usize,
    seed: u64,
) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profiles: Vec<RadialFunction> = (0..n_samples).map(|_| random_profile(grid, &mut rng)).collect();
    verify_profiles(params, &profiles, c)
}

pub(crate) fn random_profile(grid: &RadialGrid, rng: &mut impl Rng) -> RadialFunction {
    let values: Vec<f64> = match rng.random_range(0..3u8) {
        0 => {
            let bumps: Vec<(f64, f64, f64)> = (0..rng.random_range(1..=3))
                .map(|_| {
                    (
                        rng.random_range(0.2..1.0),
                        rng.random_range(-4.0..4.0),
                        rng.random_range(0.3..2.5),
                    )
                })
                .collect();
            grid.taus()
                .map(|t| {
                    bumps
                        .iter()
                        .map(|&(w, c, s)| w * (-0.5 * ((t - c) / s).powi(2)).exp())
                        .sum()
                })
                .collect()
        }
        1 => {
            let ln_x0 = rng.random_range(-2.0..2.0);
            let k = rng.random_range(1.0..4.0);
            let m = rng.random_range(0.5..3.0);
            let center = rng.random_range(-2.0..2.0);
            let window = rng.random_range(3.0..6.0);
            grid.taus()
                .map(|t| {
                    let z: f64 = (k * (t - ln_x0)).exp();
                    (1.0 + z).powf(-m) * (-0.5 * ((t - center) / window).powi(2)).exp()
                })
                .collect()
        }
        _ => {
            let ln_x0 = rng.random_range(-2.0..2.0);
            let k = rng.random_range(0.5..3.0);
            grid.taus().map(|t| (-(k * (t - ln_x0)).exp()).exp()).collect()
        }
    };
    RadialFunction::from_raw(*grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_ignores_amplitude() {
        let grid = RadialGrid::full_space(801, 3).unwrap();
        let u = RadialFunction::from_fn(grid, |t| (-t * t / 4.0).exp()).unwrap();
        let params = CknParams::REFERENCE;
        let a = ckn_ratio(&u, &params).unwrap();
        let b = ckn_ratio(&u.scaled(37.0), &params).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn huge_constant_has_no_violations() {
        let grid = RadialGrid::full_space(801, 3).unwrap();
        let report = verify_inequality(&CknParams::REFERENCE, &grid, 1e6, 50, 3).unwrap();
        assert_eq!(report.samples, 50);
        assert_eq!(report.violations, 0);
        assert!(report.worst_ratio > 0.0);
    }

    #[test]
    fn sampling_is_seeded() {
        let grid = RadialGrid::full_space(401, 3).unwrap();
        let a = verify_inequality(&CknParams::REFERENCE, &grid, 1.0, 20, 11).unwrap();
        let b = verify_inequality(&CknParams::REFERENCE, &grid, 1.0, 20, 11).unwrap();
        assert_eq!(a, b);
    }
}
