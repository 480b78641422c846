#![allow(dead_code)]

use ckn_core::{validate_ckn, CknParams, RadialFunction, RadialGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rejection-samples tuples that pass validation.
pub fn valid_tuples(count: usize, seed: u64) -> Vec<CknParams> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let dim = rng.random_range(2..=6u32);
        let n = f64::from(dim);
        let p = rng.random_range(1.05..n);
        let mu = rng.random_range(-0.5..(n - p));
        let sigma = rng.random_range(-0.5..(mu + p));
        let s = rng.random_range(0.0..(mu + p));
        let q = rng.random_range(1.0..8.0);
        let r = rng.random_range(1.0..10.0);
        let params = CknParams::new(dim, p, q, r, mu, sigma, s);
        if validate_ckn(&params).valid {
            out.push(params);
        }
    }
    out
}

/// `|a - b| <= tol * max(scale, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * scale.max(a.abs()).max(b.abs())
}

/// Sum of a few Gaussian bumps in `tau` centred well inside `[lo, hi]`.
pub fn random_bumps(grid: &RadialGrid, rng: &mut impl Rng, lo: f64, hi: f64) -> RadialFunction {
    let bumps: Vec<(f64, f64, f64)> = (0..rng.random_range(1..=3))
        .map(|_| {
            (
                rng.random_range(0.3..1.5),
                rng.random_range(lo..hi),
                rng.random_range(0.5..1.5),
            )
        })
        .collect();
    RadialFunction::from_fn(*grid, |t| {
        bumps
            .iter()
            .map(|&(w, c, s)| w * (-0.5 * ((t - c) / s).powi(2)).exp())
            .sum()
    })
    .unwrap()
}
