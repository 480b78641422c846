//! Shared fixtures for the benchmarks.

use ckn_core::{CknParams, RadialFunction, RadialGrid};

pub const REFERENCE: CknParams = CknParams::REFERENCE;

/// A non-quadratic tuple, so the benchmarks also cover the regularized flux.
pub const P3: CknParams = CknParams {
    dim: 4,
    p: 3.0,
    q: 2.0,
    r: 3.0,
    mu: 0.0,
    sigma: 0.0,
    s: 1.0,
};

pub fn grid(n: usize, dim: u32) -> RadialGrid {
    RadialGrid::full_space(n, dim).expect("default bounds form a valid grid")
}

/// `sech(tau/2)^2` tapered to zero at both ends of the grid.
pub fn profile(grid: RadialGrid) -> RadialFunction {
    let (lo, hi) = (grid.tau_min(), grid.tau_max());
    RadialFunction::from_fn(grid, |t| {
        let taper = (1.0 - (t - hi).exp()) * (1.0 - (lo - t).exp());
        taper / (0.5 * t).cosh().powi(2)
    })
    .expect("profile vanishes at the ends")
}
