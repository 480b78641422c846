use rayon::prelude::*;

use crate::error::Result;
use crate::exponents::CknParams;
use crate::radial::RadialGrid;

use super::{minimize_rho, MinimizeResult, SolverOptions};

/// Solves every tuple in parallel. Results keep the input order; a tuple that
/// fails validation or whose solve errors yields `Err` in its slot and does
/// not affect the others. The grid dimension follows each tuple's `N`.
pub fn parameter_sweep(params: &[CknParams], grid: &RadialGrid, opts: &SolverOptions) -> Vec<Result<MinimizeResult>> {
    params
        .par_iter()
        .map(|p| minimize_rho(p, &grid.with_dim(p.dim)?, opts))
        .collect()
}
