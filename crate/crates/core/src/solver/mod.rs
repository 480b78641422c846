//! Constrained minimization on the log-radial grid.
//!
//! [`minimize_rho`] computes the level
//! `rho = inf { ||u||^p + lambda* |u|_{q,sigma}^q : |u|_{r,s} = 1 }` over
//! radial profiles, from which the candidate sharp constant follows in closed
//! form. The computed level is an upper bound for the infimum over all
//! functions, so `c_sharp` is a lower bound for the sharp constant.

mod descent;
mod eigen;
mod sweep;
mod verify;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{derive_exponents, lagrange_multiplier, sharp_constant_from_rho, CknParams};
use crate::radial::{add_grad_gradient, add_lq_gradient, RadialFunction, RadialGrid};

pub use eigen::{first_eigenvalue, first_eigenvalue_from, EigenProblem, EigenResult};
pub use sweep::parameter_sweep;
pub use verify::{ckn_ratio, verify_inequality, verify_profiles, VerifyReport, VERIFY_TOLERANCE};

use descent::{descend, Functional, Rescaling};

/// Relative amplitude of the seeded perturbation added to initial profiles.
const INIT_PERTURBATION: f64 = 1e-2;
const INIT_MODES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub max_iters: usize,
    pub step0: f64,
    pub armijo_c: f64,
    pub armijo_shrink: f64,
    /// Stop when the energy decreased by less than this (relative) over 10 iterations.
    pub tol_energy: f64,
    /// Stop when the normalized projected gradient falls below this.
    pub tol_grad: f64,
    /// Iterations between optimal dilations; 0 disables them.
    pub rescale_every: usize,
    pub seed: u64,
    /// Slope regularization of the p-energy; `None` picks 0 for `p = 2` and `1e-8` otherwise.
    pub eps_reg: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 50_000,
            step0: 1.0,
            armijo_c: 1e-4,
            armijo_shrink: 0.5,
            tol_energy: 1e-10,
            tol_grad: 1e-8,
            rescale_every: 5,
            seed: 0,
            eps_reg: None,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.max_iters < 1 {
            bad.push("max_iters>=1");
        }
        if !(self.step0 > 0.0 && self.step0.is_finite()) {
            bad.push("step0>0");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            bad.push("0<armijo_c<1");
        }
        if !(self.armijo_shrink > 0.0 && self.armijo_shrink < 1.0) {
            bad.push("0<armijo_shrink<1");
        }
        if self.tol_energy.is_nan() || self.tol_energy <= 0.0 {
            bad.push("tol_energy>0");
        }
        if self.tol_grad.is_nan() || self.tol_grad <= 0.0 {
            bad.push("tol_grad>0");
        }
        if let Some(eps) = self.eps_reg {
            if !(eps >= 0.0 && eps.is_finite()) {
                bad.push("eps_reg>=0");
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Options(bad.join(", ")))
        }
    }

    pub fn eps_for(&self, p: f64) -> f64 {
        self.eps_reg.unwrap_or(if p == 2.0 { 0.0 } else { 1e-8 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    EnergyStalled,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizeResult {
    pub params: CknParams,
    pub lambda_star: f64,
    pub rho: f64,
    pub c_sharp: f64,
    /// Euler-Lagrange multiplier.
    pub lagrange: f64,
    /// Normalized weak-form residual; `None` when `q <= 1` or `r <= 1`.
    pub el_residual: Option<f64>,
    /// `|a' A - b' lambda* B| / (a' A)`.
    pub balance_residual: f64,
    /// `|p A + q lambda* B - lagrange| / lagrange`.
    pub multiplier_residual: f64,
    pub grad_term: f64,
    pub q_term: f64,
    pub projected_gradient: f64,
    /// Share of the gradient term carried by the two Dirichlet end cells; a
    /// large value means the grid truncation, not the profile, sets the energy.
    pub boundary_share: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub energy_trace: Vec<f64>,
    #[serde(skip)]
    pub profile: RadialFunction,
}

/// Seeded, positive, interior-supported starting profile `base(tau) (1 + small wobble)`.
pub(crate) fn initial_profile(grid: &RadialGrid, seed: u64, base: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps: Vec<f64> = (0..INIT_MODES).map(|_| rng.random_range(-1.0..1.0)).collect();
    let width = grid.tau_max() - grid.tau_min();
    let mut values: Vec<f64> = grid
        .taus()
        .map(|t| {
            let x = (t - grid.tau_min()) / width;
            let wobble: f64 = amps
                .iter()
                .enumerate()
                .map(|(k, a)| a * ((k + 1) as f64 * PI * x).sin())
                .sum();
            base(t) * (1.0 + INIT_PERTURBATION / INIT_MODES as f64 * wobble)
        })
        .collect();
    let n = values.len();
    values[0] = 0.0;
    values[n - 1] = 0.0;
    values
}

/// Gradient energy in the first and last cells.
fn boundary_share(grid: &RadialGrid, values: &[f64], p: f64, mu: f64) -> f64 {
    let w = grid.cell_weights(p, mu);
    let n = values.len();
    let h = grid.h();
    (values[1] / h).abs().powf(p) * w[0] + (values[n - 2] / h).abs().powf(p) * w[n - 2]
}

fn gaussian_bump(tau: f64) -> f64 {
    (-tau * tau / 8.0).exp()
}

/// Minimizes `I*(u, lambda*)` over `|u|_{r,s} = 1` from a seeded Gaussian bump in `tau`.
pub fn minimize_rho(params: &CknParams, grid: &RadialGrid, opts: &SolverOptions) -> Result<MinimizeResult> {
    let init = RadialFunction::from_raw(*grid, initial_profile(grid, opts.seed, gaussian_bump));
    minimize_rho_from(params, &init, opts)
}

pub fn minimize_rho_from(params: &CknParams, init: &RadialFunction, opts: &SolverOptions) -> Result<MinimizeResult> {
    let ex = derive_exponents(params)?;
    opts.validate()?;
    let grid = *init.grid();
    if grid.dim() != params.dim {
        return Err(Error::Grid(format!(
            "grid dimension {} does not match N = {}",
            grid.dim(),
            params.dim
        )));
    }
    let lambda = ex.lambda_star;
    let f = Functional::new(
        grid,
        params.p,
        params.mu,
        opts.eps_for(params.p),
        lambda,
        params.q,
        params.sigma,
        params.r,
        params.s,
    );
    let rescaling = Rescaling {
        a_prime: ex.a_prime,
        b_prime: ex.b_prime,
        amplitude_exp: (params.n() - params.s) / params.r,
        every: opts.rescale_every,
    };
    let out = descend(&f, init.values().to_vec(), opts, Some(&rescaling))?;
    let converged = out.converged();

    let values: Vec<f64> = out.values.iter().map(|v| v.abs()).collect();
    let mut trace = out.trace;
    let rho = f.value(&values);
    if trace.last().is_some_and(|&last| rho < last) {
        trace.push(rho);
    }
    let (grad_term, q_term) = f.parts(&values);
    let boundary_share = boundary_share(&grid, &values, params.p, params.mu) / grad_term;
    let profile = RadialFunction::from_raw(grid, values);

    let lagrange = lagrange_multiplier(params, rho)?;
    let el = el_residual(params, &profile, rho)?;
    let balance_residual = (ex.a_prime * grad_term - ex.b_prime * lambda * q_term).abs() / (ex.a_prime * grad_term);
    let multiplier_residual = (params.p * grad_term + params.q * lambda * q_term - lagrange).abs() / lagrange;

    Ok(MinimizeResult {
        params: *params,
        lambda_star: lambda,
        rho,
        c_sharp: sharp_constant_from_rho(params, rho)?,
        lagrange,
        el_residual: el.value,
        balance_residual,
        multiplier_residual,
        grad_term,
        q_term,
        projected_gradient: out.residual,
        boundary_share,
        iterations: out.iterations,
        converged,
        stop_reason: out.stop,
        energy_trace: trace,
        profile,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElResidual {
    /// Largest weak-form residual over interior hat functions relative to the
    /// largest single term; `None` when `q <= 1` or `r <= 1`.
    pub value: Option<f64>,
    pub r_norm: f64,
    /// `|r_norm - 1| <= 1e-8`.
    pub on_constraint: bool,
}

/// Weak-form Euler-Lagrange residual at `u` tested against every interior hat function:
///
/// ```text
/// <|u'|^{p-2} u' w_mu, phi'> + (q lambda*/p) <|u|^{q-2} u w_sigma, phi> - (lagrange/p) <|u|^{r-2} u w_s, phi>
/// ```
///
/// with `lagrange` derived from `rho` and the flux regularized as in
/// [`SolverOptions::default`].
pub fn el_residual(params: &CknParams, u: &RadialFunction, rho: f64) -> Result<ElResidual> {
    let ex = derive_exponents(params)?;
    let grid = u.grid();
    let r_norm = crate::radial::weighted_lq(u, params.r, params.s).powf(1.0 / params.r);
    let on_constraint = (r_norm - 1.0).abs() <= 1e-8;
    if params.q <= 1.0 || params.r <= 1.0 {
        return Ok(ElResidual {
            value: None,
            r_norm,
            on_constraint,
        });
    }
    let lagrange = lagrange_multiplier(params, rho)?;
    let n = grid.len();
    let p = params.p;
    let v = u.values();

    let mut flux = vec![0.0; n];
    let eps = SolverOptions::default().eps_for(p);
    add_grad_gradient(v, grid.h(), p, eps, &grid.cell_weights(p, params.mu), &mut flux);
    let mut mass = vec![0.0; n];
    add_lq_gradient(
        v,
        params.q,
        &grid.node_weights(params.sigma),
        ex.lambda_star / p,
        &mut mass,
    );
    let mut target = vec![0.0; n];
    add_lq_gradient(
        v,
        params.r,
        &grid.node_weights(params.s),
        lagrange / (p * params.r),
        &mut target,
    );

    let interior = 1..n - 1;
    let scale = interior
        .clone()
        .map(|i| (flux[i] / p).abs().max(mass[i].abs()).max(target[i].abs()))
        .fold(0.0, f64::max);
    let worst = interior
        .map(|i| (flux[i] / p + mass[i] - target[i]).abs())
        .fold(0.0, f64::max);
    let value = if scale > 0.0 { worst / scale } else { 0.0 };
    Ok(ElResidual {
        value: Some(value),
        r_norm,
        on_constraint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_options_validate() {
        SolverOptions::default().validate().unwrap();
    }

    #[test]
    fn bad_options_are_named() {
        let opts = SolverOptions {
            armijo_c: 1.5,
            tol_grad: 0.0,
            ..SolverOptions::default()
        };
        let msg = opts.validate().unwrap_err().to_string();
        assert!(msg.contains("0<armijo_c<1") && msg.contains("tol_grad>0"), "{msg}");
    }

    #[test]
    fn initial_profile_is_positive_inside() {
        let grid = RadialGrid::full_space(401, 3).unwrap();
        let v = initial_profile(&grid, 7, gaussian_bump);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[400], 0.0);
        assert!(v[1..400].iter().all(|&x| x > 0.0));
    }

    #[test]
    fn seeds_change_the_start() {
        let grid = RadialGrid::full_space(401, 3).unwrap();
        assert_ne!(
            initial_profile(&grid, 1, gaussian_bump),
            initial_profile(&grid, 2, gaussian_bump)
        );
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let grid = RadialGrid::full_space(101, 4).unwrap();
        let err = minimize_rho(&CknParams::REFERENCE, &grid, &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Grid(_)));
    }

    #[test]
    fn invalid_tuple_is_rejected_before_solving() {
        let grid = RadialGrid::full_space(101, 3).unwrap();
        let params = CknParams {
            s: 0.0,
            ..CknParams::REFERENCE
        };
        let err = minimize_rho(&params, &grid, &SolverOptions::default()).unwrap_err();
        assert!(err.to_string().contains("s>0"));
    }
}
