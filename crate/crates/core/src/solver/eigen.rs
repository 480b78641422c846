use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{Check, Relation, ValidationReport};
use crate::radial::{RadialFunction, RadialGrid, SolidAngle};

use super::descent::{descend, Functional};
use super::{initial_profile, SolverOptions, StopReason};

/// First critical level of `min ∫ |∇u|^p / |x|^mu` subject to
/// `∫ |u|^q / |x|^sigma = 1` on the ball of radius `ball_radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenProblem {
    #[serde(rename = "N")]
    pub dim: u32,
    pub p: f64,
    pub q: f64,
    pub mu: f64,
    pub sigma: f64,
    pub ball_radius: f64,
    /// Inner truncation of the log-radial grid.
    #[serde(default = "EigenProblem::default_tau_min")]
    pub tau_min: f64,
}

impl EigenProblem {
    pub const DEFAULT_TAU_MIN: f64 = -12.0;

    fn default_tau_min() -> f64 {
        Self::DEFAULT_TAU_MIN
    }

    pub fn new(dim: u32, p: f64, q: f64, mu: f64, sigma: f64, ball_radius: f64) -> Self {
        Self {
            dim,
            p,
            q,
            mu,
            sigma,
            ball_radius,
            tau_min: Self::DEFAULT_TAU_MIN,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        use Relation::*;
        let n = f64::from(self.dim);
        let gap = n - self.p - self.mu;
        let q_cap = {
            let weighted = self.p * (n - self.sigma) / gap;
            if self.p < n {
                weighted.min(self.p * n / (n - self.p))
            } else {
                weighted
            }
        };
        let checks = vec![
            Check::new("N>=2", LessEq, 2.0 - n),
            Check::new("p>1", Less, 1.0 - self.p),
            Check::new("mu+p<N", Less, self.mu + self.p - n),
            Check::new("q>1", Less, 1.0 - self.q),
            Check::new(
                "q<min{p*,p*(sigma,mu)}",
                Less,
                if gap > 0.0 { self.q - q_cap } else { f64::NAN },
            ),
            Check::new("ball_radius>0", Less, -self.ball_radius),
            Check::new("tau_min<ln(ball_radius)", Less, self.tau_min - self.ball_radius.ln()),
        ];
        ValidationReport::from_checks(checks, 0.0)
    }

    pub fn grid(&self, n: usize) -> Result<RadialGrid> {
        RadialGrid::new(self.tau_min, self.ball_radius.ln(), n, self.dim, SolidAngle::Full)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    pub problem: EigenProblem,
    pub lambda1: f64,
    /// `∫ |phi1|^q / |x|^sigma`, equal to one up to rounding.
    pub constraint: f64,
    pub projected_gradient: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub energy_trace: Vec<f64>,
    #[serde(skip)]
    pub phi1: RadialFunction,
}

/// Solves from the seeded profile `(1 - e^{tau - tau_max})(1 - e^{tau_min - tau})`.
pub fn first_eigenvalue(problem: &EigenProblem, grid_n: usize, opts: &SolverOptions) -> Result<EigenResult> {
    problem.validate().into_result()?;
    let grid = problem.grid(grid_n)?;
    let (lo, hi) = (grid.tau_min(), grid.tau_max());
    let values = initial_profile(&grid, opts.seed, |t| (1.0 - (t - hi).exp()) * (1.0 - (lo - t).exp()));
    first_eigenvalue_from(problem, &RadialFunction::from_raw(grid, values), opts)
}

pub fn first_eigenvalue_from(
    problem: &EigenProblem,
    init: &RadialFunction,
    opts: &SolverOptions,
) -> Result<EigenResult> {
    problem.validate().into_result()?;
    opts.validate()?;
    let grid = *init.grid();
    if grid.dim() != problem.dim {
        return Err(Error::Grid(format!(
            "grid dimension {} does not match N = {}",
            grid.dim(),
            problem.dim
        )));
    }
    let f = Functional::new(
        grid,
        problem.p,
        problem.mu,
        opts.eps_for(problem.p),
        0.0,
        problem.q,
        problem.sigma,
        problem.q,
        problem.sigma,
    );
    let out = descend(&f, init.values().to_vec(), opts, None)?;
    let converged = out.converged();
    let values: Vec<f64> = out.values.iter().map(|v| v.abs()).collect();
    let mut trace = out.trace;
    let lambda1 = f.value(&values);
    if trace.last().is_some_and(|&last| lambda1 < last) {
        trace.push(lambda1);
    }
    Ok(EigenResult {
        problem: *problem,
        lambda1,
        constraint: f.constraint(&values),
        projected_gradient: out.residual,
        iterations: out.iterations,
        converged,
        stop_reason: out.stop,
        energy_trace: trace,
        phi1: RadialFunction::from_raw(grid, values),
    })
}
