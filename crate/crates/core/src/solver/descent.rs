//! Preconditioned projected gradient descent on a level set
//! `{u : ∫ |u|^e / |x|^w = 1}` of a log-radial grid.
//!
//! The search direction is the gradient in the metric of the (regularized)
//! Hessian of the objective, projected onto the tangent space of the
//! constraint in that same metric. The Hessian is tridiagonal on the grid, so
//! each step costs `O(n)`. Steps are retracted back onto the constraint by
//! rescaling and accepted by Armijo backtracking.

use crate::error::{Error, Result};
use crate::radial::{add_grad_gradient, add_lq_gradient, grad_sum, lq_sum, RadialGrid};
use crate::tridiag::SymTridiag;

use super::{SolverOptions, StopReason};

/// Energies evaluated over the last this many iterations for the stall test.
const STALL_WINDOW: usize = 10;
const MAX_BACKTRACKS: usize = 60;
/// A line search that fails at round-off still counts as converged below this residual.
const ROUNDOFF_RESIDUAL: f64 = 1e-6;

/// `||u||^p + coupling |u|_{q,sigma}^q` and the constraint `∫ |u|^e / |x|^w`.
pub(crate) struct Functional {
    grid: RadialGrid,
    p: f64,
    eps: f64,
    coupling: f64,
    q: f64,
    constraint_exp: f64,
    cell_w: Vec<f64>,
    mass_w: Vec<f64>,
    constraint_w: Vec<f64>,
}

impl Functional {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        grid: RadialGrid,
        p: f64,
        mu: f64,
        eps: f64,
        coupling: f64,
        q: f64,
        sigma: f64,
        constraint_exp: f64,
        constraint_weight: f64,
    ) -> Self {
        Self {
            grid,
            p,
            eps,
            coupling,
            q,
            constraint_exp,
            cell_w: grid.cell_weights(p, mu),
            mass_w: grid.node_weights(sigma),
            constraint_w: grid.node_weights(constraint_weight),
        }
    }

    /// `(gradient term, q term)`.
    pub fn parts(&self, u: &[f64]) -> (f64, f64) {
        let grad = grad_sum(u, self.grid.h(), self.p, &self.cell_w);
        let mass = if self.coupling != 0.0 {
            lq_sum(u, self.q, &self.mass_w)
        } else {
            0.0
        };
        (grad, mass)
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        let (grad, mass) = self.parts(u);
        grad + self.coupling * mass
    }

    pub fn constraint(&self, u: &[f64]) -> f64 {
        lq_sum(u, self.constraint_exp, &self.constraint_w)
    }

    pub fn normalize(&self, u: &mut [f64]) -> Result<()> {
        let g = self.constraint(u);
        if g.is_nan() || g <= 0.0 {
            return Err(Error::ZeroFunction);
        }
        if !g.is_finite() {
            return Err(Error::NonFinite("constraint integral".to_owned()));
        }
        let factor = g.powf(-1.0 / self.constraint_exp);
        u.iter_mut().for_each(|v| *v *= factor);
        Ok(())
    }

    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; u.len()];
        add_grad_gradient(u, self.grid.h(), self.p, self.eps, &self.cell_w, &mut g);
        if self.coupling != 0.0 {
            add_lq_gradient(u, self.q, &self.mass_w, self.coupling, &mut g);
        }
        clamp_ends(&mut g);
        g
    }

    pub fn constraint_gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut c = vec![0.0; u.len()];
        add_lq_gradient(u, self.constraint_exp, &self.constraint_w, 1.0, &mut c);
        clamp_ends(&mut c);
        c
    }

    /// Tridiagonal curvature model of the objective; Dirichlet rows are the identity.
    ///
    /// Powers above 2 use the Hessian with a floor on its degenerate factor.
    /// Powers below 2 use the secant curvature `e |x|^{e-2}` of the quadratic
    /// majorizer instead, which steps straight to zero rather than past it.
    fn preconditioner(&self, u: &[f64]) -> SymTridiag {
        let n = u.len();
        let h = self.grid.h();
        let p = self.p;
        let mut m = SymTridiag::zeros(n);

        let dmax = u.windows(2).map(|w| ((w[1] - w[0]) / h).abs()).fold(0.0, f64::max);
        let slope_floor = self.eps.max(floor_fraction(p) * dmax);
        for (c, &w) in self.cell_w.iter().enumerate() {
            let d = (u[c + 1] - u[c]) / h;
            let k = curvature(d, p, slope_floor) * w / (h * h);
            m.diag[c] += k;
            m.diag[c + 1] += k;
            m.off[c] -= k;
        }

        let q = self.q;
        if self.coupling != 0.0 && q > 1.0 {
            let umax = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let amp_floor = floor_fraction(q) * umax;
            for (i, &w) in self.mass_w.iter().enumerate() {
                m.diag[i] += self.coupling * curvature(u[i], q, amp_floor) * w;
            }
        }

        m.diag[0] = 1.0;
        m.off[0] = 0.0;
        m.diag[n - 1] = 1.0;
        m.off[n - 2] = 0.0;
        m
    }
}

fn floor_fraction(e: f64) -> f64 {
    if e > 2.0 {
        1e-30
    } else {
        1e-100
    }
}

/// Curvature of `|x|^e` used by the preconditioner.
fn curvature(x: f64, e: f64, floor: f64) -> f64 {
    if e == 2.0 {
        2.0
    } else if e > 2.0 {
        e * (e - 1.0) * (x * x + floor * floor).powf(0.5 * (e - 2.0))
    } else {
        e * (x * x + floor * floor).powf(0.5 * (e - 2.0))
    }
}

fn clamp_ends(v: &mut [f64]) {
    let n = v.len();
    v[0] = 0.0;
    v[n - 1] = 0.0;
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sup(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |m, x| m.max(x.abs()))
}

/// Sup-norm of `g - m c` relative to the larger of `|g|` and `|m c|`, where
/// `m = <g,u>/<c,u>` is the multiplier obtained by testing with `u`.
pub(crate) fn projected_residual(g: &[f64], c: &[f64], u: &[f64]) -> f64 {
    let m = dot(g, u) / dot(c, u);
    let num = sup(g.iter().zip(c).map(|(a, b)| a - m * b));
    let den = sup(g.iter().copied()).max(sup(c.iter().map(|b| m * b)));
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Dilation step of the cone problem: the functional along `u_t` is
/// `t^{a'} A + t^{-b'} coupling B`, minimized in closed form and snapped to a
/// whole-cell shift.
pub(crate) struct Rescaling {
    pub a_prime: f64,
    pub b_prime: f64,
    /// `(N - s)/r`
    pub amplitude_exp: f64,
    pub every: usize,
}

impl Rescaling {
    fn shift_cells(&self, f: &Functional, u: &[f64]) -> Option<isize> {
        let (grad, mass) = f.parts(u);
        let opt = crate::exponents::two_power_infimum(self.a_prime, self.b_prime, grad, f.coupling * mass).ok()?;
        let cells = (opt.t0.ln() / f.grid.h()).round();
        (cells != 0.0 && cells.abs() < u.len() as f64).then_some(cells as isize)
    }

    fn apply(&self, f: &Functional, u: &[f64], cells: isize) -> Vec<f64> {
        let amp = (self.amplitude_exp * cells as f64 * f.grid.h()).exp();
        let n = u.len() as isize;
        let mut out: Vec<f64> = (0..n)
            .map(|i| {
                let j = i + cells;
                if (0..n).contains(&j) {
                    amp * u[j as usize]
                } else {
                    0.0
                }
            })
            .collect();
        clamp_ends(&mut out);
        out
    }
}

pub(crate) struct Outcome {
    pub values: Vec<f64>,
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub stop: StopReason,
    pub residual: f64,
}

impl Outcome {
    pub fn converged(&self) -> bool {
        match self.stop {
            StopReason::GradientTolerance | StopReason::EnergyStalled => true,
            StopReason::LineSearchFailed => self.residual < ROUNDOFF_RESIDUAL,
            StopReason::MaxIterations => false,
        }
    }
}

pub(crate) fn descend(
    f: &Functional,
    mut u: Vec<f64>,
    opts: &SolverOptions,
    rescaling: Option<&Rescaling>,
) -> Result<Outcome> {
    clamp_ends(&mut u);
    f.normalize(&mut u)?;
    let mut energy = f.value(&u);
    if !energy.is_finite() {
        return Err(Error::NonFinite("initial energy".to_owned()));
    }
    let mut trace = vec![energy];
    let mut stop = StopReason::MaxIterations;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    for k in 1..=opts.max_iters {
        let g = f.gradient(&u);
        let c = f.constraint_gradient(&u);
        residual = projected_residual(&g, &c, &u);
        if residual < opts.tol_grad {
            stop = StopReason::GradientTolerance;
            break;
        }

        let precond = f.preconditioner(&u);
        let pg = precond.solve(&g);
        let pc = precond.solve(&c);
        let beta = dot(&c, &pg) / dot(&c, &pc);
        let dir: Vec<f64> = pg.iter().zip(&pc).map(|(a, b)| a - beta * b).collect();
        let slope = dot(&g, &dir);
        if !slope.is_finite() || slope <= 0.0 {
            stop = StopReason::LineSearchFailed;
            break;
        }

        let mut step = opts.step0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut cand: Vec<f64> = u.iter().zip(&dir).map(|(a, d)| a - step * d).collect();
            clamp_ends(&mut cand);
            if f.normalize(&mut cand).is_ok() {
                let e = f.value(&cand);
                if e.is_finite() && e <= energy - opts.armijo_c * step * slope {
                    accepted = Some((cand, e));
                    break;
                }
            }
            step *= opts.armijo_shrink;
        }
        let Some((next, e)) = accepted else {
            stop = StopReason::LineSearchFailed;
            break;
        };
        u = next;
        energy = e;
        iterations = k;

        if let Some(rs) = rescaling {
            if rs.every > 0 && k % rs.every == 0 {
                if let Some(cells) = rs.shift_cells(f, &u) {
                    let mut cand = rs.apply(f, &u, cells);
                    if f.normalize(&mut cand).is_ok() {
                        let e = f.value(&cand);
                        if e < energy {
                            u = cand;
                            energy = e;
                        }
                    }
                }
            }
        }

        if !energy.is_finite() {
            return Err(Error::NonFinite(format!("energy at iteration {k}")));
        }
        trace.push(energy);

        if trace.len() > STALL_WINDOW {
            let old = trace[trace.len() - 1 - STALL_WINDOW];
            if (old - energy) <= opts.tol_energy * energy.abs() {
                stop = StopReason::EnergyStalled;
                residual = projected_residual(&f.gradient(&u), &f.constraint_gradient(&u), &u);
                break;
            }
        }
    }
    if stop == StopReason::MaxIterations {
        residual = projected_residual(&f.gradient(&u), &f.constraint_gradient(&u), &u);
    }

    Ok(Outcome {
        values: u,
        trace,
        iterations,
        stop,
        residual,
    })
}
