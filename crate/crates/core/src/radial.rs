//! Log-radial discretization of radial profiles.
//!
//! With `tau = ln|x|` a radial function `u(x) = v(tau)` has
//!
//! ```text
//! ∫ |u|^e / |x|^w dx        = omega ∫ |v|^e e^{(N-w) tau} dtau
//! ∫ |∇u|^p / |x|^mu dx      = omega ∫ |v'|^p e^{(N-p-mu) tau} dtau
//! ```
//!
//! where `omega` is the measure of the unit-sphere cross-section. Node
//! integrals use the trapezoid rule, gradient integrals one-point midpoint
//! cells, and the dilation `u_t(x) = t^{(N-s)/r} u(t x)` becomes a shift by
//! `ln t` plus an amplitude factor.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::exponents::CknParams;

/// Measure `2 pi^{N/2} / Gamma(N/2)` of the unit sphere in `R^N`.
pub fn full_sphere_measure(dim: u32) -> f64 {
    use std::f64::consts::PI;
    // Gamma(N/2) by the half-integer recursion.
    let mut gamma = if dim.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut x = if dim.is_multiple_of(2) { 1.0 } else { 0.5 };
    while x < f64::from(dim) / 2.0 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(f64::from(dim) / 2.0) / gamma
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolidAngle {
    /// The whole sphere, `Omega = R^N`.
    Full,
    /// Cross-section measure of a cone.
    Measure(f64),
}

/// Uniform grid in `tau = ln|x|` with Dirichlet ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialGrid {
    tau_min: f64,
    tau_max: f64,
    n: usize,
    h: f64,
    solid_angle: f64,
    #[serde(rename = "N")]
    dim: u32,
}

impl RadialGrid {
    pub const DEFAULT_TAU_MIN: f64 = -20.0;
    pub const DEFAULT_TAU_MAX: f64 = 12.0;

    pub fn new(tau_min: f64, tau_max: f64, n: usize, dim: u32, solid_angle: SolidAngle) -> Result<Self> {
        if !(tau_min.is_finite() && tau_max.is_finite() && tau_min < tau_max) {
            return Err(Error::Grid(format!(
                "need tau_min < tau_max, got [{tau_min}, {tau_max}]"
            )));
        }
        if n < 3 {
            return Err(Error::Grid(format!("need at least 3 nodes, got {n}")));
        }
        if dim < 2 {
            return Err(Error::Grid(format!("need N >= 2, got {dim}")));
        }
        let solid_angle = match solid_angle {
            SolidAngle::Full => full_sphere_measure(dim),
            SolidAngle::Measure(m) => {
                if !(m > 0.0 && m.is_finite()) {
                    return Err(Error::Grid(format!("solid angle must be positive, got {m}")));
                }
                m
            }
        };
        Ok(Self {
            tau_min,
            tau_max,
            n,
            h: (tau_max - tau_min) / (n - 1) as f64,
            solid_angle,
            dim,
        })
    }

    /// Default full-space grid `[-20, 12]` with `n` nodes.
    pub fn full_space(n: usize, dim: u32) -> Result<Self> {
        Self::new(Self::DEFAULT_TAU_MIN, Self::DEFAULT_TAU_MAX, n, dim, SolidAngle::Full)
    }

    /// Same nodes in another dimension. A full-sphere measure follows the
    /// dimension; a custom measure is kept.
    pub fn with_dim(&self, dim: u32) -> Result<Self> {
        let full = (self.solid_angle - full_sphere_measure(self.dim)).abs() <= 1e-12 * self.solid_angle;
        let angle = if full {
            SolidAngle::Full
        } else {
            SolidAngle::Measure(self.solid_angle)
        };
        Self::new(self.tau_min, self.tau_max, self.n, dim, angle)
    }

    pub fn tau_min(&self) -> f64 {
        self.tau_min
    }
    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }
    pub fn len(&self) -> usize {
        self.n
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn solid_angle(&self) -> f64 {
        self.solid_angle
    }
    pub fn dim(&self) -> u32 {
        self.dim
    }

    #[inline]
    pub fn tau(&self, i: usize) -> f64 {
        self.tau_min + i as f64 * self.h
    }

    pub fn taus(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.tau(i))
    }

    /// `omega * trapezoid_weight_i * e^{(N-w) tau_i}`.
    pub(crate) fn node_weights(&self, w: f64) -> Vec<f64> {
        let k = f64::from(self.dim) - w;
        (0..self.n)
            .map(|i| {
                let tw = if i == 0 || i + 1 == self.n {
                    0.5 * self.h
                } else {
                    self.h
                };
                self.solid_angle * tw * (k * self.tau(i)).exp()
            })
            .collect()
    }

    /// `omega * h * e^{(N-p-mu) tau_{i+1/2}}` for each of the `n-1` cells.
    pub(crate) fn cell_weights(&self, p: f64, mu: f64) -> Vec<f64> {
        let k = f64::from(self.dim) - p - mu;
        (0..self.n - 1)
            .map(|i| self.solid_angle * self.h * (k * (self.tau(i) + 0.5 * self.h)).exp())
            .collect()
    }
}

/// Nodal values of a radial profile; both end values are zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialFunction {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Profile(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Profile(format!("value at node {i} is not finite")));
        }
        if values[0] != 0.0 || values[values.len() - 1] != 0.0 {
            return Err(Error::Profile("end values must be zero".to_owned()));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(tau)` at the interior nodes; the ends are set to zero.
    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values: Vec<f64> = grid.taus().map(&f).collect();
        values[0] = 0.0;
        *values.last_mut().unwrap() = 0.0;
        Self::new(grid, values)
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Builds from raw values, zeroing the ends.
    pub(crate) fn from_raw(grid: RadialGrid, mut values: Vec<f64>) -> Self {
        values[0] = 0.0;
        *values.last_mut().unwrap() = 0.0;
        Self { grid, values }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn abs(&self) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    /// Writes `tau,value` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["tau", "value"])?;
        for (tau, v) in self.grid.taus().zip(&self.values) {
            out.write_record([format!("{tau:.16e}"), format!("{v:.16e}")])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a `tau,value` table on a uniform grid.
    pub fn read_csv<R: Read>(reader: R, dim: u32, solid_angle: SolidAngle) -> Result<Self> {
        let mut input = csv::Reader::from_reader(reader);
        let mut taus = Vec::new();
        let mut values = Vec::new();
        for record in input.deserialize() {
            let (tau, value): (f64, f64) = record?;
            taus.push(tau);
            values.push(value);
        }
        if taus.len() < 3 {
            return Err(Error::Profile(format!("need at least 3 rows, got {}", taus.len())));
        }
        let grid = RadialGrid::new(taus[0], taus[taus.len() - 1], taus.len(), dim, solid_angle)?;
        for (i, tau) in taus.iter().enumerate() {
            if (tau - grid.tau(i)).abs() > 1e-9 * grid.h().max(1.0) {
                return Err(Error::Profile(format!("tau column is not uniform at row {i}")));
            }
        }
        Self::new(grid, values)
    }
}

#[inline]
pub(crate) fn abs_pow(x: f64, e: f64) -> f64 {
    let a = x.abs();
    if e == 1.0 {
        a
    } else if e == 2.0 {
        a * a
    } else if e == 3.0 {
        a * a * a
    } else {
        a.powf(e)
    }
}

/// `sign(x) |x|^k`, zero at `x = 0`.
#[inline]
pub(crate) fn signed_pow(x: f64, k: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * abs_pow(x, k)
    }
}

pub(crate) fn lq_sum(values: &[f64], e: f64, node_w: &[f64]) -> f64 {
    values.iter().zip(node_w).map(|(&v, &w)| abs_pow(v, e) * w).sum()
}

pub(crate) fn grad_sum(values: &[f64], h: f64, p: f64, cell_w: &[f64]) -> f64 {
    values
        .windows(2)
        .zip(cell_w)
        .map(|(pair, &w)| abs_pow((pair[1] - pair[0]) / h, p) * w)
        .sum()
}

/// `out_i += coef * d/du_i sum_j |u_j|^e w_j`.
pub(crate) fn add_lq_gradient(values: &[f64], e: f64, node_w: &[f64], coef: f64, out: &mut [f64]) {
    for ((o, &v), &w) in out.iter_mut().zip(values).zip(node_w) {
        *o += coef * e * signed_pow(v, e - 1.0) * w;
    }
}

/// Slope factor `(d^2 + eps^2)^{(p-2)/2} d` of the regularized p-Laplacian flux.
#[inline]
pub(crate) fn flux(d: f64, p: f64, eps: f64) -> f64 {
    if p == 2.0 {
        d
    } else if d == 0.0 {
        0.0
    } else if eps == 0.0 {
        signed_pow(d, p - 1.0)
    } else {
        (d * d + eps * eps).powf(0.5 * (p - 2.0)) * d
    }
}

/// `out += d/du sum_cells |du/h|^p w_c` with the regularized flux.
pub(crate) fn add_grad_gradient(values: &[f64], h: f64, p: f64, eps: f64, cell_w: &[f64], out: &mut [f64]) {
    for (c, &w) in cell_w.iter().enumerate() {
        let d = (values[c + 1] - values[c]) / h;
        let f = p * flux(d, p, eps) * w / h;
        out[c] -= f;
        out[c + 1] += f;
    }
}

/// `∫ |u|^e / |x|^w dx` by the trapezoid rule in `tau`.
pub fn weighted_lq(u: &RadialFunction, e: f64, w: f64) -> f64 {
    lq_sum(&u.values, e, &u.grid.node_weights(w))
}

/// `∫ |∇u|^p / |x|^mu dx` with one midpoint-weighted difference per cell.
pub fn grad_energy(u: &RadialFunction, p: f64, mu: f64) -> f64 {
    grad_sum(&u.values, u.grid.h, p, &u.grid.cell_weights(p, mu))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// `||u||^p`
    pub grad_term: f64,
    /// `|u|_{q,sigma}^q`
    pub q_term: f64,
    /// `|u|_{r,s}`
    pub r_norm: f64,
    pub lambda: f64,
    /// `grad_term + lambda * q_term`
    pub i_star: f64,
}

pub fn i_star(u: &RadialFunction, params: &CknParams, lambda: f64) -> EnergyBreakdown {
    let grad_term = grad_energy(u, params.p, params.mu);
    let q_term = weighted_lq(u, params.q, params.sigma);
    let r_norm = weighted_lq(u, params.r, params.s).powf(1.0 / params.r);
    EnergyBreakdown {
        grad_term,
        q_term,
        r_norm,
        lambda,
        i_star: grad_term + lambda * q_term,
    }
}

/// Dilation `u_t(x) = t^{(N-s)/r} u(t x)`, i.e. `v_t(tau) = t^{(N-s)/r} v(tau + ln t)`.
///
/// Shifts that are an integer number of cells move nodal values exactly;
/// other shifts interpolate linearly. Values pulled from outside the grid are zero.
pub fn scale(u: &RadialFunction, t: f64, params: &CknParams) -> Result<RadialFunction> {
    ensure_positive("t", t)?;
    let grid = u.grid;
    let amp = t.powf((f64::from(grid.dim) - params.s) / params.r);
    let shift = t.ln() / grid.h;
    let n = grid.n as isize;
    let rounded = shift.round();
    let values = if (shift - rounded).abs() < 1e-9 {
        let k = rounded as isize;
        (0..n)
            .map(|i| {
                let j = i + k;
                if (0..n).contains(&j) {
                    amp * u.values[j as usize]
                } else {
                    0.0
                }
            })
            .collect()
    } else {
        (0..n)
            .map(|i| {
                let x = i as f64 + shift;
                let j = x.floor();
                let frac = x - j;
                let j = j as isize;
                let at = |k: isize| if (0..n).contains(&k) { u.values[k as usize] } else { 0.0 };
                amp * ((1.0 - frac) * at(j) + frac * at(j + 1))
            })
            .collect()
    };
    Ok(RadialFunction::from_raw(grid, values))
}

/// Rescales onto the constraint set `|u|_{r,s} = 1`.
pub fn normalize(u: &RadialFunction, params: &CknParams) -> Result<RadialFunction> {
    let norm = weighted_lq(u, params.r, params.s).powf(1.0 / params.r);
    if norm.is_nan() || norm <= 0.0 {
        return Err(Error::ZeroFunction);
    }
    if !norm.is_finite() {
        return Err(Error::NonFinite("|u|_{r,s}".to_owned()));
    }
    Ok(u.scaled(1.0 / norm))
}

/// Discrete gradient of `I*(u) = ||u||^p + lambda |u|_{q,sigma}^q` with respect
/// to the nodal values. End entries are zero.
pub fn gradient_i_star(u: &RadialFunction, params: &CknParams, lambda: f64, eps_reg: f64) -> Vec<f64> {
    let grid = &u.grid;
    let mut g = vec![0.0; grid.n];
    add_grad_gradient(
        &u.values,
        grid.h,
        params.p,
        eps_reg,
        &grid.cell_weights(params.p, params.mu),
        &mut g,
    );
    add_lq_gradient(&u.values, params.q, &grid.node_weights(params.sigma), lambda, &mut g);
    g[0] = 0.0;
    g[grid.n - 1] = 0.0;
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailMass {
    /// `∫_{|x|>R} |u|^r / |x|^s dx`
    pub mass: f64,
    /// Set when `ln R >= tau_max`, in which case `mass` is zero.
    pub beyond_grid: bool,
}

/// Weighted `L^r` mass outside the ball of radius `R`.
///
/// The cell containing `ln R` contributes its trapezoid over `[ln R, tau_{k+1}]`
/// with the integrand linearly interpolated at `ln R`.
pub fn tail_mass(u: &RadialFunction, radius: f64, params: &CknParams) -> Result<TailMass> {
    ensure_positive("R", radius)?;
    let grid = &u.grid;
    let cut = radius.ln();
    if cut >= grid.tau_max {
        return Ok(TailMass {
            mass: 0.0,
            beyond_grid: true,
        });
    }
    let k = f64::from(grid.dim) - params.s;
    let f = |i: usize| grid.solid_angle * abs_pow(u.values[i], params.r) * (k * grid.tau(i)).exp();
    let start = ((cut - grid.tau_min) / grid.h).max(0.0);
    let first = (start.floor() as usize).min(grid.n - 2);
    let theta = start - first as f64;
    let f_cut = (1.0 - theta) * f(first) + theta * f(first + 1);
    let mut mass = 0.5 * (1.0 - theta) * grid.h * (f_cut + f(first + 1));
    for i in first + 1..grid.n - 1 {
        mass += 0.5 * grid.h * (f(i) + f(i + 1));
    }
    Ok(TailMass {
        mass,
        beyond_grid: false,
    })
}
