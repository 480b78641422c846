//! Parameter validation and closed-form exponent algebra.
//!
//! Everything here is exact arithmetic on the seven-tuple
//! `(N, p, q, r, mu, sigma, s)`; nothing is discretized. Four linear
//! combinations of the parameters appear over and over and are collected in
//! [`ScalingCombos`]:
//!
//! ```text
//! grad   = p(N-s) - (N-mu-p) r        (= r a')
//! mass   = (N-sigma) r - (N-s) q      (= r b')
//! total  = (mu+p-sigma) r + (p-q)(N-s) (= grad + mass)
//! interp = (N-sigma) p - (N-mu-p) q
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};

/// Absolute tolerance used by equality checks in validation reports.
pub const EQUALITY_TOL: f64 = 1e-10;

/// One instance of the weighted inequality
/// `|u|_{r,s} <= C ||u||^a |u|_{q,sigma}^{1-a}` in dimension `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CknParams {
    #[serde(rename = "N")]
    pub dim: u32,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub mu: f64,
    pub sigma: f64,
    pub s: f64,
}

impl CknParams {
    /// `N=3, p=q=2, r=3, mu=sigma=0, s=1`.
    pub const REFERENCE: CknParams = CknParams {
        dim: 3,
        p: 2.0,
        q: 2.0,
        r: 3.0,
        mu: 0.0,
        sigma: 0.0,
        s: 1.0,
    };

    pub fn new(dim: u32, p: f64, q: f64, r: f64, mu: f64, sigma: f64, s: f64) -> Self {
        Self {
            dim,
            p,
            q,
            r,
            mu,
            sigma,
            s,
        }
    }

    #[inline]
    pub fn n(&self) -> f64 {
        f64::from(self.dim)
    }

    /// `N - mu - p`, the exponent gap of the gradient weight.
    #[inline]
    pub fn gradient_gap(&self) -> f64 {
        self.n() - self.mu - self.p
    }

    pub fn combos(&self) -> ScalingCombos {
        let (n, p, q, r, mu, sigma, s) = (self.n(), self.p, self.q, self.r, self.mu, self.sigma, self.s);
        ScalingCombos {
            grad: p * (n - s) - (n - mu - p) * r,
            mass: (n - sigma) * r - (n - s) * q,
            total: (mu + p - sigma) * r + (p - q) * (n - s),
            interp: (n - sigma) * p - (n - mu - p) * q,
        }
    }

    /// Sobolev exponent `pN/(N-p)`, infinite when `p >= N`.
    pub fn p_star(&self) -> f64 {
        if self.p < self.n() {
            self.p * self.n() / (self.n() - self.p)
        } else {
            f64::INFINITY
        }
    }

    /// `p*(t, mu) = p(N-t)/(N-p-mu)` without the supercriticality guard.
    pub(crate) fn p_star_at(&self, t: f64) -> f64 {
        self.p * (self.n() - t) / self.gradient_gap()
    }
}

/// The recurring linear combinations of the parameters; see the module docs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingCombos {
    pub grad: f64,
    pub mass: f64,
    pub total: f64,
    pub interp: f64,
}

/// Parameters in the general form `||x|^gamma u|_r <= C ||x|^alpha Du|_p^a ||x|^beta u|_q^{1-a}`.
///
/// `sigma_a` is the auxiliary power tied to the others by
/// `gamma = a sigma_a + (1-a) beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralParams {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub a: f64,
    pub sigma_a: f64,
}

impl GeneralParams {
    /// Signed dimensional-balance defect `(1/r + gamma/N) - [a(1/p + (alpha-1)/N) + (1-a)(1/q + beta/N)]`.
    pub fn balance_defect(&self, dim: u32) -> f64 {
        let n = f64::from(dim);
        let lhs = 1.0 / self.r + self.gamma / n;
        let rhs = self.a * (1.0 / self.p + (self.alpha - 1.0) / n) + (1.0 - self.a) * (1.0 / self.q + self.beta / n);
        lhs - rhs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `residual < 0`
    Less,
    /// `residual <= 0`
    LessEq,
    /// `|residual| <= EQUALITY_TOL`
    Equal,
}

/// One named hypothesis with its signed margin (left side minus right side).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub relation: Relation,
    pub residual: f64,
    pub satisfied: bool,
    /// Verdict when the relation is relaxed to `<=`; equal to `satisfied`
    /// for checks that are already non-strict.
    pub satisfied_non_strict: bool,
}

impl Check {
    pub(crate) fn new(name: &str, relation: Relation, residual: f64) -> Self {
        let (satisfied, satisfied_non_strict) = if residual.is_finite() {
            match relation {
                Relation::Less => (residual < 0.0, residual <= 0.0),
                Relation::LessEq => (residual <= 0.0, residual <= 0.0),
                Relation::Equal => {
                    let ok = residual.abs() <= EQUALITY_TOL;
                    (ok, ok)
                }
            }
        } else {
            (false, false)
        };
        Self {
            name: name.to_owned(),
            relation,
            residual: if residual.is_finite() { residual } else { f64::NAN },
            satisfied,
            satisfied_non_strict,
        }
    }

    /// A check that only applies under a side condition; vacuously true otherwise.
    fn conditional(name: &str, relation: Relation, residual: f64, applies: bool) -> Self {
        let mut check = Self::new(name, relation, residual);
        if !applies {
            check.satisfied = true;
            check.satisfied_non_strict = true;
        }
        check
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub checks: Vec<Check>,
    pub balance_residual: f64,
}

impl ValidationReport {
    pub(crate) fn from_checks(checks: Vec<Check>, balance_residual: f64) -> Self {
        Self {
            valid: checks.iter().all(|c| c.satisfied),
            checks,
            balance_residual,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &str> {
        self.checks.iter().filter(|c| !c.satisfied).map(|c| c.name.as_str())
    }

    /// `Ok(())` when valid, otherwise [`Error::InvalidParams`] naming every failed check.
    pub fn into_result(self) -> Result<()> {
        if self.valid {
            Ok(())
        } else {
            Err(Error::InvalidParams {
                failed: self.failed().map(str::to_owned).collect(),
            })
        }
    }
}

/// Checks every hypothesis of the existence theorem for extremals.
///
/// Invalid tuples never fail; they produce `valid = false`.
pub fn validate_ckn(params: &CknParams) -> ValidationReport {
    use Relation::*;
    let CknParams {
        p, q, r, mu, sigma, s, ..
    } = *params;
    let n = params.n();
    let gap = params.gradient_gap();

    let q_cap = if p < n {
        params.p_star().min(params.p_star_at(sigma))
    } else {
        params.p_star_at(sigma)
    };
    let r_cap = if p < n {
        params.p_star().min(params.p_star_at(s))
    } else {
        params.p_star_at(s)
    };
    let r_floor = (p * (sigma - s) / gap + q).max((sigma - s) * q / (n - sigma) + q);

    let checks = vec![
        Check::new("N>=2", LessEq, 2.0 - n),
        Check::new("p>1", Less, 1.0 - p),
        Check::new("s>0", Less, -s),
        Check::new("max{sigma,s}<mu+p", Less, sigma.max(s) - (mu + p)),
        Check::new("mu+p<N", Less, mu + p - n),
        Check::new("q>=1", LessEq, 1.0 - q),
        Check::new(
            "q<min{p*,p*(sigma,mu)}",
            Less,
            if gap > 0.0 { q - q_cap } else { f64::NAN },
        ),
        Check::new("r>=1", LessEq, 1.0 - r),
        Check::new(
            "r>max{p(sigma-s)/(N-mu-p)+q,(sigma-s)q/(N-sigma)+q}",
            Less,
            if gap > 0.0 { r_floor - r } else { f64::NAN },
        ),
        Check::new("r<min{p*,p*(s,mu)}", Less, if gap > 0.0 { r - r_cap } else { f64::NAN }),
        Check::new(
            "p(s-sigma)+q(mu+p-s)<r(mu+p-sigma)",
            Less,
            p * (s - sigma) + q * (mu + p - s) - r * (mu + p - sigma),
        ),
        Check::new(
            "(Np-Nr+pr)(s-sigma)>(N*mu-Ns+ps)(r-q)",
            Less,
            (n * mu - n * s + p * s) * (r - q) - (n * p - n * r + p * r) * (s - sigma),
        ),
    ];

    let balance = map_to_general_form(params)
        .map(|gp| gp.balance_defect(params.dim))
        .unwrap_or(f64::NAN);
    ValidationReport::from_checks(checks, balance)
}

/// Checks the hypotheses and the necessary-and-sufficient relations of the
/// classical interpolation theorem in general form.
pub fn validate_theorem_a(gp: &GeneralParams, dim: u32) -> ValidationReport {
    use Relation::*;
    let n = f64::from(dim);
    let GeneralParams {
        p,
        q,
        r,
        alpha,
        beta,
        gamma,
        a,
        sigma_a,
    } = *gp;
    let balance = gp.balance_defect(dim);
    let gradient_level = 1.0 / p + (alpha - 1.0) / n;
    let target_level = 1.0 / r + gamma / n;
    let critical = (gradient_level - target_level).abs() <= EQUALITY_TOL;

    let checks = vec![
        Check::new("p>=1", LessEq, 1.0 - p),
        Check::new("q>=1", LessEq, 1.0 - q),
        Check::new("r>0", Less, -r),
        Check::new("a>=0", LessEq, -a),
        Check::new("a<=1", LessEq, a - 1.0),
        Check::new("1/p+alpha/N>0", Less, -(1.0 / p + alpha / n)),
        Check::new("1/q+beta/N>0", Less, -(1.0 / q + beta / n)),
        Check::new("1/r+gamma/N>0", Less, -(1.0 / r + gamma / n)),
        Check::new(
            "gamma=a*sigma_A+(1-a)*beta",
            Equal,
            gamma - (a * sigma_a + (1.0 - a) * beta),
        ),
        Check::new("balance", Equal, balance),
        Check::conditional("alpha-sigma_A>=0", LessEq, sigma_a - alpha, a > 0.0),
        Check::conditional("alpha-sigma_A<=1", LessEq, alpha - sigma_a - 1.0, a > 0.0 && critical),
    ];
    ValidationReport::from_checks(checks, balance)
}

/// Maps `(mu, sigma, s)` to the powers `alpha = -mu/p`, `beta = -sigma/q`,
/// `gamma = -s/r` and computes the interpolation exponent `a`.
pub fn map_to_general_form(params: &CknParams) -> Result<GeneralParams> {
    ensure_positive("p", params.p)?;
    ensure_positive("q", params.q)?;
    ensure_positive("r", params.r)?;
    let c = params.combos();
    if c.interp == 0.0 {
        return Err(Error::Degenerate("(N-sigma)p - (N-mu-p)q vanishes".to_owned()));
    }
    let alpha = -params.mu / params.p;
    let beta = -params.sigma / params.q;
    let gamma = -params.s / params.r;
    let a = interpolation_exponent(params, &c);
    // sigma_a only matters through gamma = a sigma_a + (1-a) beta; free when a = 0.
    let sigma_a = if a != 0.0 {
        (gamma - (1.0 - a) * beta) / a
    } else {
        alpha
    };
    Ok(GeneralParams {
        p: params.p,
        q: params.q,
        r: params.r,
        alpha,
        beta,
        gamma,
        a,
        sigma_a,
    })
}

fn interpolation_exponent(params: &CknParams, c: &ScalingCombos) -> f64 {
    c.mass * params.p / (c.interp * params.r)
}

/// Every closed-form exponent attached to a valid tuple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedExponents {
    /// Interpolation exponent.
    pub a: f64,
    /// `pN/(N-p)`; infinite (serialized as `null`) when `p >= N`.
    pub p_star: f64,
    pub p_star_s_mu: f64,
    pub p_star_sigma_mu: f64,
    /// Coupling at which the scaling-optimized coefficient equals one.
    pub lambda_star: f64,
    pub r1: f64,
    pub r2: f64,
    pub s1: f64,
    pub s2: f64,
    pub sigma_bar: f64,
    pub p_star_sigma_bar_mu: f64,
    /// Dilation exponent of the gradient term, `(p(N-s) - (N-mu-p) r)/r`.
    pub a_prime: f64,
    /// Dilation exponent (with sign flipped) of the `q`-term, `((N-sigma) r - q(N-s))/r`.
    pub b_prime: f64,
    /// Exponent of `1/rho` in the sharp constant.
    pub sharp_exponent: f64,
}

pub fn derive_exponents(params: &CknParams) -> Result<DerivedExponents> {
    validate_ckn(params).into_result()?;
    let CknParams { p, q, r, sigma, s, .. } = *params;
    let n = params.n();
    let gap = params.gradient_gap();
    let c = params.combos();

    let r1 = c.grad * q / c.interp;
    let r2 = c.mass * p / c.interp;
    let s1 = c.grad * sigma / c.interp;
    let split_num = n * p * (s - sigma) + (r * sigma - q * s) * gap;
    let s2 = split_num / c.interp;
    let split_den = p * (s - sigma) + (r - q) * gap;
    let sigma_bar = split_num / split_den;

    Ok(DerivedExponents {
        a: interpolation_exponent(params, &c),
        p_star: params.p_star(),
        p_star_s_mu: params.p_star_at(s),
        p_star_sigma_mu: params.p_star_at(sigma),
        lambda_star: lambda_star_from(&c),
        r1,
        r2,
        s1,
        s2,
        sigma_bar,
        // p(N - sigma_bar)/(N-mu-p) with the factor N-mu-p cancelled symbolically.
        p_star_sigma_bar_mu: p * c.mass / split_den,
        a_prime: c.grad / r,
        b_prime: c.mass / r,
        sharp_exponent: c.total / (r * c.interp),
    })
}

/// `lambda* = (grad/total)^{total/grad} (mass/grad)^{mass/grad}`, via logarithms.
fn lambda_star_from(c: &ScalingCombos) -> f64 {
    let ln = (c.total / c.grad) * (c.grad / c.total).ln() + (c.mass / c.grad) * (c.mass / c.grad).ln();
    ln.exp()
}

/// Weighted Hardy-Sobolev exponent `p(N-t)/(N-p-mu)`.
pub fn p_star_weighted(dim: u32, p: f64, mu: f64, t: f64) -> Result<f64> {
    let n = f64::from(dim);
    let gap = n - p - mu;
    if gap.is_nan() || gap <= 0.0 {
        return Err(Error::Supercritical(gap));
    }
    Ok(p * (n - t) / gap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPowerMin {
    /// Minimizing argument.
    pub t0: f64,
    /// Minimum value.
    pub value: f64,
}

/// Closed-form minimum of `g(t) = t^a A + t^{-b} B` over `t > 0`.
pub fn two_power_infimum(a: f64, b: f64, big_a: f64, big_b: f64) -> Result<TwoPowerMin> {
    ensure_positive("a", a)?;
    ensure_positive("b", b)?;
    ensure_positive("A", big_a)?;
    ensure_positive("B", big_b)?;
    let sum = a + b;
    let t0 = ((b * big_b).ln() - (a * big_a).ln()) / sum;
    let ln_value = (sum / a).ln() - (b / sum) * (b / a).ln() + (b / sum) * big_a.ln() + (a / sum) * big_b.ln();
    Ok(TwoPowerMin {
        t0: t0.exp(),
        value: ln_value.exp(),
    })
}

/// Coefficient `C*(lambda)` with `inf_t I_lambda(u_t) = C*(lambda) ||u||^{p mass/total} |u|_{q,sigma}^{q grad/total}`.
///
/// `c_star(params, lambda*) == 1`.
pub fn c_star(params: &CknParams, lambda: f64) -> Result<f64> {
    validate_ckn(params).into_result()?;
    ensure_positive("lambda", lambda)?;
    let c = params.combos();
    let ln = (c.total / c.grad).ln() - (c.mass / c.total) * (c.mass / c.grad).ln() + (c.grad / c.total) * lambda.ln();
    Ok(ln.exp())
}

/// Sharp constant `C = (1/rho)^{sharp_exponent}`.
pub fn sharp_constant_from_rho(params: &CknParams, rho: f64) -> Result<f64> {
    ensure_positive("rho", rho)?;
    let c = params.combos();
    let denom = params.r * c.interp;
    if denom == 0.0 {
        return Err(Error::Degenerate("r[(N-sigma)p - (N-mu-p)q] vanishes".to_owned()));
    }
    Ok((-(c.total / denom) * rho.ln()).exp())
}

/// Multiplier `r[p(N-sigma) - (N-mu-p)q] rho / [(mu+p-sigma)r + (p-q)(N-s)]`
/// of the Euler-Lagrange equation at a minimizer with level `rho`.
pub fn lagrange_multiplier(params: &CknParams, rho: f64) -> Result<f64> {
    ensure_positive("rho", rho)?;
    let c = params.combos();
    if c.total == 0.0 {
        return Err(Error::Degenerate("(mu+p-sigma)r + (p-q)(N-s) vanishes".to_owned()));
    }
    Ok(params.r * c.interp * rho / c.total)
}
