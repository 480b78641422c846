//! Numerical toolkit for the Caffarelli-Kohn-Nirenberg (CKN) family of
//! weighted interpolation inequalities
//!
//! ```text
//! |u|_{r,s} <= C ||u||^a |u|_{q,sigma}^{1-a},
//! |u|_{r,s}^r = ∫ |u|^r / |x|^s dx,   ||u||^p = ∫ |∇u|^p / |x|^mu dx,
//! ```
//!
//! The crate is split into three layers:
//!
//! * [`exponents`]: parameter validation and every closed-form exponent,
//!   coupling constant and scaling coefficient, with no discretization.
//! * [`radial`]: a log-radial grid `tau = ln|x|` on which radial profiles,
//!   singular-weight quadratures, energies, their discrete gradients and the
//!   dilation `u_t = t^{(N-s)/r} u(t x)` are realized.
//! * [`solver`]: constrained minimization of `I*(u) = ||u||^p + lambda* |u|_{q,sigma}^q`
//!   over `|u|_{r,s} = 1`, Euler-Lagrange diagnostics, sampled verification of the
//!   inequality and the first eigenvalue of the weighted p-Laplacian on a ball.
//!
//! All operations are pure functions of their inputs.

pub mod error;
pub mod exponents;
pub mod radial;
pub mod solver;

mod tridiag;

pub use error::{Error, Result};
pub use exponents::{
    c_star, derive_exponents, lagrange_multiplier, map_to_general_form, p_star_weighted, sharp_constant_from_rho,
    two_power_infimum, validate_ckn, validate_theorem_a, Check, CknParams, DerivedExponents, GeneralParams, Relation,
    TwoPowerMin, ValidationReport,
};
pub use radial::{full_sphere_measure, EnergyBreakdown, RadialFunction, RadialGrid, SolidAngle, TailMass};
pub use solver::{
    ckn_ratio, el_residual, first_eigenvalue, minimize_rho, parameter_sweep, verify_inequality, EigenProblem,
    EigenResult, ElResidual, MinimizeResult, SolverOptions, StopReason, VerifyReport,
};
