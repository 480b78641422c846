mod common;

use std::f64::consts::PI;

use ckn_core::radial::{grad_energy, gradient_i_star, i_star, normalize, scale, tail_mass, weighted_lq};
use ckn_core::{derive_exponents, CknParams, RadialFunction, RadialGrid, SolidAngle};
use common::{close, random_bumps};
use proptest::prelude::*;

const REF: CknParams = CknParams::REFERENCE;

fn central_difference_check(params: &CknParams, eps: f64, tol: f64) {
    // A short grid keeps the far-field weights, and with them I*, of order one so
    // that a 1e-6 perturbation stays far above round-off.
    let grid = RadialGrid::new(-4.0, 4.0, 301, params.dim, SolidAngle::Full).unwrap();
    let lambda = derive_exponents(params).map(|e| e.lambda_star).unwrap_or(0.7);
    let mut rng = common::rng(10);
    let delta = 1e-6;
    for _ in 0..20 {
        let u = random_bumps(&grid, &mut rng, -1.0, 1.0);
        let g = gradient_i_star(&u, params, lambda, eps);
        let mut v = u.values().to_vec();
        for i in 1..grid.len() - 1 {
            let orig = v[i];
            v[i] = orig + delta;
            let plus = i_star(&RadialFunction::new(grid, v.clone()).unwrap(), params, lambda).i_star;
            v[i] = orig - delta;
            let minus = i_star(&RadialFunction::new(grid, v.clone()).unwrap(), params, lambda).i_star;
            v[i] = orig;
            let fd = (plus - minus) / (2.0 * delta);
            assert!(
                (g[i] - fd).abs() <= tol * (1.0 + g[i].abs()),
                "node {i}: {} vs {fd}",
                g[i]
            );
        }
        assert_eq!(g[0], 0.0);
        assert_eq!(g[grid.len() - 1], 0.0);
    }
}

#[test]
fn gradient_matches_central_differences_p2() {
    central_difference_check(&REF, 0.0, 1e-5);
}

#[test]
fn gradient_matches_central_differences_p3() {
    let params = CknParams::new(4, 3.0, 2.0, 3.0, 0.0, 0.0, 1.0);
    central_difference_check(&params, 1e-8, 1e-4);
}

#[test]
fn zero_profile_has_zero_gradient() {
    let grid = RadialGrid::new(-6.0, 6.0, 101, 3, SolidAngle::Full).unwrap();
    let g = gradient_i_star(&RadialFunction::zeros(grid), &REF, 0.5, 0.0);
    assert!(g.iter().all(|&x| x == 0.0));
}

#[test]
fn dilation_obeys_the_two_power_law() {
    let ex = derive_exponents(&REF).unwrap();
    let lambda = ex.lambda_star;
    let mut rng = common::rng(11);
    // h = ln 2 / 100 makes every t below a whole number of cells; the second grid does not.
    for grid in [
        RadialGrid::new(-15.0 * 2f64.ln(), 15.0 * 2f64.ln(), 3001, 3, SolidAngle::Full).unwrap(),
        RadialGrid::new(-12.0, 12.0, 4801, 3, SolidAngle::Full).unwrap(),
    ] {
        for _ in 0..5 {
            let u = random_bumps(&grid, &mut rng, -1.0, 1.0);
            let base = i_star(&u, &REF, lambda);
            for t in [0.25, 0.5, 2.0, 4.0] {
                let ut = scale(&u, t, &REF).unwrap();
                let predicted = t.powf(ex.a_prime) * base.grad_term + t.powf(-ex.b_prime) * lambda * base.q_term;
                let got = i_star(&ut, &REF, lambda).i_star;
                assert!(
                    (got - predicted).abs() / base.i_star < 1e-4,
                    "t={t}: {got} vs {predicted}"
                );
                let norm = i_star(&ut, &REF, lambda).r_norm;
                assert!(close(norm, base.r_norm, 1e-4, 0.0));
            }
        }
    }
}

#[test]
fn aligned_scaling_roundtrips_exactly() {
    let grid = RadialGrid::new(-16.0, 16.0, 3201, 3, SolidAngle::Full).unwrap();
    let mut rng = common::rng(12);
    let u = random_bumps(&grid, &mut rng, -1.0, 1.0);
    let t = (37.0 * grid.h()).exp();
    let back = scale(&scale(&u, t, &REF).unwrap(), 1.0 / t, &REF).unwrap();
    for (a, b) in u.values().iter().zip(back.values()) {
        assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
}

#[test]
fn off_grid_scaling_roundtrip_is_second_order() {
    let grid = RadialGrid::new(-8.0, 8.0, 3201, 3, SolidAngle::Full).unwrap();
    let u = RadialFunction::from_fn(grid, |t| (-t * t / 2.0).exp()).unwrap();
    let back = scale(&scale(&u, 1.3, &REF).unwrap(), 1.0 / 1.3, &REF).unwrap();
    let err = u
        .values()
        .iter()
        .zip(back.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-5, "{err}");
}

#[test]
fn gaussian_quadrature_matches_simpson_oracle() {
    // N = 3, e = 2, w = 1, u = exp(-tau^2): integrand 4 pi exp(-2 tau^2 + 2 tau).
    let grid = RadialGrid::new(-12.0, 12.0, 4801, 3, SolidAngle::Full).unwrap();
    let u = RadialFunction::from_fn(grid, |t| (-t * t).exp()).unwrap();
    let integrand = |t: f64| 4.0 * PI * (-2.0 * t * t + 2.0 * t).exp();
    let m = 200_000;
    let (a, b) = (-12.0, 12.0);
    let h = (b - a) / m as f64;
    let simpson = (0..=m)
        .map(|i| {
            let w = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * integrand(a + i as f64 * h)
        })
        .sum::<f64>()
        * h
        / 3.0;
    let analytic = 4.0 * PI * (PI / 2.0).sqrt() * 0.5f64.exp();
    assert!(close(simpson, analytic, 1e-12, 0.0));
    assert!(close(weighted_lq(&u, 2.0, 1.0), simpson, 1e-6, 0.0));
}

/// `∫_0^1 sin^2(pi tau) e^{k tau} d tau`.
fn sine_moment(k: f64) -> f64 {
    let ek = k.exp() - 1.0;
    ek / (2.0 * k) - 0.5 * k * ek / (k * k + 4.0 * PI * PI)
}

#[test]
fn trapezoid_error_is_second_order() {
    let exact = 4.0 * PI * sine_moment(2.0);
    let errors: Vec<f64> = [41, 81, 161, 321]
        .iter()
        .map(|&n| {
            let grid = RadialGrid::new(0.0, 1.0, n, 3, SolidAngle::Full).unwrap();
            let u = RadialFunction::from_fn(grid, |t| (PI * t).sin()).unwrap();
            (weighted_lq(&u, 2.0, 1.0) - exact).abs()
        })
        .collect();
    for pair in errors.windows(2) {
        assert!(pair[0] / pair[1] >= 3.5, "{errors:?}");
    }
}

#[test]
fn energies_are_linear_in_solid_angle() {
    let full = RadialGrid::new(-6.0, 6.0, 601, 3, SolidAngle::Full).unwrap();
    let half = RadialGrid::new(-6.0, 6.0, 601, 3, SolidAngle::Measure(2.0 * PI)).unwrap();
    let f = |t: f64| (-t * t).exp();
    let u = RadialFunction::from_fn(full, f).unwrap();
    let v = RadialFunction::from_fn(half, f).unwrap();
    assert!(close(
        2.0 * grad_energy(&v, 2.0, 0.0),
        grad_energy(&u, 2.0, 0.0),
        1e-14,
        0.0
    ));
    assert!(close(
        2.0 * weighted_lq(&v, 3.0, 1.0),
        weighted_lq(&u, 3.0, 1.0),
        1e-14,
        0.0
    ));
}

#[test]
fn energy_is_monotone_in_lambda() {
    let grid = RadialGrid::new(-6.0, 6.0, 301, 3, SolidAngle::Full).unwrap();
    let u = random_bumps(&grid, &mut common::rng(13), -1.0, 1.0);
    let energies: Vec<f64> = [0.1, 0.2, 0.5, 1.0]
        .iter()
        .map(|&l| i_star(&u, &REF, l).i_star)
        .collect();
    assert!(energies.windows(2).all(|w| w[0] < w[1]));
    let (a, b) = (i_star(&u, &REF, 0.7), i_star(&u, &REF, 0.2));
    assert!(close(a.i_star - b.i_star, 0.5 * a.q_term, 1e-13, a.i_star));
}

#[test]
fn tail_mass_obeys_the_decay_bound() {
    let grid = RadialGrid::new(-12.0, 12.0, 2401, 3, SolidAngle::Full).unwrap();
    let mut rng = common::rng(14);
    let s_bar = 0.5;
    for _ in 0..100 {
        let u = normalize(&random_bumps(&grid, &mut rng, -3.0, 3.0), &REF).unwrap();
        let weaker = weighted_lq(&u, REF.r, s_bar);
        for radius in [1.0f64, 2.0, 4.0, 8.0] {
            let tail = tail_mass(&u, radius, &REF).unwrap();
            assert!(!tail.beyond_grid);
            assert!(tail.mass <= radius.powf(s_bar - REF.s) * weaker, "R={radius}");
        }
    }
}

#[test]
fn tail_mass_limits() {
    let grid = RadialGrid::new(-6.0, 6.0, 601, 3, SolidAngle::Full).unwrap();
    let u = random_bumps(&grid, &mut common::rng(15), -1.0, 1.0);
    let full = tail_mass(&u, grid.tau_min().exp(), &REF).unwrap();
    assert!(close(full.mass, weighted_lq(&u, REF.r, REF.s), 1e-12, 0.0));
    let none = tail_mass(&u, grid.tau_max().exp(), &REF).unwrap();
    assert!(none.beyond_grid && none.mass == 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalize_is_scale_free(c in 1e-3f64..1e3, seed in 0u64..1000) {
        let grid = RadialGrid::new(-6.0, 6.0, 301, 3, SolidAngle::Full).unwrap();
        let u = random_bumps(&grid, &mut common::rng(seed), -1.0, 1.0);
        let a = normalize(&u, &REF).unwrap();
        let b = normalize(&u.scaled(c), &REF).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() <= 1e-13 * (1.0 + x.abs()));
        }
        let norm = weighted_lq(&a, REF.r, REF.s).powf(1.0 / REF.r);
        prop_assert!((norm - 1.0).abs() <= 1e-14);
        let again = normalize(&a, &REF).unwrap();
        prop_assert!(a.values().iter().zip(again.values()).all(|(x, y)| (x - y).abs() <= 1e-14 * (1.0 + x.abs())));
    }

    #[test]
    fn aligned_shifts_preserve_the_norm(cells in -200i32..200, seed in 0u64..1000) {
        let grid = RadialGrid::new(-10.0, 10.0, 2001, 3, SolidAngle::Full).unwrap();
        let u = random_bumps(&grid, &mut common::rng(seed), -1.0, 1.0);
        let t = (f64::from(cells) * grid.h()).exp();
        let ut = scale(&u, t, &REF).unwrap();
        let (a, b) = (weighted_lq(&u, REF.r, REF.s), weighted_lq(&ut, REF.r, REF.s));
        prop_assert!(close(a, b, 1e-10, 0.0));
    }
}
