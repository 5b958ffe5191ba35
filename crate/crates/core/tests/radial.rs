mod common;

use tumorflow_core::radial::{
    appendix_series, boundary_ratio, solve_U, solve_u_n, steady_radius, AppendixSeries, Provenance,
    RadialProfile, SolverSettings,
};
use tumorflow_core::NutrientModel;

fn settings() -> SolverSettings {
    SolverSettings::default()
}

fn poly() -> NutrientModel {
    NutrientModel::polynomial(vec![1.0, 0.5]).unwrap()
}

/// `r` times the residual of the defining equation, at the midpoints between
/// stored nodes. The weight removes the `1/r` amplification of the
/// integrator's absolute slope error near the origin.
fn midpoint_residual(profile: &RadialProfile, eq: impl Fn(f64, f64, f64, f64) -> f64) -> f64 {
    let grid = profile.grid();
    let second = profile.second_derivatives();
    let interp = profile.interpolator();
    let w = tumorflow_core::cheb::lobatto_weights(grid.len() - 1);
    let mut worst: f64 = 0.0;
    for pair in grid.windows(2) {
        let r = 0.5 * (pair[0] + pair[1]);
        let y2 = tumorflow_core::cheb::barycentric(grid, &w, &second, r);
        worst = worst.max((r * eq(r, interp.value(r), interp.slope(r), y2)).abs());
    }
    worst
}

#[test]
fn u_at_lambda_one_matches_bessel() {
    let u = solve_U(1.0, &NutrientModel::identity(), &settings()).unwrap();
    let i0 = common::bessel_i(0, 1.0);
    assert!((u.value_at_0() - 1.0 / i0).abs() < 1e-10);
    assert!((u.deriv_at_1() - common::ratio(0, 1.0)).abs() < 1e-10);
    assert!((u.value_at_0() - 0.78984).abs() < 1e-5);
    assert!((u.deriv_at_1() - 0.44639).abs() < 1e-5);
    assert!((u.value_at_1() - 1.0).abs() <= 1e-12);
    assert_eq!(u.deriv_at_0(), 0.0);
    for (&r, &v) in u.grid().iter().zip(u.values()) {
        let exact = common::bessel_i(0, r) / i0;
        assert!((v - exact).abs() < 1e-10, "r = {r}");
    }
}

#[test]
fn u_satisfies_ode_and_maximum_principle() {
    for model in [NutrientModel::identity(), poly()] {
        for lambda in [0.01, 0.5, 2.0, 9.0, 40.0] {
            let u = solve_U(lambda, &model, &settings()).unwrap();
            assert!(u.values().iter().all(|&v| v > 0.0 && v <= 1.0 + 1e-12));
            let res = midpoint_residual(&u, |r, y, y1, y2| y2 + y1 / r - lambda * model.f(y));
            // measured against the size of the forcing term lambda f(U)
            assert!(res <= 10.0 * settings().abs_tol * lambda.max(1.0), "lambda {lambda}: {res:e}");
        }
    }
}

#[test]
fn u_n_matches_bessel_and_satisfies_ode() {
    let m = NutrientModel::identity();
    let v0 = solve_U(1.0, &m, &settings()).unwrap();
    for n in [0usize, 1, 2, 5] {
        let u = solve_u_n(n, 1.0, &v0, &m, &settings()).unwrap();
        assert_eq!(u.provenance(), Provenance::ModeSolution { n, radius: 1.0 });
        assert_eq!(u.value_at_0(), 1.0);
        assert_eq!(u.deriv_at_0(), 0.0);
        for (&r, &v) in u.grid().iter().zip(u.values()) {
            assert!((v - common::u_n(n, 1.0, r)).abs() < 1e-10);
        }
        assert!(u.values().windows(2).all(|w| w[1] >= w[0]));
        let nf = n as f64;
        let res = midpoint_residual(&u, |r, y, y1, y2| y2 + (2.0 * nf + 1.0) / r * y1 - y);
        assert!(res <= 10.0 * settings().abs_tol, "n {n}: {res:e}");
    }
    assert!((solve_u_n(0, 1.0, &v0, &m, &settings()).unwrap().value_at_1() - 1.26607).abs() < 1e-5);
    assert!((solve_u_n(1, 1.0, &v0, &m, &settings()).unwrap().value_at_1() - 1.13032).abs() < 1e-5);
}

#[test]
fn ratios_decrease_monotonically() {
    let m = NutrientModel::identity();
    let v0 = solve_U(1.0, &m, &settings()).unwrap();
    let mut prev = f64::INFINITY;
    let mut prev_u: Option<RadialProfile> = None;
    for n in 0..=13 {
        let u = solve_u_n(n, 1.0, &v0, &m, &settings()).unwrap();
        let r = u.deriv_at_1() / u.value_at_1();
        assert!((r - common::ratio(n, 1.0)).abs() < 1e-10);
        assert!(r < prev);
        if let Some(p) = &prev_u {
            assert!(u.values().iter().zip(p.values()).all(|(a, b)| a <= b));
        }
        prev = r;
        prev_u = Some(u);
    }
    assert!(prev < 0.05);
}

#[test]
fn appendix_constants() {
    let m = NutrientModel::identity();
    let v0 = solve_U(1.0, &m, &settings()).unwrap();
    let r0 = boundary_ratio(0, 1.0, &v0, &m, &settings()).unwrap();
    let r1 = boundary_ratio(1, 1.0, &v0, &m, &settings()).unwrap();
    assert_eq!(format!("{r0:.3}"), "0.446");
    assert_eq!(format!("{r1:.3}"), "0.240");
}

#[test]
fn series_agrees_with_solver() {
    let m = NutrientModel::identity();
    let v0 = solve_U(1.0, &m, &settings()).unwrap();
    for (n, which) in [(0, AppendixSeries::U0), (1, AppendixSeries::U1)] {
        let u = solve_u_n(n, 1.0, &v0, &m, &settings()).unwrap();
        for i in 1..=10 {
            let r = i as f64 / 10.0;
            let s = appendix_series(which, r, 20).unwrap();
            assert!((s - u.value_at(r)).abs() < 1e-8);
        }
    }
    assert!((appendix_series(AppendixSeries::U0, 1.0, 30).unwrap() - 1.26607).abs() < 1e-5);
}

#[test]
fn steady_radius_identity() {
    let a = common::steady_a(1.0);
    let s = steady_radius(a, &NutrientModel::identity(), &settings()).unwrap();
    assert!((s.radius - 1.0).abs() < 1e-6, "{}", s.radius);
    assert!(s.residual.abs() <= settings().abs_tol);
    assert!((s.profile.deriv_at_1() - a * s.radius.powi(2) / 2.0).abs() <= 1e-12);
    assert!((s.alpha - s.radius.powi(2) * (1.0 - a / 2.0)).abs() < 1e-15);
    for r in [0.3, 2.0, 5.0] {
        let s = steady_radius(common::steady_a(r), &NutrientModel::identity(), &settings()).unwrap();
        assert!((s.radius - r).abs() < 1e-7 * r, "{r}: {}", s.radius);
    }
}

#[test]
fn steady_radius_shrinks_as_a_approaches_f1() {
    let m = NutrientModel::identity();
    let mut prev = f64::INFINITY;
    for a in [0.9, 0.99, 0.999, 0.9999] {
        let r = steady_radius(a, &m, &settings()).unwrap().radius;
        assert!(r < prev);
        // small-radius expansion: A = 1 - R^2/8 + ...
        if a > 0.99 {
            assert!((r * r - 8.0 * (1.0 - a)).abs() < 2.0 * (1.0 - a).powi(2) * 8.0);
        }
        prev = r;
    }
    assert!(prev < 0.1);
}

#[test]
fn steady_radius_polynomial() {
    let m = poly();
    for frac in [0.2, 0.5, 0.8] {
        let a = frac * m.f_at_one();
        let s = steady_radius(a, &m, &settings()).unwrap();
        assert!(s.residual.abs() <= 1e-12);
    }
}
