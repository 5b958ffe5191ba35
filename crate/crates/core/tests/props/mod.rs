//! Randomized invariants, shared by the `properties` and `acceptance` targets.
//! Each check runs `cases` deterministic proptest cases and reports the first
//! minimal counterexample.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use tumorflow_core::linear::{evolve_linear, ModeSeed, ShapeState};
use tumorflow_core::nonlinear::{curvature, phi, solve_nutrient, GridSettings};
use tumorflow_core::radial::{self, SolverSettings};
use tumorflow_core::spectrum::{lambda_k, ModelParameters, SpectrumTable};
use tumorflow_core::NutrientModel;

type Check = Result<(), TestCaseError>;

fn run<S, F>(cases: u32, strategy: S, test: F) -> Result<(), String>
where
    S: Strategy,
    S::Value: Debug,
    F: Fn(S::Value) -> Check,
{
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn seeds(max_k: usize, max_amp: f64) -> impl Strategy<Value = Vec<ModeSeed>> {
    prop::collection::vec(
        (0..=max_k, -max_amp..max_amp, 0.0..2.0 * PI).prop_map(|(k, amplitude, phase)| ModeSeed { k, amplitude, phase }),
        1..=4,
    )
}

/// Shapes with `sup |rho| <= 4 max_amp` and modes up to `max_k`.
fn shape(max_k: usize, max_amp: f64) -> impl Strategy<Value = ShapeState> {
    seeds(max_k, max_amp).prop_map(move |s| ShapeState::from_seeds(&s, 16, 1.0).unwrap())
}

/// Shapes whose modes are multiples of `l`, paired with `l`.
fn lattice_shape(max_amp: f64) -> impl Strategy<Value = (usize, ShapeState)> {
    (2usize..=4)
        .prop_flat_map(move |l| {
            (
                Just(l),
                prop::collection::vec((1usize..=3, -max_amp..max_amp, 0.0..2.0 * PI), 1..=3),
            )
        })
        .prop_map(|(l, terms)| {
            let s: Vec<ModeSeed> =
                terms.into_iter().map(|(m, amplitude, phase)| ModeSeed { k: m * l, amplitude, phase }).collect();
            (l, ShapeState::from_seeds(&s, 16, 1.0).unwrap())
        })
}

fn unit_table() -> &'static SpectrumTable {
    static T: OnceLock<SpectrumTable> = OnceLock::new();
    T.get_or_init(|| {
        // R_A = 1 exactly: A = 2 v0'(1) with v0 = U(., 1)
        let m = NutrientModel::identity();
        let v0 = radial::solve_U(1.0, &m, &SolverSettings::default()).unwrap();
        let p = ModelParameters::new(2.0 * v0.deriv_at_1(), 0.0, 1.0, m).unwrap();
        SpectrumTable::build(&p, 16, &SolverSettings::default()).unwrap()
    })
}

fn unit_params(g: f64) -> ModelParameters {
    let t = unit_table();
    ModelParameters::new(t.params().a, g, t.params().r, NutrientModel::identity()).unwrap()
}

fn small_grid() -> GridSettings {
    GridSettings::with_size(16, 32)
}

fn models() -> impl Strategy<Value = NutrientModel> {
    prop_oneof![
        Just(NutrientModel::identity()),
        (0.1..2.0f64, 0.0..1.0f64).prop_map(|(c1, c2)| NutrientModel::polynomial(vec![c1, c2]).unwrap()),
    ]
}

/// Radial: every `U(., lambda)` satisfies `0 < U <= 1` and is nondecreasing.
pub fn radial_maximum_principle(cases: u32) -> Result<(), String> {
    run(cases, (models(), 0.0..40.0f64), |(m, lambda)| {
        let u = radial::solve_U(lambda, &m, &SolverSettings::default()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(u.values().iter().all(|&v| v > 0.0 && v <= 1.0 + 1e-12));
        prop_assert!(u.values().windows(2).all(|w| w[1] >= w[0] - 1e-12));
        prop_assert!(u.deriv_at_0() == 0.0);
        Ok(())
    })
}

/// Spectrum: `mu_k = mu_{-k}` and `lambda_k = lambda_{-k}` exactly, for any `G`.
pub fn symbol_symmetry(cases: u32) -> Result<(), String> {
    run(cases, (-100.0..500.0f64, 0i64..=16), |(g, k)| {
        let t = unit_table().with_g(g);
        prop_assert_eq!(t.mu(k).unwrap(), t.mu(-k).unwrap());
        prop_assert_eq!(t.lambda(k).unwrap(), t.lambda(-k).unwrap());
        prop_assert_eq!(lambda_k(k, 1.7), lambda_k(-k, 1.7));
        Ok(())
    })
}

/// Spectrum: `mu_1 = 0`, `mu_k(G_k) = 0` with a sign flip across `G_k`, and the
/// `G = 0` closed form, at the steady radius of a random `A`.
pub fn threshold_consistency(cases: u32) -> Result<(), String> {
    run(cases, (models(), 0.15..0.95f64), |(m, frac)| {
        let s = SolverSettings::default();
        let fail = |e: tumorflow_core::Error| TestCaseError::fail(e.to_string());
        let p = ModelParameters::at_steady_state(frac * m.f_at_one(), 0.0, m, &s).map_err(fail)?;
        let t = SpectrumTable::build(&p, 8, &s).map_err(fail)?;
        let r3 = p.r.powi(3);
        for k in 0..=8i64 {
            let kf = k as f64;
            prop_assert_eq!(t.mu(k).unwrap(), (-kf * kf * kf + kf) / r3);
        }
        prop_assert!(t.with_g(37.0).mu(1).unwrap().abs() <= 1e-8);
        for k in 2..=8usize {
            if let Some(gk) = t.g_threshold(k).unwrap() {
                let at = |g: f64| t.with_g(g).mu(k as i64).unwrap();
                prop_assert!(at(gk).abs() <= 1e-8 * (1.0 + (k * k * k) as f64 / r3));
                let h = 1e-3 * gk.abs().max(1.0);
                prop_assert!(at(gk - h) * at(gk + h) < 0.0);
            }
        }
        Ok(())
    })
}

/// Linear flow: semigroup property and exact preservation of the mode lattice.
pub fn linear_semigroup_and_lattice(cases: u32) -> Result<(), String> {
    run(cases, (lattice_shape(0.02), -50.0..300.0f64, 0.0..0.5f64, 0.0..0.5f64), |((l, s), g, t1, t2)| {
        let table = unit_table().with_g(g);
        let s = ShapeState::from_parts(s.coeffs().to_vec(), table.params().r, None).unwrap();
        let two = evolve_linear(&evolve_linear(&s, t1, &table).unwrap(), t2, &table).unwrap();
        let one = evolve_linear(&s, t1 + t2, &table).unwrap();
        for k in 0..=16i64 {
            let (a, b) = (one.coeff(k), two.coeff(k));
            prop_assert!((a - b).norm() <= 1e-13 * a.norm().max(1e-300) + 1e-300);
            if !(k as usize).is_multiple_of(l) {
                prop_assert_eq!(a, Complex64::new(0.0, 0.0));
            }
        }
        prop_assert_eq!(one.coeff(0).im, 0.0);
        Ok(())
    })
}

/// Nonlinear: a mode lattice is preserved by `Phi` up to rounding. The
/// absolute rounding floor of `Phi` is about `1e-11`, so off-lattice
/// coefficients are bounded by `1e-10 max(1, max_k |Phi_hat(k)|)`.
pub fn phi_preserves_lattice(cases: u32) -> Result<(), String> {
    run(cases, (lattice_shape(0.03), 0.0..300.0f64), |((l, s), g)| {
        prop_assume!(s.sup_norm() > 1e-4);
        // n_theta divisible by every l, so the grid is invariant under the rotation
        let ev = phi(&s, &unit_params(g), &NutrientModel::identity(), &GridSettings::with_size(16, 48))
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        let scale = ev.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        for (k, c) in ev.coeffs.iter().enumerate() {
            if k % l != 0 {
                prop_assert!(c.norm() <= 1e-10 * scale.max(1.0), "k {} leak {:e} of {:e}", k, c.norm(), scale);
            }
        }
        Ok(())
    })
}

/// Nonlinear: reflecting the shape (`theta -> -theta`, conjugate coefficients)
/// conjugates `Phi`, and `Phi` is real.
pub fn phi_reality_and_reflection(cases: u32) -> Result<(), String> {
    run(cases, (shape(6, 0.03), 0.0..300.0f64), |(s, g)| {
        let p = unit_params(g);
        let m = NutrientModel::identity();
        let s = ShapeState::from_parts(s.coeffs().to_vec(), p.r, None).unwrap();
        let mirrored = ShapeState::from_parts(s.coeffs().iter().map(|c| c.conj()).collect(), p.r, None).unwrap();
        let fail = |e: tumorflow_core::Error| TestCaseError::fail(e.to_string());
        let a = phi(&s, &p, &m, &small_grid()).map_err(fail)?;
        let b = phi(&mirrored, &p, &m, &small_grid()).map_err(fail)?;
        prop_assert!(a.values.iter().all(|v| v.is_finite()));
        prop_assert_eq!(a.coeffs[0].im, 0.0);
        let scale = a.coeffs.iter().fold(1e-12f64, |m, c| m.max(c.norm()));
        for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
            prop_assert!((x - y.conj()).norm() <= 1e-9 * scale + 1e-9);
        }
        Ok(())
    })
}

/// Nonlinear: the nutrient obeys `0 <= psi <= 1` on any admissible shape.
pub fn nutrient_maximum_principle(cases: u32) -> Result<(), String> {
    run(cases, (shape(6, 0.05), models(), 0.2..0.9f64), |(s, m, frac)| {
        let p = ModelParameters::new(frac * m.f_at_one(), 1.0, 1.0, m.clone()).unwrap();
        let f = solve_nutrient(&s, &m, &p, &small_grid()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(f.max() <= 1.0 + 1e-12, "max {}", f.max());
        prop_assert!(f.min() >= 0.0);
        Ok(())
    })
}

/// Geometry: `(kappa(eps rho) - kappa(0)) / eps -> -(rho + rho'') / R` with an
/// `O(eps)` error, i.e. the error drops tenfold from `eps = 1e-2` to `1e-3`.
pub fn curvature_linearization(cases: u32) -> Result<(), String> {
    run(cases, (seeds(6, 1.0), 0.5..2.0f64), |(dir, radius)| {
        let norm: f64 = dir.iter().map(|s| s.amplitude.abs()).sum();
        prop_assume!(norm > 0.1);
        let n = 64;
        let scaled = |eps: f64| {
            let s: Vec<ModeSeed> = dir
                .iter()
                .map(|d| ModeSeed { amplitude: d.amplitude * eps / norm, ..*d })
                .collect();
            ShapeState::from_seeds(&s, 8, radius).unwrap()
        };
        let small = scaled(1e-2);
        let unit = ShapeState::from_parts(small.coeffs().iter().map(|c| c * 100.0).collect(), radius, None).unwrap();
        let rho = unit.to_grid(n);
        let rho2 = unit.grid_derivative(n, 2);
        let err = |eps: f64| -> f64 {
            let k = curvature(&scaled(eps), n).unwrap();
            (0..n).fold(0.0f64, |m, j| m.max(((k[j] - 1.0 / radius) / eps + (rho[j] + rho2[j]) / radius).abs()))
        };
        let (e1, e2) = (err(1e-2), err(1e-3));
        prop_assume!(e1 > 1e-9);
        let ratio = e1 / e2;
        prop_assert!((8.5..11.5).contains(&ratio), "ratio {}", ratio);
        Ok(())
    })
}

pub type Suite = fn(u32) -> Result<(), String>;

pub const ALL: [(&str, Suite); 8] = [
    ("radial maximum principle", radial_maximum_principle),
    ("symbol symmetry", symbol_symmetry),
    ("threshold consistency and G = 0 reduction", threshold_consistency),
    ("linear semigroup and lattice", linear_semigroup_and_lattice),
    ("Phi lattice invariance", phi_preserves_lattice),
    ("Phi reality and reflection", phi_reality_and_reflection),
    ("nutrient maximum principle", nutrient_maximum_principle),
    ("curvature linearization", curvature_linearization),
];
