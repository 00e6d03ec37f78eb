use khessian::battery::run_battery;
use khessian::monotone::{weights_ode_residual, ProblemSpec};
use khessian::radial::{radial_f, RadialSolution};
use khessian::surfaces::{minkowski_residual, RevolutionBody};
use khessian::symfunc::{sigma_all, sigma_matrix, SymMat};
use proptest::prelude::*;

fn sym(n: usize) -> impl Strategy<Value = SymMat<f64>> {
    prop::collection::vec(-2.0f64..2.0, n * n).prop_map(move |d| SymMat::from_fn(n, |i, j| 0.5 * (d[i * n + j] + d[j * n + i])))
}

proptest! {
    #[test]
    fn sigma_is_invariant_under_diagonal_sign_change(a in sym(4), k in 0usize..=4) {
        let flip = SymMat::from_fn(4, |i, j| if (i == 0) ^ (j == 0) { -a.get(i, j) } else { a.get(i, j) });
        let (x, y) = (sigma_matrix(&a, k), sigma_matrix(&flip, k));
        prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0));
    }

    #[test]
    fn sigma_is_homogeneous(a in sym(5), k in 0usize..=5, c in 0.1f64..3.0) {
        let scaled = a.scaled(c);
        let want = c.powi(k as i32) * sigma_matrix(&a, k);
        prop_assert!((sigma_matrix(&scaled, k) - want).abs() <= 1e-9 * want.abs().max(1.0));
    }

    #[test]
    fn sigma_of_shifted_identity(n in 2usize..7, t in -2.0f64..2.0) {
        let s = sigma_all(&vec![1.0 + t; n], n);
        for (k, v) in s.iter().enumerate() {
            let want = khessian::scalar::binomial::<f64>(n, k) * (1.0 + t).powi(k as i32);
            prop_assert!((v - want).abs() <= 1e-10 * want.abs().max(1.0));
        }
    }

    #[test]
    fn weights_solve_their_ode(a_off in 0.0f64..3.0, c3 in -2.0f64..2.0, c4 in -2.0f64..2.0, t in -0.99f64..-0.01) {
        for (n, k) in [(3, 1), (5, 2), (7, 3)] {
            let a = ProblemSpec::<f64>::min_exponent(n, k) + a_off;
            let spec = ProblemSpec::new(n, k, a, c3, c4).unwrap();
            let (r1, r2) = weights_ode_residual(t, &spec);
            prop_assert!(r1.abs() <= 1e-9 && r2.abs() <= 1e-9, "({n},{k}) {r1} {r2}");
        }
    }

    #[test]
    fn radial_functional_is_level_independent(radius in 0.5f64..3.0, t in -0.95f64..-0.05) {
        let sol = RadialSolution::new(5, 2, radius).unwrap();
        let spec = ProblemSpec::new(5, 2, 2.5, 1.0, 0.5).unwrap();
        let (f0, f1) = (radial_f(&sol, -1.0, &spec).unwrap().f, radial_f(&sol, t, &spec).unwrap().f);
        prop_assert!((f0 - f1).abs() <= 1e-10 * f0.abs().max(1.0));
    }

    #[test]
    fn minkowski_holds_on_spheroids(a in 0.6f64..2.0, b in 0.6f64..2.0) {
        let body = RevolutionBody::spheroid(4, a, b, 1024).unwrap();
        for k in 1..=3 {
            prop_assert!(minkowski_residual(&body, k).unwrap().abs() <= 1e-7);
        }
    }
}

#[test]
fn battery_is_deterministic_and_clean() {
    let a = run_battery(42, 500);
    assert_eq!(a, run_battery(42, 500));
    assert!(a.passed(1e-10, 1e-5, 1e-12), "{a:?}");
    assert!(a.maclaurin_min >= 0.0);
}
