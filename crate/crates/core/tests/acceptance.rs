//! Acceptance battery: one PASS/FAIL line per criterion. Exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use khessian::battery::run_battery;
use khessian::fields::{levelset_curvature, Jet2};
use khessian::identities::*;
use khessian::monotone::*;
use khessian::radial::{radial_f, radial_limit, RadialSolution};
use khessian::scalar::{binomial, sphere_area};
use khessian::solver::{solve_exterior, AxiGrid, ExteriorField};
use khessian::surfaces::{minkowski_residual, RevolutionBody};
use khessian::symfunc::{sigma_matrix, SymMat};

type Check = Result<String, String>;

fn require(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn symmetric_functions() -> Check {
    let start = Instant::now();
    let rep = run_battery(20_240_601, 10_000);
    let secs = start.elapsed().as_secs_f64();
    require(
        rep.passed(1e-10, 1e-5, -1e-12) && secs < 10.0,
        format!(
            "identities {:.1e}, gradient vs FD {:.1e}, Newton-MacLaurin min {:.1e}, {secs:.2}s",
            rep.identity_max, rep.gradient_max, rep.maclaurin_min
        ),
    )
}

/// `(γ, γ', γ'')` of an analytic profile.
type Profile = Box<dyn Fn(f64) -> (f64, f64, f64)>;

fn spheroid_profile(polar: f64, equatorial: f64) -> Profile {
    let (a, b) = (polar, equatorial);
    Box::new(move |th: f64| {
        let d = b * b * th.cos().powi(2) + a * a * th.sin().powi(2);
        let d1 = (a * a - b * b) * (2.0 * th).sin();
        let d2 = 2.0 * (a * a - b * b) * (2.0 * th).cos();
        let g = a * b * d.powf(-0.5);
        let g1 = -0.5 * a * b * d.powf(-1.5) * d1;
        let g2 = a * b * (0.75 * d.powf(-2.5) * d1 * d1 - 0.5 * d.powf(-1.5) * d2);
        (g, g1, g2)
    })
}

fn cos_profile(amp: f64, mode: f64) -> Profile {
    Box::new(move |th: f64| {
        let (s, c) = (mode * th).sin_cos();
        (1.0 + amp * c, -amp * mode * s, -amp * mode * mode * c)
    })
}

/// Jet of `u = −(r/γ(θ))^{−p}` at `r = scale·γ(θ)` in R^n. Its level sets are
/// dilates of the body `r < γ(θ)`.
fn dilate_field_jet(n: usize, p: f64, prof: &Profile, theta: f64, scale: f64) -> Jet2<f64> {
    let (g, g1, g2) = prof(theta);
    let r = scale * g;
    let w = scale;
    let (dphi, d2phi) = (p * w.powf(-p - 1.0), -p * (p + 1.0) * w.powf(-p - 2.0));
    // gradient and Hessian of w = r/γ in the (e_r, e_θ) frame
    let grad_w = [1.0 / g, -g1 / (g * g)];
    let h_tt = (1.0 / g - g2 / (g * g) + 2.0 * g1 * g1 / g.powi(3)) / r;
    let polar_h = [
        [d2phi * grad_w[0] * grad_w[0], d2phi * grad_w[0] * grad_w[1]],
        [d2phi * grad_w[0] * grad_w[1], d2phi * grad_w[1] * grad_w[1] + dphi * h_tt],
    ];
    let polar_g = [dphi * grad_w[0], dphi * grad_w[1]];
    let (s, c) = theta.sin_cos();
    // columns e_r = (c, s), e_θ = (−s, c) in (z, ρ)
    let rot = [[c, -s], [s, c]];
    let gz = [rot[0][0] * polar_g[0] + rot[0][1] * polar_g[1], rot[1][0] * polar_g[0] + rot[1][1] * polar_g[1]];
    let mut h2 = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    h2[a][b] += rot[a][i] * polar_h[i][j] * rot[b][j];
                }
            }
        }
    }
    let rho = r * s;
    let h = SymMat::from_fn(n, |i, j| match (i, j) {
        (0..=1, 0..=1) => h2[i][j],
        _ if i == j => gz[1] / rho,
        _ => 0.0,
    });
    let mut x = vec![0.0; n];
    x[0] = r * c;
    x[1] = rho;
    let mut grad = vec![0.0; n];
    grad[..2].copy_from_slice(&gz);
    Jet2::new(x, -w.powf(-p), grad, h).expect("finite jet")
}

fn levelset_formula() -> Check {
    let bodies: Vec<(&str, Profile)> = vec![
        ("spheroid", spheroid_profile(1.5, 1.0)),
        ("cos2", cos_profile(0.2, 2.0)),
        ("cos3", cos_profile(0.1, 3.0)),
    ];
    let scales = [1.0, 1.7, 3.2];
    let (mut points, mut worst) = (0usize, 0.0f64);
    for (name, prof) in &bodies {
        for n in 3..=7usize {
            let samples: Vec<f64> = (0..=2048).map(|j| prof(PI * j as f64 / 2048.0).0).collect();
            let body = RevolutionBody::from_samples(n, samples).map_err(|e| format!("{name}: {e}"))?;
            for k in 1..n {
                let p = (n as f64 / k as f64 - 2.0).max(0.5);
                for j in 0..17 {
                    let theta = (j as f64 + 0.5) * PI / 17.0;
                    let scale = scales[j % scales.len()];
                    let jet = dilate_field_jet(n, p, prof, theta, scale);
                    let lc = levelset_curvature(&jet, k, sigma_matrix(&jet.h, k)).map_err(|e| e.to_string())?;
                    let sample = body.geometry_at(theta).map_err(|e| e.to_string())?;
                    // curvatures of the dilate scale like 1/scale
                    let hk = sample.hk(n, k) / scale.powi(k as i32);
                    let hk1 = sample.hk(n, k - 1) / scale.powi(k as i32 - 1);
                    // relative, floored at the unit-sphere magnitude to handle sign changes
                    let unit_k = binomial::<f64>(n - 1, k) / scale.powi(k as i32);
                    let unit_k1 = binomial::<f64>(n - 1, k - 1) / scale.powi(k as i32 - 1);
                    worst = worst
                        .max((lc.hk - hk).abs() / hk.abs().max(unit_k))
                        .max((lc.hk1 - hk1).abs() / hk1.abs().max(unit_k1));
                    points += 1;
                }
            }
        }
    }
    require(points >= 1000 && worst <= 1e-6, format!("{points} points, worst relative difference {worst:.1e}"))
}

fn minkowski() -> Check {
    let bodies: [(&str, fn(usize, usize) -> RevolutionBody<f64>); 3] = [
        ("sphere", |n, m| RevolutionBody::sphere(n, 1.0, m).unwrap()),
        ("spheroid", |n, m| RevolutionBody::spheroid(n, 1.5, 1.0, m).unwrap()),
        ("cos", |n, m| RevolutionBody::cos_perturbed(n, 1.0, 0.2, 2, m).unwrap()),
    ];
    let (mut worst, mut min_order) = (0.0f64, f64::INFINITY);
    let mut exact = Vec::new();
    for (name, make) in bodies {
        for n in 3..=7usize {
            for k in 1..n {
                let res = minkowski_residual(&make(n, 2048), k).map_err(|e| e.to_string())?;
                worst = worst.max(res.abs());
                // order from the first doubling past the pre-asymptotic range
                // whose residuals sit above round-off
                let seq: Vec<f64> = [32, 64, 128, 256]
                    .iter()
                    .map(|&m| minkowski_residual(&make(n, m), k).unwrap().abs())
                    .collect();
                match seq.windows(2).find(|w| w[1] > 1e-12) {
                    Some(w) => min_order = min_order.min((w[0] / w[1]).log2()),
                    None if !exact.contains(&name) => exact.push(name),
                    None => {}
                }
            }
        }
    }
    let exact = if exact.is_empty() { String::new() } else { format!(", round-off from 32 samples in some cases: {}", exact.join(" ")) };
    require(
        worst <= 1e-8 && min_order >= 2.0,
        format!("worst |residual| {worst:.1e} at 2048 samples, min observed order {min_order:.1}{exact}"),
    )
}

fn radial_battery() -> Check {
    let start = Instant::now();
    let mut worst_f = 0.0f64;
    let mut worst_gap = 0.0f64;
    let mut worst_identity = 0.0f64;
    let mut worst_c = 0.0f64;
    let t_grid: Vec<f64> = (0..100).map(|j| -1.0 + j as f64 / 100.0).collect();
    for (n, k, r) in [(3, 1, 1.0), (3, 1, 2.0), (5, 2, 1.0), (5, 2, 2.0), (7, 2, 1.0), (7, 3, 1.0)] {
        let sol = RadialSolution::new(n, k, r).map_err(|e| e.to_string())?;
        let a = ProblemSpec::<f64>::min_exponent(n, k).max(2.0);
        let a = if a > 2.0 { a + 0.25 } else { a };
        let spec = ProblemSpec::new(n, k, a, 1.0, 0.0).map_err(|e| e.to_string())?;
        let limit = radial_limit(&sol, &spec);
        for &t in &t_grid {
            worst_f = worst_f.max(rel(radial_f(&sol, t, &spec).unwrap().f, limit));
        }
        let data = ExteriorData::from_radial(&sol).map_err(|e| e.to_string())?;
        let ledger = inequality_ledger(&data, None, &spec, LEDGER_FLOOR);
        for name in ["gradient_curvature", "capacity"] {
            let e = ledger.iter().find(|e| e.name == name).ok_or(format!("no {name} entry"))?;
            worst_gap = worst_gap.max(e.gap.abs() / e.lhs.abs());
        }
        if k >= 2 {
            for e in [identity_lemma33(&data, 1e-6), pohozaev_lemma34(&data, 1e-6)] {
                let e = e.map_err(|e| e.to_string())?;
                worst_identity = worst_identity.max(e.gap.abs() / e.lhs.abs());
            }
        }
        let sphere = RevolutionBody::sphere(n, r, 16).unwrap().with_panels(RADIAL_PANELS);
        let c = c_formula(&sphere, k).map_err(|e| e.to_string())?;
        worst_c = worst_c.max(rel(c, (n as f64 / k as f64 - 2.0) / r));
    }
    let value = |n, k, r, a| {
        let sol = RadialSolution::new(n, k, r).unwrap();
        radial_f(&sol, -0.5, &ProblemSpec::new(n, k, a, 1.0, 0.0).unwrap()).unwrap().f
    };
    let specific = [
        rel(value(3, 1, 2.0, 1.0), 4.0 * PI),
        rel(value(3, 1, 2.0, 2.0), PI),
        rel(value(5, 2, 1.0, 2.0), 0.5 * sphere_area::<f64>(4)),
    ];
    let worst_specific = specific.iter().copied().fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    require(
        worst_f <= 1e-10 && worst_specific <= 1e-10 && worst_gap <= 1e-10 && worst_identity <= 1e-6 && worst_c <= 1e-10 && secs < 60.0,
        format!(
            "F vs limit {worst_f:.1e}, named values {worst_specific:.1e}, ledger gaps {worst_gap:.1e}, \
             identities {worst_identity:.1e}, c_formula {worst_c:.1e}, {secs:.2}s"
        ),
    )
}

fn sup_error(field: &ExteriorField, exact: impl Fn(f64, f64) -> f64) -> f64 {
    let g = &field.grid;
    let mut err = 0.0f64;
    for i in 0..=g.ns {
        for j in 0..=g.nth {
            err = err.max((field.value(i, j) - exact(g.r(i, j), g.theta(j))).abs());
        }
    }
    err
}

fn prolate_solve() -> Check {
    let (a, b) = (1.5f64, 1.0f64);
    let f = (a * a - b * b).sqrt();
    let q = |xi: f64| ((xi + 1.0) / (xi - 1.0)).ln();
    let q0 = q(a / f);
    let exact = |r: f64, th: f64| {
        let (z, rho) = (r * th.cos(), r * th.sin());
        -q(((z - f).hypot(rho) + (z + f).hypot(rho)) / (2.0 * f)) / q0
    };
    let rho = f / (f / a).atanh();
    let body = RevolutionBody::spheroid(3, a, b, 256).unwrap();
    let spec = ProblemSpec::new(3, 1, 2.0, 1.0, 0.0).unwrap();
    let grid = AxiGrid::new(body, 40.0, 256, 128).map_err(|e| e.to_string())?;
    let field = solve_exterior(grid, &spec, &[1e-3]).map_err(|e| e.to_string())?;
    let err = sup_error(&field, exact);
    let rho_err = rel(field.rho_hat, rho);
    require(err <= 1e-3 && rho_err <= 1e-3, format!("sup error {err:.1e}, rho_hat relative error {rho_err:.1e}"))
}

fn two_hessian_sphere() -> Check {
    let start = Instant::now();
    let spec = ProblemSpec::new(5, 2, 2.0, 1.0, 0.0).unwrap();
    let grid = AxiGrid::new(RevolutionBody::sphere(5, 1.0, 64).unwrap(), 40.0, 256, 16).map_err(|e| e.to_string())?;
    let field = solve_exterior(grid, &spec, &[0.5, 0.1, 0.02]).map_err(|e| e.to_string())?;
    let err = sup_error(&field, |r, _| -r.powf(-0.5));
    let secs = start.elapsed().as_secs_f64();
    require(
        err <= 5e-5 && field.admissible >= -1e-12 && secs < 300.0,
        format!("sup error {err:.1e}, cone margin {:.1e}, {secs:.1}s", field.admissible),
    )
}

fn battery_bodies(n: usize) -> Vec<(&'static str, RevolutionBody<f64>)> {
    vec![
        ("spheroid", RevolutionBody::spheroid(n, 1.5, 1.0, 256).unwrap()),
        ("cos", RevolutionBody::cos_perturbed(n, 1.0, 0.05, 2, 256).unwrap()),
    ]
}

fn solve_body(body: RevolutionBody<f64>, ns: usize, nth: usize) -> Result<ExteriorField, String> {
    let spec = ProblemSpec::new(3, 1, 2.0, 1.0, 0.0).unwrap();
    let grid = AxiGrid::new(body, 40.0, ns, nth).map_err(|e| e.to_string())?;
    solve_exterior(grid, &spec, &[1e-3]).map_err(|e| e.to_string())
}

fn monotonicity() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, body) in battery_bodies(3) {
        let field = solve_body(body, 256, 128)?;
        for a in [1.0, 2.0] {
            for (c3, c4) in [(1.0, 0.0), (0.0, 1.0)] {
                let spec = ProblemSpec::new(3, 1, a, c3, c4).map_err(|e| e.to_string())?;
                let rep = monotonicity_audit(&field, &spec).map_err(|e| e.to_string())?;
                let gap = rep.boundary_gap().unwrap_or(f64::NAN);
                let pass = rep.passed() && gap > 10.0 * rep.tol_mono;
                ok &= pass;
                lines.push(format!("{name} a={a} C=({c3},{c4}) gap/tol={:.0}{}", gap / rep.tol_mono, if pass { "" } else { " FAIL" }));
            }
        }
    }
    require(ok, lines.join("; "))
}

fn inequality_ledgers() -> Check {
    let spec = ProblemSpec::new(3, 1, 2.0, 1.0, 0.0).unwrap();
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, body) in battery_bodies(3) {
        let field = solve_body(body, 256, 128)?;
        let ledger = field_ledger(&field, &spec).map_err(|e| e.to_string())?;
        let get = |n: &str| ledger.iter().find(|e| e.name == n).cloned().ok_or(format!("no {n} entry"));
        let cap = get("capacity")?;
        let gc = get("gradient_curvature")?;
        let bound = capacity_bound::<f64>(3, 1);
        let pass = cap.lhs > bound && cap.gap > 10.0 * cap.tolerance && gc.gap > 0.0 && gc.verdict == Verdict::InequalityOk;
        ok &= pass;
        lines.push(format!(
            "{name}: capacity {:.4} vs {bound:.4} (gap/tol {:.0}), gradient-curvature gap {:.3e}",
            cap.lhs,
            cap.gap / cap.tolerance,
            gc.gap
        ));
    }
    require(ok, lines.join("; "))
}

fn certification() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    let spec = ProblemSpec::new(3, 1, 2.0, 1.0, 0.0).unwrap();
    let mut cases = vec![("sphere", RevolutionBody::sphere(3, 1.0, 64).unwrap(), "certified-ball")];
    cases.extend(battery_bodies(3).into_iter().map(|(n, b)| (n, b, "certified-not-overdetermined")));
    for (name, body, want) in cases {
        let field = solve_body(body, 128, 64)?;
        let data = ExteriorData::from_field(&field).map_err(|e| e.to_string())?;
        let c = certify_ball(&data, &spec).map_err(|e| e.to_string())?;
        ok &= c.verdict.label() == want;
        lines.push(format!("{name} (3,1): {}", c.verdict.label()));
    }
    let mut worst = 0.0f64;
    for (n, k, a) in [(5, 2, 2.0), (7, 2, 3.0), (7, 3, 2.5), (6, 2, 2.0)] {
        let spec = ProblemSpec::new(n, k, a, 1.0, 0.0).unwrap();
        let data = ExteriorData::from_radial(&RadialSolution::new(n, k, 1.0).unwrap()).map_err(|e| e.to_string())?;
        let c = certify_ball(&data, &spec).map_err(|e| e.to_string())?;
        ok &= c.verdict == CertVerdict::CertifiedBall;
        worst = worst.max(rel(c.squeeze_sides.0, c.squeeze_sides.1));
    }
    ok &= worst <= 1e-6;
    lines.push(format!("k>=2 spheres certified, squeeze sides agree to {worst:.1e}"));
    require(ok, lines.join("; "))
}

fn weight_odes() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut tuples = 0;
    while tuples < 20 {
        let n = rng.gen_range(3..=9usize);
        let k = rng.gen_range(1..=(n - 1) / 2);
        let a = ProblemSpec::<f64>::min_exponent(n, k) + rng.gen_range(0.0..3.0);
        let c3 = rng.gen_range(0.0..2.0);
        let c4 = rng.gen_range(-c3..2.0);
        let Ok(spec) = ProblemSpec::new(n, k, a, c3, c4) else { continue };
        for j in 0..100 {
            let t = -1.0 + j as f64 / 100.0;
            let (r1, r2) = weights_ode_residual(t, &spec);
            worst = worst.max(r1).max(r2);
        }
        tuples += 1;
    }
    require(worst <= 1e-10, format!("{tuples} tuples x 100 levels, worst relative residual {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("symmetric-function battery", symmetric_functions),
        ("level-set curvature formula", levelset_formula),
        ("Minkowski integral formula", minkowski),
        ("radial rigidity battery", radial_battery),
        ("prolate spheroid capacitary potential", prolate_solve),
        ("2-Hessian radial recovery", two_hessian_sphere),
        ("monotonicity audit on non-balls", monotonicity),
        ("inequality ledger on non-balls", inequality_ledgers),
        ("ball certification", certification),
        ("weight ODE residuals", weight_odes),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:>2} {name}: {detail}", i + 1);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
