//! Exact radial solutions of the homogeneous exterior problem.
//!
//! Outside the ball `B_R` the function `u(r) = −(R/r)^p`, `p = n/k − 2`,
//! solves `S_k(∇²u) = 0`, equals −1 on the sphere and decays like
//! `−ρ r^{−p}` with `ρ = R^p`. Every level set is a round sphere, so the
//! level-set integrals have closed forms.

use thiserror::Error;

use crate::fields::Jet2;
use crate::monotone::{limit_bound, weights, ProblemSpec};
use crate::scalar::{binomial, sphere_area, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RadialError {
    #[error("order k = {k} must satisfy 1 <= k < n/2 (n = {n})")]
    InvalidOrder { n: usize, k: usize },
    #[error("ball radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error("radius {r} lies inside the ball of radius {radius}")]
    OutOfDomain { r: f64, radius: f64 },
    #[error("level {0} outside [-1, 0)")]
    LevelOutOfRange(f64),
}

/// `u(r) = −(R/r)^{n/k−2}` outside `B_R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSolution<T> {
    pub n: usize,
    pub k: usize,
    pub radius: T,
    /// Far-field constant `R^{n/k−2}`.
    pub rho: T,
    /// `|∇u|` on the sphere, `(n/k−2)/R`.
    pub c_bdry: T,
}

impl<T: Real> RadialSolution<T> {
    pub fn new(n: usize, k: usize, radius: T) -> Result<Self, RadialError> {
        if k == 0 || 2 * k >= n {
            return Err(RadialError::InvalidOrder { n, k });
        }
        if !(radius > T::zero() && radius.is_finite()) {
            return Err(RadialError::InvalidRadius(radius.to_f64().unwrap_or(f64::NAN)));
        }
        let p = decay::<T>(n, k);
        Ok(Self { n, k, radius, rho: radius.powf(p), c_bdry: p / radius })
    }

    /// Decay exponent `p = n/k − 2`.
    pub fn p(&self) -> T {
        decay(self.n, self.k)
    }

    /// `(u, u', u'')` at radius r.
    pub fn profile(&self, r: T) -> (T, T, T) {
        let p = self.p();
        let u = -(self.radius / r).powf(p);
        let du = -p * u / r;
        let d2u = p * (p + T::one()) * u / (r * r);
        (u, du, d2u)
    }

    /// Radius of the level set `{u = t}`.
    pub fn level_radius(&self, t: T) -> T {
        self.radius * (-t).powf(-T::one() / self.p())
    }

    /// `|∇u|` on `{u = t}`.
    pub fn level_gradient(&self, t: T) -> T {
        self.p() / self.level_radius(t) * (-t)
    }

    /// Hessian eigenvalues `(u'', u'/r)`; the second has multiplicity `n − 1`.
    pub fn hessian_eigenvalues(&self, r: T) -> (T, T) {
        let (_, du, d2u) = self.profile(r);
        (d2u, du / r)
    }

    /// `S_j(∇²u)` at radius r.
    pub fn sk_hessian(&self, r: T, j: usize) -> T {
        let (radial, tang) = self.hessian_eigenvalues(r);
        let n = self.n;
        if j == 0 {
            return T::one();
        }
        binomial::<T>(n - 1, j) * tang.powi(j as i32) + binomial::<T>(n - 1, j - 1) * radial * tang.powi(j as i32 - 1)
    }
}

fn decay<T: Real>(n: usize, k: usize) -> T {
    T::from_usize_lossy(n) / T::from_usize_lossy(k) - T::lit(2.0)
}

/// Jet of the radial solution at the point `r·e_1`.
pub fn radial_eval<T: Real>(sol: &RadialSolution<T>, r: T) -> Result<Jet2<T>, RadialError> {
    radial_eval_at(sol, {
        let mut x = vec![T::zero(); sol.n];
        x[0] = r;
        x
    })
}

/// Jet of the radial solution at an arbitrary exterior point.
pub fn radial_eval_at<T: Real>(sol: &RadialSolution<T>, x: Vec<T>) -> Result<Jet2<T>, RadialError> {
    let r = x.iter().map(|&c| c * c).sum::<T>().sqrt();
    if r < sol.radius * (T::one() - T::epsilon() * T::lit(4.0)) {
        return Err(RadialError::OutOfDomain {
            r: r.to_f64().unwrap_or(f64::NAN),
            radius: sol.radius.to_f64().unwrap_or(f64::NAN),
        });
    }
    let (u, du, d2u) = sol.profile(r);
    Ok(Jet2::radial(x, u, du, d2u))
}

/// Functional value and its ingredients on one level set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialLevel<T> {
    pub t: T,
    pub radius: T,
    pub c1: T,
    pub c2: T,
    /// `∫ H_k |∇u|^a`.
    pub int_hk: T,
    /// `∫ H_{k−1} |∇u|^{a+1}`.
    pub int_hk1: T,
    pub f: T,
}

/// Closed-form functional on the level `{u = t}` of a radial solution.
pub fn radial_f<T: Real>(sol: &RadialSolution<T>, t: T, spec: &ProblemSpec<T>) -> Result<RadialLevel<T>, RadialError> {
    if !(t >= -T::one() && t < T::zero()) {
        return Err(RadialError::LevelOutOfRange(t.to_f64().unwrap_or(f64::NAN)));
    }
    let (n, k) = (sol.n, sol.k);
    let r = sol.level_radius(t);
    let g = sol.level_gradient(t);
    let area = sphere_area::<T>(n - 1) * r.powi(n as i32 - 1);
    let int_hk = binomial::<T>(n - 1, k) * r.powi(-(k as i32)) * g.powf(spec.a) * area;
    let int_hk1 = binomial::<T>(n - 1, k - 1) * r.powi(1 - k as i32) * g.powf(spec.a + T::one()) * area;
    let (c1, c2) = weights(t, spec);
    Ok(RadialLevel { t, radius: r, c1, c2, int_hk, int_hk1, f: c1 * int_hk + c2 * int_hk1 })
}

/// Right-hand side of the limit formula for this ball.
pub fn radial_limit<T: Real>(sol: &RadialSolution<T>, spec: &ProblemSpec<T>) -> T {
    limit_bound(spec, sol.rho)
}

/// Leading-order level-set asymptotics for a solution with far-field constant ρ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptotics<T> {
    /// Predicted `|x|` on the level.
    pub radius: T,
    pub area: T,
    /// `∫ H_k |∇u|^a`.
    pub int_hk: T,
    /// `∫ H_{k−1} |∇u|^{a+1}`.
    pub int_hk1: T,
}

pub fn asymptotic_predict<T: Real>(rho: T, t: T, spec: &ProblemSpec<T>) -> Asymptotics<T> {
    let (n, k) = (spec.n, spec.k);
    let kf = T::from_usize_lossy(k);
    let n2k = T::from_usize_lossy(n - 2 * k);
    let s = -t;
    let radius = s.powf(-kf / n2k) * rho.powf(kf / n2k);
    let area = sphere_area::<T>(n - 1) * (s / rho).powf(kf * T::from_usize_lossy(n - 1) / (kf + kf - T::from_usize_lossy(n)));
    let grad = spec.decay() * s / radius;
    let int_hk = binomial::<T>(n - 1, k) * radius.powi(-(k as i32)) * grad.powf(spec.a) * area;
    let int_hk1 = binomial::<T>(n - 1, k - 1) * radius.powi(1 - k as i32) * grad.powf(spec.a + T::one()) * area;
    Asymptotics { radius, area, int_hk, int_hk1 }
}

/// Integral over `[r0, ∞)` split into a quadrature core and a closed-form tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailedIntegral<T> {
    pub core: T,
    pub tail: T,
    /// Fitted power-law exponent of the integrand at the cut.
    pub exponent: T,
    pub r_cut: T,
}

impl<T: Real> TailedIntegral<T> {
    pub fn total(&self) -> T {
        self.core + self.tail
    }
}

/// `∫_{r0}^∞ f(r) dr` for an integrand that is a power law `c r^q`, `q < −1`,
/// beyond `r_cut`: adaptive Simpson in `log r` up to the cut plus the
/// analytic tail.
pub fn integrate_to_infinity<T: Real>(f: impl Fn(T) -> T, r0: T, r_cut: T, tol: T) -> TailedIntegral<T> {
    let (l0, l1) = (r0.ln(), r_cut.ln());
    let g = |l: T| {
        let r = l.exp();
        f(r) * r
    };
    let core = adaptive_simpson(&g, l0, l1, tol);
    let h = T::lit(1e-3);
    let (fa, fb) = (f(r_cut * (-h).exp()), f(r_cut * h.exp()));
    let exponent = (fb.abs().ln() - fa.abs().ln()) / (h + h);
    let tail = -f(r_cut) * r_cut / (exponent + T::one());
    TailedIntegral { core, tail, exponent, r_cut }
}

/// Adaptive Simpson quadrature with absolute tolerance.
pub fn adaptive_simpson<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, tol: T) -> T {
    let m = (a + b) / T::lit(2.0);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: u32) -> T {
    let m = (a + b) / T::lit(2.0);
    let (lm, rm) = ((a + m) / T::lit(2.0), (m + b) / T::lit(2.0));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / T::lit(6.0) * (fa + T::lit(4.0) * flm + fm);
    let right = (b - m) / T::lit(6.0) * (fm + T::lit(4.0) * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= T::lit(15.0) * tol {
        return left + right + diff / T::lit(15.0);
    }
    let half = tol / T::lit(2.0);
    simpson_step(f, a, m, fa, flm, fm, left, half, depth - 1) + simpson_step(f, m, b, fm, frm, fb, right, half, depth - 1)
}

/// `∫_{|x|>R} S_{k−1}(∇²u) |∇u|² dx` by quadrature plus tail.
pub fn energy_integral<T: Real>(sol: &RadialSolution<T>) -> TailedIntegral<T> {
    let n = sol.n;
    let area = sphere_area::<T>(n - 1);
    let density = |r: T| {
        let (_, du, _) = sol.profile(r);
        sol.sk_hessian(r, sol.k - 1) * du * du * area * r.powi(n as i32 - 1)
    };
    let scale = density(sol.radius).abs() * sol.radius;
    integrate_to_infinity(density, sol.radius, sol.radius * T::lit(8.0), scale * T::lit(1e-13))
}

/// The same integral in closed form.
pub fn energy_integral_exact<T: Real>(sol: &RadialSolution<T>) -> T {
    let (n, k) = (sol.n, sol.k);
    let p = sol.p();
    let r = sol.radius;
    let (radial, tang) = sol.hessian_eigenvalues(r);
    let (_, du, _) = sol.profile(r);
    let s = if k == 1 {
        T::one()
    } else {
        binomial::<T>(n - 1, k - 1) * tang.powi(k as i32 - 1)
            + binomial::<T>(n - 1, k - 2) * radial * tang.powi(k as i32 - 2)
    };
    // density ∝ r^q with q = n − 1 − (k−1)(p+2) − 2(p+1)
    let q = T::from_usize_lossy(n - 1) - T::from_usize_lossy(k - 1) * (p + T::lit(2.0)) - T::lit(2.0) * (p + T::one());
    -s * du * du * sphere_area::<T>(n - 1) * r.powi(n as i32) / (q + T::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::{quermass, RevolutionBody};
    use crate::symfunc::sigma_matrix;
    use std::f64::consts::PI;

    fn s4() -> f64 {
        8.0 * PI * PI / 3.0
    }

    #[test]
    fn eval_examples() {
        let sol = RadialSolution::<f64>::new(3, 1, 1.0).unwrap();
        let j = radial_eval(&sol, 2.0).unwrap();
        assert!((j.u + 0.5).abs() < 1e-15);
        assert!((j.grad_norm() - 0.25).abs() < 1e-15);
        assert!(j.h.trace().abs() < 1e-15);

        let sol = RadialSolution::<f64>::new(5, 2, 1.0).unwrap();
        let j = radial_eval(&sol, 1.0).unwrap();
        assert!((j.u + 1.0).abs() < 1e-15 && (j.grad_norm() - 0.5).abs() < 1e-15);
        let ev = j.h.eigenvalues();
        assert!((ev[0] + 0.75).abs() < 1e-14);
        assert!(ev[1..].iter().all(|e| (e - 0.5).abs() < 1e-14));
        assert!(sigma_matrix(&j.h, 2).abs() < 1e-14);

        let sol = RadialSolution::<f64>::new(4, 1, 1.0).unwrap();
        assert!((sol.profile(1e4).0 * 1e8 + 1.0).abs() < 1e-12);
        assert!(matches!(radial_eval(&sol, 0.5), Err(RadialError::OutOfDomain { .. })));
        assert!(RadialSolution::<f64>::new(4, 2, 1.0).is_err());
    }

    #[test]
    fn homogeneous_equation_holds_off_axis() {
        for &(n, k) in &[(3, 1), (5, 2), (7, 2), (7, 3), (9, 4)] {
            let sol = RadialSolution::<f64>::new(n, k, 1.3).unwrap();
            let mut x = vec![0.0; n];
            for (i, c) in x.iter_mut().enumerate() {
                *c = 0.7 + 0.3 * i as f64;
            }
            let j = radial_eval_at(&sol, x).unwrap();
            let scale = j.h.frobenius().powi(k as i32);
            assert!(sigma_matrix(&j.h, k).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn functional_examples() {
        let s = ProblemSpec::new(3, 1, 1.0, 1.0, 0.0).unwrap();
        let sol = RadialSolution::new(3, 1, 2.0).unwrap();
        for &t in &[-1.0, -0.5, -0.01] {
            let lv = radial_f(&sol, t, &s).unwrap();
            assert!((lv.f - 4.0 * PI).abs() < 1e-12 * 4.0 * PI);
            assert!((lv.int_hk - 8.0 * PI * (-t)).abs() < 1e-12);
        }
        let s = ProblemSpec::new(3, 1, 2.0, 1.0, 0.0).unwrap();
        assert!((radial_f(&sol, -0.3, &s).unwrap().f - PI).abs() < 1e-12);
        assert!((radial_limit(&sol, &s) - PI).abs() < 1e-12);

        let s = ProblemSpec::new(5, 2, 2.0, 1.0, 0.0).unwrap();
        let sol = RadialSolution::new(5, 2, 1.0).unwrap();
        for i in 0..100 {
            let t = -1.0 + i as f64 / 100.0;
            let f = radial_f(&sol, t, &s).unwrap().f;
            assert!((f - 0.5 * s4()).abs() <= 1e-10 * f, "t={t} f={f}");
        }
        assert!(radial_f(&sol, 0.0, &s).is_err());
    }

    #[test]
    fn asymptotics_are_exact_on_balls() {
        let s = ProblemSpec::new(3, 1, 2.0, 1.0, 0.0).unwrap();
        let a = asymptotic_predict(2.0f64, -0.5, &s);
        assert!((a.radius - 4.0).abs() < 1e-12);
        assert!((a.area - 64.0 * PI).abs() < 1e-10);
        assert!((a.int_hk1 - PI / 8.0).abs() < 1e-13);
        let s5 = ProblemSpec::new(5, 2, 2.0, 1.0, 0.0).unwrap();
        let a = asymptotic_predict(1.0f64, -1.0, &s5);
        assert!((a.radius - 1.0).abs() < 1e-14 && (a.area - s4()).abs() < 1e-12);

        for &(n, k, rad) in &[(3, 1, 1.7), (5, 2, 2.0), (7, 3, 0.8)] {
            let s = ProblemSpec::<f64>::new(n, k, 3.0, 1.0, 0.0).unwrap();
            let sol = RadialSolution::new(n, k, rad).unwrap();
            for &t in &[-0.9, -0.4, -0.05] {
                let a = asymptotic_predict(sol.rho, t, &s);
                let lv = radial_f(&sol, t, &s).unwrap();
                assert!((a.radius - lv.radius).abs() <= 1e-10 * lv.radius);
                assert!((a.int_hk - lv.int_hk).abs() <= 1e-10 * lv.int_hk);
                assert!((a.int_hk1 - lv.int_hk1).abs() <= 1e-10 * lv.int_hk1);
            }
        }
    }

    #[test]
    fn energy_integral_examples() {
        let sol = RadialSolution::<f64>::new(5, 2, 1.0).unwrap();
        assert!((energy_integral_exact(&sol) - 0.625 * s4()).abs() < 1e-12);
        let q = energy_integral(&sol);
        assert!((q.total() - 0.625 * s4()).abs() < 1e-9 * s4());
        assert!((q.exponent + 1.5).abs() < 1e-6);
        for &(n, k, r) in &[(3, 1, 2.0), (7, 2, 1.0), (7, 3, 1.5)] {
            let sol = RadialSolution::<f64>::new(n, k, r).unwrap();
            let exact = energy_integral_exact(&sol);
            assert!((energy_integral(&sol).total() - exact).abs() <= 1e-9 * exact.abs());
        }
    }

    #[test]
    fn boundary_gradient_matches_quermass_ratio() {
        for &(n, k, r) in &[(5usize, 2usize, 1.0f64), (5, 2, 2.0), (7, 2, 1.0), (7, 3, 1.0)] {
            let sol = RadialSolution::new(n, k, r).unwrap();
            let body = RevolutionBody::sphere(n, r, 256).unwrap();
            let ratio = quermass(&body, k - 1).unwrap() / quermass(&body, k - 2).unwrap();
            let c = (n - 2 * k) as f64 / k as f64 * (k - 1) as f64 / (n - k + 1) as f64 * ratio;
            assert!((c - sol.c_bdry).abs() < 1e-10, "{n} {k}: {c} vs {}", sol.c_bdry);
        }
    }
}
