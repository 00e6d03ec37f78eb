//! Weight functions, the monotone level-set functional and its audit.
//!
//! Along the level sets `Σ_t = {u = t}` of an exterior solution,
//!
//! ```text
//! F(t) = C1(t) ∫_Σt H_k |∇u|^a + C2(t) ∫_Σt H_{k−1} |∇u|^{a+1}
//! ```
//!
//! is non-increasing on `[−1, 0)` whenever `C1 ≥ 0`, with the weights
//! solving a linear first-order system in `t`.

use thiserror::Error;

use crate::fields::FieldError;
use crate::scalar::{binomial, sphere_area, Real};
use crate::surfaces::SurfaceError;

mod audit;
mod levelset;

pub use audit::{
    boundary_integrals, coarse_companion, default_levels, f_eval, level_integrals, monotonicity_audit,
    monotonicity_audit_with, AuditReport, AuditRow, LevelValue, ToleranceSource, RICHARDSON_SAFETY, TOL_FLOOR,
};
pub use levelset::{
    extract_levelset, extract_levelset_contour, extract_levelset_with, ExtractionMode, LevelPoint, LevelSetCurve,
    DEFAULT_TAU_GRAD,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("invalid problem specification: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonotoneError {
    #[error("level t = {t} cannot be extracted: {reason}")]
    LevelOutOfRange { t: f64, reason: String },
    #[error("|∇u| = {grad:e} below τ_grad on level t = {t} at θ = {theta}")]
    CriticalPointOnLevel { t: f64, theta: f64, grad: f64 },
    #[error("contour of level t = {t} does not join the two axis points")]
    OpenContour { t: f64 },
    #[error("{0}")]
    Mismatch(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// Numerical tolerances shared by the solver and the audits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Newton stopping threshold on the scaled residual sup-norm.
    pub newton: f64,
    /// Relative stabilization threshold for the far-field constant.
    pub rho: f64,
    /// Minimum |∇u| on extracted level sets.
    pub grad: f64,
    /// Relative spread of boundary |∇u| accepted as constant.
    pub overdetermined: f64,
    /// Relative tolerance for the two sides of a squeeze to coincide.
    pub squeeze: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { newton: 1e-10, rho: 1e-8, grad: 1e-8, overdetermined: 1e-3, squeeze: 1e-6 }
    }
}

/// Global problem parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec<T> {
    pub n: usize,
    pub k: usize,
    /// Exponent of |∇u| in the functional.
    pub a: T,
    pub c3: T,
    pub c4: T,
    /// Levels in `[−1, 0)` at which the functional is audited.
    pub t_grid: Vec<T>,
    /// Constant `c_{n,k}` in the regularizing right-hand side.
    pub cnk: T,
    pub tol: Tolerances,
}

impl<T: Real> ProblemSpec<T> {
    /// Validated spec with an empty level grid and default tolerances.
    pub fn new(n: usize, k: usize, a: T, c3: T, c4: T) -> Result<Self, SpecError> {
        Self::with_grid(n, k, a, c3, c4, Vec::new())
    }

    pub fn with_grid(n: usize, k: usize, a: T, c3: T, c4: T, t_grid: Vec<T>) -> Result<Self, SpecError> {
        let spec = Self { n, k, a, c3, c4, t_grid, cnk: T::one(), tol: Tolerances::default() };
        let v = spec.violations();
        if v.is_empty() {
            Ok(spec)
        } else {
            Err(SpecError::Invalid(v))
        }
    }

    /// Smallest admissible exponent `k(n−k−1)/(n−k)`.
    pub fn min_exponent(n: usize, k: usize) -> T {
        T::from_usize_lossy(k * (n - k - 1)) / T::from_usize_lossy(n - k)
    }

    /// Every violated constraint, in a fixed order.
    pub fn violations(&self) -> Vec<String> {
        let (n, k) = (self.n, self.k);
        let mut out = Vec::new();
        if k < 1 {
            out.push(format!("k = {k} must be at least 1"));
        }
        if 2 * k >= n {
            out.push(format!("k = {k} must satisfy k < n/2 (n = {n})"));
        }
        if !self.a.is_finite() || !self.c3.is_finite() || !self.c4.is_finite() {
            out.push("a, C3, C4 must be finite".into());
        }
        if k >= 1 && 2 * k < n {
            let amin = Self::min_exponent(n, k);
            if self.a < amin - T::epsilon() * T::lit(64.0) * amin.abs().max(T::one()) {
                out.push(format!("a = {} below k(n-k-1)/(n-k) = {}", self.a, amin));
            }
        }
        if !(self.cnk > T::zero()) {
            out.push("c_nk must be positive".into());
        }
        for (i, &t) in self.t_grid.iter().enumerate() {
            if !(t >= -T::one() && t < T::zero()) {
                out.push(format!("t_grid[{i}] = {t} outside [-1, 0)"));
            }
        }
        if out.is_empty() {
            for (i, &t) in self.t_grid.iter().enumerate() {
                let (c1, _) = weights(t, self);
                if c1 < T::zero() {
                    out.push(format!("C1(t) = {c1} < 0 at t_grid[{i}] = {t}"));
                }
            }
        }
        out
    }

    /// `(n−k)/(n−2k)`.
    fn q(&self) -> T {
        T::from_usize_lossy(self.n - self.k) / T::from_usize_lossy(self.n - 2 * self.k)
    }

    /// `((a−k)(n−k)+k)/(n−2k)`.
    pub fn e1(&self) -> T {
        let (n, k) = (T::from_usize_lossy(self.n), T::from_usize_lossy(self.k));
        ((self.a - k) * (n - k) + k) / (n - k - k)
    }

    /// `(a−k+1)(n−k)/(n−2k)`.
    pub fn e2(&self) -> T {
        let (n, k) = (T::from_usize_lossy(self.n), T::from_usize_lossy(self.k));
        (self.a - k + T::one()) * (n - k) / (n - k - k)
    }

    /// `a + 1 − k`.
    fn a1k(&self) -> T {
        self.a + T::one() - T::from_usize_lossy(self.k)
    }

    /// `a − k(n−k−1)/(n−k)`.
    fn beta(&self) -> T {
        self.a - Self::min_exponent(self.n, self.k)
    }

    /// `n/k − 2`.
    pub fn decay(&self) -> T {
        T::from_usize_lossy(self.n) / T::from_usize_lossy(self.k) - T::lit(2.0)
    }
}

/// `(C1(t), C2(t))` in closed form.
pub fn weights<T: Real>(t: T, spec: &ProblemSpec<T>) -> (T, T) {
    let s = -t;
    let (e1, e2) = (spec.e1(), spec.e2());
    let c1 = s.powf(-e1) * spec.c3 + s.powf(T::one() - e1) * spec.c4;
    let c2 = -e1 / spec.a1k() * spec.c3 * s.powf(-e2) - spec.q() * spec.c4 * s.powf(T::one() - e2);
    (c1, c2)
}

/// `(C1'(t), C2'(t))` by differentiating the closed forms.
pub fn weights_derivative<T: Real>(t: T, spec: &ProblemSpec<T>) -> (T, T) {
    let s = -t;
    let (e1, e2) = (spec.e1(), spec.e2());
    let one = T::one();
    // d/dt (−t)^p = −p (−t)^{p−1}
    let d1 = e1 * s.powf(-e1 - one) * spec.c3 + (e1 - one) * s.powf(-e1) * spec.c4;
    let d2 = -e1 / spec.a1k() * spec.c3 * e2 * s.powf(-e2 - one) - spec.q() * spec.c4 * (e2 - one) * s.powf(-e2);
    (d1, d2)
}

/// Relative residuals of the two weight ODEs at `t`.
pub fn weights_ode_residual<T: Real>(t: T, spec: &ProblemSpec<T>) -> (T, T) {
    let (c1, c2) = weights(t, spec);
    let (d1, d2) = weights_derivative(t, spec);
    let (beta, q) = (spec.beta(), spec.q());
    let qt = q / t;
    let first = [d2, beta * qt * qt * c1];
    let second = [d1, -spec.a1k() * c2, T::lit(2.0) * qt * beta * c1];
    (relative(&first), relative(&second))
}

fn relative<T: Real>(terms: &[T]) -> T {
    let sum = terms.iter().copied().fold(T::zero(), |a, b| a + b);
    let scale = terms.iter().map(|x| x.abs()).fold(T::zero(), T::max);
    if scale == T::zero() {
        T::zero()
    } else {
        sum.abs() / scale
    }
}

/// Limit of the functional as `t → 0⁻` for a solution with far-field constant ρ.
pub fn limit_bound<T: Real>(spec: &ProblemSpec<T>, rho: T) -> T {
    let (n, k) = (spec.n, spec.k);
    let nf = T::from_usize_lossy(n);
    let kf = T::from_usize_lossy(k);
    let n2k = T::from_usize_lossy(n - 2 * k);
    let rho_exp = kf * (nf - kf - spec.a - T::one()) / n2k;
    n2k / (kf * spec.a1k())
        * binomial::<T>(n - 1, k - 1)
        * spec.decay().powf(spec.a)
        * rho.powf(rho_exp)
        * sphere_area::<T>(n - 1)
        * spec.c3
}

/// Exponent of ρ in [`limit_bound`]; zero makes the bound ρ-independent.
pub fn limit_rho_exponent<T: Real>(spec: &ProblemSpec<T>) -> T {
    let nf = T::from_usize_lossy(spec.n);
    let kf = T::from_usize_lossy(spec.k);
    kf * (nf - kf - spec.a - T::one()) / T::from_usize_lossy(spec.n - 2 * spec.k)
}

/// `C(n−1,k−1)(n/k−2)^{n−k}|S^{n−1}|`, the ball value of `∫ H_{k−1}|∇u|^{n−k}`.
pub fn capacity_bound<T: Real>(n: usize, k: usize) -> T {
    let decay = T::from_usize_lossy(n) / T::from_usize_lossy(k) - T::lit(2.0);
    binomial::<T>(n - 1, k - 1) * decay.powi((n - k) as i32) * sphere_area::<T>(n - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, k: usize, a: f64, c3: f64, c4: f64) -> ProblemSpec<f64> {
        ProblemSpec::new(n, k, a, c3, c4).unwrap()
    }

    #[test]
    fn weight_examples() {
        let s = spec(4, 1, 1.5, 0.7, 0.3);
        let (c1, _) = weights(-1.0, &s);
        assert!((c1 - 1.0).abs() < 1e-15);
        let (c1, c2) = weights(-0.5, &spec(3, 1, 2.0, 1.0, 0.0));
        assert!((c1 - 8.0).abs() < 1e-12 && (c2 + 24.0).abs() < 1e-12);
        let (c1, c2) = weights(-0.5, &spec(5, 2, 2.0, 1.0, 0.0));
        assert!((c1 - 4.0).abs() < 1e-12 && (c2 + 16.0).abs() < 1e-12);
    }

    #[test]
    fn weights_solve_the_ode_system() {
        for &(n, k, a, c3, c4) in &[(3, 1, 1.0, 1.0, 0.0), (3, 1, 1.0, 0.3, 2.0), (7, 3, 2.5, 1.0, -0.2), (9, 2, 6.0, 0.0, 1.0)] {
            let s = spec(n, k, a, c3, c4);
            for i in 1..100 {
                let t = -1.0 + i as f64 / 100.0;
                let (r1, r2) = weights_ode_residual(t, &s);
                assert!(r1 <= 1e-12 && r2 <= 1e-12, "{n} {k} {a} t={t}: {r1} {r2}");
            }
        }
    }

    #[test]
    fn analytic_derivative_matches_differences() {
        let s = spec(5, 2, 2.3, 0.8, 0.5);
        let h = 1e-6;
        for &t in &[-0.9, -0.5, -0.2] {
            let (d1, d2) = weights_derivative(t, &s);
            let (p1, p2) = weights(t + h, &s);
            let (m1, m2) = weights(t - h, &s);
            assert!(((p1 - m1) / (2.0 * h) - d1).abs() <= 1e-5 * d1.abs().max(1.0));
            assert!(((p2 - m2) / (2.0 * h) - d2).abs() <= 1e-5 * d2.abs().max(1.0));
        }
    }

    #[test]
    fn spec_validation_lists_every_violation() {
        let err = ProblemSpec::<f64>::new(4, 2, -1.0, 1.0, 0.0).unwrap_err();
        let SpecError::Invalid(v) = err;
        assert_eq!(v.len(), 1);
        let err = ProblemSpec::<f64>::with_grid(5, 2, 0.5, 1.0, 0.0, vec![-0.5, 0.0]).unwrap_err();
        let SpecError::Invalid(v) = err;
        assert_eq!(v.len(), 2, "{v:?}");
        let err = ProblemSpec::<f64>::with_grid(3, 1, 1.0, -1.0, 0.0, vec![-0.5]).unwrap_err();
        assert!(matches!(err, SpecError::Invalid(v) if v[0].contains("C1")));
        assert!(ProblemSpec::<f64>::new(5, 2, 4.0 / 3.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn limit_examples() {
        let pi = std::f64::consts::PI;
        assert!((limit_bound(&spec(3, 1, 1.0, 1.0, 0.0), 2.0) - 4.0 * pi).abs() < 1e-12);
        assert!((limit_bound(&spec(3, 1, 2.0, 1.0, 0.0), 2.0) - pi).abs() < 1e-12);
        let s4 = 8.0 * pi * pi / 3.0;
        assert!((limit_bound(&spec(5, 2, 2.0, 1.0, 0.0), 1.0) - 0.5 * s4).abs() < 1e-12);
        assert!((0.5 * s4 - 13.1595).abs() < 1e-4);
        assert_eq!(limit_bound(&spec(5, 2, 2.0, 0.0, 1.0), 1.0), 0.0);
        assert!((capacity_bound::<f64>(3, 1) - 4.0 * pi).abs() < 1e-12);
    }
}
