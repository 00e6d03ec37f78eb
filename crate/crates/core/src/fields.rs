//! Pointwise level-set geometry of scalar fields.
//!
//! For a regular point of `u` the level set through it has curvatures
//!
//! ```text
//! H_{k-1} = S_k^{ij} u_i u_j / |∇u|^{k+1}
//! H_k     = (S_k(∇²u) − S_k^{ij} u_i u_l u_lj / |∇u|²) / |∇u|^k
//! ```
//!
//! where `S_k(∇²u)` is supplied by the caller: zero for the homogeneous
//! equation, `f^ε(x)` for the regularized one.

use rayon::prelude::*;
use thiserror::Error;

use crate::scalar::Real;
use crate::symfunc::{sigma_grad, sigma_grad_with_values, SymMat};

/// Default lower bound on |∇u| for curvature evaluation.
pub const DEFAULT_TAU_GRAD: f64 = 1e-8;

/// Relative slack used when testing Hessians against the closed cone.
pub const ADMISSIBILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("|∇u| = {norm:e} below threshold {tau:e}: level set is not regular here")]
    DegenerateGradient { norm: f64, tau: f64 },
    #[error("order {k} outside 1..={n}")]
    InvalidOrder { k: usize, n: usize },
    #[error("jet components have inconsistent dimensions")]
    DimensionMismatch,
    #[error("invalid regularization parameters: {0}")]
    InvalidRhs(&'static str),
}

/// Second-order jet of a scalar field at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2<T> {
    pub x: Vec<T>,
    pub u: T,
    pub g: Vec<T>,
    pub h: SymMat<T>,
}

impl<T: Real> Jet2<T> {
    pub fn new(x: Vec<T>, u: T, g: Vec<T>, h: SymMat<T>) -> Result<Self, FieldError> {
        if x.len() != g.len() || g.len() != h.dim() || x.is_empty() {
            return Err(FieldError::DimensionMismatch);
        }
        Ok(Self { x, u, g, h })
    }

    /// Jet of a radial profile `u(|x|)` with `u'` and `u''` given at `|x|`.
    pub fn radial(x: Vec<T>, u: T, du: T, d2u: T) -> Self {
        let n = x.len();
        let r = x.iter().map(|&c| c * c).sum::<T>().sqrt();
        let dir: Vec<T> = x.iter().map(|&c| c / r).collect();
        let g = dir.iter().map(|&d| du * d).collect();
        let tang = du / r;
        let h = SymMat::from_fn(n, |i, j| {
            let delta = if i == j { T::one() } else { T::zero() };
            d2u * dir[i] * dir[j] + tang * (delta - dir[i] * dir[j])
        });
        Self { x, u, g, h }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn grad_norm(&self) -> T {
        self.g.iter().map(|&c| c * c).sum::<T>().sqrt()
    }

    /// The same jet for `c·u`.
    pub fn scaled(&self, c: T) -> Self {
        Self {
            x: self.x.clone(),
            u: self.u * c,
            g: self.g.iter().map(|&v| v * c).collect(),
            h: self.h.scaled(c),
        }
    }
}

/// Level-set curvatures `H_k` and `H_{k−1}` at a regular point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelCurvature<T> {
    pub hk: T,
    pub hk1: T,
}

/// Evaluates the level-set curvatures with the default gradient threshold.
pub fn levelset_curvature<T: Real>(
    jet: &Jet2<T>,
    k: usize,
    sk_value: T,
) -> Result<LevelCurvature<T>, FieldError> {
    levelset_curvature_with(jet, k, sk_value, T::lit(DEFAULT_TAU_GRAD))
}

pub fn levelset_curvature_with<T: Real>(
    jet: &Jet2<T>,
    k: usize,
    sk_value: T,
    tau_grad: T,
) -> Result<LevelCurvature<T>, FieldError> {
    let n = jet.dim();
    if k == 0 || k > n {
        return Err(FieldError::InvalidOrder { k, n });
    }
    let norm = jet.grad_norm();
    if !(norm >= tau_grad) {
        return Err(FieldError::DegenerateGradient {
            norm: norm.to_f64().unwrap_or(f64::NAN),
            tau: tau_grad.to_f64().unwrap_or(f64::NAN),
        });
    }
    let gk = sigma_grad(&jet.h, k);
    let hg = jet.h.apply(&jet.g);
    let sgg = gk.bilinear(&jet.g, &jet.g);
    let sghg = gk.bilinear(&jet.g, &hg);
    let norm2 = norm * norm;
    let hk1 = sgg / norm.powi(k as i32 + 1);
    let hk = (sk_value - sghg / norm2) / norm.powi(k as i32);
    Ok(LevelCurvature { hk, hk1 })
}

/// Right-hand side `f^ε(x) = c_{n,k} ε² (|x|² + ε²)^{−n/2−1}` of the
/// regularized equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonRhs<T> {
    pub eps: T,
    pub cnk: T,
    pub n: usize,
}

impl<T: Real> EpsilonRhs<T> {
    pub fn new(eps: T, cnk: T, n: usize) -> Result<Self, FieldError> {
        if !(eps > T::zero()) {
            return Err(FieldError::InvalidRhs("eps must be positive"));
        }
        if !(cnk > T::zero()) {
            return Err(FieldError::InvalidRhs("c_nk must be positive"));
        }
        if n == 0 {
            return Err(FieldError::InvalidRhs("dimension must be positive"));
        }
        Ok(Self { eps, cnk, n })
    }

    /// `f^ε` as a function of `|x|`.
    pub fn at_radius(&self, r: T) -> T {
        let e2 = self.eps * self.eps;
        let expo = -(T::from_usize_lossy(self.n) / T::lit(2.0) + T::one());
        self.cnk * e2 * (r * r + e2).powf(expo)
    }
}

pub fn approx_rhs<T: Real>(x: &[T], rhs: &EpsilonRhs<T>) -> T {
    let r = x.iter().map(|&c| c * c).sum::<T>().sqrt();
    rhs.at_radius(r)
}

/// Outcome of testing a batch of jets against the closed cone Γ̄_k.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport<T> {
    /// Smallest `min_{i≤k} S_i(∇²u) / |∇²u|^i` over all jets.
    pub worst_margin: T,
    pub worst_index: Option<usize>,
    /// Indices of jets with margin below `−tol`.
    pub failing: Vec<usize>,
    pub checked: usize,
}

impl<T: Real> AdmissibilityReport<T> {
    pub fn all_admissible(&self) -> bool {
        self.failing.is_empty()
    }
}

/// Normalized cone margin of a single Hessian.
pub fn cone_margin<T: Real>(h: &SymMat<T>, k: usize) -> T {
    let (_, s) = sigma_grad_with_values(h, k);
    let scale = h.frobenius();
    if scale == T::zero() {
        return T::zero();
    }
    (1..=k)
        .map(|i| s[i] / scale.powi(i as i32))
        .fold(T::infinity(), T::min)
}

pub fn admissibility_audit<T: Real>(jets: &[Jet2<T>], k: usize) -> AdmissibilityReport<T> {
    admissibility_audit_with(jets, k, T::lit(ADMISSIBILITY_TOL))
}

pub fn admissibility_audit_with<T: Real>(
    jets: &[Jet2<T>],
    k: usize,
    tol: T,
) -> AdmissibilityReport<T> {
    let margins: Vec<T> = jets.par_iter().map(|j| cone_margin(&j.h, k)).collect();
    let mut worst_margin = T::infinity();
    let mut worst_index = None;
    let mut failing = Vec::new();
    for (i, &m) in margins.iter().enumerate() {
        if m < worst_margin {
            worst_margin = m;
            worst_index = Some(i);
        }
        if m < -tol {
            failing.push(i);
        }
    }
    AdmissibilityReport { worst_margin, worst_index, failing, checked: jets.len() }
}
