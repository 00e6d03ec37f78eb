//! Damped Newton solver for the regularized exterior problem
//! `S_k(∇²u) = f^ε` outside an axisymmetric star-shaped body, `u = −1` on
//! the body and `u ≈ −ρ̂ r^{2−n/k}` on the truncation sphere.
//!
//! The equation is imposed in the scaled form `S_k(r²∇²u) = r^{2k} f^ε`,
//! which keeps rows of comparable size across the stretched grid.

use rayon::prelude::*;
use thiserror::Error;

use crate::fields::EpsilonRhs;
use crate::monotone::ProblemSpec;
use crate::surfaces::SurfaceError;
use crate::symfunc::{sigma_all, sigma_grad_with_values};

mod banded;
mod checkpoint;
mod grid;

pub use banded::{BandLu, BandMatrix};
pub use checkpoint::{read_field, write_field, CHECKPOINT_HEADER};
pub use grid::{AxiGrid, NodeJet, DEFAULT_CLUSTER, MIN_TRUNCATION_RATIO};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid ε schedule: {0}")]
    InvalidSchedule(String),
    #[error("body is not star-shaped at θ = {theta}")]
    NonStarShaped { theta: f64 },
    #[error("Newton stalled at ε = {eps} after {iterations} iterations (residual {residual:e})")]
    NewtonStall { eps: f64, iterations: usize, residual: f64 },
    #[error("Jacobian pivot collapsed at unknown {0}")]
    SingularJacobian(usize),
    #[error("far-field constant did not settle (last relative change {change:e}); enlarge R_out")]
    TruncationTooClose { change: f64 },
    #[error("far-field fit is poor: relative variance {rel_variance:e}")]
    PoorFit { rel_variance: f64 },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// Limits of the nonlinear iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    pub max_halvings: usize,
    pub max_refresh: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iterations: 60, max_halvings: 40, max_refresh: 40 }
    }
}

/// Relative change of ρ̂ beyond which a non-settling refresh loop is fatal.
pub const RHO_OSCILLATION_LIMIT: f64 = 1e-4;
/// Relative variance of the far-field fit beyond which it is rejected.
pub const RHO_FIT_VARIANCE_LIMIT: f64 = 1e-3;

/// Shell `[0.6, 0.8]·R_out` used for the far-field fit.
pub const RHO_SHELL: (f64, f64) = (0.6, 0.8);

/// Discrete solution on an [`AxiGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExteriorField {
    pub grid: AxiGrid,
    pub k: usize,
    /// Nodal values, row-major in `(s, θ)`.
    pub u: Vec<f64>,
    pub eps: f64,
    pub cnk: f64,
    pub rho_hat: f64,
    /// Sup-norm of `S_k(r²∇²u) − r^{2k} f^ε` over interior nodes.
    pub residual_norm: f64,
    /// Worst normalized cone margin over interior nodes.
    pub admissible: f64,
    pub diagnostics: SolveDiagnostics,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveDiagnostics {
    pub newton_iterations: usize,
    pub factorizations: usize,
    pub rho_refreshes: usize,
    pub rho_variance: f64,
    pub schedule: Vec<f64>,
}

impl ExteriorField {
    /// Field with values `f(r, θ)` at the nodes, e.g. an analytic oracle.
    pub fn sampled(grid: AxiGrid, k: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut u = vec![0.0; grid.node_count()];
        for i in 0..=grid.ns {
            for j in 0..=grid.nth {
                u[grid.idx(i, j)] = f(grid.r(i, j), grid.theta(j));
            }
        }
        Self {
            grid,
            k,
            u,
            eps: 0.0,
            cnk: 1.0,
            rho_hat: f64::NAN,
            residual_norm: f64::NAN,
            admissible: f64::NAN,
            diagnostics: SolveDiagnostics::default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.u[self.grid.idx(i, j)]
    }

    /// `p = n/k − 2`.
    pub fn decay(&self) -> f64 {
        self.dim() as f64 / self.k as f64 - 2.0
    }

    /// Right-hand side at the current ε, if any.
    pub fn rhs(&self) -> Option<EpsilonRhs<f64>> {
        EpsilonRhs::new(self.eps, self.cnk, self.dim()).ok()
    }

    /// `S_k(∇²u)` the equation prescribes at radius r (zero when ε = 0).
    pub fn prescribed_sk(&self, r: f64) -> f64 {
        self.rhs().map_or(0.0, |f| f.at_radius(r))
    }
}

/// Jet at node (i, j); one-sided in s on the boundary rows.
pub fn hessian_axisym(field: &ExteriorField, i: usize, j: usize) -> NodeJet {
    field.grid.jet(&field.u, i, j)
}

/// Far-field constant fitted over the shell, with its relative variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoFit {
    pub rho: f64,
    pub rel_variance: f64,
    pub samples: usize,
}

/// Weighted least-squares fit of `−u r^{n/k−2}` on `r ∈ [0.6, 0.8] R_out`.
pub fn estimate_rho(field: &ExteriorField) -> Result<RhoFit, SolverError> {
    let fit = fit_rho(&field.grid, &field.u, field.decay());
    if fit.rel_variance > RHO_FIT_VARIANCE_LIMIT {
        return Err(SolverError::PoorFit { rel_variance: fit.rel_variance });
    }
    Ok(fit)
}

fn fit_rho(grid: &AxiGrid, u: &[f64], p: f64) -> RhoFit {
    let n = grid.dim();
    let (lo, hi) = (RHO_SHELL.0 * grid.r_out, RHO_SHELL.1 * grid.r_out);
    let mut w_sum = 0.0;
    let mut wv = 0.0;
    let mut samples = Vec::new();
    for i in 1..grid.ns {
        for j in 0..=grid.nth {
            let r = grid.r(i, j);
            if r < lo || r > hi {
                continue;
            }
            let w = grid.theta(j).sin().powi(n as i32 - 2);
            if w == 0.0 {
                continue;
            }
            let v = -u[grid.idx(i, j)] * r.powf(p);
            w_sum += w;
            wv += w * v;
            samples.push((w, v));
        }
    }
    let rho = wv / w_sum;
    let var = samples.iter().map(|(w, v)| w * (v - rho) * (v - rho)).sum::<f64>() / w_sum;
    RhoFit { rho, rel_variance: var / (rho * rho), samples: samples.len() }
}

/// Residual, cone margin and Jacobian data at every interior node.
struct Assembly {
    residual: Vec<f64>,
    margin: f64,
    scale: f64,
}

struct Problem<'a> {
    grid: &'a AxiGrid,
    k: usize,
    rhs: EpsilonRhs<f64>,
    p: f64,
}

impl Problem<'_> {
    fn unknowns(&self) -> usize {
        (self.grid.ns - 1) * (self.grid.nth + 1)
    }

    /// Unknown index of node id `m`, if it is an interior node.
    fn unknown(&self, m: usize) -> Option<usize> {
        let w = self.grid.nth + 1;
        let i = m / w;
        (i >= 1 && i < self.grid.ns).then(|| m - w)
    }

    fn target(&self, r: f64) -> f64 {
        r.powi(2 * self.k as i32) * self.rhs.at_radius(r)
    }

    fn node_residual(&self, u: &[f64], i: usize, j: usize) -> (f64, f64, f64) {
        let n = self.grid.dim();
        let jet = self.grid.jet(u, i, j);
        let (vals, norm) = block_sigmas(&jet.hhat, n, self.k);
        let margin = margin_from(&vals[1..], norm);
        (vals[self.k] - self.target(jet.r), margin, norm.powi(self.k as i32))
    }

    fn evaluate(&self, u: &[f64]) -> Assembly {
        let w = self.grid.nth + 1;
        let rows: Vec<(f64, f64, f64)> = (0..self.unknowns())
            .into_par_iter()
            .map(|q| {
                let (i, j) = (q / w + 1, q % w);
                self.node_residual(u, i, j)
            })
            .collect();
        let mut residual = Vec::with_capacity(rows.len());
        let mut margin = f64::INFINITY;
        let mut scale = 0.0f64;
        for (r, m, s) in rows {
            residual.push(r);
            margin = margin.min(m);
            scale = scale.max(s);
        }
        Assembly { residual, margin, scale }
    }

    fn jacobian(&self, u: &[f64]) -> BandMatrix {
        let n = self.grid.dim();
        let w = self.grid.nth + 1;
        let band = w + 1;
        let rows: Vec<Vec<(usize, f64)>> = (0..self.unknowns())
            .into_par_iter()
            .map(|q| {
                let (i, j) = (q / w + 1, q % w);
                let jet = self.grid.jet(u, i, j);
                let (g, _) = sigma_grad_with_values(&jet.scaled_hessian(n), self.k);
                let d_mu: f64 = (2..n).map(|a| g.get(a, a)).sum();
                let dh = [g.get(0, 0), 2.0 * g.get(0, 1), g.get(1, 1), d_mu];
                self.grid
                    .stencil(i, j)
                    .into_iter()
                    .filter_map(|(m, c)| {
                        let col = self.unknown(m)?;
                        Some((col, dh[0] * c[2] + dh[1] * c[3] + dh[2] * c[4] + dh[3] * c[5]))
                    })
                    .collect()
            })
            .collect();
        let mut jac = BandMatrix::zeros(self.unknowns(), band, band);
        for (q, row) in rows.into_iter().enumerate() {
            for (col, v) in row {
                jac.add(q, col, v);
            }
        }
        jac
    }
}

/// `S_0..S_k` and the Frobenius norm of the block matrix `B ⊕ μ I_{n−2}`.
fn block_sigmas(h: &[f64; 4], n: usize, k: usize) -> (Vec<f64>, f64) {
    let [a, b, c, mu] = *h;
    let half_tr = 0.5 * (a + c);
    let disc = (0.5 * (a - c)).hypot(b);
    let mut ev = vec![mu; n];
    ev[0] = half_tr + disc;
    ev[1] = half_tr - disc;
    let norm = (a * a + 2.0 * b * b + c * c + (n - 2) as f64 * mu * mu).sqrt();
    (sigma_all(&ev, k), norm)
}

fn margin_from(vals: &[f64], norm: f64) -> f64 {
    if norm == 0.0 {
        return 0.0;
    }
    vals.iter()
        .enumerate()
        .map(|(i, s)| s / norm.powi(i as i32 + 1))
        .fold(f64::INFINITY, f64::min)
}

/// Solves along the ε schedule, refreshing the far-field constant at each ε.
pub fn solve_exterior(grid: AxiGrid, spec: &ProblemSpec<f64>, schedule: &[f64]) -> Result<ExteriorField, SolverError> {
    solve_exterior_with(grid, spec, schedule, NewtonOptions::default())
}

pub fn solve_exterior_with(
    grid: AxiGrid,
    spec: &ProblemSpec<f64>,
    schedule: &[f64],
    opts: NewtonOptions,
) -> Result<ExteriorField, SolverError> {
    if grid.dim() != spec.n {
        return Err(SolverError::InvalidGrid(format!("body lives in R^{} but n = {}", grid.dim(), spec.n)));
    }
    if 2 * spec.k >= spec.n || spec.k == 0 {
        return Err(SolverError::InvalidGrid(format!("k = {} outside 1 <= k < n/2", spec.k)));
    }
    check_schedule(schedule)?;
    let k = spec.k;
    let p = spec.n as f64 / k as f64 - 2.0;
    let mut field = initial_guess(grid, k, p);
    field.cnk = spec.cnk;
    field.diagnostics.schedule = schedule.to_vec();
    let mut cached_lu: Option<BandLu> = None;

    for &eps in schedule {
        field.eps = eps;
        let rhs = EpsilonRhs::new(eps, spec.cnk, spec.n).map_err(|e| SolverError::InvalidSchedule(e.to_string()))?;
        let problem = Problem { grid: &field.grid, k, rhs, p };
        let mut u = std::mem::take(&mut field.u);
        let mut rho = field.rho_hat;
        let mut prev: Option<(f64, f64)> = None;
        let mut settled = false;
        let mut last_change = f64::INFINITY;
        for _ in 0..opts.max_refresh {
            set_outer(&problem, &mut u, rho);
            newton(&problem, &mut u, spec.tol.newton, opts, &mut cached_lu, &mut field.diagnostics)
                .map_err(|e| match e {
                    SolverError::NewtonStall { iterations, residual, .. } => {
                        SolverError::NewtonStall { eps, iterations, residual }
                    }
                    other => other,
                })?;
            field.diagnostics.rho_refreshes += 1;
            let fit = fit_rho(problem.grid, &u, p).rho;
            let err = fit - rho;
            last_change = (err / rho).abs();
            if last_change <= spec.tol.rho {
                rho = fit;
                settled = true;
                break;
            }
            let next = match prev {
                Some((r0, e0)) if (err - e0).abs() > 0.0 => rho - err * (rho - r0) / (err - e0),
                _ => fit,
            };
            prev = Some((rho, err));
            if !(next > 0.0) || !next.is_finite() {
                return Err(SolverError::TruncationTooClose { change: last_change });
            }
            rho = next;
        }
        if !settled && last_change > RHO_OSCILLATION_LIMIT {
            return Err(SolverError::TruncationTooClose { change: last_change });
        }
        set_outer(&problem, &mut u, rho);
        let a = problem.evaluate(&u);
        field.residual_norm = a.residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        field.admissible = a.margin;
        field.rho_hat = rho;
        field.u = u;
    }
    let fit = estimate_rho(&field)?;
    field.diagnostics.rho_variance = fit.rel_variance;
    Ok(field)
}

fn check_schedule(schedule: &[f64]) -> Result<(), SolverError> {
    if schedule.is_empty() {
        return Err(SolverError::InvalidSchedule("empty".into()));
    }
    if schedule.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(SolverError::InvalidSchedule("every ε must be positive and finite".into()));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(SolverError::InvalidSchedule("ε values must strictly decrease".into()));
    }
    Ok(())
}

/// Radial profile matched to −1 on the body, with the angular dependence of the
/// matching radius fading like `r^{−2}` so the far field is radial.
fn initial_guess(grid: AxiGrid, k: usize, p: f64) -> ExteriorField {
    let nth = grid.nth;
    let boundary: Vec<f64> = (0..=nth).map(|j| grid.r(0, j)).collect();
    let mean = boundary.iter().sum::<f64>() / (nth + 1) as f64;
    let hth = grid.hth();
    let mut field = ExteriorField::sampled(grid, k, |r, th| {
        let b = boundary[((th / hth).round() as usize).min(nth)];
        let matched = mean + (b - mean) * (b / r).powi(2);
        -(matched / r).powf(p)
    });
    field.rho_hat = mean.powf(p);
    field
}

/// Moves the outer boundary value to `−ρ R_out^{−p}`, spreading the change
/// linearly in s so the interior Hessian is left essentially untouched.
fn set_outer(problem: &Problem<'_>, u: &mut [f64], rho: f64) {
    let g = problem.grid;
    let value = -rho * g.r_out.powf(-problem.p);
    let delta = value - u[g.idx(g.ns, 0)];
    for i in 1..=g.ns {
        let shift = delta * g.s(i);
        for j in 0..=g.nth {
            u[g.idx(i, j)] += shift;
        }
    }
    for j in 0..=g.nth {
        u[g.idx(g.ns, j)] = value;
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, r| m.max(r.abs()))
}

fn newton(
    problem: &Problem<'_>,
    u: &mut [f64],
    tol: f64,
    opts: NewtonOptions,
    cached_lu: &mut Option<BandLu>,
    diag: &mut SolveDiagnostics,
) -> Result<(), SolverError> {
    let linear = problem.k == 1;
    let offset = problem.grid.nth + 1;
    let mut state = problem.evaluate(u);
    let mut res = sup(&state.residual);
    for it in 0..opts.max_iterations {
        let target = tol * state.scale.max(f64::MIN_POSITIVE);
        if res <= target {
            return Ok(());
        }
        if !linear || cached_lu.is_none() {
            let jac = problem.jacobian(u);
            diag.factorizations += 1;
            *cached_lu = Some(jac.factor().map_err(SolverError::SingularJacobian)?);
        }
        diag.newton_iterations += 1;
        let mut step: Vec<f64> = state.residual.iter().map(|r| -r).collect();
        cached_lu.as_ref().expect("factored above").solve(&mut step);

        let mut alpha = 1.0;
        let mut accepted = false;
        // once inside the cone, never leave it
        let floor = if state.margin >= -1e-12 { -1e-12 } else { f64::NEG_INFINITY };
        let mut trial = u.to_vec();
        for _ in 0..=opts.max_halvings {
            for (q, d) in step.iter().enumerate() {
                trial[q + offset] = u[q + offset] + alpha * d;
            }
            let next = problem.evaluate(&trial);
            let next_res = sup(&next.residual);
            if next_res < res && next.margin >= floor {
                u.copy_from_slice(&trial);
                state = next;
                res = next_res;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // rounding floor: the residual cannot be pushed lower on this grid
            if res <= 1e3 * target {
                return Ok(());
            }
            return Err(SolverError::NewtonStall { eps: problem.rhs.eps, iterations: it + 1, residual: res });
        }
    }
    let target = tol * state.scale;
    if res <= 1e3 * target {
        Ok(())
    } else {
        Err(SolverError::NewtonStall { eps: problem.rhs.eps, iterations: opts.max_iterations, residual: res })
    }
}

/// Residual sup-norm and cone margin of an arbitrary field at a given ε.
pub fn residual_report(field: &ExteriorField, eps: f64) -> Result<(f64, f64), SolverError> {
    let rhs = EpsilonRhs::new(eps, field.cnk, field.dim()).map_err(|e| SolverError::InvalidSchedule(e.to_string()))?;
    let problem = Problem { grid: &field.grid, k: field.k, rhs, p: field.decay() };
    let a = problem.evaluate(&field.u);
    Ok((sup(&a.residual), a.margin))
}

