//! Evaluation of the functional on a discrete field and its monotonicity audit.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::fields::levelset_curvature_with;
use crate::scalar::pairwise_sum;
use crate::solver::{solve_exterior, AxiGrid, ExteriorField};
use crate::surfaces::curvature_samples_on;

use super::levelset::{extract_levelset_with, LevelSetCurve};
use super::{limit_bound, limit_rho_exponent, weights, MonotoneError, ProblemSpec};

/// The functional and its two surface integrals at one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelValue {
    pub t: f64,
    pub c1: f64,
    pub c2: f64,
    /// `∫ H_k |∇u|^a`.
    pub int_hk: f64,
    /// `∫ H_{k−1} |∇u|^{a+1}`.
    pub int_hk1: f64,
    pub f: f64,
}

impl LevelValue {
    fn new(t: f64, spec: &ProblemSpec<f64>, int_hk: f64, int_hk1: f64) -> Self {
        let (c1, c2) = weights(t, spec);
        Self { t, c1, c2, int_hk, int_hk1, f: c1 * int_hk + c2 * int_hk1 }
    }
}

/// Surface integrals on an extracted level set.
pub fn level_integrals(
    field: &ExteriorField,
    curve: &LevelSetCurve,
    spec: &ProblemSpec<f64>,
) -> Result<(f64, f64), MonotoneError> {
    let n = field.dim();
    let mut hk = Vec::with_capacity(curve.points.len());
    let mut hk1 = Vec::with_capacity(curve.points.len());
    for p in &curve.points {
        let jet = p.cartesian(n);
        let curv = levelset_curvature_with(&jet, spec.k, field.prescribed_sk(p.jet.r), spec.tol.grad)?;
        let grad = p.grad_norm();
        hk.push(p.weight * curv.hk * grad.powf(spec.a));
        hk1.push(p.weight * curv.hk1 * grad.powf(spec.a + 1.0));
    }
    Ok((pairwise_sum(&hk), pairwise_sum(&hk1)))
}

/// Surface integrals on the body itself: curvatures from the profile,
/// `|∇u|` from one-sided differences on the boundary row.
pub fn boundary_integrals(field: &ExteriorField, spec: &ProblemSpec<f64>) -> Result<(f64, f64), MonotoneError> {
    let g = &field.grid;
    let n = g.dim();
    let samples = curvature_samples_on(&g.body, g.nth)?;
    let mut hk = Vec::with_capacity(samples.len());
    let mut hk1 = Vec::with_capacity(samples.len());
    for (j, s) in samples.iter().enumerate() {
        let grad = g.jet(&field.u, 0, j).grad_norm();
        hk.push(s.weight * s.hk(n, spec.k) * grad.powf(spec.a));
        hk1.push(s.weight * s.hk(n, spec.k - 1) * grad.powf(spec.a + 1.0));
    }
    Ok((pairwise_sum(&hk), pairwise_sum(&hk1)))
}

/// `F(t)`; the boundary level `t = −1` is taken from the body geometry.
pub fn f_eval(field: &ExteriorField, t: f64, spec: &ProblemSpec<f64>) -> Result<LevelValue, MonotoneError> {
    check_dims(field, spec)?;
    let (int_hk, int_hk1) = if t == -1.0 {
        boundary_integrals(field, spec)?
    } else {
        let curve = extract_levelset_with(field, t, spec.tol.grad)?;
        level_integrals(field, &curve, spec)?
    };
    Ok(LevelValue::new(t, spec, int_hk, int_hk1))
}

fn check_dims(field: &ExteriorField, spec: &ProblemSpec<f64>) -> Result<(), MonotoneError> {
    if field.dim() != spec.n || field.k != spec.k {
        return Err(MonotoneError::Mismatch(format!(
            "field has (n, k) = ({}, {}), spec has ({}, {})",
            field.dim(),
            field.k,
            spec.n,
            spec.k
        )));
    }
    Ok(())
}

/// Multiple of the Richardson error estimate used as the audit tolerance.
pub const RICHARDSON_SAFETY: f64 = 5.0;
/// Relative tolerance floor, used alone when no coarse field is available.
pub const TOL_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToleranceSource {
    /// From a companion solve on the grid with half the intervals.
    Richardson,
    /// Relative floor only.
    Floor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditRow {
    pub level: LevelValue,
    /// `max(F(t_j) − F(t_{j−1}), 0)`.
    pub violation: f64,
    /// `F(t) − limit`.
    pub limit_gap: f64,
    /// Richardson estimate of the error in `F(t)`.
    pub error_estimate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
    /// Levels that could not be evaluated, with the reason.
    pub skipped: Vec<(f64, String)>,
    pub limit: f64,
    pub rho_hat: f64,
    pub rho_exponent: f64,
    /// `ρ ∂limit/∂ρ`: change of the limit per unit relative change of ρ̂.
    pub rho_sensitivity: f64,
    pub eps: f64,
    pub tol_mono: f64,
    pub tolerance_source: ToleranceSource,
    pub max_violation: f64,
    pub min_limit_gap: f64,
    pub spread: f64,
    /// Spread within tolerance: the field is a ball candidate.
    pub constant: bool,
}

impl AuditReport {
    pub fn monotone(&self) -> bool {
        self.max_violation <= self.tol_mono
    }

    pub fn above_limit(&self) -> bool {
        self.min_limit_gap >= -self.tol_mono
    }

    pub fn passed(&self) -> bool {
        self.monotone() && self.above_limit() && self.skipped.is_empty()
    }

    /// `F(−1) − limit`, when the boundary level was audited.
    pub fn boundary_gap(&self) -> Option<f64> {
        self.rows.iter().find(|r| r.level.t == -1.0).map(|r| r.limit_gap)
    }

    /// `t,C1,C2,intHk,intHk1,F,violation,limit_gap`, one row per level.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,C1,C2,intHk,intHk1,F,violation,limit_gap\n");
        for r in &self.rows {
            let l = &r.level;
            let _ = writeln!(
                out,
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.6e},{:.12e}",
                l.t, l.c1, l.c2, l.int_hk, l.int_hk1, l.f, r.violation, r.limit_gap
            );
        }
        out
    }
}

/// The boundary level plus `count` levels between the fourth grid row and a
/// quarter of the truncation radius.
pub fn default_levels(field: &ExteriorField, count: usize) -> Vec<f64> {
    let g = &field.grid;
    let col_max = |i: usize| (0..=g.nth).map(|j| field.value(i, j)).fold(f64::NEG_INFINITY, f64::max);
    let col_min = |i: usize| (0..=g.nth).map(|j| field.value(i, j)).fold(f64::INFINITY, f64::min);
    let lo = col_max(4.min(g.ns));
    let quarter = (0..=g.ns)
        .find(|&i| (0..=g.nth).all(|j| g.r(i, j) >= 0.25 * g.r_out))
        .unwrap_or(g.ns - 1)
        .min(g.ns - 2);
    let hi = col_min(quarter);
    let mut levels = vec![-1.0];
    if hi > lo && count > 0 {
        let step = if count > 1 { (hi - lo) / (count - 1) as f64 } else { 0.0 };
        levels.extend((0..count).map(|q| lo + step * q as f64));
    }
    levels
}

/// Field on the grid with half the intervals: a fresh solve along the same
/// schedule, or the restriction of a field that was not produced by the solver.
pub fn coarse_companion(field: &ExteriorField, spec: &ProblemSpec<f64>) -> Option<ExteriorField> {
    let g = &field.grid;
    if g.ns % 2 != 0 || g.nth % 4 != 0 {
        return None;
    }
    let grid = AxiGrid::with_cluster(g.body.clone(), g.r_out, g.ns / 2, g.nth / 2, g.cluster).ok()?;
    let schedule = &field.diagnostics.schedule;
    if schedule.is_empty() {
        let mut coarse = field.clone();
        coarse.u = (0..=grid.ns)
            .flat_map(|i| (0..=grid.nth).map(move |j| (2 * i, 2 * j)))
            .map(|(i, j)| field.value(i, j))
            .collect();
        coarse.grid = grid;
        return Some(coarse);
    }
    let mut spec = spec.clone();
    spec.cnk = field.cnk;
    solve_exterior(grid, &spec, schedule).ok()
}

/// Audit on `spec.t_grid` (or [`default_levels`]) with a Richardson tolerance
/// from [`coarse_companion`].
pub fn monotonicity_audit(field: &ExteriorField, spec: &ProblemSpec<f64>) -> Result<AuditReport, MonotoneError> {
    let coarse = coarse_companion(field, spec);
    let levels = if spec.t_grid.is_empty() { default_levels(field, 16) } else { spec.t_grid.clone() };
    monotonicity_audit_with(field, coarse.as_ref(), spec, &levels)
}

pub fn monotonicity_audit_with(
    field: &ExteriorField,
    coarse: Option<&ExteriorField>,
    spec: &ProblemSpec<f64>,
    levels: &[f64],
) -> Result<AuditReport, MonotoneError> {
    check_dims(field, spec)?;
    let mut levels = levels.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let evals: Vec<(f64, Result<LevelValue, MonotoneError>, Option<f64>)> = levels
        .par_iter()
        .map(|&t| {
            let fine = f_eval(field, t, spec);
            let est = match (&fine, coarse) {
                (Ok(v), Some(c)) => f_eval(c, t, spec).ok().map(|w| (v.f - w.f).abs() / 3.0),
                _ => None,
            };
            (t, fine, est)
        })
        .collect();

    let limit = limit_bound(spec, field.rho_hat);
    let rho_exponent = limit_rho_exponent(spec);
    let mut rows: Vec<AuditRow> = Vec::new();
    let mut skipped = Vec::new();
    for (t, value, est) in evals {
        match value {
            Ok(level) => {
                let violation = rows.last().map_or(0.0, |p: &AuditRow| (level.f - p.level.f).max(0.0));
                rows.push(AuditRow { level, violation, limit_gap: level.f - limit, error_estimate: est });
            }
            Err(e) => skipped.push((t, e.to_string())),
        }
    }
    let scale = rows.iter().map(|r| r.level.f.abs()).fold(limit.abs(), f64::max);
    let floor = TOL_FLOOR * scale.max(f64::MIN_POSITIVE);
    let worst_est = rows.iter().filter_map(|r| r.error_estimate).fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.max(e))));
    let (tol_mono, tolerance_source) = match worst_est {
        Some(e) => ((RICHARDSON_SAFETY * e).max(floor), ToleranceSource::Richardson),
        None => (floor, ToleranceSource::Floor),
    };
    let max_violation = rows.iter().map(|r| r.violation).fold(0.0, f64::max);
    let min_limit_gap = rows.iter().map(|r| r.limit_gap).fold(f64::INFINITY, f64::min);
    let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.level.f), hi.max(r.level.f)));
    let spread = if rows.is_empty() { 0.0 } else { hi - lo };
    Ok(AuditReport {
        rows,
        skipped,
        limit,
        rho_hat: field.rho_hat,
        rho_exponent,
        rho_sensitivity: rho_exponent * limit,
        eps: field.eps,
        tol_mono,
        tolerance_source,
        max_violation,
        min_limit_gap,
        spread,
        constant: spread <= tol_mono,
    })
}
