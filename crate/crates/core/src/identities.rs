//! Integral identities, the inequality ledger and the overdetermined-ball
//! certification on concrete exterior solutions.
//!
//! Everything is computed from an [`ExteriorData`]: boundary samples of the
//! body with the boundary value of `|∇u|`, and the exterior energy
//! `∫ S_{k−1}(∇²u)|∇u|² dx`. It is built either from a discrete field or
//! from a closed-form radial solution.

use std::fmt::Write as _;

use thiserror::Error;

use crate::monotone::{coarse_companion, ProblemSpec, RICHARDSON_SAFETY};
use crate::radial::{energy_integral, RadialError, RadialSolution};
use crate::scalar::{binomial, pairwise_sum, simpson_weights, sphere_area};
use crate::solver::ExteriorField;
use crate::surfaces::{
    area, check_convex, curvature_samples, curvature_samples_on, quermass, volume, RevolutionBody, SurfaceError,
    SurfaceSample,
};
use crate::symfunc::sigma_all;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IdentityError {
    #[error("boundary |∇u| is not constant: relative spread {spread:e} exceeds {limit:e}")]
    NotOverdetermined { spread: f64, limit: f64 },
    #[error("identity needs k >= 2, got k = {0}")]
    OrderTooLow(usize),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Radial(#[from] RadialError),
}

/// Relative spread of boundary `|∇u|` above which the identities are not asserted.
pub const IDENTITY_SPREAD_LIMIT: f64 = 1e-2;
/// Relative tolerance used when no coarse companion is available.
pub const LEDGER_FLOOR: f64 = 1e-10;
/// Quadrature panels along the meridian of a ball.
pub const RADIAL_PANELS: usize = 1024;

/// Boundary and volume data of an exterior solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ExteriorData {
    pub n: usize,
    pub k: usize,
    pub body: RevolutionBody<f64>,
    /// Boundary samples (weights are quadrature weights) with `|∇u|` there.
    pub boundary: Vec<(SurfaceSample<f64>, f64)>,
    /// `∫ S_{k−1}(∇²u)|∇u|² dx` over the whole exterior.
    pub energy: f64,
    /// Part of `energy` beyond the truncation radius.
    pub energy_tail: f64,
    pub rho: f64,
}

impl ExteriorData {
    pub fn from_field(field: &ExteriorField) -> Result<Self, IdentityError> {
        let g = &field.grid;
        let samples = curvature_samples_on(&g.body, g.nth)?;
        let boundary = samples.into_iter().enumerate().map(|(j, s)| (s, g.jet(&field.u, 0, j).grad_norm())).collect();
        let (core, tail) = field_energy(field)?;
        Ok(Self {
            n: g.dim(),
            k: field.k,
            body: g.body.clone(),
            boundary,
            energy: core + tail,
            energy_tail: tail,
            rho: field.rho_hat,
        })
    }

    /// Data of the ball of the given radius; the energy comes from adaptive
    /// quadrature plus the analytic tail.
    pub fn from_radial(sol: &RadialSolution<f64>) -> Result<Self, IdentityError> {
        let body = RevolutionBody::sphere(sol.n, sol.radius, 16)?.with_panels(RADIAL_PANELS);
        let grad = sol.profile(sol.radius).1;
        let boundary = curvature_samples(&body)?.into_iter().map(|s| (s, grad)).collect();
        let energy = energy_integral(sol);
        Ok(Self {
            n: sol.n,
            k: sol.k,
            body,
            boundary,
            energy: energy.total(),
            energy_tail: energy.tail,
            rho: sol.rho,
        })
    }

    /// `∫_{∂Ω} H_j |∇u|^power dσ`.
    pub fn boundary_integral(&self, j: usize, power: f64) -> f64 {
        let terms: Vec<f64> =
            self.boundary.iter().map(|(s, grad)| s.weight * s.hk(self.n, j) * grad.powf(power)).collect();
        pairwise_sum(&terms)
    }

    /// Area-weighted mean of boundary `|∇u|`.
    pub fn grad_mean(&self) -> f64 {
        self.boundary_integral(0, 1.0) / self.boundary_integral(0, 0.0)
    }

    /// `(max − min)/mean` of boundary `|∇u|`.
    pub fn grad_spread(&self) -> f64 {
        let (lo, hi) = self.boundary.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), (_, g)| (lo.min(*g), hi.max(*g)));
        (hi - lo) / self.grad_mean()
    }

    fn overdetermined(&self, limit: f64) -> Result<f64, IdentityError> {
        let spread = self.grad_spread();
        if spread > limit {
            return Err(IdentityError::NotOverdetermined { spread, limit });
        }
        Ok(self.grad_mean())
    }
}

fn composite_weights(panels: usize, h: f64) -> Vec<f64> {
    if panels % 2 == 0 {
        return simpson_weights(panels, h);
    }
    (0..=panels).map(|i| if i == 0 || i == panels { 0.5 * h } else { h }).collect()
}

/// Truncated-domain quadrature of the energy plus the power-law tail of the
/// radial profile with the fitted far-field constant.
fn field_energy(field: &ExteriorField) -> Result<(f64, f64), IdentityError> {
    let g = &field.grid;
    let (n, k) = (g.dim(), field.k);
    let orbit: f64 = sphere_area(n - 2);
    let ws = composite_weights(g.ns, g.hs());
    let wt = composite_weights(g.nth, g.hth());
    let mut terms = Vec::with_capacity(g.node_count());
    for i in 0..=g.ns {
        for j in 0..=g.nth {
            let sin = g.theta(j).sin();
            if sin == 0.0 {
                continue;
            }
            let jet = g.jet(&field.u, i, j);
            let r = jet.r;
            let sk1 = block_sigma(&jet.hhat, n, k - 1) / r.powi(2 * (k as i32 - 1));
            let grad2 = (jet.u_l * jet.u_l + jet.u_t * jet.u_t) / (r * r);
            let dv = orbit * r.powi(n as i32) * sin.powi(n as i32 - 2) * g.dlds(i, j);
            terms.push(ws[i] * wt[j] * sk1 * grad2 * dv);
        }
    }
    let core = pairwise_sum(&terms);
    let p = field.decay();
    let radius = field.rho_hat.powf(1.0 / p);
    let model = RadialSolution::new(n, k, radius)?;
    let density = |r: f64| {
        let (_, du, _) = model.profile(r);
        model.sk_hessian(r, k - 1) * du * du * sphere_area::<f64>(n - 1) * r.powi(n as i32 - 1)
    };
    // density ∝ r^q beyond the truncation sphere
    let q = (n - 1) as f64 - (k - 1) as f64 * (p + 2.0) - 2.0 * (p + 1.0);
    let tail = -density(g.r_out) * g.r_out / (q + 1.0);
    Ok((core, tail))
}

/// `S_j` of the scaled Hessian `B ⊕ μ I_{n−2}`.
fn block_sigma(h: &[f64; 4], n: usize, j: usize) -> f64 {
    let [a, b, c, mu] = *h;
    let half = 0.5 * (a + c);
    let disc = (0.5 * (a - c)).hypot(b);
    let mut ev = vec![mu; n];
    ev[0] = half + disc;
    ev[1] = half - disc;
    sigma_all(&ev, j)[j]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    Identity,
    Inequality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    IdentityOk,
    InequalityOk,
    Violated,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::IdentityOk => "identity-ok",
            Verdict::InequalityOk => "inequality-ok",
            Verdict::Violated => "violated",
            Verdict::NotApplicable => "not-applicable",
        }
    }
}

/// One evaluated identity or inequality. Inequalities are oriented so that
/// they assert `lhs ≥ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    pub name: &'static str,
    pub kind: EntryKind,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs − rhs`.
    pub gap: f64,
    pub verdict: Verdict,
    pub tolerance: f64,
    /// Why the entry is not applicable, if it is not.
    pub note: Option<String>,
}

impl LedgerEntry {
    fn judge(name: &'static str, kind: EntryKind, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let gap = lhs - rhs;
        let verdict = match kind {
            EntryKind::Identity if gap.abs() <= tolerance => Verdict::IdentityOk,
            EntryKind::Inequality if gap >= -tolerance => Verdict::InequalityOk,
            _ => Verdict::Violated,
        };
        Self { name, kind, lhs, rhs, gap, verdict, tolerance, note: None }
    }

    fn not_applicable(name: &'static str, kind: EntryKind, why: String) -> Self {
        Self {
            name,
            kind,
            lhs: f64::NAN,
            rhs: f64::NAN,
            gap: f64::NAN,
            verdict: Verdict::NotApplicable,
            tolerance: f64::NAN,
            note: Some(why),
        }
    }
}

/// The two sides of the energy identity on an overdetermined boundary:
/// `(k+1)E + ∫H_{k−2}|∇u|^{k+1}` and `2c^k ∫H_{k−1}`.
pub fn energy_identity_sides(data: &ExteriorData) -> Result<(f64, f64), IdentityError> {
    let k = data.k;
    if k < 2 {
        return Err(IdentityError::OrderTooLow(k));
    }
    let c = data.overdetermined(IDENTITY_SPREAD_LIMIT)?;
    let kf = k as f64;
    let lhs = (kf + 1.0) * data.energy + data.boundary_integral(k - 2, kf + 1.0);
    let rhs = 2.0 * c.powi(k as i32) * data.boundary_integral(k - 1, 0.0);
    Ok((lhs, rhs))
}

/// The two sides of the Rellich–Pohozaev identity:
/// `(n−k+1)(E + c^{k+1}/(k−1) ∫H_{k−2})` and `2(n−k)c^k/k ∫H_{k−1}`.
pub fn pohozaev_sides(data: &ExteriorData) -> Result<(f64, f64), IdentityError> {
    let (n, k) = (data.n, data.k);
    if k < 2 {
        return Err(IdentityError::OrderTooLow(k));
    }
    let c = data.overdetermined(IDENTITY_SPREAD_LIMIT)?;
    let (nf, kf) = (n as f64, k as f64);
    let lhs = (nf - kf + 1.0) * (data.energy + c.powi(k as i32 + 1) / (kf - 1.0) * data.boundary_integral(k - 2, 0.0));
    let rhs = 2.0 * (nf - kf) * c.powi(k as i32) / kf * data.boundary_integral(k - 1, 0.0);
    Ok((lhs, rhs))
}

/// Energy identity as a ledger entry, tolerance relative to the largest term.
pub fn identity_lemma33(data: &ExteriorData, rel_tol: f64) -> Result<LedgerEntry, IdentityError> {
    let (lhs, rhs) = energy_identity_sides(data)?;
    Ok(LedgerEntry::judge("energy_identity", EntryKind::Identity, lhs, rhs, rel_tol * lhs.abs().max(rhs.abs())))
}

pub fn pohozaev_lemma34(data: &ExteriorData, rel_tol: f64) -> Result<LedgerEntry, IdentityError> {
    let (lhs, rhs) = pohozaev_sides(data)?;
    Ok(LedgerEntry::judge("pohozaev_identity", EntryKind::Identity, lhs, rhs, rel_tol * lhs.abs().max(rhs.abs())))
}

/// Boundary gradient an overdetermined solution must have, from the body alone:
/// `(n−2k)/k·(k−1)/(n−k+1)·∫H_{k−1}/∫H_{k−2}` for `k ≥ 2` and
/// `(n−2)/n·|∂Ω|/|Ω|` for `k = 1`.
pub fn c_formula(body: &RevolutionBody<f64>, k: usize) -> Result<f64, IdentityError> {
    let n = body.dim();
    let (nf, kf) = (n as f64, k as f64);
    match k {
        0 => Err(IdentityError::OrderTooLow(0)),
        1 => Ok((nf - 2.0) / nf * area(body)? / volume(body)?),
        _ => Ok((nf - 2.0 * kf) / kf * (kf - 1.0) / (nf - kf + 1.0) * quermass(body, k - 1)? / quermass(body, k - 2)?),
    }
}

/// Upper bound `(n−2k)/(n−k)·∫H_k/∫H_{k−1}` on a constant boundary gradient.
pub fn c_upper_bound(body: &RevolutionBody<f64>, k: usize) -> Result<f64, IdentityError> {
    let (nf, kf) = (body.dim() as f64, k as f64);
    Ok((nf - 2.0 * kf) / (nf - kf) * quermass(body, k)? / quermass(body, k - 1)?)
}

struct RawEntry {
    name: &'static str,
    kind: EntryKind,
    sides: Result<(f64, f64), String>,
}

fn raw_entries(data: &ExteriorData, spec: &ProblemSpec<f64>) -> Vec<RawEntry> {
    let (n, k) = (data.n, data.k);
    let (nf, kf) = (n as f64, k as f64);
    let a = spec.a;
    let mut out = Vec::new();
    let mut push = |name, kind, sides| out.push(RawEntry { name, kind, sides });

    let weighted = data.boundary_integral(k, a);
    let lower = (nf - kf) / (nf - 2.0 * kf) * data.boundary_integral(k - 1, a + 1.0);
    push("gradient_curvature", EntryKind::Inequality, Ok((weighted, lower)));

    let cap = data.boundary_integral(k - 1, nf - kf);
    push("capacity", EntryKind::Inequality, Ok((cap, crate::monotone::capacity_bound::<f64>(n, k))));

    let comb = data.boundary_integral(k, nf - kf - 1.0);
    let bound = binomial::<f64>(n - 1, k - 1)
        * (nf / kf - 2.0).powi((n - k - 1) as i32)
        * (nf - kf)
        / kf
        * sphere_area::<f64>(n - 1);
    push("capacity_combined", EntryKind::Inequality, Ok((comb, bound)));

    let over = data.overdetermined(spec.tol.overdetermined).map_err(|e| e.to_string());
    let geometric = |f: &dyn Fn() -> Result<(f64, f64), IdentityError>| f().map_err(|e| e.to_string());

    push(
        "quermass_ratio",
        EntryKind::Inequality,
        over.clone().and_then(|c| {
            geometric(&|| Ok((quermass(&data.body, k)? / quermass(&data.body, k - 1)?, (nf - kf) / (nf - 2.0 * kf) * c)))
        }),
    );
    push(
        "c_formula",
        EntryKind::Identity,
        over.clone().and_then(|c| geometric(&|| Ok((c, c_formula(&data.body, k)?)))),
    );
    let convex = curvature_samples(&data.body)
        .map_err(|e| e.to_string())
        .and_then(|s| check_convex(&s).map_err(|e| e.to_string()));
    if k == 1 {
        let vm = || -> Result<(f64, f64), IdentityError> {
            let (vol, ar) = (volume(&data.body)?, area(&data.body)?);
            Ok((vol * quermass(&data.body, 1)?, (nf - 1.0) / nf * ar * ar))
        };
        push("volume_mean_curvature", EntryKind::Inequality, over.clone().and_then(|_| geometric(&vm)));
        push(
            "qiu_xia",
            EntryKind::Inequality,
            convex.clone().and_then(|_| geometric(&vm)).map(|(l, r)| (r, l)),
        );
    } else {
        let af = || squeeze_sides(&data.body, k);
        push("aleksandrov_fenchel", EntryKind::Inequality, convex.and_then(|_| geometric(&af)));
        push("energy_identity", EntryKind::Identity, energy_identity_sides(data).map_err(|e| e.to_string()));
        push("pohozaev_identity", EntryKind::Identity, pohozaev_sides(data).map_err(|e| e.to_string()));
    }
    out
}

/// Ledger with tolerances `RICHARDSON_SAFETY·|gap − gap_coarse|/3` when a
/// coarse companion is given, never below `floor` relative to the larger side.
pub fn inequality_ledger(
    data: &ExteriorData,
    coarse: Option<&ExteriorData>,
    spec: &ProblemSpec<f64>,
    floor: f64,
) -> Vec<LedgerEntry> {
    let fine = raw_entries(data, spec);
    let coarse = coarse.map(|c| raw_entries(c, spec));
    fine.into_iter()
        .enumerate()
        .map(|(q, e)| match e.sides {
            Ok((lhs, rhs)) => {
                let scale = lhs.abs().max(rhs.abs());
                let est = coarse
                    .as_ref()
                    .and_then(|c| c[q].sides.as_ref().ok().map(|(l, r)| ((lhs - rhs) - (l - r)).abs() / 3.0))
                    .unwrap_or(0.0);
                LedgerEntry::judge(e.name, e.kind, lhs, rhs, (RICHARDSON_SAFETY * est).max(floor * scale))
            }
            Err(why) => LedgerEntry::not_applicable(e.name, e.kind, why),
        })
        .collect()
}

/// Ledger of a discrete field, with a coarse companion for the tolerances.
pub fn field_ledger(field: &ExteriorField, spec: &ProblemSpec<f64>) -> Result<Vec<LedgerEntry>, IdentityError> {
    let data = ExteriorData::from_field(field)?;
    let coarse = coarse_companion(field, spec).map(|c| ExteriorData::from_field(&c)).transpose()?;
    Ok(inequality_ledger(&data, coarse.as_ref(), spec, LEDGER_FLOOR))
}

/// `name,lhs,rhs,gap,verdict,tolerance`.
pub fn ledger_csv(entries: &[LedgerEntry]) -> String {
    let mut out = String::from("name,lhs,rhs,gap,verdict,tolerance\n");
    for e in entries {
        let _ = writeln!(
            out,
            "{},{:.12e},{:.12e},{:.6e},{},{:.3e}",
            e.name,
            e.lhs,
            e.rhs,
            e.gap,
            e.verdict.as_str(),
            e.tolerance
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum CertVerdict {
    CertifiedBall,
    CertifiedNotOverdetermined,
    Inconclusive(String),
}

impl CertVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            CertVerdict::CertifiedBall => "certified-ball",
            CertVerdict::CertifiedNotOverdetermined => "certified-not-overdetermined",
            CertVerdict::Inconclusive(_) => "inconclusive",
        }
    }
}

/// Outcome of the overdetermined-ball certification.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub verdict: CertVerdict,
    /// Mean boundary `|∇u|`.
    pub grad_mean: f64,
    pub grad_spread: f64,
    /// Boundary gradient forced by the integral identities.
    pub c_identity: f64,
    /// Upper bound on a constant boundary gradient from the curvature inequality.
    pub c_upper: f64,
    /// `|c_identity − c_upper| / c_identity`; zero exactly on balls.
    pub squeeze_gap: f64,
    /// The two geometric sides whose ratio is `c_identity / c_upper`:
    /// `(n−k)(k−1)(∫H_{k−1})²` and `(n−k+1)k ∫H_k ∫H_{k−2}` for `k ≥ 2`,
    /// `(n−1)/n |∂Ω|²` and `|Ω| ∫H_1` for `k = 1`.
    pub squeeze_sides: (f64, f64),
    /// `|grad_mean − c_identity| / c_identity`.
    pub c_mismatch: f64,
    pub radius_deviation: f64,
    pub convex: bool,
}

fn squeeze_sides(body: &RevolutionBody<f64>, k: usize) -> Result<(f64, f64), IdentityError> {
    let (nf, kf) = (body.dim() as f64, k as f64);
    if k == 1 {
        let ar = area(body)?;
        return Ok(((nf - 1.0) / nf * ar * ar, volume(body)? * quermass(body, 1)?));
    }
    let q = |j| quermass(body, j);
    Ok(((nf - kf) * (kf - 1.0) * q(k - 1)?.powi(2), (nf - kf + 1.0) * kf * q(k)? * q(k - 2)?))
}

/// Measures the boundary gradient, then, if it is constant, closes the squeeze
/// between the identity value of c and its curvature upper bound.
pub fn certify_ball(data: &ExteriorData, spec: &ProblemSpec<f64>) -> Result<Certificate, IdentityError> {
    let k = data.k;
    let tol_od = spec.tol.overdetermined;
    let grad_mean = data.grad_mean();
    let grad_spread = data.grad_spread();
    let c_identity = c_formula(&data.body, k)?;
    let c_upper = c_upper_bound(&data.body, k)?;
    let squeeze_gap = (c_identity - c_upper).abs() / c_identity;
    let squeeze_sides = squeeze_sides(&data.body, k)?;
    let c_mismatch = (grad_mean - c_identity).abs() / c_identity;
    let radius_deviation = data.body.radius_deviation();
    let convex = check_convex(&curvature_samples(&data.body)?).is_ok();
    let verdict = if grad_spread > tol_od {
        CertVerdict::CertifiedNotOverdetermined
    } else if !convex {
        CertVerdict::Inconclusive("body is not convex".into())
    } else if squeeze_gap > spec.tol.squeeze {
        CertVerdict::Inconclusive(format!("squeeze does not close: relative gap {squeeze_gap:e}"))
    } else if c_mismatch > tol_od {
        CertVerdict::Inconclusive(format!("boundary gradient differs from the identity value by {c_mismatch:e}"))
    } else if radius_deviation > tol_od {
        CertVerdict::Inconclusive(format!("profile deviates from its mean radius by {radius_deviation:e}"))
    } else {
        CertVerdict::CertifiedBall
    };
    Ok(Certificate { verdict, grad_mean, grad_spread, c_identity, c_upper, squeeze_gap, squeeze_sides, c_mismatch, radius_deviation, convex })
}
