//! Subcommand pipelines. Each returns its primary text, the artifacts to
//! write and an exit status; all numbers come from the core library.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use khessian::battery::run_battery;
use khessian::fields::ADMISSIBILITY_TOL;
use khessian::identities::{certify_ball, field_ledger, ledger_csv, CertVerdict, ExteriorData, LedgerEntry, Verdict};
use khessian::monotone::{monotonicity_audit, AuditReport};
use khessian::radial::{radial_f, radial_limit, RadialSolution};
use khessian::solver::{solve_exterior, write_field, ExteriorField};

use crate::config::RunConfig;

pub const IDENTITY_TOL: f64 = 1e-10;
pub const GRADIENT_TOL: f64 = 1e-5;
pub const MACLAURIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Computation finished but an invariant or inequality failed.
    Violation,
}

pub struct Outcome {
    pub stdout: String,
    pub artifacts: Vec<(String, String)>,
    pub status: Status,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Solver(String),
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Ok
    } else {
        Status::Violation
    }
}

fn eps_text(cfg: &RunConfig) -> String {
    cfg.eps_min().map_or("none".into(), |e| format!("{e:e}"))
}

/// Comment header carried by every text artifact.
fn header(cfg: &RunConfig) -> String {
    format!("# khessian {}\n# config_hash={}\n# eps_min={}\n", cfg.command, cfg.hash(), eps_text(cfg))
}

fn json_text(cfg: &RunConfig, body: serde_json::Value) -> String {
    let mut obj = json!({ "command": cfg.command, "config_hash": cfg.hash(), "eps_min": cfg.eps_min() });
    if let (Some(map), serde_json::Value::Object(extra)) = (obj.as_object_mut(), body) {
        map.extend(extra);
    }
    serde_json::to_string_pretty(&obj).expect("plain data serializes") + "\n"
}

/// Two-column numeric text.
fn plot_data(cfg: &RunConfig, columns: (&str, &str), rows: impl Iterator<Item = (f64, f64)>) -> String {
    let mut out = header(cfg);
    let _ = writeln!(out, "# {} {}", columns.0, columns.1);
    for (x, y) in rows {
        let _ = writeln!(out, "{x:.12e} {y:.12e}");
    }
    out
}

fn solve(cfg: &RunConfig, body: &str) -> Result<ExteriorField, RunError> {
    solve_exterior(cfg.grid_for(body), &cfg.spec(), &cfg.eps).map_err(|e| RunError::Solver(format!("{body}: {e}")))
}

pub fn matrix_suite(cfg: &RunConfig) -> Outcome {
    let rep = run_battery(cfg.seed, cfg.samples);
    let mut csv = header(cfg);
    let _ = writeln!(csv, "# seed={} samples={}", rep.seed, rep.samples);
    csv.push_str("check,value,tolerance,pass\n");
    let rows = [
        ("matrix_identities_max", rep.identity_max, IDENTITY_TOL, rep.identity_max <= IDENTITY_TOL),
        ("sigma_grad_fd_max", rep.gradient_max, GRADIENT_TOL, rep.gradient_max <= GRADIENT_TOL),
        ("newton_maclaurin_min", rep.maclaurin_min, -MACLAURIN_TOL, rep.maclaurin_min >= -MACLAURIN_TOL),
    ];
    for (name, v, tol, pass) in rows {
        let _ = writeln!(csv, "{name},{v:.6e},{tol:.1e},{pass}");
    }
    Outcome {
        artifacts: vec![("matrix_suite.csv".into(), csv.clone())],
        stdout: csv,
        status: status(rep.passed(IDENTITY_TOL, GRADIENT_TOL, MACLAURIN_TOL)),
    }
}

pub fn radial(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let spec = cfg.spec();
    let sol = RadialSolution::new(spec.n, spec.k, cfg.radius).map_err(|e| RunError::Solver(e.to_string()))?;
    let levels = if cfg.levels.is_empty() {
        (0..10).map(|q| -1.0 + 0.1 * q as f64).collect()
    } else {
        cfg.levels.clone()
    };
    let limit = radial_limit(&sol, &spec);
    let mut csv = header(cfg);
    let _ = writeln!(csv, "# n={} k={} R={} rho={:.12e} limit={:.12e}", spec.n, spec.k, cfg.radius, sol.rho, limit);
    csv.push_str("t,radius,C1,C2,intHk,intHk1,F,limit\n");
    let mut points = Vec::new();
    for &t in &levels {
        let l = radial_f(&sol, t, &spec).map_err(|e| RunError::Solver(e.to_string()))?;
        let _ = writeln!(
            csv,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            l.t, l.radius, l.c1, l.c2, l.int_hk, l.int_hk1, l.f, limit
        );
        points.push((t, l.f));
    }
    Ok(Outcome {
        artifacts: vec![
            ("radial.csv".into(), csv.clone()),
            ("radial_F.dat".into(), plot_data(cfg, ("t", "F"), points.into_iter())),
        ],
        stdout: csv,
        status: Status::Ok,
    })
}

#[derive(Serialize)]
struct FieldSummary {
    rho_hat: f64,
    eps: f64,
    residual_norm: f64,
    admissible_margin: f64,
    newton_iterations: usize,
    factorizations: usize,
    rho_refreshes: usize,
}

fn field_summary(f: &ExteriorField) -> FieldSummary {
    FieldSummary {
        rho_hat: f.rho_hat,
        eps: f.eps,
        residual_norm: f.residual_norm,
        admissible_margin: f.admissible,
        newton_iterations: f.diagnostics.newton_iterations,
        factorizations: f.diagnostics.factorizations,
        rho_refreshes: f.diagnostics.rho_refreshes,
    }
}

pub fn solve_cmd(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let f = solve(cfg, &cfg.body)?;
    let admissible = f.admissible >= -ADMISSIBILITY_TOL;
    let summary = json_text(cfg, json!({ "body": cfg.body, "field": field_summary(&f), "admissible": admissible }));
    let checkpoint = header(cfg) + &write_field(&f);
    Ok(Outcome {
        artifacts: vec![("field.txt".into(), checkpoint), ("solve.json".into(), summary.clone())],
        stdout: summary,
        status: status(admissible),
    })
}

fn audit_json(rep: &AuditReport) -> serde_json::Value {
    json!({
        "passed": rep.passed(),
        "monotone": rep.monotone(),
        "above_limit": rep.above_limit(),
        "limit": rep.limit,
        "rho_hat": rep.rho_hat,
        "rho_exponent": rep.rho_exponent,
        "rho_sensitivity": rep.rho_sensitivity,
        "tol_mono": rep.tol_mono,
        "tolerance_source": format!("{:?}", rep.tolerance_source).to_lowercase(),
        "max_violation": rep.max_violation,
        "min_limit_gap": rep.min_limit_gap,
        "boundary_gap": rep.boundary_gap(),
        "constant": rep.constant,
        "skipped": rep.skipped.iter().map(|(t, why)| json!({ "t": t, "reason": why })).collect::<Vec<_>>(),
    })
}

fn audit(cfg: &RunConfig, f: &ExteriorField) -> Result<AuditReport, RunError> {
    monotonicity_audit(f, &cfg.spec()).map_err(|e| RunError::Solver(e.to_string()))
}

pub fn monotone(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let f = solve(cfg, &cfg.body)?;
    let rep = audit(cfg, &f)?;
    let mut csv = header(cfg);
    let _ = writeln!(csv, "# limit={:.12e} tol_mono={:.6e} passed={}", rep.limit, rep.tol_mono, rep.passed());
    csv.push_str(&rep.to_csv());
    let points = rep.rows.iter().map(|r| (r.level.t, r.level.f));
    let summary = json_text(cfg, json!({ "body": cfg.body, "field": field_summary(&f), "audit": audit_json(&rep) }));
    Ok(Outcome {
        artifacts: vec![
            ("monotone.csv".into(), csv.clone()),
            ("monotone_F.dat".into(), plot_data(cfg, ("t", "F"), points)),
            ("monotone.json".into(), summary),
        ],
        stdout: csv,
        status: status(rep.passed()),
    })
}

fn ledger_json(ledger: &[LedgerEntry]) -> Vec<serde_json::Value> {
    ledger
        .iter()
        .map(|e| {
            json!({
                "name": e.name,
                "lhs": e.lhs,
                "rhs": e.rhs,
                "gap": e.gap,
                "verdict": e.verdict.as_str(),
                "tolerance": e.tolerance,
                "note": e.note,
            })
        })
        .collect()
}

fn ledger(cfg: &RunConfig, f: &ExteriorField) -> Result<Vec<LedgerEntry>, RunError> {
    field_ledger(f, &cfg.spec()).map_err(|e| RunError::Solver(e.to_string()))
}

pub fn identities(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let f = solve(cfg, &cfg.body)?;
    let entries = ledger(cfg, &f)?;
    let violated = entries.iter().filter(|e| e.verdict == Verdict::Violated).count();
    let csv = header(cfg) + &ledger_csv(&entries);
    let summary = json_text(cfg, json!({ "body": cfg.body, "violations": violated, "ledger": ledger_json(&entries) }));
    Ok(Outcome {
        artifacts: vec![("ledger.csv".into(), csv.clone()), ("ledger.json".into(), summary)],
        stdout: csv,
        status: status(violated == 0),
    })
}

fn certificate(cfg: &RunConfig, f: &ExteriorField) -> Result<(CertVerdict, serde_json::Value), RunError> {
    let data = ExteriorData::from_field(f).map_err(|e| RunError::Solver(e.to_string()))?;
    let c = certify_ball(&data, &cfg.spec()).map_err(|e| RunError::Solver(e.to_string()))?;
    let reason = match &c.verdict {
        CertVerdict::Inconclusive(why) => Some(why.clone()),
        _ => None,
    };
    let value = json!({
        "verdict": c.verdict.label(),
        "reason": reason,
        "grad_mean": c.grad_mean,
        "grad_spread": c.grad_spread,
        "c_identity": c.c_identity,
        "c_upper": c.c_upper,
        "squeeze_gap": c.squeeze_gap,
        "squeeze_sides": [c.squeeze_sides.0, c.squeeze_sides.1],
        "c_mismatch": c.c_mismatch,
        "radius_deviation": c.radius_deviation,
        "convex": c.convex,
    });
    Ok((c.verdict, value))
}

pub fn certify(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let f = solve(cfg, &cfg.body)?;
    let (verdict, value) = certificate(cfg, &f)?;
    let text = json_text(cfg, json!({ "body": cfg.body, "rho_hat": f.rho_hat, "certificate": value }));
    Ok(Outcome {
        artifacts: vec![("certify.json".into(), text.clone())],
        stdout: text,
        status: status(!matches!(verdict, CertVerdict::Inconclusive(_))),
    })
}

struct BodyRow {
    body: String,
    rho_hat: f64,
    margin: f64,
    audit: AuditReport,
    violations: usize,
    verdict: CertVerdict,
    json: serde_json::Value,
}

fn report_body(cfg: &RunConfig, body: &str) -> Result<BodyRow, RunError> {
    let f = solve(cfg, body)?;
    let rep = audit(cfg, &f)?;
    let entries = ledger(cfg, &f)?;
    let (verdict, cert) = certificate(cfg, &f)?;
    let violations = entries.iter().filter(|e| e.verdict == Verdict::Violated).count();
    let json = json!({
        "body": body,
        "field": field_summary(&f),
        "audit": audit_json(&rep),
        "ledger": ledger_json(&entries),
        "certificate": cert,
    });
    Ok(BodyRow { body: body.to_string(), rho_hat: f.rho_hat, margin: f.admissible, audit: rep, violations, verdict, json })
}

pub fn report(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let rows: Vec<BodyRow> = cfg.bodies.par_iter().map(|b| report_body(cfg, b)).collect::<Result<_, _>>()?;
    let mut csv = header(cfg);
    csv.push_str("body,rho_hat,admissible_margin,F_boundary,limit,tol_mono,monotone,above_limit,ledger_violations,verdict\n");
    let mut ok = true;
    for r in &rows {
        let f_boundary = r.audit.rows.iter().find(|x| x.level.t == -1.0).map_or(f64::NAN, |x| x.level.f);
        let _ = writeln!(
            csv,
            "\"{}\",{:.12e},{:.6e},{:.12e},{:.12e},{:.6e},{},{},{},{}",
            r.body,
            r.rho_hat,
            r.margin,
            f_boundary,
            r.audit.limit,
            r.audit.tol_mono,
            r.audit.monotone(),
            r.audit.above_limit(),
            r.violations,
            r.verdict.label()
        );
        ok &= r.audit.passed()
            && r.violations == 0
            && r.margin >= -ADMISSIBILITY_TOL
            && !matches!(r.verdict, CertVerdict::Inconclusive(_));
    }
    let summary = json_text(cfg, json!({ "bodies": rows.iter().map(|r| r.json.clone()).collect::<Vec<_>>() }));
    Ok(Outcome {
        artifacts: vec![("report.csv".into(), csv.clone()), ("report.json".into(), summary)],
        stdout: csv,
        status: status(ok),
    })
}
