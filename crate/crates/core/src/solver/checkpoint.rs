//! Plain-text field checkpoints.
//!
//! ```text
//! # exterior-field v1
//! n=5
//! k=2
//! ...
//! # profile
//! <γ_0>
//! ...
//! # values
//! <u(s_0, θ_0)> <u(s_0, θ_1)> ...
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::surfaces::RevolutionBody;

use super::{AxiGrid, ExteriorField, SolveDiagnostics, SolverError};

pub const CHECKPOINT_HEADER: &str = "# exterior-field v1";

pub fn write_field(field: &ExteriorField) -> String {
    let g = &field.grid;
    let mut out = String::new();
    let _ = writeln!(out, "{CHECKPOINT_HEADER}");
    let _ = writeln!(out, "n={}", g.dim());
    let _ = writeln!(out, "k={}", field.k);
    let _ = writeln!(out, "ns={}", g.ns);
    let _ = writeln!(out, "nth={}", g.nth);
    let _ = writeln!(out, "r_out={:.17e}", g.r_out);
    let _ = writeln!(out, "panels={}", g.body.panels());
    let _ = writeln!(out, "cluster={:.17e}", g.cluster);
    let _ = writeln!(out, "eps={:.17e}", field.eps);
    let _ = writeln!(out, "cnk={:.17e}", field.cnk);
    let _ = writeln!(out, "rho_hat={:.17e}", field.rho_hat);
    let _ = writeln!(out, "residual_norm={:.17e}", field.residual_norm);
    let _ = writeln!(out, "admissible={:.17e}", field.admissible);
    let sched: Vec<String> = field.diagnostics.schedule.iter().map(|e| format!("{e:.17e}")).collect();
    let _ = writeln!(out, "schedule={}", sched.join(","));
    let _ = writeln!(out, "# profile");
    for v in g.body.samples() {
        let _ = writeln!(out, "{v:.17e}");
    }
    let _ = writeln!(out, "# values");
    for i in 0..=g.ns {
        let row: Vec<String> = (0..=g.nth).map(|j| format!("{:.17e}", field.value(i, j))).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

fn bad(msg: impl Into<String>) -> SolverError {
    SolverError::Checkpoint(msg.into())
}

pub fn read_field(text: &str) -> Result<ExteriorField, SolverError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    // Leading comment lines before the header are allowed.
    let first = lines.by_ref().find(|l| *l == CHECKPOINT_HEADER || !l.starts_with('#'));
    if first != Some(CHECKPOINT_HEADER) {
        return Err(bad(format!("missing `{CHECKPOINT_HEADER}` header")));
    }
    let mut keys = BTreeMap::new();
    let mut section = "";
    let mut profile = Vec::new();
    let mut values = Vec::new();
    for line in lines {
        match line {
            "# profile" => section = "profile",
            "# values" => section = "values",
            _ if section.is_empty() => {
                let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("expected key=value, got `{line}`")))?;
                keys.insert(k.trim().to_string(), v.trim().to_string());
            }
            _ => {
                let nums: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
                let nums = nums.map_err(|e| bad(format!("bad number in {section} block: {e}")))?;
                if section == "profile" {
                    profile.extend(nums);
                } else {
                    values.push(nums);
                }
            }
        }
    }
    let get = |k: &str| keys.get(k).ok_or_else(|| bad(format!("missing key `{k}`")));
    let num = |k: &str| -> Result<f64, SolverError> { get(k)?.parse().map_err(|_| bad(format!("key `{k}` is not a number"))) };
    let int = |k: &str| -> Result<usize, SolverError> { get(k)?.parse().map_err(|_| bad(format!("key `{k}` is not an integer"))) };
    let n = int("n")?;
    let ns = int("ns")?;
    let nth = int("nth")?;
    let body = RevolutionBody::from_samples(n, profile)?.with_panels(int("panels")?);
    let grid = AxiGrid::with_cluster(body, num("r_out")?, ns, nth, num("cluster")?)?;
    if values.len() != ns + 1 || values.iter().any(|r| r.len() != nth + 1) {
        return Err(bad(format!("values block must be {} rows of {} numbers", ns + 1, nth + 1)));
    }
    let schedule = match get("schedule")?.as_str() {
        "" => Vec::new(),
        s => s
            .split(',')
            .map(|v| v.parse::<f64>().map_err(|_| bad("bad schedule entry")))
            .collect::<Result<_, _>>()?,
    };
    Ok(ExteriorField {
        grid,
        k: int("k")?,
        u: values.into_iter().flatten().collect(),
        eps: num("eps")?,
        cnk: num("cnk")?,
        rho_hat: num("rho_hat")?,
        residual_norm: num("residual_norm")?,
        admissible: num("admissible")?,
        diagnostics: SolveDiagnostics { schedule, ..Default::default() },
    })
}
