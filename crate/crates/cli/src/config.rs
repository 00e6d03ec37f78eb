//! Run configuration: a flat TOML file merged with command-line overrides.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use khessian::monotone::ProblemSpec;
use khessian::solver::AxiGrid;
use khessian::surfaces::{parse_profile, RevolutionBody};

/// Profile samples for the builtin bodies.
const BODY_SAMPLES: usize = 256;
const DEFAULT_BATTERY: [&str; 3] = ["sphere", "spheroid:1.5,1", "cos:1,0.05"];

/// Keys accepted both in a config file and as flags.
#[derive(Debug, Clone, Default, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Subcommand this file is meant for; checked against the one invoked.
    #[arg(skip)]
    pub command: Option<String>,
    /// Ambient dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Hessian order.
    #[arg(long)]
    pub k: Option<usize>,
    /// Exponent of |∇u| in the functional.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c3: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c4: Option<f64>,
    /// sphere | sphere:R | spheroid:POLAR,EQUATORIAL | cos:R0,AMP[,MODE] | file:PATH
    #[arg(long)]
    pub body: Option<String>,
    /// Radius of `sphere` and of the radial tables.
    #[arg(long = "R", alias = "radius")]
    pub radius: Option<f64>,
    /// Grid intervals in the radial direction.
    #[arg(long)]
    pub ns: Option<usize>,
    /// Grid intervals in the polar angle.
    #[arg(long)]
    pub nth: Option<usize>,
    /// Truncation radius, in units of the body length scale.
    #[arg(long)]
    pub r_out: Option<f64>,
    /// Strictly decreasing ε schedule.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub eps: Option<Vec<f64>>,
    /// Levels t in [−1, 0) for tables and audits.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub levels: Option<Vec<f64>>,
    #[arg(long)]
    pub tol_newton: Option<f64>,
    #[arg(long)]
    pub tol_rho: Option<f64>,
    #[arg(long)]
    pub tol_grad: Option<f64>,
    #[arg(long)]
    pub tol_overdetermined: Option<f64>,
    #[arg(long)]
    pub tol_squeeze: Option<f64>,
    /// Directory for artifacts; stdout only when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random matrices in the property suite.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Bodies of the `report` battery.
    #[arg(skip)]
    pub bodies: Option<Vec<String>>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self, Vec<String>> {
        let text = std::fs::read_to_string(path).map_err(|e| vec![format!("config {}: {e}", path.display())])?;
        toml::from_str(&text).map_err(|e| vec![format!("config {}: {}", path.display(), e.message())])
    }

    /// `top` wins wherever it is set.
    pub fn merged(mut self, top: Settings) -> Self {
        overlay!(
            self, top, command, n, k, a, c3, c4, body, radius, ns, nth, r_out, eps, levels, tol_newton, tol_rho,
            tol_grad, tol_overdetermined, tol_squeeze, out, seed, samples, bodies
        );
        self
    }
}

/// Fully resolved configuration; its JSON form is hashed.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub a: f64,
    pub c3: f64,
    pub c4: f64,
    pub body: String,
    pub radius: f64,
    pub ns: usize,
    pub nth: usize,
    pub r_out: f64,
    pub eps: Vec<f64>,
    pub levels: Vec<f64>,
    pub tol_newton: f64,
    pub tol_rho: f64,
    pub tol_grad: f64,
    pub tol_overdetermined: f64,
    pub tol_squeeze: f64,
    pub seed: u64,
    pub samples: usize,
    pub bodies: Vec<String>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Parsed `body` value.
#[derive(Debug, Clone, PartialEq)]
pub enum BodySpec {
    Sphere(Option<f64>),
    Spheroid(f64, f64),
    Cos { r0: f64, amp: f64, mode: usize },
    File(PathBuf),
}

impl BodySpec {
    pub fn parse(text: &str) -> Result<Self, String> {
        let (kind, args) = text.split_once(':').unwrap_or((text, ""));
        let nums = || -> Result<Vec<f64>, String> {
            args.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| format!("body `{text}`: `{v}` is not a number")))
                .collect()
        };
        match kind.trim() {
            "sphere" if args.is_empty() => Ok(BodySpec::Sphere(None)),
            "sphere" => match nums()?.as_slice() {
                [r] => Ok(BodySpec::Sphere(Some(*r))),
                _ => Err(format!("body `{text}`: expected sphere:R")),
            },
            "spheroid" => match nums()?.as_slice() {
                [a, b] => Ok(BodySpec::Spheroid(*a, *b)),
                _ => Err(format!("body `{text}`: expected spheroid:POLAR,EQUATORIAL")),
            },
            "cos" => match nums()?.as_slice() {
                [r0, amp] => Ok(BodySpec::Cos { r0: *r0, amp: *amp, mode: 2 }),
                [r0, amp, m] if m.fract() == 0.0 && *m >= 0.0 => Ok(BodySpec::Cos { r0: *r0, amp: *amp, mode: *m as usize }),
                _ => Err(format!("body `{text}`: expected cos:R0,AMP[,MODE]")),
            },
            "file" if !args.is_empty() => Ok(BodySpec::File(PathBuf::from(args))),
            _ => Err(format!("body `{text}`: unknown kind (sphere, spheroid, cos, file)")),
        }
    }

    pub fn build(&self, n: usize, radius: f64) -> Result<RevolutionBody<f64>, String> {
        let body = match self {
            BodySpec::Sphere(r) => RevolutionBody::sphere(n, r.unwrap_or(radius), BODY_SAMPLES),
            BodySpec::Spheroid(a, b) => RevolutionBody::spheroid(n, *a, *b, BODY_SAMPLES),
            BodySpec::Cos { r0, amp, mode } => RevolutionBody::cos_perturbed(n, *r0, *amp, *mode, BODY_SAMPLES),
            BodySpec::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| format!("profile {}: {e}", path.display()))?;
                let body = parse_profile(&text).map_err(|e| format!("profile {}: {e}", path.display()))?;
                if body.dim() != n {
                    return Err(format!("profile {} has n = {} but n = {n}", path.display(), body.dim()));
                }
                Ok(body)
            }
        };
        body.map_err(|e| e.to_string())
    }
}

fn needs_problem(command: &str) -> bool {
    command != "matrix-suite"
}

fn needs_grid(command: &str) -> bool {
    !matches!(command, "matrix-suite" | "radial")
}

impl RunConfig {
    /// Fills defaults and checks every constraint, returning all violations at once.
    pub fn resolve(command: &str, s: Settings) -> Result<Self, Vec<String>> {
        let mut bad = Vec::new();
        if let Some(c) = &s.command {
            if c != command {
                bad.push(format!("config is for `{c}` but `{command}` was invoked"));
            }
        }
        if needs_problem(command) {
            if s.n.is_none() {
                bad.push("n is required".into());
            }
            if s.k.is_none() {
                bad.push("k is required".into());
            }
        }
        let (n, k) = (s.n.unwrap_or(0), s.k.unwrap_or(0));
        let default_a = if n > 2 * k && k > 0 { ProblemSpec::<f64>::min_exponent(n, k).max(2.0) } else { 2.0 };
        let default_eps = if k <= 1 { vec![1e-3] } else { vec![0.5, 0.1, 0.02] };
        let cfg = RunConfig {
            command: command.to_string(),
            n: s.n,
            k: s.k,
            a: s.a.unwrap_or(default_a),
            c3: s.c3.unwrap_or(1.0),
            c4: s.c4.unwrap_or(0.0),
            body: s.body.unwrap_or_else(|| "sphere".into()),
            radius: s.radius.unwrap_or(1.0),
            ns: s.ns.unwrap_or(128),
            nth: s.nth.unwrap_or(64),
            r_out: s.r_out.unwrap_or(40.0),
            eps: s.eps.unwrap_or(default_eps),
            levels: s.levels.unwrap_or_default(),
            tol_newton: s.tol_newton.unwrap_or(1e-10),
            tol_rho: s.tol_rho.unwrap_or(1e-8),
            tol_grad: s.tol_grad.unwrap_or(1e-8),
            tol_overdetermined: s.tol_overdetermined.unwrap_or(1e-3),
            tol_squeeze: s.tol_squeeze.unwrap_or(1e-6),
            seed: s.seed.unwrap_or(0),
            samples: s.samples.unwrap_or(10_000),
            bodies: s.bodies.unwrap_or_else(|| DEFAULT_BATTERY.iter().map(|b| b.to_string()).collect()),
            out: s.out,
        };
        bad.extend(cfg.violations());
        if bad.is_empty() {
            Ok(cfg)
        } else {
            Err(bad)
        }
    }

    fn violations(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let cmd = self.command.as_str();
        if cmd == "matrix-suite" && self.samples == 0 {
            bad.push("samples must be positive".into());
        }
        if !needs_problem(cmd) {
            return bad;
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            bad.push(format!("radius = {} must be positive", self.radius));
        }
        for (name, v) in [
            ("tol_newton", self.tol_newton),
            ("tol_rho", self.tol_rho),
            ("tol_grad", self.tol_grad),
            ("tol_overdetermined", self.tol_overdetermined),
            ("tol_squeeze", self.tol_squeeze),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bad.push(format!("{name} = {v} must be positive"));
            }
        }
        let bodies: Vec<&str> =
            if cmd == "report" { self.bodies.iter().map(String::as_str).collect() } else { vec![&self.body] };
        let mut parsed = Vec::new();
        if needs_grid(cmd) {
            if self.eps.is_empty() {
                bad.push("eps schedule is empty".into());
            }
            if self.eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                bad.push("every eps must be positive and finite".into());
            }
            if self.eps.windows(2).any(|w| w[1] >= w[0]) {
                bad.push("eps must strictly decrease".into());
            }
            if bodies.is_empty() {
                bad.push("bodies is empty".into());
            }
            for b in &bodies {
                match BodySpec::parse(b) {
                    Ok(spec) => parsed.push((*b, spec)),
                    Err(e) => bad.push(e),
                }
            }
        }
        let (Some(n), Some(k)) = (self.n, self.k) else { return bad };
        if let Err(khessian::monotone::SpecError::Invalid(v)) =
            ProblemSpec::with_grid(n, k, self.a, self.c3, self.c4, self.levels.clone())
        {
            bad.extend(v);
        }
        if k == 0 || 2 * k >= n {
            return bad;
        }
        for (name, spec) in parsed {
            match spec.build(n, self.radius) {
                Ok(body) => {
                    if let Err(e) = AxiGrid::new(body, self.r_out, self.ns, self.nth) {
                        bad.push(format!("grid for `{name}`: {e}"));
                    }
                }
                Err(e) => bad.push(e),
            }
        }
        bad
    }

    pub fn spec(&self) -> ProblemSpec<f64> {
        let (n, k) = (self.n.expect("validated"), self.k.expect("validated"));
        let mut spec =
            ProblemSpec::with_grid(n, k, self.a, self.c3, self.c4, self.levels.clone()).expect("validated");
        spec.tol.newton = self.tol_newton;
        spec.tol.rho = self.tol_rho;
        spec.tol.grad = self.tol_grad;
        spec.tol.overdetermined = self.tol_overdetermined;
        spec.tol.squeeze = self.tol_squeeze;
        spec
    }

    pub fn grid_for(&self, body: &str) -> AxiGrid {
        let n = self.n.expect("validated");
        let body = BodySpec::parse(body).and_then(|b| b.build(n, self.radius)).expect("validated");
        AxiGrid::new(body, self.r_out, self.ns, self.nth).expect("validated")
    }

    /// SHA-256 of the canonical JSON form (output directory excluded).
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("plain data serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Smallest ε of the schedule; `None` for commands that do not solve.
    pub fn eps_min(&self) -> Option<f64> {
        if !needs_grid(&self.command) {
            return None;
        }
        self.eps.iter().copied().reduce(f64::min)
    }
}
