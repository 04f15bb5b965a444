//! Command-line front end. `run` parses arguments, executes one command and
//! returns the rendered report together with the process exit code:
//! 0 when every check passed, 1 when a check failed, 2 for usage errors and
//! 3 for numerical failures.
//!
//! A plain `key=value` file given with `--config` pre-populates flags; flags
//! on the command line win. `SOBOLEV_LAB_SEED` replaces the default seed.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::constants::{
    compare_chain, constants_table, crossover, k_convergence, log_aubin_talenti, log_k_of_t,
    log_sobolev_s, log_sobolev_s_tilde, log_talenti_normalizer, s_over_at, ConstantReport,
    Crossover, SobolevParams,
};
use crate::error::LabError;
use crate::geometry::{curvature_survey, Level, Patch, Surface};
use crate::isoperimetric::{
    alpha_bounds, alpha_of_density, alpha_sweep, check_isoperimetric, slice_deviation, sqrt_density,
};
use crate::quadrature::{integrate_1d, integrate_radial, RadialProfile};
use crate::sobolev::{
    seeded_bumps, seeded_positive_field, sobolev_quotient, Cutoff, FieldSum, RadialField,
};
use crate::specfun::{radial_integral_closed, unit_ball_volume, RadialIntegralParams};
use crate::transport::{
    matched_pairs_csv, run_experiment, sample_source, sample_target, Experiment,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "sobolev-lab",
    version,
    about = "Sobolev and isoperimetric constants on minimal submanifolds"
)]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// `key=value` file whose entries act as default flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "SOBOLEV_LAB_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Leave the timestamp out of the report.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Table of the constants at one (n, m, p).
    Constants(ConstantsArgs),
    /// S/AT ratios for large n and K_opt against its m → ∞ limit.
    Asymptotics(AsymptoticsArgs),
    /// Run a verification suite.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
    /// Catalog geometry utilities.
    Geometry {
        #[command(subcommand)]
        action: GeometryCommand,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long)]
    pub p: f64,
    /// Also evaluate K(t) at this t ∈ (0, 1).
    #[arg(long)]
    pub t: Option<f64>,
    /// Check MS > C > S > AT with the Nash codimensions of n.
    #[arg(long)]
    pub chain: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct AsymptoticsArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![2.0, 3.0, 5.0])]
    pub ps: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![100usize, 1000, 10_000, 1_000_000])]
    pub ns: Vec<usize>,
    /// `n:p` pairs for the K_opt limit.
    #[arg(long, value_delimiter = ',', default_values_t = vec!["3:3".to_string(), "4:2.5".to_string()])]
    pub k_cases: Vec<String>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 10, 100, 1000, 10_000, 100_000, 1_000_000])]
    pub ms: Vec<usize>,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct SurfaceArgs {
    /// Catalog name: flat, flat_ball, disk, catenoid, helicoid, enneper,
    /// holomorphic_graph_z2, sphere.
    #[arg(long, default_value = "catenoid")]
    pub surface: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Radius of flat_ball charts.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Radial grading rate of flat_ball charts.
    #[arg(long)]
    pub grading: Option<f64>,
    /// Coarse grid: one count for every axis, or one per axis.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
}

impl SurfaceArgs {
    fn surface(&self) -> Result<Surface, LabError> {
        let mut s = Surface::from_name(&self.surface, self.n, self.m)?;
        if let Surface::FlatBall {
            radius, grading, ..
        } = &mut s
        {
            if let Some(r) = self.radius {
                *radius = r;
            }
            if let Some(g) = self.grading {
                *grading = g;
            }
        }
        Ok(s)
    }

    fn patch(&self, default_count: usize) -> Result<Patch, LabError> {
        let chart = self.surface()?.chart()?;
        match self.grid.as_deref() {
            None => Patch::uniform(chart, default_count),
            Some([c]) => Patch::uniform(chart, *c),
            Some(g) => Patch::new(chart, g),
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Suite {
    /// Exact identities, the constant chain and the crossover verdicts.
    Identities {
        #[arg(long, default_value_t = 50)]
        n_max: usize,
        #[arg(long, default_value_t = 100)]
        m_max: usize,
        #[arg(long, default_value_t = 30)]
        chain_max: usize,
    },
    /// Closed forms against adaptive quadrature.
    QuadratureCheck {
        #[arg(long, default_value_t = 20)]
        tuples: usize,
    },
    /// Sobolev quotients of seeded bumps, or of one bubble with --bubble-scale.
    SobolevQuotient {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long, default_value_t = 1.5)]
        p: f64,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// Evaluate the truncated bubble of this scale at the origin instead.
        #[arg(long)]
        bubble_scale: Option<f64>,
    },
    /// Isoperimetric inequality with the mean-curvature and boundary terms.
    Isoperimetric {
        /// One catalog name; every catalog member when omitted.
        #[arg(long)]
        surface: Option<String>,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value_t = 32)]
        grid: usize,
    },
    /// α of power densities along j, with both bounds.
    AlphaSweep {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1u32, 10, 100, 1000])]
        js: Vec<u32>,
    },
    /// Entropic transport onto the Talenti measure.
    OtExperiment {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long, default_value_t = 1.5)]
        p: f64,
        #[arg(long, default_value_t = 500)]
        n_points: usize,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        #[arg(long, default_value_t = 12)]
        neighbors: usize,
        /// Allowed excess of Ĵ over the bound.
        #[arg(long, default_value_t = 0.1)]
        j_slack: f64,
        /// Also write matched pairs (x, ȳ, weight) as CSV.
        #[arg(long)]
        pairs_csv: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand, Serialize)]
pub enum GeometryCommand {
    /// Mean curvature and projector checks at seeded points.
    CheckMinimal {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long, default_value_t = 10_000)]
        points: usize,
    },
    /// Fine-grid nodes with their weights and |H|.
    Export {
        #[command(flatten)]
        surface: SurfaceArgs,
    },
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub arguments: Vec<String>,
    pub parameters: Value,
    pub seed: u64,
    pub format: Format,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
    pub config: RunConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

#[derive(Default)]
struct Body {
    checks: Vec<Check>,
    notes: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
}

impl Body {
    fn columns(names: &[&str]) -> Self {
        Body {
            columns: names.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn error_code(e: &LabError) -> i32 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

/// Turn `--config` entries into trailing flags for keys not already given.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let strings: Vec<String> = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let mut path = None;
    for (i, a) in strings.iter().enumerate() {
        if a == "--config" {
            path = strings.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text =
        std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let mut out = args;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{path}:{}: expected key=value", lineno + 1))?;
        let flag = format!("--{}", key.trim().replace('_', "-"));
        let given = strings
            .iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if given {
            continue;
        }
        match value.trim() {
            "true" => out.push(flag.into()),
            "false" => {}
            v => {
                out.push(flag.into());
                out.push(v.into());
            }
        }
    }
    Ok(out)
}

/// Parse `args` (including the program name), run the command, render the report.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(msg) => {
            return Outcome {
                code: 2,
                stdout: String::new(),
                stderr: format!("usage error: {msg}\n"),
            }
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let config = RunConfig {
        command: command_name(&cli.command),
        arguments: args
            .iter()
            .skip(1)
            .map(|a| a.to_string_lossy().into_owned())
            .collect(),
        parameters: serde_json::to_value(&cli.command).unwrap_or(Value::Null),
        seed: cli.seed,
        format: cli.format,
        output: cli.output.clone(),
    };
    let body = match execute(&cli) {
        Ok(b) => b,
        Err(e) => {
            return Outcome {
                code: error_code(&e),
                stdout: String::new(),
                stderr: format!("{e}\n"),
            }
        }
    };
    let passed = body.checks.iter().all(|c| c.passed);
    let report = Report {
        schema_version: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp_unix: (!cli.no_timestamp).then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        }),
        config,
        passed,
        checks: body.checks,
        notes: body.notes,
        columns: body.columns,
        rows: body.rows,
    };
    let text = render(&report, cli.format);
    let code = if passed { 0 } else { 1 };
    match &cli.output {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome {
                code,
                stdout: String::new(),
                stderr: String::new(),
            },
            Err(e) => Outcome {
                code: 2,
                stdout: String::new(),
                stderr: format!("cannot write {}: {e}\n", path.display()),
            },
        },
        None => Outcome {
            code,
            stdout: text,
            stderr: String::new(),
        },
    }
}

fn command_name(c: &Command) -> String {
    match c {
        Command::Constants(_) => "constants".into(),
        Command::Asymptotics(_) => "asymptotics".into(),
        Command::Verify { suite } => format!(
            "verify {}",
            match suite {
                Suite::Identities { .. } => "identities",
                Suite::QuadratureCheck { .. } => "quadrature-check",
                Suite::SobolevQuotient { .. } => "sobolev-quotient",
                Suite::Isoperimetric { .. } => "isoperimetric",
                Suite::AlphaSweep { .. } => "alpha-sweep",
                Suite::OtExperiment { .. } => "ot-experiment",
            }
        ),
        Command::Geometry { action } => format!(
            "geometry {}",
            match action {
                GeometryCommand::CheckMinimal { .. } => "check-minimal",
                GeometryCommand::Export { .. } => "export",
            }
        ),
    }
}

fn execute(cli: &Cli) -> Result<Body, LabError> {
    match &cli.command {
        Command::Constants(a) => cmd_constants(a),
        Command::Asymptotics(a) => cmd_asymptotics(a),
        Command::Verify { suite } => match suite {
            Suite::Identities {
                n_max,
                m_max,
                chain_max,
            } => verify_identities(*n_max, *m_max, *chain_max),
            Suite::QuadratureCheck { tuples } => verify_quadrature(*tuples, cli.seed),
            Suite::SobolevQuotient {
                surface,
                p,
                seeds,
                bubble_scale,
            } => verify_sobolev(surface, *p, *seeds, *bubble_scale, cli.seed),
            Suite::Isoperimetric {
                surface,
                seeds,
                grid,
            } => verify_isoperimetric(surface.as_deref(), *seeds, *grid, cli.seed),
            Suite::AlphaSweep { n, m, js } => verify_alpha_sweep(*n, *m, js),
            Suite::OtExperiment {
                surface,
                p,
                n_points,
                epsilon,
                tol,
                max_iter,
                neighbors,
                j_slack,
                pairs_csv,
            } => {
                let exp = Experiment {
                    points: *n_points,
                    epsilon: *epsilon,
                    tol: *tol,
                    max_iter: *max_iter,
                    neighbors: *neighbors,
                    seed: cli.seed,
                };
                verify_transport(surface, *p, &exp, *j_slack, pairs_csv.as_ref())
            }
        },
        Command::Geometry { action } => match action {
            GeometryCommand::CheckMinimal { surface, points } => {
                check_minimal(surface, *points, cli.seed)
            }
            GeometryCommand::Export { surface } => export_geometry(surface),
        },
    }
}

fn num(x: f64) -> Value {
    json!(x)
}

fn cmd_constants(a: &ConstantsArgs) -> Result<Body, LabError> {
    let params = SobolevParams::new(a.n, a.m, a.p)?;
    let mut body = Body::columns(&[
        "name",
        "n",
        "m",
        "p",
        "value",
        "log_value",
        "formula",
        "outside_proven_range",
    ]);
    let mut rows = constants_table(&params)?;
    if let (Some(t), true) = (a.t, a.m >= 1) {
        let log_value = log_k_of_t(a.n, a.m, a.p, t)?;
        rows.push(ConstantReport {
            name: "k_of_t".into(),
            n: a.n,
            m: Some(a.m),
            p: Some(a.p),
            t: Some(t),
            log_value,
            value: log_value.exp(),
            formula: "K_(m,n,p')(t)".into(),
            outside_proven_range: false,
            note: None,
        });
    }
    for r in &rows {
        body.rows.push(vec![
            json!(r.name),
            json!(r.n),
            json!(r.m),
            json!(r.p),
            num(r.value),
            num(r.log_value),
            json!(r.formula),
            json!(r.outside_proven_range),
        ]);
    }
    if a.m >= 1 {
        let c = crossover(a.n, a.m, a.p)?;
        let verdict = match c.verdict {
            Crossover::Improves => "S̃ is smaller than both earlier constants",
            Crossover::Worse => "S̃ is larger than both earlier constants",
            Crossover::Mixed => "S̃ lies between the earlier constants",
        };
        body.notes.push(format!(
            "crossover at (n, m, p) = ({}, {}, {}): {verdict}{}",
            a.n,
            a.m,
            a.p,
            if c.outside_proven_range {
                " (outside the proved range)"
            } else {
                ""
            }
        ));
    } else {
        body.notes
            .push("m = 0: submanifold constants suppressed".into());
    }
    if a.chain {
        match compare_chain(a.n) {
            Ok(report) => {
                for row in report.rows {
                    body.check(
                        format!(
                            "chain m={}{}",
                            row.m,
                            if row.compact { " (compact)" } else { "" }
                        ),
                        row.holds(),
                        format!(
                            "MS {:.6e} > C {:.6e} > S {:.6e} > AT {:.6e}",
                            row.log_michael_simon.exp(),
                            row.log_brendle_c.exp(),
                            row.log_sobolev_s.exp(),
                            row.log_aubin_talenti.exp()
                        ),
                    );
                }
            }
            Err(LabError::OrderingViolation(msg)) => body.check("chain", false, msg),
            Err(e) => return Err(e),
        }
    }
    Ok(body)
}

fn cmd_asymptotics(a: &AsymptoticsArgs) -> Result<Body, LabError> {
    let mut body = Body::columns(&["kind", "n", "m", "p", "value"]);
    for &p in &a.ps {
        let mut prev = f64::INFINITY;
        let mut decreasing = true;
        let mut above_one = true;
        let mut last = f64::NAN;
        for &n in &a.ns {
            let r = s_over_at(n, p)?;
            body.rows.push(vec![
                json!("S/AT"),
                json!(n),
                Value::Null,
                json!(p),
                num(r.ratio),
            ]);
            decreasing &= r.ratio < prev;
            above_one &= r.ratio > 1.0;
            prev = r.ratio;
            last = r.ratio;
        }
        body.check(format!("S/AT > 1 (p={p})"), above_one, "every n");
        body.check(
            format!("S/AT decreasing in n (p={p})"),
            decreasing,
            format!("{:?}", a.ns),
        );
        body.check(
            format!(
                "S/AT ≤ 1.01 at n={} (p={p})",
                a.ns.last().copied().unwrap_or(0)
            ),
            last <= 1.01,
            format!("{last:.8}"),
        );
    }
    for case in &a.k_cases {
        let (n, p) = case
            .split_once(':')
            .and_then(|(n, p)| Some((n.parse::<usize>().ok()?, p.parse::<f64>().ok()?)))
            .ok_or_else(|| LabError::Usage(format!("--k-cases expects n:p, got `{case}`")))?;
        let pts = k_convergence(n, p, &a.ms)?;
        let increasing = pts.windows(2).all(|w| w[1].log_k_opt > w[0].log_k_opt);
        for pt in &pts {
            body.rows.push(vec![
                json!("K_opt/K_limit"),
                json!(n),
                json!(pt.m),
                json!(p),
                num(pt.ratio_to_limit),
            ]);
        }
        body.check(
            format!("K_opt increasing in m (n={n}, p={p})"),
            increasing,
            format!("{:?}", a.ms),
        );
        if let Some(last) = pts.last() {
            let dev = (last.ratio_to_limit - 1.0).abs();
            body.check(
                format!("K_opt → K_limit at m={} (n={n}, p={p})", last.m),
                dev <= 1e-4,
                format!("relative gap {dev:.3e}"),
            );
        }
    }
    Ok(body)
}

fn verify_identities(n_max: usize, m_max: usize, chain_max: usize) -> Result<Body, LabError> {
    use std::f64::consts::PI;
    let mut body = Body::columns(&["identity", "worst_relative_error"]);
    let mut tilde = 0.0f64;
    let mut s_at = 0.0f64;
    let mut k = 0.0f64;
    for n in 3..=n_max {
        let s = log_sobolev_s(n, 2.0)?;
        let at = log_aubin_talenti(n, 2.0)?;
        let nf = n as f64;
        let factor = ((nf - 1.0) / (nf * (nf - 2.0)).sqrt()).ln();
        s_at = s_at.max(((s - at - factor).exp() - 1.0).abs());
        for m in 1..=m_max {
            tilde = tilde.max((log_sobolev_s_tilde(n, m, 2.0)? - s).exp_m1().abs());
            let kv = crate::constants::log_k_opt(n, m, 2.0)?;
            k = k.max((kv + 0.5 * nf * PI.ln()).exp_m1().abs());
        }
    }
    for (name, err) in [
        ("S̃(n,m,2) = S(n,2)", tilde),
        ("S(n,2) = (n−1)/√(n(n−2)) AT(n,2)", s_at),
        ("K(n,m,2) = π^{−n/2}", k),
    ] {
        body.rows.push(vec![json!(name), num(err)]);
        body.check(
            name,
            err <= 1e-12,
            format!("worst relative error {err:.3e}"),
        );
    }
    let mut chain_ok = true;
    let mut detail = String::new();
    for n in 3..=chain_max {
        if let Err(e) = compare_chain(n) {
            chain_ok = false;
            let _ = write!(detail, "{e}; ");
        }
    }
    body.check(
        format!("MS > C(n, m_n) > S > AT for n in 3..={chain_max}"),
        chain_ok,
        if chain_ok {
            "compact and non-compact m_n".to_string()
        } else {
            detail
        },
    );
    for (p, want) in [(1.5, Crossover::Improves), (1.01, Crossover::Worse)] {
        let c = crossover(3, 4, p)?;
        body.check(
            format!("crossover (3, 4, {p})"),
            c.verdict == want,
            format!("{:?}", c.verdict),
        );
    }
    Ok(body)
}

/// The admissible tuples used by the quadrature cross-check.
pub fn seeded_radial_tuples(count: usize, seed: u64) -> Vec<RadialIntegralParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let lambda = rng.gen_range(0.1..10.0);
        let alpha = rng.gen_range(1.5..4.0);
        let beta = rng.gen_range(0.0..4.0);
        let gamma = (beta + 1.0) / alpha + rng.gen_range(0.5..3.0);
        if let Ok(p) = RadialIntegralParams::new(lambda, alpha, beta, gamma) {
            out.push(p);
        }
    }
    out
}

/// Tuples on which `c_{n,m,p}` is compared with radial quadrature.
pub const NORMALIZER_GRID: [(usize, usize, f64); 5] = [
    (2, 1, 1.5),
    (3, 1, 2.0),
    (3, 2, 2.0),
    (3, 4, 1.5),
    (4, 3, 3.0),
];

fn verify_quadrature(tuples: usize, seed: u64) -> Result<Body, LabError> {
    let mut body = Body::columns(&["case", "closed_form", "quadrature", "relative_error"]);
    let mut worst = 0.0f64;
    for t in seeded_radial_tuples(tuples, seed) {
        let closed = radial_integral_closed(&t);
        let quad = integrate_1d(|r| t.integrand(r), 0.0, f64::INFINITY, 1e-12)?.value;
        let rel = (quad / closed - 1.0).abs();
        worst = worst.max(rel);
        body.rows.push(vec![
            json!(format!(
                "radial λ={:.4} α={:.4} β={:.4} γ={:.4}",
                t.lambda(),
                t.alpha(),
                t.beta(),
                t.gamma()
            )),
            num(closed),
            num(quad),
            num(rel),
        ]);
    }
    body.check(
        "radial closed form vs quadrature",
        worst <= 1e-10,
        format!("worst {worst:.3e}"),
    );
    let mut worst = 0.0f64;
    for (n, m, p) in NORMALIZER_GRID {
        let closed = log_talenti_normalizer(n, m, p)?.exp();
        let q = p / (p - 1.0);
        let gamma = n as f64 + m as f64 / q;
        let profile = RadialProfile::new(move |s: f64| (1.0 + s.powf(0.5 * q)).powf(-gamma));
        let quad = integrate_radial(&profile, n + m, 1e-12)?.value;
        let rel = (quad / closed - 1.0).abs();
        worst = worst.max(rel);
        body.rows.push(vec![
            json!(format!("c({n},{m},{p})")),
            num(closed),
            num(quad),
            num(rel),
        ]);
    }
    body.check(
        "Talenti normalizer vs radial quadrature",
        worst <= 1e-8,
        format!("worst {worst:.3e}"),
    );
    Ok(body)
}

fn verify_sobolev(
    surface: &SurfaceArgs,
    p: f64,
    seeds: u64,
    bubble_scale: Option<f64>,
    seed: u64,
) -> Result<Body, LabError> {
    let s = surface.surface()?;
    let default_count = if s.dim() == 3 { 16 } else { 64 };
    let patch = surface.patch(default_count)?;
    let params = SobolevParams::new(s.dim(), s.codim(), p)?;
    let mut body = Body::columns(&[
        "surface",
        "n",
        "m",
        "p",
        "seed",
        "quotient",
        "bound",
        "bound_name",
        "margin",
        "uncertainty",
        "grid",
    ]);
    let push = |body: &mut Body, seed: Value, r: &crate::sobolev::QuotientReport| {
        body.rows.push(vec![
            json!(r.surface),
            json!(r.n),
            json!(r.m),
            json!(r.p),
            seed,
            num(r.quotient),
            num(r.bound),
            json!(r.bound_name),
            num(r.margin),
            num(r.uncertainty),
            json!(r.grid),
        ]);
    };
    if let Some(scale) = bubble_scale {
        let center = vec![0.0; patch.chart().ambient_dim()];
        let margin = patch
            .distance_to_edge(&center)
            .ok_or_else(|| LabError::Usage("bubble needs a patch with an edge".into()))?;
        let f = RadialField::bubble(
            center,
            scale,
            s.dim(),
            p,
            Some(Cutoff::new(0.7 * margin, 0.95 * margin)?),
        );
        let r = sobolev_quotient(&patch, &f, &params)?;
        push(&mut body, Value::Null, &r);
        let at = log_aubin_talenti(s.dim(), p)?.exp();
        body.check(
            "bubble quotient within [0.95, 1.0001]·AT",
            r.quotient >= 0.95 * at && r.quotient <= 1.0001 * at,
            format!("quotient/AT = {:.6}", r.quotient / at),
        );
        body.check(
            "bubble quotient below the bound",
            r.margin > 0.0,
            format!("margin {:.6e}", r.margin),
        );
        return Ok(body);
    }
    for k in 0..seeds {
        let f = seeded_bumps(&patch, seed.wrapping_add(k))?;
        let r = sobolev_quotient(&patch, &f, &params)?;
        push(&mut body, json!(seed.wrapping_add(k)), &r);
        body.check(
            format!("seed {} margin > 2·uncertainty", seed.wrapping_add(k)),
            r.margin > 0.0 && r.margin > 2.0 * r.uncertainty,
            format!("margin {:.6e}, uncertainty {:.3e}", r.margin, r.uncertainty),
        );
    }
    Ok(body)
}

fn verify_isoperimetric(
    surface: Option<&str>,
    seeds: u64,
    grid: usize,
    seed: u64,
) -> Result<Body, LabError> {
    let surfaces = match surface {
        Some(name) => vec![Surface::from_name(name, None, None)?],
        None => Surface::all_members(),
    };
    let mut body = Body::columns(&[
        "surface",
        "field",
        "lhs",
        "rhs",
        "ratio",
        "uncertainty",
        "passed",
    ]);
    let push = |body: &mut Body, field: String, r: &crate::isoperimetric::IsoperimetricReport| {
        body.rows.push(vec![
            json!(r.surface),
            json!(field),
            num(r.lhs),
            num(r.rhs),
            num(r.ratio),
            num(r.uncertainty),
            json!(r.passed),
        ]);
    };
    for s in surfaces {
        let count = if s.dim() == 3 { grid.min(12) } else { grid };
        let patch = Patch::uniform(s.chart()?, count)?;
        let one = check_isoperimetric(&patch, &FieldSum::constant(1.0))?;
        push(&mut body, "1".into(), &one);
        match s {
            Surface::Sphere { n: 2 } => body.check(
                "sphere f ≡ 1 ratio = 1/2",
                (one.ratio - 0.5).abs() <= 1e-6,
                format!("{:.10}", one.ratio),
            ),
            s if s == Surface::disk() => body.check(
                "disk f ≡ 1 ratio = 1",
                (one.ratio - 1.0).abs() <= 1e-8,
                format!("{:.12}", one.ratio),
            ),
            _ => {}
        }
        let mut all = true;
        for k in 0..seeds {
            let f = seeded_positive_field(&patch, seed.wrapping_add(k));
            let r = check_isoperimetric(&patch, &f)?;
            all &= r.passed;
            push(&mut body, format!("seed {}", seed.wrapping_add(k)), &r);
        }
        body.check(
            format!("{}: {seeds} seeded fields satisfy LHS ≤ RHS", s.name()),
            all,
            String::new(),
        );
    }
    Ok(body)
}

fn verify_alpha_sweep(n: usize, m: usize, js: &[u32]) -> Result<Body, LabError> {
    let rows = alpha_sweep(n, m, js)?;
    let bounds = alpha_bounds(n, m)?;
    let mut body = Body::columns(&["j", "alpha", "upper_bound", "lower_bound", "argmax_r"]);
    for r in &rows {
        body.rows.push(vec![
            json!(r.j),
            num(r.alpha),
            num(r.upper),
            num(r.lower),
            num(r.r),
        ]);
        if m == 2 {
            let rel = (r.alpha / r.upper - 1.0).abs();
            body.check(
                format!("j={} α = πc_j/(j+1)", r.j),
                rel <= 1e-8,
                format!("relative gap {rel:.3e}"),
            );
        } else {
            body.check(
                format!("j={} lower ≤ α ≤ upper", r.j),
                r.alpha >= r.lower && r.alpha <= r.upper * (1.0 + 1e-10),
                format!("{:.10} ≤ {:.10} ≤ {:.10}", r.lower, r.alpha, r.upper),
            );
        }
    }
    if rows.len() > 1 && m != 2 {
        body.check(
            "α decreasing in j",
            rows.windows(2).all(|w| w[1].alpha < w[0].alpha),
            String::new(),
        );
    }
    if let Some(last) = rows.iter().rev().find(|r| r.j >= 1000) {
        let rel = last.alpha / last.lower - 1.0;
        body.check(
            format!("j={} within 1e−2 of the lower bound", last.j),
            rel <= 1e-2,
            format!("relative gap {rel:.3e}"),
        );
    }
    let sqrt = sqrt_density(n)?;
    let dev = slice_deviation(&sqrt, 512)?;
    let a = alpha_of_density(&sqrt)?;
    let omega = unit_ball_volume(n)?;
    body.check(
        "√ density slice integrals constant",
        dev <= 1e-10,
        format!("deviation {dev:.3e}"),
    );
    body.check(
        "√ density α = 1/ω_n",
        (a.alpha * omega - 1.0).abs() <= 1e-10,
        format!("α·ω_n − 1 = {:.3e}", a.alpha * omega - 1.0),
    );
    body.notes.push(format!(
        "active branch of the lower bound: {:?}",
        bounds.active
    ));
    Ok(body)
}

fn verify_transport(
    surface: &SurfaceArgs,
    p: f64,
    exp: &Experiment,
    j_slack: f64,
    pairs: Option<&PathBuf>,
) -> Result<Body, LabError> {
    let s = surface.surface()?;
    let patch = surface.patch(32)?;
    let params = SobolevParams::new(s.dim(), s.codim(), p)?;
    let f = seeded_positive_field(&patch, exp.seed);
    let (report, plan) = run_experiment(&patch, &f, &params, exp)?;
    if let Some(path) = pairs {
        let source = sample_source(&patch, &f, &params, exp.points, exp.seed)?;
        let target = sample_target(&params, exp.points, exp.seed.wrapping_add(1))?;
        std::fs::write(path, matched_pairs_csv(&plan, &source, &target))?;
    }
    let mut body = Body::columns(&[
        "surface",
        "n",
        "m",
        "p",
        "N",
        "epsilon",
        "marginal_residual",
        "median_tangential_residual",
        "J_hat",
        "j_bound",
        "seed",
    ]);
    body.rows.push(vec![
        json!(report.surface),
        json!(report.n),
        json!(report.m),
        json!(report.p),
        json!(report.points),
        num(report.epsilon),
        num(report.marginal_residual),
        num(report.median_tangential_residual),
        num(report.j_hat),
        num(report.j_bound),
        json!(report.seed),
    ]);
    body.check(
        "marginal residual ≤ 1e−6",
        report.marginal_residual <= 1e-6,
        format!(
            "{:.3e} after {} iterations",
            report.marginal_residual, report.iterations
        ),
    );
    body.check(
        "projector identity ≤ 1e−12",
        report.projector_identity <= 1e-12,
        format!("{:.3e}", report.projector_identity),
    );
    body.check(
        format!("Ĵ ≤ j_bound + {j_slack}"),
        report.j_hat <= report.j_bound + j_slack,
        format!("Ĵ = {:.6}, bound {:.6}", report.j_hat, report.j_bound),
    );
    body.check(
        "Ĵ ≤ plan-wise moment (Jensen)",
        report.j_hat <= report.plan_moment + 1e-12,
        format!("{:.6} ≤ {:.6}", report.j_hat, report.plan_moment),
    );
    body.check(
        "dual objective non-decreasing",
        report.dual_monotone,
        String::new(),
    );
    body.notes.extend(
        report
            .not_checked
            .iter()
            .map(|s| format!("not checked: {s}")),
    );
    Ok(body)
}

fn check_minimal(surface: &SurfaceArgs, points: usize, seed: u64) -> Result<Body, LabError> {
    let s = surface.surface()?;
    let survey = curvature_survey(&s.chart()?, points, seed)?;
    let mut body = Body::columns(&[
        "surface",
        "points",
        "max_abs_H",
        "min_abs_H",
        "projector_error",
        "normality_error",
    ]);
    body.rows.push(vec![
        json!(survey.surface),
        json!(survey.points),
        num(survey.max_mean_curvature),
        num(survey.min_mean_curvature),
        num(survey.projector_error),
        num(survey.normality_error),
    ]);
    if s.is_minimal() {
        body.check(
            "max |H| ≤ 1e−6",
            survey.max_mean_curvature <= 1e-6,
            format!("{:.3e}", survey.max_mean_curvature),
        );
    } else if let Surface::Sphere { n } = s {
        let dev = (survey.max_mean_curvature - n as f64)
            .abs()
            .max((survey.min_mean_curvature - n as f64).abs());
        body.check(
            format!("||H| − {n}| ≤ 1e−8"),
            dev <= 1e-8,
            format!("{dev:.3e}"),
        );
    }
    body.check(
        "projector symmetric and idempotent",
        survey.projector_error <= 1e-12,
        format!("{:.3e}", survey.projector_error),
    );
    body.check(
        "II is normal",
        survey.normality_error <= 1e-10,
        format!("{:.3e}", survey.normality_error),
    );
    Ok(body)
}

fn export_geometry(surface: &SurfaceArgs) -> Result<Body, LabError> {
    let patch = surface.patch(16)?;
    let (n, big_n) = (patch.dim(), patch.chart().ambient_dim());
    let mut cols: Vec<String> = (1..=n).map(|i| format!("u{i}")).collect();
    cols.extend((1..=big_n).map(|a| format!("x{a}")));
    cols.extend(["weight".to_string(), "abs_H".to_string()]);
    let mut body = Body {
        columns: cols,
        ..Default::default()
    };
    for v in patch.nodes(Level::Fine) {
        let mut row: Vec<Value> = v.u.iter().map(|x| num(*x)).collect();
        row.extend(v.point.iter().map(|x| num(*x)));
        row.push(num(v.weight));
        row.push(num(v.mean_curvature_norm()));
        body.rows.push(row);
    }
    body.notes
        .push(format!("codimension m = {}", patch.codim()));
    Ok(body)
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn csv_cell(v: &Value) -> String {
    let s = cell(v);
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

/// Render a report in the requested format.
pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report is serialisable");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = report.columns.join(",");
            s.push('\n');
            for row in &report.rows {
                s.push_str(&row.iter().map(csv_cell).collect::<Vec<_>>().join(","));
                s.push('\n');
            }
            s
        }
        Format::Table => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "sobolev-lab {} ({})",
                report.config.command, report.version
            );
            if !report.columns.is_empty() {
                let cells: Vec<Vec<String>> = report
                    .rows
                    .iter()
                    .map(|r| r.iter().map(cell).collect())
                    .collect();
                let widths: Vec<usize> = report
                    .columns
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        cells
                            .iter()
                            .map(|r| r.get(i).map_or(0, |x| x.chars().count()))
                            .max()
                            .unwrap_or(0)
                            .max(c.chars().count())
                    })
                    .collect();
                let line = |s: &mut String, items: &[String]| {
                    let parts: Vec<String> = items
                        .iter()
                        .zip(&widths)
                        .map(|(x, w)| format!("{x}{}", " ".repeat(w - x.chars().count())))
                        .collect();
                    let _ = writeln!(s, "{}", parts.join("  ").trim_end());
                };
                line(&mut s, &report.columns);
                for r in &cells {
                    line(&mut s, r);
                }
            }
            for n in &report.notes {
                let _ = writeln!(s, "note: {n}");
            }
            for c in &report.checks {
                let mark = if c.passed { "PASS" } else { "FAIL" };
                if c.detail.is_empty() {
                    let _ = writeln!(s, "{mark}  {}", c.name);
                } else {
                    let _ = writeln!(s, "{mark}  {}: {}", c.name, c.detail);
                }
            }
            if !report.checks.is_empty() {
                let _ = writeln!(
                    s,
                    "verdict: {}",
                    if report.passed { "PASS" } else { "FAIL" }
                );
            }
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numerical_failures_exit_with_three() {
        assert_eq!(error_code(&LabError::NonConvergence("sinkhorn".into())), 3);
        assert_eq!(error_code(&LabError::ImmersionFailure(vec![0.0])), 3);
        assert_eq!(error_code(&LabError::Domain("p".into())), 2);
        assert_eq!(error_code(&LabError::UnknownSurface("torus".into())), 2);
    }

    #[test]
    fn config_lines_become_trailing_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        std::fs::write(&path, "n = 4\npoints=10\nchain=true\nquiet=false\n").unwrap();
        let args: Vec<OsString> = [
            "lab",
            "constants",
            "--n",
            "3",
            "--config",
            path.to_str().unwrap(),
        ]
        .into_iter()
        .map(Into::into)
        .collect();
        let out: Vec<String> = expand_config(args)
            .unwrap()
            .into_iter()
            .map(|s| s.into_string().unwrap())
            .collect();
        assert_eq!(&out[6..], ["--points", "10", "--chain"]);
    }
}
