//! Command-line front end.
//!
//! Reports go to stdout as JSON, a short human summary goes to stderr.
//! Exit codes: 0 success / condition holds, 1 condition violated or no
//! convergence, 2 usage or configuration error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::axioms::{check_derived_properties, check_gm_axioms, check_mult_axioms, AxiomReport};
use crate::contraction::{certify_region, CertificateReport, Condition, ContractionParams, Region};
use crate::corpus::{load_fixture_config, lookup, reference_values, NamedFixture, ReferenceValue};
use crate::error::Error;
use crate::json::{fmt_g, to_json};
use crate::metric::{Interval, Point};
use crate::picard::{solve_fixed_point, FixedPointResult, OrderRelation, RateClass, SolveOptions};

/// Largest deviation from a printed reference value that still counts as a match.
pub const REFERENCE_TOLERANCE: f64 = 1e-3;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "gmfix", version, about = "Multiplicative G-metric fixed-point toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check metric axioms and derived G-metric properties by sampling.
    Axioms {
        #[command(flatten)]
        source: Source,
        /// Sampling interval `lo:hi`.
        #[arg(long, default_value = "0:10")]
        region: String,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check a contractive condition on sampled triples.
    Certify {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = Mode::Root)]
        condition: Mode,
        /// `lo:hi` or `ball`.
        #[arg(long, default_value = "ball")]
        region: String,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run Picard iteration to a fixed point.
    Solve {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = Mode::Root)]
        mode: Mode,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Compare computed values with the published reference numbers.
    Reproduce,
}

#[derive(Debug, Args)]
pub struct Source {
    /// Built-in fixture id: exp-usual, product-exp, ex33, ex37.
    #[arg(long, conflicts_with = "config")]
    pub fixture: Option<String>,
    /// JSON fixture file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Overrides {
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub x0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Root,
    Implicit,
}

impl From<Mode> for Condition {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Root => Condition::Root,
            Mode::Implicit => Condition::Implicit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Outcome of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandResult {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandResult {
    fn usage(msg: impl Into<String>) -> Self {
        let mut stderr = msg.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        CommandResult {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let text = e.render().to_string();
            match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => CommandResult {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => CommandResult::usage(text),
            }
        }
    }
}

pub fn execute(cli: Cli) -> CommandResult {
    match cli.command {
        Command::Axioms {
            source,
            region,
            n,
            seed,
        } => cmd_axioms(&source, &region, n, seed),
        Command::Certify {
            source,
            condition,
            region,
            overrides,
            n,
            seed,
        } => cmd_certify(&source, condition.into(), &region, &overrides, n, seed),
        Command::Solve {
            source,
            mode,
            overrides,
            epsilon,
            max_iter,
            format,
        } => cmd_solve(&source, mode.into(), &overrides, epsilon, max_iter, format),
        Command::Reproduce => cmd_reproduce(),
    }
}

fn resolve(source: &Source) -> Result<NamedFixture, String> {
    match (&source.fixture, &source.config) {
        (Some(id), None) => lookup(id).ok_or_else(|| format!("unknown fixture `{id}`")),
        (None, Some(path)) => load_fixture_config(path).map_err(|e| e.to_string()),
        (None, None) => Err("one of --fixture or --config is required".into()),
        (Some(_), Some(_)) => Err("--fixture and --config are mutually exclusive".into()),
    }
}

fn parse_interval(text: &str) -> Result<Interval, String> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| format!("region `{text}` is not of the form lo:hi"))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("region bound `{s}` is not a number"))
    };
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo < 0.0 || !hi.is_finite() {
        return Err(format!("region `{text}` must be a bounded subset of [0, inf)"));
    }
    Interval::closed(lo, hi).map_err(|e| e.to_string())
}

fn parse_region(text: &str) -> Result<Region, String> {
    if text == "ball" {
        Ok(Region::Ball)
    } else {
        parse_interval(text).map(Region::Interval)
    }
}

fn effective_params(fixture: &NamedFixture, o: &Overrides) -> Result<ContractionParams, String> {
    let base = fixture.params;
    let pick = |over: Option<f64>, from: Option<f64>, name: &str| {
        over.or(from)
            .ok_or_else(|| format!("fixture `{}` has no {name}; pass --{name}", fixture.id))
    };
    let eta = pick(o.eta, base.map(|p| p.eta), "eta")?;
    let gamma = pick(o.gamma, base.map(|p| p.gamma), "gamma")?;
    let x0 = pick(o.x0, base.map(|p| p.seed_point.value()), "x0")?;
    let m = base.map(|p| p.m).unwrap_or(1);
    let x0 = Point::new(x0).map_err(|e| e.to_string())?;
    ContractionParams::new(eta, m, gamma, x0).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct AxiomsOutput<'a> {
    command: &'static str,
    fixture: &'a str,
    passed: bool,
    reports: Vec<AxiomReport>,
}

pub fn cmd_axioms(source: &Source, region: &str, n: usize, seed: u64) -> CommandResult {
    let fixture = match resolve(source) {
        Ok(f) => f,
        Err(e) => return CommandResult::usage(e),
    };
    let domain = match parse_interval(region) {
        Ok(d) => d,
        Err(e) => return CommandResult::usage(e),
    };
    let reports = [
        check_mult_axioms(&fixture.mult, &domain, n, seed),
        check_gm_axioms(&fixture.g, &domain, n, seed),
        check_derived_properties(&fixture.g, &domain, n, seed),
    ]
    .into_iter()
    .collect::<Result<Vec<_>, _>>();
    let reports = match reports {
        Ok(r) => r,
        Err(e) => return CommandResult::usage(e.to_string()),
    };

    let passed = reports.iter().all(|r| r.passed);
    let mut stderr = String::new();
    for r in &reports {
        for a in &r.results {
            let mark = if a.violations == 0 { "pass" } else { "FAIL" };
            stderr.push_str(&format!(
                "{:<22} {:<9} {mark} ({} checks, {} violations)\n",
                r.suite,
                a.axiom.name(),
                a.checks,
                a.violations
            ));
            if let Some(w) = a.witnesses.first() {
                let pts: Vec<_> = w.points.iter().map(|p| fmt_g(p.value(), 5)).collect();
                stderr.push_str(&format!(
                    "    witness ({}): lhs {} vs rhs {}\n",
                    pts.join(", "),
                    fmt_g(w.lhs, 5),
                    fmt_g(w.rhs, 5)
                ));
            }
        }
    }
    let out = AxiomsOutput {
        command: "axioms",
        fixture: &fixture.id,
        passed,
        reports,
    };
    CommandResult {
        code: if passed { EXIT_OK } else { EXIT_FAIL },
        stdout: to_json(&out),
        stderr,
    }
}

#[derive(Serialize)]
struct CertifyOutput<'a> {
    command: &'static str,
    fixture: &'a str,
    holds: bool,
    report: CertificateReport,
}

pub fn cmd_certify(
    source: &Source,
    condition: Condition,
    region: &str,
    overrides: &Overrides,
    n: usize,
    seed: u64,
) -> CommandResult {
    let fixture = match resolve(source) {
        Ok(f) => f,
        Err(e) => return CommandResult::usage(e),
    };
    let Some(map) = fixture.map.as_ref() else {
        return CommandResult::usage(format!("fixture `{}` has no map", fixture.id));
    };
    let (params, region) = match (effective_params(&fixture, overrides), parse_region(region)) {
        (Ok(p), Ok(r)) => (p, r),
        (Err(e), _) | (_, Err(e)) => return CommandResult::usage(e),
    };
    let report = match certify_region(&fixture.g, map, &params, condition, region, n, seed) {
        Ok(r) => r,
        Err(e) => return CommandResult::usage(e.to_string()),
    };

    let holds = report.holds();
    let mut stderr = format!(
        "{:?} condition on {} ({} triples): {}\nseed condition: ln G(x0,Fx0,Fx0) = {} vs ln((1-eta)gamma) = {} -> {}\n",
        report.condition,
        report.region,
        report.sample_count,
        if report.violation_count == 0 {
            "holds on sample".to_string()
        } else {
            format!("VIOLATED at {} triples", report.violation_count)
        },
        fmt_g(report.seed_condition.lhs_log, 5),
        fmt_g(report.seed_condition.rhs_log, 5),
        if report.seed_condition.holds { "holds" } else { "FAILS" },
    );
    if let Some(w) = report.witnesses.first() {
        stderr.push_str(&format!(
            "first witness ({}, {}, {}): lhs {} > rhs {}\n",
            fmt_g(w.points[0].value(), 5),
            fmt_g(w.points[1].value(), 5),
            fmt_g(w.points[2].value(), 5),
            fmt_g(w.lhs, 5),
            fmt_g(w.rhs, 5)
        ));
    }
    let out = CertifyOutput {
        command: "certify",
        fixture: &fixture.id,
        holds,
        report,
    };
    CommandResult {
        code: if holds { EXIT_OK } else { EXIT_FAIL },
        stdout: to_json(&out),
        stderr,
    }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    command: &'static str,
    fixture: &'a str,
    converged: bool,
    warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<FixedPointResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn cmd_solve(
    source: &Source,
    mode: Condition,
    overrides: &Overrides,
    epsilon: f64,
    max_iter: usize,
    format: Format,
) -> CommandResult {
    let fixture = match resolve(source) {
        Ok(f) => f,
        Err(e) => return CommandResult::usage(e),
    };
    let Some(map) = fixture.map.as_ref() else {
        return CommandResult::usage(format!("fixture `{}` has no map", fixture.id));
    };
    let params = match effective_params(&fixture, overrides) {
        Ok(p) => p,
        Err(e) => return CommandResult::usage(e),
    };
    let opts = SolveOptions {
        epsilon,
        max_iter,
        allow_uncertified: true,
    };
    let outcome = solve_fixed_point(&fixture.g, map, &OrderRelation::numeric(), &params, mode, &opts);

    let result = match outcome {
        Ok(r) => r,
        Err(e @ Error::InvalidParameter { .. }) => return CommandResult::usage(e.to_string()),
        Err(e) => {
            let out = SolveOutput {
                command: "solve",
                fixture: &fixture.id,
                converged: false,
                warnings: Vec::new(),
                result: None,
                error: Some(e.to_string()),
            };
            return CommandResult {
                code: EXIT_FAIL,
                stdout: to_json(&out),
                stderr: format!("solve failed: {e}\n"),
            };
        }
    };

    let mut warnings = Vec::new();
    if let Some(mu) = result.mu {
        match mu.class {
            RateClass::Uncertified => warnings.push(format!(
                "uncertified rate: mu = eta/(1-eta) = {} >= 1, no a-priori iteration bound",
                fmt_g(mu.mu, 5)
            )),
            RateClass::Geometric => warnings.push(format!(
                "mu = {} lies in [1/2, 1): geometric but outside the range mu < 1/2",
                fmt_g(mu.mu, 5)
            )),
            RateClass::BelowHalf => {}
        }
    }
    if result.left_ball {
        warnings.push("an iterate left the closed ball around the seed".into());
    }
    if !result.order_certified {
        warnings.push("orbit is not monotone: converged without order certificate".into());
    }

    let mut stderr = format!(
        "fixed point {} after {} iterations (residual log {}, a-priori bound {})\n",
        fmt_g(result.point.value(), 5),
        result.iterations_used,
        fmt_g(result.residual_log.log(), 5),
        result
            .certified_bound
            .map(|b| b.to_string())
            .unwrap_or_else(|| "none".into()),
    );
    for w in &warnings {
        stderr.push_str(&format!("warning: {w}\n"));
    }

    let stdout = match format {
        Format::Json => to_json(&SolveOutput {
            command: "solve",
            fixture: &fixture.id,
            converged: true,
            warnings,
            result: Some(result),
            error: None,
        }),
        Format::Csv => {
            let mut buf = Vec::new();
            if let Err(e) = result.trace.write_csv(&mut buf) {
                return CommandResult::usage(e.to_string());
            }
            String::from_utf8(buf).expect("csv output is utf-8")
        }
    };
    CommandResult {
        code: EXIT_OK,
        stdout,
        stderr,
    }
}

#[derive(Serialize)]
struct ReproduceOutput {
    command: &'static str,
    tolerance: f64,
    passed: bool,
    values: Vec<ReferenceValue>,
}

pub fn cmd_reproduce() -> CommandResult {
    let values = reference_values();
    let passed = values.iter().all(|v| v.abs_diff <= REFERENCE_TOLERANCE);
    let mut stderr = format!(
        "{:<34} {:>10} {:>10} {:>12}\n",
        "quantity", "computed", "printed", "|diff|"
    );
    for v in &values {
        stderr.push_str(&format!(
            "{:<34} {:>10} {:>10} {:>12}\n",
            v.quantity,
            fmt_g(v.computed, 5),
            fmt_g(v.printed, 5),
            fmt_g(v.abs_diff, 5)
        ));
    }
    CommandResult {
        code: if passed { EXIT_OK } else { EXIT_FAIL },
        stdout: to_json(&ReproduceOutput {
            command: "reproduce",
            tolerance: REFERENCE_TOLERANCE,
            passed,
            values,
        }),
        stderr,
    }
}
