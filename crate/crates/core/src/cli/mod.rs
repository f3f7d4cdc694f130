//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration
//! error, 3 numerical failure.

mod config;
mod figures;
mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::asymptotics::{long_time_model, short_time_model, LongTimeModel, ShortTimeModel};
use crate::error::{Error, Result};
use crate::grid::GridKind;
use crate::mdd::{validate, MassDistribution, MddSummary};
use crate::observables::{decay_curve_partial, instantaneous_rate, DecayCurve};
use crate::quadrature::{AmplitudeIntegrator, Kinematics};
use crate::scaling::{verify_scaling, within_relative};

pub use config::{Family, GridSpec, MddSpec, OutputFormat, RunConfig, VerifyOptions};
pub use figures::{figure_curves, figure_tables, FIGURE_COUNT};
pub use output::{format_number, write_atomic, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "reldecay", version, about = "Decay observables of moving unstable particles")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    /// JSON file with RunConfig fields; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Worker threads (1 gives the reference single-threaded run).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Unit mass m_s: multiplies printed masses and rates, divides times.
    #[arg(long = "mass-scale", global = true, allow_hyphen_values = true)]
    pub mass_scale: Option<f64>,
    /// Quadrature absolute error target.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Survival probability, mass and rate on a time grid, one file per rho.
    Curve(ModelArgs),
    /// Dataset for figure N (1..=15), one file per labelled curve.
    Figure { n: u32 },
    /// Closed-form short- and long-time constants as JSON.
    Asymptotics {
        #[command(flatten)]
        model: ModelArgs,
        /// Also compute the short-time moments.
        #[arg(long)]
        short_time: bool,
    },
    /// Runs the invariant suite and writes a JSON summary.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        /// Relative tolerance on fitted long-time slopes.
        #[arg(long = "slope-tol")]
        slope_tol: Option<f64>,
    },
}

#[derive(Debug, Default, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub xi0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub m0: Option<f64>,
    #[arg(long = "gamma-bar", allow_hyphen_values = true)]
    pub gamma_bar: Option<f64>,
    /// Tabulated density (`xi,omega` CSV).
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub metadata: Option<PathBuf>,
    /// Comma-separated momenta.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub rho: Option<Vec<f64>>,
    #[arg(long = "grid", value_parser = parse_grid_kind)]
    pub grid_kind: Option<GridKind>,
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub stop: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
}

fn parse_grid_kind(s: &str) -> std::result::Result<GridKind, String> {
    match s {
        "linear" => Ok(GridKind::Linear),
        "geometric" => Ok(GridKind::Geometric),
        other => Err(format!("unknown grid kind '{other}' (linear|geometric)")),
    }
}

impl ModelArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let m = &mut cfg.mdd;
        if let Some(v) = self.family {
            m.family = v;
        }
        if let Some(v) = self.alpha {
            m.alpha = v;
        }
        if let Some(v) = self.xi0 {
            m.xi0 = v;
        }
        if let Some(v) = self.m0 {
            m.m0 = v;
        }
        if let Some(v) = self.gamma_bar {
            m.gamma_bar = v;
        }
        if let Some(v) = &self.table {
            m.table = Some(v.clone());
            if self.family.is_none() {
                m.family = Family::Tabulated;
            }
        }
        if let Some(v) = &self.metadata {
            m.metadata = Some(v.clone());
        }
        if let Some(v) = &self.rho {
            cfg.rho = v.clone();
        }
        let g = &mut cfg.grid;
        if let Some(v) = self.grid_kind {
            g.kind = v;
        }
        if let Some(v) = self.start {
            g.start = v;
        }
        if let Some(v) = self.stop {
            g.stop = v;
        }
        if let Some(v) = self.count {
            g.count = v;
        }
    }
}

/// Merges defaults, the config file and the flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &cli.out {
        cfg.out = v.clone();
    }
    if let Some(v) = cli.format {
        cfg.format = v;
    }
    if let Some(v) = cli.threads {
        cfg.threads = Some(v);
    }
    if let Some(v) = cli.mass_scale {
        cfg.mass_scale = Some(v);
    }
    if let Some(v) = cli.tol {
        cfg.quadrature.target_abs_error = v;
    }
    match &cli.command {
        Command::Curve(m) => m.apply(&mut cfg),
        Command::Figure { .. } => {}
        Command::Asymptotics { model, short_time } => {
            model.apply(&mut cfg);
            cfg.short_time |= *short_time;
        }
        Command::Verify { model, slope_tol } => {
            model.apply(&mut cfg);
            if let Some(v) = slope_tol {
                cfg.verify.scaling.slope_tolerance = *v;
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let cfg = match resolve_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: threads: {e}");
            return EXIT_CONFIG;
        }
    };
    let outcome = pool.install(|| match &cli.command {
        Command::Curve(_) => cmd_curve(&cfg),
        Command::Figure { n } => cmd_figure(*n, &cfg),
        Command::Asymptotics { .. } => cmd_asymptotics(&cfg),
        Command::Verify { .. } => cmd_verify(&cfg),
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

fn rho_tag(rho: f64) -> String {
    format!("rho{rho}")
}

fn curve_table(curve: &DecayCurve, mass_scale: f64) -> Table {
    let cols = ["tau", "re_A", "im_A", "abs_err", "P", "M", "Gamma", "flag"];
    let mut t = Table::new(cols.iter().map(|c| c.to_string()).collect());
    for k in 0..curve.len() {
        let a = &curve.amplitude[k];
        t.push(
            vec![
                Some(curve.grid[k] / mass_scale),
                Some(a.value.re),
                Some(a.value.im),
                Some(a.abs_error_estimate),
                Some(curve.survival[k]),
                curve.mass[k].map(|m| m * mass_scale),
                curve.rate[k].map(|g| g * mass_scale),
            ],
            curve.flags[k].as_str(),
        );
    }
    t
}

pub fn cmd_curve(cfg: &RunConfig) -> Result<i32> {
    let mdd = cfg.mdd.build()?;
    let grid = cfg.grid.build()?;
    let scale = cfg.mass_scale.unwrap_or(1.0);
    let mut code = EXIT_OK;
    for &rho in &cfg.rho {
        let kin = Kinematics::for_mdd(&mdd, rho)?;
        let curve = decay_curve_partial(&mdd, &kin, &grid, &cfg.quadrature)?;
        let path = cfg
            .out
            .join(format!("curve_{}.{}", rho_tag(rho), output::extension(cfg.format)));
        write_atomic(&path, &curve_table(&curve, scale).render(cfg.format)?)?;
        if curve.any_not_converged() {
            eprintln!("warning: {}: some points did not converge (flagged not_converged)", path.display());
            code = EXIT_NUMERICAL;
        }
    }
    Ok(code)
}

pub fn cmd_figure(n: u32, cfg: &RunConfig) -> Result<i32> {
    let (tables, converged) = figure_tables(n, &cfg.quadrature)?;
    for (name, table) in &tables {
        let path = cfg.out.join(format!("{name}.{}", output::extension(cfg.format)));
        write_atomic(&path, &table.render(cfg.format)?)?;
    }
    let curves: Vec<_> = figure_curves(n)?
        .into_iter()
        .map(|(label, alpha, rho)| json!({"label": label.to_string(), "alpha": alpha, "xi0": 1.0, "rho": rho}))
        .collect();
    let manifest = serde_json::to_string_pretty(&json!({ "figure": n, "curves": curves }))? + "\n";
    write_atomic(&cfg.out.join(format!("figure{n:02}_curves.json")), &manifest)?;
    if converged {
        Ok(EXIT_OK)
    } else {
        eprintln!("warning: figure {n}: some points did not converge (flagged not_converged)");
        Ok(EXIT_NUMERICAL)
    }
}

#[derive(Debug, Serialize)]
struct AsymptoticsEntry {
    rho: f64,
    long_time: LongTimeModel,
    short_time: Option<ShortTimeModel>,
}

pub fn cmd_asymptotics(cfg: &RunConfig) -> Result<i32> {
    let mdd = cfg.mdd.build()?;
    let mut entries = Vec::new();
    for &rho in &cfg.rho {
        let kin = Kinematics::for_mdd(&mdd, rho)?;
        let short_time = if cfg.short_time {
            match short_time_model(&mdd, &kin, &cfg.quadrature) {
                Ok(m) => Some(m),
                Err(e) => {
                    eprintln!("error: short-time expansion unavailable: {e}");
                    return Ok(EXIT_NUMERICAL);
                }
            }
        } else {
            None
        };
        entries.push(AsymptoticsEntry {
            rho,
            long_time: long_time_model(&mdd, &kin),
            short_time,
        });
    }
    let report = json!({ "mdd": mdd.summary(), "models": entries });
    write_atomic(&cfg.out.join("asymptotics.json"), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub skipped: bool,
    /// Set when the check could not be evaluated for numerical reasons.
    pub error: Option<String>,
    pub detail: serde_json::Value,
}

impl Check {
    fn new(name: &str, passed: bool, detail: serde_json::Value) -> Self {
        Check {
            name: name.to_string(),
            passed,
            skipped: false,
            error: None,
            detail,
        }
    }

    fn skipped(name: &str, reason: &str) -> Self {
        Check {
            name: name.to_string(),
            passed: true,
            skipped: true,
            error: None,
            detail: json!({ "reason": reason }),
        }
    }

    fn failed(name: &str, e: &Error) -> Self {
        Check {
            name: name.to_string(),
            passed: false,
            skipped: false,
            error: Some(e.to_string()),
            detail: serde_json::Value::Null,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VerifySummary {
    pub mdd: MddSummary,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// The invariant suite behind `verify`.
pub fn verify_suite(mdd: &MassDistribution, cfg: &RunConfig) -> VerifySummary {
    let v = &cfg.verify;
    let q = &cfg.quadrature;
    let mut checks = Vec::new();

    match validate(mdd, v.normalization_tol) {
        Ok(report) => {
            let failures = report.failures();
            for name in ["normalization", "nonnegativity", "endpoint"] {
                checks.push(Check::new(name, !failures.contains(&name), serde_json::to_value(&report).unwrap_or_default()));
            }
        }
        Err(e) => checks.push(Check::failed("normalization", &e)),
    }

    if mdd.has_finite_moment(1) {
        checks.push(derivative_check(mdd, v, cfg));
    } else {
        checks.push(Check::skipped("derivative", "first moment diverges"));
    }

    let mut slopes = Vec::new();
    let mut kappas = Vec::new();
    let mut slope_ok = true;
    let mut kappa_ok = true;
    let mut scaling_error = None;
    for &rho in &v.rho {
        match verify_scaling(mdd, rho, &v.scaling, q) {
            Ok(r) => {
                slope_ok &= r.slope_pass;
                slopes.push(json!({"rho": rho, "fitted": r.fitted_powerlaw_slope, "predicted": r.predicted_slope, "pass": r.slope_pass}));
                if rho > 0.0 {
                    kappa_ok &= r.kappa_pass;
                    kappas.push(json!({"rho": rho, "fitted": r.fitted_correction_coeff, "predicted": r.predicted_kappa_p, "pass": r.kappa_pass}));
                }
            }
            Err(e) => {
                scaling_error = Some(e);
                break;
            }
        }
    }
    match scaling_error {
        Some(e) => {
            checks.push(Check::failed("survival_slope", &e));
            checks.push(Check::failed("scaling_kappa", &e));
        }
        None => {
            checks.push(Check::new(
                "survival_slope",
                slope_ok,
                json!({"tolerance": v.scaling.slope_tolerance, "window": v.scaling.window, "fits": slopes}),
            ));
            checks.push(Check::new(
                "scaling_kappa",
                kappa_ok,
                json!({"tolerance": v.scaling.kappa_tolerance, "window": v.scaling.window, "fits": kappas}),
            ));
        }
    }

    if mdd.has_finite_moment(1) {
        checks.extend(rate_checks(mdd, v, cfg));
    } else {
        checks.push(Check::skipped("rate_law", "first moment diverges"));
        checks.push(Check::skipped("rate_invariance", "first moment diverges"));
    }

    let passed = checks.iter().all(|c| c.passed);
    VerifySummary {
        mdd: mdd.summary(),
        checks,
        passed,
    }
}

fn derivative_check(mdd: &MassDistribution, v: &VerifyOptions, cfg: &RunConfig) -> Check {
    const STEP: f64 = 1e-4;
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    let rhos = [0.0, v.rho.iter().copied().fold(0.0, f64::max)];
    for rho in rhos {
        let mut eval = || -> Result<()> {
            let kin = Kinematics::for_mdd(mdd, rho)?;
            let integ = AmplitudeIntegrator::new(mdd, &kin, &cfg.quadrature)?;
            for &tau in &v.derivative_times {
                let da = integ.derivative(tau)?.value;
                let fd = (integ.amplitude(tau + STEP)?.value - integ.amplitude((tau - STEP).max(0.0))?.value)
                    / (tau + STEP - (tau - STEP).max(0.0));
                let rel = (da - fd).norm() / da.norm();
                worst = worst.max(rel);
                rows.push(json!({"rho": rho, "tau": tau, "relative_error": rel}));
            }
            Ok(())
        };
        if let Err(e) = eval() {
            return Check::failed("derivative", &e);
        }
    }
    Check::new(
        "derivative",
        worst <= v.derivative_tol,
        json!({"tolerance": v.derivative_tol, "worst": worst, "points": rows}),
    )
}

fn rate_checks(mdd: &MassDistribution, v: &VerifyOptions, cfg: &RunConfig) -> Vec<Check> {
    let tau = v.rate_time;
    let mut rates = Vec::new();
    for &rho in &v.rho {
        let r = (|| -> Result<f64> {
            let kin = Kinematics::for_mdd(mdd, rho)?;
            let (a, da) = AmplitudeIntegrator::new(mdd, &kin, &cfg.quadrature)?.pair(tau)?;
            instantaneous_rate(&a, &da)
        })();
        match r {
            Ok(g) => rates.push((rho, g)),
            Err(e) => return vec![Check::failed("rate_law", &e), Check::failed("rate_invariance", &e)],
        }
    }
    let predicted = 2.0 * (1.0 + mdd.alpha());
    let law_ok = rates
        .iter()
        .all(|(_, g)| within_relative(g * tau, predicted, v.rate_tolerance));
    let max = rates.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let min = rates.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let mean = rates.iter().map(|r| r.1).sum::<f64>() / rates.len().max(1) as f64;
    let spread = (max - min) / mean;
    let detail: Vec<_> = rates.iter().map(|(rho, g)| json!({"rho": rho, "rate": g})).collect();
    vec![
        Check::new(
            "rate_law",
            law_ok,
            json!({"tau": tau, "predicted_rate_times_tau": predicted, "tolerance": v.rate_tolerance, "rates": detail}),
        ),
        Check::new(
            "rate_invariance",
            spread <= v.rate_tolerance,
            json!({"tau": tau, "relative_spread": spread, "tolerance": v.rate_tolerance}),
        ),
    ]
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<i32> {
    let mdd = cfg.mdd.build()?;
    let summary = verify_suite(&mdd, cfg);
    write_atomic(&cfg.out.join("verify.json"), &(serde_json::to_string_pretty(&summary)? + "\n"))?;
    for c in summary.checks.iter().filter(|c| !c.passed) {
        match &c.error {
            Some(e) => eprintln!("FAIL {}: {e}", c.name),
            None => eprintln!("FAIL {}", c.name),
        }
    }
    if summary.passed {
        Ok(EXIT_OK)
    } else if summary.checks.iter().any(|c| c.error.is_some()) {
        Ok(EXIT_NUMERICAL)
    } else {
        Ok(EXIT_VERIFY_FAILED)
    }
}

/// Path of the curve file `cmd_curve` writes for `rho`.
pub fn curve_path(out: &Path, rho: f64, format: OutputFormat) -> PathBuf {
    out.join(format!("curve_{}.{}", rho_tag(rho), output::extension(format)))
}
