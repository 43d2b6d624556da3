//! Command line surface.
//!
//! Exit status: 0 on success, 1 on configuration or IO errors, 2 when a run
//! or check reports a violated bound.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::info;
use rayon::prelude::*;

use crate::inequalities::{self, CknCase, TestFunction};
use crate::io::{self, Config, CsvSink, RunConfig, SweepConfig};
use crate::model::alpha_check;
use crate::solver::{self, Violation};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

/// Caps the number of concurrent sweep members.
pub const THREADS_ENV: &str = "NS1D_THREADS";

/// Hardy exponents checked when `ckn-check` gets no `--a`.
pub const DEFAULT_HARDY_EXPONENTS: [f64; 4] = [0.75, 1.0, 1.5, 2.0];

#[derive(Debug, Parser)]
#[command(name = "ns1d", version, about = "1D compressible Navier-Stokes with a priori estimate monitors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and write its outputs.
    Run { config: PathBuf },
    /// Run a parameter sweep, members in parallel.
    Sweep { config: PathBuf },
    /// Measure the L1 self-convergence order of the density.
    Convergence { config: PathBuf },
    /// Probe the Hardy case of the weighted interpolation inequality.
    CknCheck {
        /// Hardy exponent; all default exponents when omitted.
        #[arg(long)]
        a: Option<f64>,
        /// Number of profiles in the probe family.
        #[arg(long, default_value_t = 1000)]
        family: usize,
    },
    /// Report whether a weight exponent is admissible.
    AlphaCheck {
        #[arg(allow_negative_numbers = true)]
        alpha: f64,
    },
}

/// Parses arguments, runs the subcommand and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Run { config } => cmd_run(&config),
        Command::Sweep { config } => cmd_sweep(&config),
        Command::Convergence { config } => cmd_convergence(&config),
        Command::CknCheck { a, family } => cmd_ckn_check(a, family),
        Command::AlphaCheck { alpha } => cmd_alpha_check(alpha),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// Outcome of one configured run after its files are written.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub outputs: PathBuf,
    pub steps: usize,
    pub t: f64,
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
    pub summary: String,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.violations.is_empty() {
            EXIT_OK
        } else {
            EXIT_VIOLATION
        }
    }
}

/// Runs a configuration, writing timeseries, snapshots, particles,
/// violations and the optional plot script into `cfg.outputs`.
///
/// An integration failure is reported as a violation rather than an error.
pub fn execute_run(cfg: &RunConfig) -> Result<RunReport> {
    let mut sink = CsvSink::create(&cfg.outputs, cfg.emit_snapshots)?;
    let outcome = solver::run(&cfg.params, &cfg.profile, &mut sink);
    sink.finish()?;
    if cfg.emit_plot_script {
        fs::write(cfg.outputs.join(io::PLOT_SCRIPT_FILE), io::plot_script(io::TIMESERIES_FILE))?;
    }
    let report = match outcome {
        Ok(out) => {
            let first = &out.records[0];
            let last = out.records.last().unwrap_or(first);
            let mut s = String::new();
            let _ = writeln!(s, "steps            {}", out.steps);
            let _ = writeln!(s, "t                {:.6e}", last.t);
            if first.mass > 0.0 {
                let _ = writeln!(s, "mass drift       {:.3e}", (last.mass - first.mass) / first.mass);
            }
            let _ = writeln!(s, "energy           {:.6e} -> {:.6e}", first.energy, last.energy);
            let _ = writeln!(s, "min rho          {:.3e}", out.min_rho);
            let _ = writeln!(s, "max rho          {:.6e}", last.max_rho);
            if let Some(cap) = last.rho_cap {
                let _ = writeln!(s, "rho cap          {cap:.6e}");
            }
            let _ = writeln!(
                s,
                "sup xi+eta       {:.6e} (initial {:.6e})",
                out.max_sup_xi_eta, out.particles.initial_sup
            );
            if cfg.params.weighted {
                let _ = writeln!(s, "interp ratio     {:.6}", out.max_interpolation_ratio);
            }
            RunReport {
                outputs: cfg.outputs.clone(),
                steps: out.steps,
                t: last.t,
                violations: out.violations,
                warnings: out.warnings,
                summary: s,
            }
        }
        Err(e @ Error::Integration { .. }) => {
            let Error::Integration { t, .. } = e else { unreachable!() };
            RunReport {
                outputs: cfg.outputs.clone(),
                steps: 0,
                t,
                violations: vec![Violation {
                    t,
                    kind: "integration_error",
                    value: f64::NAN,
                    bound: f64::NAN,
                }],
                warnings: vec![e.to_string()],
                summary: format!("run aborted: {e}\n"),
            }
        }
        Err(e) => return Err(e),
    };
    io::emit_violations(&report.violations, &cfg.outputs.join(io::VIOLATIONS_FILE))?;
    Ok(report)
}

fn violation_summary(v: &[Violation]) -> String {
    let mut kinds: BTreeMap<&str, usize> = BTreeMap::new();
    for x in v {
        *kinds.entry(x.kind).or_default() += 1;
    }
    if kinds.is_empty() {
        return "none".into();
    }
    kinds
        .iter()
        .map(|(k, n)| format!("{k} x{n}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn load_run_config(path: &Path) -> Result<RunConfig> {
    match io::parse_config(path)? {
        Config::Run(c) => Ok(c),
        Config::Sweep(_) => Err(Error::Config(format!(
            "{} describes a sweep; use the sweep subcommand",
            path.display()
        ))),
    }
}

pub fn cmd_run(path: &Path) -> Result<i32> {
    let cfg = load_run_config(path)?;
    info!("running {} into {}", path.display(), cfg.outputs.display());
    let report = execute_run(&cfg)?;
    print!("{}", report.summary);
    println!("violations       {}", violation_summary(&report.violations));
    println!("outputs          {}", report.outputs.display());
    Ok(report.exit_code())
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

pub fn run_sweep(sweep: &SweepConfig) -> Result<Vec<(RunConfig, Result<RunReport>)>> {
    let members = sweep.members()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start the sweep pool: {e}")))?;
    Ok(pool.install(|| {
        members
            .into_par_iter()
            .map(|m| {
                let r = execute_run(&m);
                (m, r)
            })
            .collect()
    }))
}

pub fn cmd_sweep(path: &Path) -> Result<i32> {
    let sweep = match io::parse_config(path)? {
        Config::Sweep(s) => s,
        Config::Run(_) => {
            return Err(Error::Config(format!(
                "{} has no sweep_axis; use the run subcommand",
                path.display()
            )))
        }
    };
    let results = run_sweep(&sweep)?;
    let mut code = EXIT_OK;
    let mut csv = format!("{},steps,t,violations,status\n", sweep.axis.name());
    println!("{:>12}  {:>8}  {:>14}  status", sweep.axis.name(), "steps", "t");
    for ((_, r), v) in results.iter().zip(&sweep.values) {
        match r {
            Ok(rep) => {
                let status = if rep.violations.is_empty() { "ok".to_string() } else { violation_summary(&rep.violations) };
                println!("{v:>12}  {:>8}  {:>14.6e}  {status}", rep.steps, rep.t);
                let _ = writeln!(csv, "{v},{},{},{},{}", rep.steps, io::fmt_f64(rep.t), rep.violations.len(), status.replace(',', ";"));
                if !rep.violations.is_empty() && code == EXIT_OK {
                    code = EXIT_VIOLATION;
                }
            }
            Err(e) => {
                println!("{v:>12}  {:>8}  {:>14}  error: {e}", "-", "-");
                let _ = writeln!(csv, "{v},,,,error");
                code = EXIT_ERROR;
            }
        }
    }
    fs::create_dir_all(&sweep.base.outputs)?;
    fs::write(sweep.base.outputs.join("sweep.csv"), csv)?;
    Ok(code)
}

pub fn cmd_convergence(path: &Path) -> Result<i32> {
    let cfg = load_run_config(path)?;
    let report = solver::self_convergence(&cfg.params, &cfg.profile, &cfg.convergence_cells)?;
    let mut csv = String::from("n_coarse,n_fine,l1_error,order\n");
    println!("{:>8}  {:>8}  {:>22}  order", "N", "2N", "L1 distance");
    for (k, e) in report.errors.iter().enumerate() {
        let order = if k > 0 { report.orders.get(k - 1).copied() } else { None };
        let shown = order.map_or("-".to_string(), |o| format!("{o:.4}"));
        println!("{:>8}  {:>8}  {:>22.16e}  {shown}", report.cells[k], report.cells[k + 1], e);
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            report.cells[k],
            report.cells[k + 1],
            io::fmt_f64(*e),
            order.map(io::fmt_f64).unwrap_or_default()
        );
    }
    fs::create_dir_all(&cfg.outputs)?;
    fs::write(cfg.outputs.join("convergence.csv"), csv)?;
    let min = report.min_order();
    let pass = min >= cfg.convergence_min_order;
    println!(
        "minimum order {min:.4} (required {}): {}",
        cfg.convergence_min_order,
        if pass { "pass" } else { "fail" }
    );
    Ok(if pass { EXIT_OK } else { EXIT_VIOLATION })
}

pub fn cmd_ckn_check(a: Option<f64>, family: usize) -> Result<i32> {
    if family == 0 {
        return Err(Error::Config("family must contain at least one profile".into()));
    }
    let exponents: Vec<f64> = match a {
        Some(a) => vec![a],
        None => DEFAULT_HARDY_EXPONENTS.to_vec(),
    };
    let mut code = EXIT_OK;
    println!(
        "{:<26} {:>14} {:>14} {:>14}  verdict",
        "case", "ratio", "stated C", "derived C"
    );
    for a in exponents {
        let case = CknCase::hardy(a)?;
        let g = inequalities::ckn_ratio(&case, &TestFunction::Gaussian)?;
        let probe = inequalities::hardy_best_constant_probe(a, family)?;
        for (label, ratio) in [
            (format!("hardy a={a} gaussian"), g),
            (format!("hardy a={a} sup/{}", probe.members), probe.sup_ratio),
        ] {
            let mut verdict = Vec::new();
            verdict.push(if ratio <= probe.derived_constant + inequalities::CONSTANT_TOL {
                "within-derived"
            } else {
                "exceeds-derived"
            });
            if ratio > probe.stated_constant + inequalities::CONSTANT_TOL {
                verdict.push("exceeds-stated");
            }
            println!(
                "{label:<26} {ratio:>14.9} {:>14.9} {:>14.9}  {}",
                probe.stated_constant,
                probe.derived_constant,
                verdict.join(",")
            );
        }
        if !probe.within_derived {
            code = EXIT_VIOLATION;
        }
        if probe.exceeds_stated {
            println!(
                "  note: the stated constant |2a-1|/2 = {} is exceeded, so it is not an upper bound; \
                 sup attained by {}",
                probe.stated_constant, probe.argmax
            );
        }
        println!("  sigma condition: {}", case.sigma_condition().label());
    }
    Ok(code)
}

pub fn cmd_alpha_check(alpha: f64) -> Result<i32> {
    if !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha must be finite, got {alpha}")));
    }
    let r = alpha_check(alpha);
    println!("alpha        {}", r.alpha);
    println!("admissible   {}", r.admissible);
    println!("theta        {:.16e}", r.theta);
    println!("coeff        {:.16e}", r.coeff);
    println!("upper_bound  {:.16e}", r.upper_bound);
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(main_with_args(["ns1d"]), EXIT_ERROR);
        assert_eq!(main_with_args(["ns1d", "alpha-check", "abc"]), EXIT_ERROR);
        assert_eq!(main_with_args(["ns1d", "frobnicate"]), EXIT_ERROR);
    }

    #[test]
    fn alpha_check_exits_zero() {
        assert_eq!(main_with_args(["ns1d", "alpha-check", "2.4"]), EXIT_OK);
        assert_eq!(main_with_args(["ns1d", "alpha-check", "2.0"]), EXIT_OK);
    }

    #[test]
    fn missing_config_exits_one() {
        assert_eq!(main_with_args(["ns1d", "run", "/nonexistent/x.cfg"]), EXIT_ERROR);
    }
}
