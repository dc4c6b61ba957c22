//! Batch runner for divergence bounds, oracle checks and power experiments.
//!
//! Exit status: 0 success, 1 invalid usage or configuration, 2 oracle
//! failure, 3 runtime numerical error.

pub mod commands;
pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{read_config_file, Command, ExperimentConfig, Violation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_ORACLE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "indepbound", version, about = "Divergence bounds and power experiments for independence testing")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Divergence bound rows over a grid of (n, p, q, b).
    Bound(Flags),
    /// Oracle suite; exits 2 if any comparison fails.
    Verify(Flags),
    /// Level and power estimates per grid point.
    Power(Flags),
    /// Power along the signal axis for each (n, p, q).
    Phase(Flags),
    /// A single divergence report.
    Divergence(Flags),
}

/// Values are kept as strings so that every malformed entry is reported together.
#[derive(Debug, Args)]
struct Flags {
    /// `key = value` config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<String>,
    /// Monte Carlo trials per estimate.
    #[arg(long)]
    trials: Option<String>,
    /// Permutations per test.
    #[arg(long)]
    perms: Option<String>,
    /// Output path; standard output when absent.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    /// Aspect bound on (p + q) / n used by b selection (default 1).
    #[arg(long)]
    kappa: Option<String>,
    #[arg(long = "grid-n")]
    grid_n: Option<String>,
    #[arg(long = "grid-p")]
    grid_p: Option<String>,
    #[arg(long = "grid-q")]
    grid_q: Option<String>,
    /// Signal values s = n‖Σ_XY‖²/√(pq).
    #[arg(long = "grid-s")]
    grid_s: Option<String>,
    /// Signal constants b; derived from alpha, beta, kappa when absent.
    #[arg(long = "grid-b")]
    grid_b: Option<String>,
    /// null, least_favorable, both, regression or two_sample.
    #[arg(long)]
    regime: Option<String>,
    /// Center columns before computing the statistic.
    #[arg(long)]
    centered: bool,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<String>,
    /// Monte Carlo trials for the verify suite.
    #[arg(long = "mc-trials")]
    mc_trials: Option<String>,
    /// Negative control for verify: perturbs one eigenvalue by a factor 1 + 1e-3.
    #[arg(long = "perturb-gamma")]
    perturb_gamma: bool,
}

impl Flags {
    fn overrides(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let pairs = [
            ("seed", &self.seed),
            ("trials", &self.trials),
            ("perms", &self.perms),
            ("out", &self.out),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("kappa", &self.kappa),
            ("grid-n", &self.grid_n),
            ("grid-p", &self.grid_p),
            ("grid-q", &self.grid_q),
            ("grid-s", &self.grid_s),
            ("grid-b", &self.grid_b),
            ("regime", &self.regime),
            ("threads", &self.threads),
            ("mc-trials", &self.mc_trials),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                m.insert(k.to_string(), v.clone());
            }
        }
        if self.centered {
            m.insert("centered".into(), "true".into());
        }
        if self.perturb_gamma {
            m.insert("perturb-gamma".into(), "true".into());
        }
        m
    }
}

/// Parses arguments into a validated config, or every reason it is invalid.
pub fn parse_config<I, T>(args: I) -> Result<ExperimentConfig, ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(ParseOutcome::Clap)?;
    let (command, flags) = match cli.command {
        Sub::Bound(f) => (Command::Bound, f),
        Sub::Verify(f) => (Command::Verify, f),
        Sub::Power(f) => (Command::Power, f),
        Sub::Phase(f) => (Command::Phase, f),
        Sub::Divergence(f) => (Command::Divergence, f),
    };
    let (file, mut problems) = match &flags.config {
        Some(path) => read_config_file(path),
        None => (BTreeMap::new(), Vec::new()),
    };
    match ExperimentConfig::resolve(command, &file, &flags.overrides()) {
        Ok(cfg) if problems.is_empty() => Ok(cfg),
        Ok(_) => Err(ParseOutcome::Invalid(problems)),
        Err(more) => {
            problems.extend(more);
            Err(ParseOutcome::Invalid(problems))
        }
    }
}

#[derive(Debug)]
pub enum ParseOutcome {
    Clap(clap::Error),
    Invalid(Vec<Violation>),
}

/// Full command-line entry point; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match parse_config(args) {
        Ok(cfg) => cfg,
        Err(ParseOutcome::Clap(e)) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
        Err(ParseOutcome::Invalid(violations)) => {
            eprintln!("invalid configuration ({} problems):", violations.len());
            for v in violations {
                eprintln!("  {v}");
            }
            return EXIT_VALIDATION;
        }
    };
    if let Some(threads) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("warning: thread pool already initialised: {e}");
        }
    }
    let out = match commands::execute(&cfg) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &out.csv),
        None => std::io::stdout().lock().write_all(&out.csv),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return EXIT_RUNTIME;
    }
    out.exit
}
