//! Subcommand bodies. Each returns the rendered CSV plus the exit status.

use indepbound::oracles::{run_suite, SuiteOptions};
use indepbound::rng::derive_seed;
use indepbound::{
    amplitude, chi_square_closed_bound, estimate_avg_power, estimate_level, estimate_scenario_power,
    minimax_power_upper, phase_curve, scenario_phase_curve, MonteCarlo, PowerEstimate, ProblemConfig, ScenarioSpec,
    Validity,
};

use crate::config::{Command, ExperimentConfig, RegimeChoice};
use crate::output::{comment_line, render, BOUND_HEADER, POWER_HEADER, VERIFY_HEADER};
use crate::{EXIT_OK, EXIT_ORACLE, EXIT_RUNTIME};

pub struct CommandOutput {
    pub csv: Vec<u8>,
    pub exit: i32,
}

pub fn execute(cfg: &ExperimentConfig) -> Result<CommandOutput, csv::Error> {
    let (header, rows, exit) = match cfg.command {
        Command::Bound | Command::Divergence => (BOUND_HEADER, bound_rows(cfg), EXIT_OK),
        Command::Verify => {
            let (rows, exit) = verify_rows(cfg);
            (VERIFY_HEADER, rows, exit)
        }
        Command::Power => {
            let (rows, exit) = power_rows(cfg);
            (POWER_HEADER, rows, exit)
        }
        Command::Phase => {
            let (rows, exit) = phase_rows(cfg);
            (POWER_HEADER, rows, exit)
        }
    };
    Ok(CommandOutput {
        csv: render(header, &comment_line(cfg), &rows)?,
        exit,
    })
}

fn bound_rows(cfg: &ExperimentConfig) -> Vec<Vec<String>> {
    let bs = cfg.b_values();
    let mut rows = Vec::new();
    for (n, p, q) in cfg.points() {
        for &b in &bs {
            rows.push(bound_row(n, p, q, b, cfg.alpha));
        }
    }
    rows
}

fn bound_row(n: usize, p: usize, q: usize, b: f64, alpha: f64) -> Vec<String> {
    let flags = |v: &Validity| [v.pd_ok.to_string(), v.mgf_ok.to_string(), v.b_caps_ok.to_string()];
    match minimax_power_upper(n, p, q, b, alpha) {
        Ok(r) => {
            let mut row = vec![
                r.n.to_string(),
                r.p.to_string(),
                r.q.to_string(),
                r.b.to_string(),
                r.a.to_string(),
                r.chi2_exact.to_string(),
                r.chi2_closed_bound.to_string(),
                r.tv_upper.to_string(),
                r.power_upper.to_string(),
            ];
            row.extend(flags(&r.validity));
            row.push(String::new());
            row
        }
        Err(e) => {
            let a = amplitude(n, p, q, b).map(|a| a.to_string()).unwrap_or_default();
            let closed = chi_square_closed_bound(b).unwrap_or(f64::INFINITY);
            let mut row = vec![
                n.to_string(),
                p.to_string(),
                q.to_string(),
                b.to_string(),
                a,
                String::new(),
                closed.to_string(),
                String::new(),
                String::new(),
            ];
            row.extend(flags(&Validity::assess(n, p, q, b)));
            row.push(e.to_string());
            row
        }
    }
}

fn verify_rows(cfg: &ExperimentConfig) -> (Vec<Vec<String>>, i32) {
    let opts = SuiteOptions {
        seed: cfg.seed,
        mc_trials: cfg.mc_trials,
        perturb_gamma: cfg.perturb_gamma,
        ..SuiteOptions::default()
    };
    let reports = run_suite(&opts);
    let exit = if reports.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_ORACLE };
    let rows = reports
        .into_iter()
        .map(|r| {
            vec![
                r.name,
                r.closed_form.to_string(),
                r.brute_force.to_string(),
                r.abs_err.to_string(),
                r.rel_err.to_string(),
                r.pass.to_string(),
            ]
        })
        .collect();
    (rows, exit)
}

fn problem(cfg: &ExperimentConfig, n: usize, p: usize, q: usize, b: f64) -> ProblemConfig {
    ProblemConfig {
        n,
        p,
        q,
        alpha: cfg.alpha,
        beta: cfg.beta,
        kappa: None,
        b,
    }
}

fn monte_carlo(cfg: &ExperimentConfig, seed: u64) -> MonteCarlo {
    MonteCarlo {
        centered: cfg.centered,
        ..MonteCarlo::new(cfg.trials, cfg.perms, seed)
    }
}

fn power_row(regime: &str, n: usize, p: usize, q: usize, x: f64, seed: u64, est: &PowerEstimate) -> Vec<String> {
    vec![
        regime.to_string(),
        n.to_string(),
        p.to_string(),
        q.to_string(),
        x.to_string(),
        est.trials.to_string(),
        est.rejections.to_string(),
        est.estimate.to_string(),
        est.ci_low.to_string(),
        est.ci_high.to_string(),
        seed.to_string(),
    ]
}

fn failed_row(regime: &str, n: usize, p: usize, q: usize, x: f64, seed: u64, trials: usize) -> Vec<String> {
    let nan = f64::NAN.to_string();
    vec![
        regime.to_string(),
        n.to_string(),
        p.to_string(),
        q.to_string(),
        x.to_string(),
        trials.to_string(),
        String::new(),
        nan.clone(),
        nan.clone(),
        nan,
        seed.to_string(),
    ]
}

enum Job {
    Null,
    LeastFavorable(f64),
    Scenario(ScenarioSpec, f64),
}

fn power_rows(cfg: &ExperimentConfig) -> (Vec<Vec<String>>, i32) {
    let mut jobs = Vec::new();
    for (n, p, q) in cfg.points() {
        match cfg.regime {
            RegimeChoice::Null => jobs.push((n, p, q, Job::Null)),
            RegimeChoice::LeastFavorable | RegimeChoice::Both => {
                if cfg.regime == RegimeChoice::Both {
                    jobs.push((n, p, q, Job::Null));
                }
                for b in cfg.b_values() {
                    jobs.push((n, p, q, Job::LeastFavorable(b)));
                }
            }
            RegimeChoice::Scenario(kind) => {
                for &s in &cfg.grid_s {
                    jobs.push((n, p, q, Job::Scenario(ScenarioSpec::at_signal(kind, n, p, s), s)));
                }
            }
        }
    }
    let total = jobs.len();
    let mut exit = EXIT_OK;
    let mut rows = Vec::with_capacity(total);
    for (r, (n, p, q, job)) in jobs.into_iter().enumerate() {
        let seed = derive_seed(cfg.seed, &[r as u64]);
        let mc = monte_carlo(cfg, seed);
        let (name, x, result) = match &job {
            Job::Null => ("null", 0.0, estimate_level(&problem(cfg, n, p, q, 0.0), &mc)),
            Job::LeastFavorable(b) => ("least_favorable", *b, estimate_avg_power(&problem(cfg, n, p, q, *b), &mc)),
            Job::Scenario(spec, s) => (
                spec.kind().name(),
                *s,
                estimate_scenario_power(spec, n, cfg.alpha, &mc),
            ),
        };
        eprintln!("[{}/{}] {name} n={n} p={p} q={q} s_or_b={x}", r + 1, total);
        rows.push(match result {
            Ok(est) => power_row(name, n, p, q, x, seed, &est),
            Err(e) => {
                eprintln!("error: {e}");
                exit = EXIT_RUNTIME;
                failed_row(name, n, p, q, x, seed, cfg.trials)
            }
        });
    }
    (rows, exit)
}

fn phase_rows(cfg: &ExperimentConfig) -> (Vec<Vec<String>>, i32) {
    let points = cfg.points();
    let mut exit = EXIT_OK;
    let mut rows = Vec::new();
    for (c, &(n, p, q)) in points.iter().enumerate() {
        let curve_seed = derive_seed(cfg.seed, &[c as u64]);
        let mc = monte_carlo(cfg, curve_seed);
        let (name, result) = match cfg.regime {
            RegimeChoice::Scenario(kind) => (kind.name(), scenario_phase_curve(kind, n, p, &cfg.grid_s, cfg.alpha, &mc)),
            _ => ("least_favorable", phase_curve(n, p, q, &cfg.grid_s, cfg.alpha, &mc)),
        };
        eprintln!("[{}/{}] {name} curve n={n} p={p} q={q}", c + 1, points.len());
        match result {
            Ok(curve) => {
                for (k, (s, est)) in curve.iter().enumerate() {
                    rows.push(power_row(name, n, p, q, *s, derive_seed(curve_seed, &[k as u64]), est));
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit = EXIT_RUNTIME;
                for (k, &s) in cfg.grid_s.iter().enumerate() {
                    rows.push(failed_row(name, n, p, q, s, derive_seed(curve_seed, &[k as u64]), cfg.trials));
                }
            }
        }
    }
    (rows, exit)
}
