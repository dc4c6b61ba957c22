use std::fmt;

use rayon::prelude::*;

use super::permutation::PermutationTest;
use super::scenario::{ScenarioKind, ScenarioSpec};
use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::numeric::{wilson_interval, Z95};
use crate::rng::{derive_seed, stream, StreamRng};
use crate::structured_cov::{sample_dataset, sample_direction, Dataset, Hypothesis, LeastFavorableCov};

/// Monte Carlo budget shared by the level and power estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub trials: usize,
    pub permutations: usize,
    pub seed: u64,
    pub centered: bool,
}

impl MonteCarlo {
    pub const MIN_TRIALS: usize = 100;

    pub fn new(trials: usize, permutations: usize, seed: u64) -> Self {
        Self {
            trials,
            permutations,
            seed,
            centered: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < Self::MIN_TRIALS {
            return Err(Error::invalid(
                "trials",
                format!("{} < {}", self.trials, Self::MIN_TRIALS),
            ));
        }
        if self.permutations < 19 {
            return Err(Error::invalid("permutations", format!("{} < 19", self.permutations)));
        }
        Ok(())
    }

    fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

impl Default for MonteCarlo {
    fn default() -> Self {
        Self::new(1000, PermutationTest::DEFAULT_PERMUTATIONS, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    Null,
    LeastFavorable { b: f64 },
    Scenario { kind: ScenarioKind, signal: f64 },
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::Null => f.write_str("null"),
            Regime::LeastFavorable { .. } => f.write_str("least_favorable"),
            Regime::Scenario { kind, .. } => f.write_str(kind.name()),
        }
    }
}

/// Rejection frequency with a 95% Wilson interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerEstimate {
    pub regime: Regime,
    pub trials: usize,
    pub rejections: usize,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl PowerEstimate {
    pub fn from_counts(regime: Regime, trials: usize, rejections: usize) -> Self {
        let (ci_low, ci_high) = wilson_interval(rejections as u64, trials as u64, Z95);
        Self {
            regime,
            trials,
            rejections,
            estimate: rejections as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }

    /// Binomial standard error of the estimate.
    pub fn se(&self) -> f64 {
        (self.estimate * (1.0 - self.estimate) / self.trials as f64).sqrt()
    }

    pub fn wilson(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.rejections as u64, self.trials as u64, z)
    }
}

/// Runs `trials` independent tests, trial `t` drawing from stream `(seed, t)`.
fn count_rejections<F>(mc: &MonteCarlo, alpha: f64, generate: F) -> Result<usize>
where
    F: Fn(&mut StreamRng) -> Result<Dataset> + Sync,
{
    mc.validate()?;
    let test = PermutationTest::new(mc.permutations, alpha)?.centered(mc.centered);
    let outcomes = (0..mc.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(mc.seed, &[t as u64]);
            let ds = generate(&mut rng)?;
            Ok(test.run(&ds, &mut rng)?.reject)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(outcomes.into_iter().filter(|&r| r).count())
}

/// Rejection rate on fresh null datasets (`Σ = I`).
pub fn estimate_level(cfg: &ProblemConfig, mc: &MonteCarlo) -> Result<PowerEstimate> {
    cfg.validate()?;
    let null = Hypothesis::Null { p: cfg.p, q: cfg.q };
    let rejections = count_rejections(mc, cfg.alpha, |rng| sample_dataset(&null, cfg.n, rng))?;
    Ok(PowerEstimate::from_counts(Regime::Null, mc.trials, rejections))
}

/// Power averaged over the sign prior: each trial draws a fresh `(u, v)`.
pub fn estimate_avg_power(cfg: &ProblemConfig, mc: &MonteCarlo) -> Result<PowerEstimate> {
    cfg.validate()?;
    // Surface a positive-definiteness violation before any trial runs.
    LeastFavorableCov::new(sample_direction(cfg.p, cfg.q, &mut stream(0, &[])), cfg.amplitude()?)?;
    let rejections = count_rejections(mc, cfg.alpha, |rng| {
        let direction = sample_direction(cfg.p, cfg.q, rng);
        let lf = LeastFavorableCov::from_signal(direction, cfg.n, cfg.b)?;
        sample_dataset(&Hypothesis::Alternative(lf), cfg.n, rng)
    })?;
    Ok(PowerEstimate::from_counts(
        Regime::LeastFavorable { b: cfg.b },
        mc.trials,
        rejections,
    ))
}

/// `b = √(2s)` so that `n‖Σ_XY‖_F² / √(pq) = s`.
pub fn signal_to_b(s: f64) -> f64 {
    (2.0 * s).sqrt()
}

/// Average power of the least-favorable family along the signal axis
/// `s = n‖Σ_XY‖_F² / √(pq)`. Point `k` uses seed `derive(seed, k)`.
pub fn phase_curve(
    n: usize,
    p: usize,
    q: usize,
    signals: &[f64],
    alpha: f64,
    mc: &MonteCarlo,
) -> Result<Vec<(f64, PowerEstimate)>> {
    let root_pq = (p as f64 * q as f64).sqrt();
    for &s in signals {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::invalid("signal", format!("{s} is not a nonnegative real")));
        }
        let load = s * root_pq / n as f64;
        if load >= 1.0 {
            return Err(Error::NotPositiveDefinite(load));
        }
    }
    signals
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            // β only bounds the target power; any value above α is admissible here.
            let cfg = ProblemConfig {
                n,
                p,
                q,
                alpha,
                beta: (alpha + 1.0) / 2.0,
                kappa: None,
                b: signal_to_b(s),
            };
            let est = estimate_avg_power(&cfg, &mc.with_seed(derive_seed(mc.seed, &[k as u64])))?;
            Ok((s, est))
        })
        .collect()
}

pub fn estimate_scenario_power(
    spec: &ScenarioSpec,
    n: usize,
    alpha: f64,
    mc: &MonteCarlo,
) -> Result<PowerEstimate> {
    spec.validate()?;
    let rejections = count_rejections(mc, alpha, |rng| spec.sample(n, rng))?;
    let norm2: f64 = spec.implied_cross_cov().iter().map(|c| c * c).sum();
    let signal = n as f64 * norm2 / (spec.p() as f64).sqrt();
    Ok(PowerEstimate::from_counts(
        Regime::Scenario {
            kind: spec.kind(),
            signal,
        },
        mc.trials,
        rejections,
    ))
}

/// Scenario analogue of [`phase_curve`] with `q = 1`.
pub fn scenario_phase_curve(
    kind: ScenarioKind,
    n: usize,
    p: usize,
    signals: &[f64],
    alpha: f64,
    mc: &MonteCarlo,
) -> Result<Vec<(f64, PowerEstimate)>> {
    signals
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::invalid("signal", format!("{s} is not a nonnegative real")));
            }
            let spec = ScenarioSpec::at_signal(kind, n, p, s);
            let est = estimate_scenario_power(&spec, n, alpha, &mc.with_seed(derive_seed(mc.seed, &[k as u64])))?;
            Ok((s, est))
        })
        .collect()
}
