//! Numerical toolkit for the minimax lower bound on linear independence
//! testing in high dimensions.
//!
//! The crate is organised around the least-favorable Gaussian ensemble
//! `Σ_uv = I + a(uv' + vu')`, where `u` and `v` are Rademacher sign vectors
//! over the `X` and `Y` coordinates:
//!
//! * [`structured_cov`] builds, inverts, factors and samples `Σ_uv`.
//! * [`divergence`] computes the exact chi-square divergence between the
//!   uniform mixture over `Σ_uv` and the null, the closed-form bound chain,
//!   and the resulting ceiling on the power of any level-α test.
//! * [`oracles`] holds brute-force validators that share no code with the
//!   closed forms they check.
//! * [`stat_tests`] implements the permutation test on `‖Σ̂_XY‖_F²`, Monte
//!   Carlo level/power estimation, and the regression and two-sample
//!   scenario generators.

pub mod config;
pub mod divergence;
pub mod error;
pub mod numeric;
pub mod oracles;
pub mod rng;
pub mod stat_tests;
pub mod structured_cov;

pub use config::ProblemConfig;
pub use divergence::{
    chi_square_closed_bound, chi_square_exact, gamma_eigs, hoeffding_tail_bound, mgf_validity,
    minimax_power_upper, select_b, DivergenceReport, GammaQuad, Validity,
};
pub use error::{Error, Result};
pub use oracles::{OracleReport, Tolerance};
pub use stat_tests::{
    cross_cov_stat, estimate_avg_power, estimate_level, estimate_scenario_power, permutation_test,
    phase_curve, scenario_phase_curve, scenario_regression, scenario_two_sample, signal_to_b,
    MonteCarlo, PermutationTest, PowerEstimate, Regime, ScenarioKind, ScenarioSpec, TestDecision,
};
pub use structured_cov::{
    amplitude, sample_dataset, sample_direction, Dataset, Direction, Hypothesis,
    LeastFavorableCov, Origin,
};
