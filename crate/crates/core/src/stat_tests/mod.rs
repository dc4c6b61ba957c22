//! Permutation test on `‖Σ̂_XY‖_F²`, Monte Carlo level and power estimates,
//! and the regression and two-sample data generators.

mod permutation;
mod power;
mod scenario;

pub use permutation::{cross_cov_stat, permutation_test, PermutationTest, TestDecision};
pub use power::{
    estimate_avg_power, estimate_level, estimate_scenario_power, phase_curve, scenario_phase_curve,
    signal_to_b, MonteCarlo, PowerEstimate, Regime,
};
pub use scenario::{scenario_regression, scenario_two_sample, ScenarioKind, ScenarioSpec};
