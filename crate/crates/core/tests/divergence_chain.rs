use indepbound::oracles::{enumerate_chi_square, enumerate_uv_tail, run_suite, SuiteOptions};
use indepbound::{
    chi_square_closed_bound, chi_square_exact, hoeffding_tail_bound, minimax_power_upper, select_b, Error,
};
use proptest::prelude::*;

#[test]
fn selected_b_keeps_power_below_beta() {
    let b = select_b(1.0, 0.05, 0.35).unwrap();
    for (n, p, q) in [(100, 20, 20), (400, 100, 100), (50, 1, 49), (1000, 300, 700)] {
        let r = minimax_power_upper(n, p, q, b, 0.05).unwrap();
        assert!(r.validity.all());
        assert!(r.chi2_exact <= r.chi2_closed_bound);
        assert!(r.power_upper <= 0.35, "{r:?}");
    }
}

#[test]
fn divergence_is_infinite_outside_positive_definite_region() {
    let err = chi_square_exact(10, 50, 50, 3.0).unwrap_err();
    assert!(matches!(err, Error::DivergenceInfinite(_)));
}

#[test]
fn hoeffding_bound_dominates_exact_tail() {
    for (p, q) in [(4, 4), (6, 9), (12, 12)] {
        for mu in [1.5, 3.0, 10.0] {
            let b = 0.5;
            let threshold = indepbound::divergence::hoeffding_threshold(p, q, b, mu);
            let exact = enumerate_uv_tail(p, q, threshold).unwrap();
            assert!(exact <= hoeffding_tail_bound(p, q, b, mu).unwrap());
        }
    }
}

#[test]
fn default_oracle_suite_passes() {
    let reports = run_suite(&SuiteOptions {
        mc_trials: 50_000,
        ..SuiteOptions::default()
    });
    let failed: Vec<_> = reports.iter().filter(|r| !r.pass).collect();
    assert!(failed.is_empty(), "{failed:?}");
}

proptest! {
    #[test]
    fn exact_matches_enumeration(n in 1usize..30, p in 1usize..5, q in 1usize..5, frac in 0.0f64..0.9) {
        // b chosen so that a²pq = frac stays inside the positive-definite region.
        let b = (2.0 * n as f64 * frac / ((p * q) as f64).sqrt()).sqrt().min(0.5);
        let exact = chi_square_exact(n, p, q, b).unwrap();
        let brute = enumerate_chi_square(n, p, q, b).unwrap();
        prop_assert!((exact - brute).abs() <= 1e-11 * brute.max(1e-300));
    }

    #[test]
    fn closed_bound_dominates_on_aspect_grid(n in 2usize..2000, p in 1usize..60, q in 1usize..60) {
        prop_assume!((p + q) as f64 <= n as f64);
        let b = select_b(1.0, 0.05, 0.35).unwrap();
        let exact = chi_square_exact(n, p, q, b).unwrap();
        prop_assert!(exact <= chi_square_closed_bound(b).unwrap());
    }
}
