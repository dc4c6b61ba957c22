use indepbound::rng::stream;
use indepbound::{
    estimate_avg_power, estimate_level, phase_curve, sample_dataset, sample_direction, Hypothesis,
    LeastFavorableCov, MonteCarlo, PermutationTest, ProblemConfig,
};

#[test]
fn level_is_near_alpha() {
    let cfg = ProblemConfig::new(40, 4, 3, 0.1, 0.5, 0.0).unwrap();
    let est = estimate_level(&cfg, &MonteCarlo::new(600, 99, 1)).unwrap();
    let (lo, hi) = est.wilson(indepbound::numeric::Z99);
    assert!(lo <= 0.1 && 0.1 <= hi, "{est:?}");
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let cfg = ProblemConfig::new(60, 5, 5, 0.05, 0.35, 1.5).unwrap();
    let mc = MonteCarlo::new(200, 49, 42);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let multi = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = single.install(|| estimate_avg_power(&cfg, &mc)).unwrap();
    let b = multi.install(|| estimate_avg_power(&cfg, &mc)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn strong_signal_is_detected() {
    let curve = phase_curve(100, 5, 5, &[0.0, 10.0], 0.05, &MonteCarlo::new(200, 99, 7)).unwrap();
    assert!(curve[1].1.estimate > 0.9);
    assert!(curve[1].1.estimate > curve[0].1.estimate);
}

#[test]
fn single_test_rejects_a_strong_alternative() {
    let mut rng = stream(3, &[0]);
    let lf = LeastFavorableCov::new(sample_direction(6, 6, &mut rng), 0.15).unwrap();
    let ds = sample_dataset(&Hypothesis::Alternative(lf), 400, &mut rng).unwrap();
    let d = PermutationTest::new(199, 0.05).unwrap().run(&ds, &mut rng).unwrap();
    assert!(d.reject && d.p_value <= 0.01, "{d:?}");
}
