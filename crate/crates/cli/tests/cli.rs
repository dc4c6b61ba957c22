use std::path::Path;
use std::process::{Command, Output};

use indepbound::minimax_power_upper;
use indepbound_cli::config::{Command as Sub, ExperimentConfig};
use indepbound_cli::output::fingerprint;
use indepbound_cli::{parse_config, ParseOutcome, EXIT_OK, EXIT_ORACLE, EXIT_VALIDATION};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_indepbound"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn lines(out: &Output) -> Vec<String> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}

#[test]
fn zero_signal_bound_row() {
    let out = bin(&["bound", "--grid-n", "30", "--grid-p", "4", "--grid-q", "6", "--grid-b", "0"]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let l = lines(&out);
    assert_eq!(l.len(), 3);
    assert!(l[1].starts_with("# seed=0 fingerprint="));
    assert_eq!(l[2], "30,4,6,0,0,0,0,0,0.05,true,true,true,");
}

#[test]
fn bound_rows_pass_through_library_values() {
    let out = bin(&["bound", "--grid-n", "100,400", "--grid-p", "20,100", "--grid-q", "20,100"]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let b = indepbound::select_b(1.0, 0.05, 0.35).unwrap();
    let mut rows = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(out.stdout.as_slice());
    let mut count = 0;
    for rec in rows.records() {
        let rec = rec.unwrap();
        let (n, p, q): (usize, usize, usize) = (rec[0].parse().unwrap(), rec[1].parse().unwrap(), rec[2].parse().unwrap());
        let r = minimax_power_upper(n, p, q, b, 0.05).unwrap();
        assert_eq!(rec[5].parse::<f64>().unwrap(), r.chi2_exact);
        assert_eq!(rec[8].parse::<f64>().unwrap(), r.power_upper);
        assert!(r.power_upper <= 0.35);
        count += 1;
    }
    assert_eq!(count, 8);
}

#[test]
fn bound_reports_row_errors_and_continues() {
    let out = bin(&["bound", "--grid-n", "10", "--grid-p", "50", "--grid-q", "50", "--grid-b", "3,0.1"]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let l = lines(&out);
    assert_eq!(l.len(), 4);
    assert!(l[2].contains("false,false,false,\"chi-square divergence is infinite"));
    assert!(l[3].ends_with("true,true,true,"));
}

#[test]
fn verify_schema_and_negative_control() {
    let ok = bin(&["verify", "--mc-trials", "20000"]);
    assert_eq!(ok.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&ok.stdout));
    let l = lines(&ok);
    assert_eq!(l[0], "name,closed_form,brute_force,abs_err,rel_err,pass");
    assert!(l[2..].iter().all(|r| r.ends_with(",true")));

    let bad = bin(&["verify", "--mc-trials", "20000", "--perturb-gamma"]);
    assert_eq!(bad.status.code(), Some(EXIT_ORACLE));
    assert!(lines(&bad)[2..].iter().any(|r| r.ends_with(",false")));
}

#[test]
fn validation_reports_every_violation() {
    let out = bin(&["power", "--alpha", "0", "--trials", "5", "--perms", "x", "--grid-n", "0", "--regime", "maybe"]);
    assert_eq!(out.status.code(), Some(EXIT_VALIDATION));
    assert!(out.stdout.is_empty());
    let err = String::from_utf8(out.stderr).unwrap();
    for key in ["alpha:", "trials:", "perms:", "grid-n:", "regime:"] {
        assert!(err.contains(key), "{key} missing in {err}");
    }
}

#[test]
fn phase_outside_positive_definite_region_is_a_validation_error() {
    let out = bin(&["phase", "--grid-n", "200", "--grid-p", "10", "--grid-q", "10", "--grid-s", "0,1,5,25,50"]);
    assert_eq!(out.status.code(), Some(EXIT_VALIDATION));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("signal 25") && err.contains("signal 50"), "{err}");
}

#[test]
fn unknown_flags_and_help() {
    assert_eq!(bin(&["bound", "--nope", "1"]).status.code(), Some(EXIT_VALIDATION));
    assert_eq!(bin(&["--help"]).status.code(), Some(EXIT_OK));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.cfg");
    std::fs::write(&path, "# sweep\nseed = 5\ngrid_n = 40\ngrid-b = 0.1\n").unwrap();
    let p = path.to_str().unwrap();
    let cfg = parse_config(["indepbound", "bound", "--config", p, "--seed", "6"]).unwrap();
    assert_eq!((cfg.seed, cfg.grid_n.clone(), cfg.grid_b.clone()), (6, vec![40], vec![0.1]));

    std::fs::write(&path, "seed = -1\nbogus = 2\n").unwrap();
    match parse_config(["indepbound", "bound", "--config", p]) {
        Err(ParseOutcome::Invalid(v)) => assert_eq!(v.len(), 2, "{v:?}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn fingerprint_tracks_output_affecting_settings() {
    let base = ExperimentConfig::defaults(Sub::Power);
    let mut other = base.clone();
    other.threads = Some(3);
    other.out = Some("x".into());
    assert_eq!(fingerprint(&base), fingerprint(&other));
    other.trials += 1;
    assert_ne!(fingerprint(&base), fingerprint(&other));
}

fn run_to(args: &[&str], threads: &str, out: &Path) -> Vec<u8> {
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--threads", threads, "--out", out.to_str().unwrap()]);
    let o = bin(&full);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(out).unwrap()
}

#[test]
fn power_output_is_independent_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "power", "--seed", "3", "--trials", "100", "--perms", "19", "--grid-n", "40", "--grid-p", "3", "--grid-q",
        "2", "--grid-b", "0.5",
    ];
    let one = run_to(&args, "1", &dir.path().join("a.csv"));
    let many = run_to(&args, "3", &dir.path().join("b.csv"));
    assert_eq!(one, many);
    let text = String::from_utf8(one).unwrap();
    let l: Vec<&str> = text.lines().collect();
    assert_eq!(l[0], "regime,n,p,q,s_or_b,trials,rejections,estimate,ci_low,ci_high,seed");
    assert!(l[2].starts_with("null,40,3,2,0,100,"));
    assert!(l[3].starts_with("least_favorable,40,3,2,0.5,100,"));
}

#[test]
fn scenario_power_rows() {
    let out = bin(&[
        "power", "--regime", "two_sample", "--trials", "100", "--perms", "19", "--grid-n", "40", "--grid-p", "3",
        "--grid-q", "1", "--grid-s", "0,4",
    ]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let l = lines(&out);
    assert_eq!(l.len(), 4);
    assert!(l[2].starts_with("two_sample,40,3,1,0,100,"));

    let bad = bin(&["power", "--regime", "regression", "--grid-s", "1", "--grid-q", "2"]);
    assert_eq!(bad.status.code(), Some(EXIT_VALIDATION));
}
