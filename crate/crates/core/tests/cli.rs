use std::path::Path;
use std::process::{Command, Output};

use credit_pricer::cli::RunConfig;
use credit_pricer::closed_form::MarketParams;
use credit_pricer::credit::{survival_probability_direct, BondSpec};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_credit-pricer"));
    c.env_remove("CREDIT_PRICER_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, config: &RunConfig) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, config.to_json()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn parse_k(text: &str) -> f64 {
    text.lines()
        .find(|l| l.starts_with("K "))
        .and_then(|l| l.split('=').nth(1))
        .unwrap()
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn boundary_default() {
    let o = run(&["boundary"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!((parse_k(&stdout(&o)) - 199.109).abs() < 0.01);
}

#[test]
fn boundary_at_higher_redemption_matches_bisection() {
    // Independent route: bisection on the survival formula written in V.
    let market = MarketParams::new(0.04, 0.0, 0.5).unwrap();
    let bond = BondSpec::new(2.0, 0.0, 100.0, 0.7).unwrap();
    let target = (0.95 / (-0.04_f64).exp() - 0.7) / 0.3;
    let (mut lo, mut hi) = (100.0 + 1e-9, 1e4);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if survival_probability_direct(mid, 1.0, &bond, &market).unwrap() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);

    let dir = tempfile::tempdir().unwrap();
    let mut c = RunConfig::default();
    c.option.as_mut().unwrap().redemption = 0.95;
    let path = write_config(dir.path(), &c);
    let o = run(&["boundary", "--config", &path]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let k = parse_k(&stdout(&o));
    assert!((k - oracle).abs() < 1e-6 * oracle, "{k} vs {oracle}");
}

#[test]
fn redemption_below_bracket_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = RunConfig::default();
    c.option.as_mut().unwrap().redemption = 0.5;
    let path = write_config(dir.path(), &c);
    let o = run(&["boundary", "--config", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("outside the open interval"));
}

#[test]
fn price_puttable_default_row() {
    let o = run(&["price-puttable", "--v", "199", "--t", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("r = 0.04") && text.contains("E = 0.9"));
    let row: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split_whitespace()
        .map(|s| s.parse().unwrap())
        .collect();
    let frozen = [199.0, 0.0, 0.809183416751, 0.025236203473, 0.834419620224];
    for (got, want) in row.iter().zip(frozen) {
        assert!((got - want).abs() < 1e-11, "{row:?}");
    }
}

#[test]
fn below_barrier_exits_2() {
    let o = run(&["price-bond", "--v", "90"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("firm value below default barrier"));
}

#[test]
fn missing_option_section_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let c = RunConfig {
        option: None,
        ..RunConfig::default()
    };
    let path = write_config(dir.path(), &c);
    assert_eq!(
        run(&["price-option", "--config", &path]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["price-bond", "--config", &path]).status.code(),
        Some(0)
    );
}

#[test]
fn malformed_config_exits_2_and_missing_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"market\": 1}").unwrap();
    assert_eq!(
        run(&["price-bond", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let missing = dir.path().join("absent.json");
    assert_eq!(
        run(&["price-bond", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn undersized_grid_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = RunConfig::default();
    c.numerics.pde.n_space = 10;
    let path = write_config(dir.path(), &c);
    let o = run(&["verify", "--suite", "pde", "--config", &path]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL pde.grid"));
}

#[test]
fn verify_quadrature_suite_passes() {
    let o = run(&["verify", "--suite", "quadrature"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS quadrature.power_binary_sweep"));
    assert_eq!(run(&["verify", "--suite", "bogus"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let o = run(&[
        "curves",
        "--figure",
        "1",
        "--samples",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn echoed_config_round_trips() {
    let o = run(&["config", "--seed", "17", "--v", "150,250"]);
    assert_eq!(o.status.code(), Some(0));
    let back = RunConfig::from_json(&stdout(&o)).unwrap();
    let mut want = RunConfig::default();
    want.numerics.seed = 17;
    want.query.v = vec![150.0, 250.0];
    assert_eq!(back, want);

    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "curves",
        "--figure",
        "2",
        "--samples",
        "11",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("figure2.json")).unwrap())
            .unwrap();
    let echoed: RunConfig = serde_json::from_value(meta["config"].clone()).unwrap();
    let mut want = RunConfig::default();
    want.curves.samples = 11;
    assert_eq!(echoed, want);
}

#[test]
fn seed_precedence_flag_over_env() {
    let echo = |env: Option<&str>, flag: Option<&str>| {
        let mut c = bin();
        c.arg("config");
        if let Some(e) = env {
            c.env("CREDIT_PRICER_SEED", e);
        }
        if let Some(f) = flag {
            c.args(["--seed", f]);
        }
        let o = c.output().unwrap();
        RunConfig::from_json(&stdout(&o)).unwrap().numerics.seed
    };
    assert_eq!(echo(None, None), 20_240_601);
    assert_eq!(echo(Some("5"), None), 5);
    assert_eq!(echo(Some("5"), Some("9")), 9);
    let mut c = bin();
    c.arg("config").env("CREDIT_PRICER_SEED", "minus one");
    assert_eq!(c.output().unwrap().status.code(), Some(2));
}

#[test]
fn curves_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = run(&[
            "curves",
            "--samples",
            "31",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for n in 1..=5 {
        let name = format!("figure{n}.csv");
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name}");
        assert_eq!(String::from_utf8(x).unwrap().lines().count(), 32);
    }
}
