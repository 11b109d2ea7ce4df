use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_ssfinsler");

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_cfg(cmd: &str, cfg: &str, extra: &[&str]) -> Output {
    let path = data(cfg);
    let mut args = vec![cmd, path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).expect("report is JSON")
}

#[test]
fn sample_is_deterministic_and_matches_golden() {
    for name in ["euclidean", "funk", "randers_unit"] {
        let a = run_cfg("sample", &format!("{name}.json"), &[]);
        let b = run_cfg("sample", &format!("{name}.json"), &[]);
        assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{name} not reproducible");
        let golden = std::fs::read_to_string(data(&format!("golden/{name}.csv"))).unwrap();
        assert_eq!(stdout(&a), golden, "{name} drifted from its golden file");
    }
}

#[test]
fn sample_layout() {
    let o = run_cfg("sample", "funk.json", &[]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("r,s,phi,P,Q,Q_s,detg,sigma,f_r,S_over_u")
    );
    assert_eq!(lines.count(), 5 * 7);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let o = run_cfg(
        "sample",
        "euclidean.json",
        &["--out", path.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("r,s,phi"));
}

#[test]
fn euclidean_analysis_has_zero_s() {
    let report = json(&run_cfg("analyze", "euclidean.json", &[]));
    assert_eq!(report["verdict"], "pass");
    for p in report["details"]["points"].as_array().unwrap() {
        assert_eq!(p["S_over_u"].as_f64(), Some(0.0));
    }
}

#[test]
fn funk_analysis_has_constant_c() {
    let report = json(&run_cfg("analyze", "funk.json", &[]));
    for p in report["details"]["points"].as_array().unwrap() {
        let c = p["c"].as_f64().unwrap();
        assert!((c - 0.5).abs() < 1e-6, "{c}");
    }
    assert!(report["config_echo"]["metric"]["phi"].is_string());
}

#[test]
fn verdict_exit_codes() {
    let o = run_cfg("verify", "cubic.json", &["--check", "douglas"]);
    assert_eq!(o.status.code(), Some(1));
    let report = json(&o);
    assert_eq!(report["verdict"], "fail");
    assert!(report["residuals"]["max"].as_f64().unwrap() > 1e-3);

    for (cfg, check) in [
        ("funk.json", "isotropy"),
        ("randers_unit.json", "isotropy"),
        ("thm12.json", "thm12"),
        ("randers_ht.json", "thm12"),
        ("randers_bh.json", "thm11"),
        ("berwald.json", "berwald-family"),
        ("funk.json", "oracle"),
        ("randers_unit.json", "oracle"),
    ] {
        let o = run_cfg("verify", cfg, &["--check", check]);
        assert_eq!(o.status.code(), Some(0), "{cfg} {check}: {}", stderr(&o));
        assert_eq!(json(&o)["verdict"], "pass");
    }
}

#[test]
fn thm11_reports_both_residuals() {
    let report = json(&run_cfg("verify", "randers_bh.json", &["--check", "thm11"]));
    for row in report["per_radius"].as_array().unwrap() {
        assert!(row["res2"].as_f64().unwrap().abs() < 1e-8);
        assert!(row["printed_ode_residual"].as_f64().unwrap().abs() > 1e-2);
        assert!((row["c_system"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    }
}

#[test]
fn failure_exit_codes_name_the_place() {
    let o = run_cfg(
        "construct",
        "degenerate_bh.json",
        &["--family", "randers-bh"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("families::bh_solve_g"),
        "{}",
        stderr(&o)
    );

    let o = run_cfg("analyze", "long_beta.json", &[]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("at r="), "{}", stderr(&o));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n\": 2,\n \"grid\": {\"r_min\": }}").unwrap();
    let o = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let o = run(&[
        "verify",
        data("funk.json").to_str().unwrap(),
        "--check",
        "nonsense",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tolerance_override_flips_verdict() {
    let o = run_cfg(
        "verify",
        "funk.json",
        &["--check", "isotropy", "--tol", "1e-30"],
    );
    assert_eq!(o.status.code(), Some(1));
    let o = run_cfg("verify", "funk.json", &["--check", "isotropy", "--tol=-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_changes_oracle_samples_but_not_verdict() {
    let a = json(&run_cfg(
        "verify",
        "funk.json",
        &["--check", "oracle", "--seed", "1"],
    ));
    let b = json(&run_cfg(
        "verify",
        "funk.json",
        &["--check", "oracle", "--seed", "2"],
    ));
    let c = json(&run_cfg(
        "verify",
        "funk.json",
        &["--check", "oracle", "--seed", "1"],
    ));
    assert_ne!(a["per_radius"], b["per_radius"]);
    assert_eq!(a, c);
    assert_eq!(b["verdict"], "pass");
}

#[test]
fn construct_randers_ht_tabulates_inverse_square() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ht.json");
    let o = run_cfg(
        "construct",
        "randers_ht.json",
        &["--family", "randers-ht", "--out", out.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let spec: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let table = &spec["metric"]["h"]["table"];
    let rs = table["r"].as_array().unwrap();
    let hs = table["value"].as_array().unwrap();
    for (r, h) in rs.iter().zip(hs) {
        let (r, h) = (r.as_f64().unwrap(), h.as_f64().unwrap());
        assert!((h - 0.5 / (r * r)).abs() < 1e-9, "h({r}) = {h}");
    }
    let o = run(&["verify", out.to_str().unwrap(), "--check", "thm12"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn construct_trivial_berwald_is_inverse_radius() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bw.json");
    let o = run_cfg(
        "construct",
        "berwald_trivial.json",
        &["--family", "berwald", "--out", out.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = run(&["sample", out.to_str().unwrap()]);
    for line in stdout(&o).lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!((cols[2] - 1.0 / cols[0]).abs() < 1e-12 / cols[0]);
    }
}
