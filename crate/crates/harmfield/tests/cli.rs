//! End-to-end tests of the command-line binary: exit codes, report shape,
//! and byte-level determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn spec_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join("specs")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harmfield"))
        .args(args)
        .env_remove("HARMFIELD_SEED")
        .output()
        .expect("binary runs")
}

fn spec_arg(name: &str) -> String {
    spec_dir().join(name).to_string_lossy().into_owned()
}

#[test]
fn verify_harmonic_killing_exits_zero() {
    let out = run(&["verify", "--spec", &spec_arg("h21_harmonic_killing.json")]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["command"], "verify");
    assert!(report["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .all(|v| v["pass"] == true));
}

#[test]
fn verify_round_sphere_killing_fails_with_exit_one() {
    let out = run(&["verify", "--spec", &spec_arg("s20_killing.json")]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let harmonicity = &report["verdicts"][0];
    assert_eq!(harmonicity["pass"], false);
    assert!(harmonicity["max_residual"].as_f64().unwrap() > 1e-3);
}

#[test]
fn malformed_spec_exits_two() {
    let dir = std::env::temp_dir().join("harmfield_cli_it");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.json");
    std::fs::write(&path, "{\"quadric\": {\"kind\": \"sphere\"}}").unwrap();
    let out = run(&["verify", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    // Missing spec file is an input error too.
    let out = run(&["verify", "--spec", "/nonexistent/nowhere.json"]);
    assert_eq!(out.status.code(), Some(2));
    // Unknown command.
    let out = run(&["bogus-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn params_prints_exact_rationals() {
    let out = run(&["params", "--spec", &spec_arg("h21_harmonic_cgf.json")]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let sets = report["parameter_sets"].as_array().unwrap();
    assert_eq!(sets.len(), 1);
    assert_eq!(sets[0]["p"]["num"], 3);
    assert_eq!(sets[0]["p"]["den"], 1);
    assert_eq!(sets[0]["q"]["num"], -1);
    assert_eq!(sets[0]["q"]["den"], 2);
}

#[test]
fn params_for_mu_one_cgf_on_s31() {
    let out = run(&["params", "--spec", &spec_arg("s31_cgf_mu1.json")]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let sets = report["parameter_sets"].as_array().unwrap();
    assert_eq!(sets.len(), 1);
    assert_eq!(sets[0]["p"]["num"], 4);
    assert_eq!(sets[0]["q"]["num"], -1);
    assert_eq!(sets[0]["q"]["den"], 1);
}

#[test]
fn reports_are_byte_identical_for_fixed_seed() {
    for args in [
        vec!["verify", "--spec", &spec_arg("h21_harmonic_killing.json")],
        vec!["energy", "--spec", &spec_arg("h21_harmonic_cgf.json")],
        vec!["catalog", "--samples", "50"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.stdout, b.stdout, "non-deterministic report for {args:?}");
    }
}

#[test]
fn seed_flag_overrides_spec_and_environment() {
    let base = run(&["verify", "--spec", &spec_arg("h21_harmonic_killing.json")]);
    let reseeded = run(&[
        "verify",
        "--spec",
        &spec_arg("h21_harmonic_killing.json"),
        "--seed",
        "7",
    ]);
    let a: serde_json::Value = serde_json::from_slice(&base.stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&reseeded.stdout).unwrap();
    assert_eq!(a["provenance"]["seed"], 42);
    assert_eq!(b["provenance"]["seed"], 7);

    let env_seeded = Command::new(env!("CARGO_BIN_EXE_harmfield"))
        .args(["verify", "--spec", &spec_arg("s20_killing.json")])
        .env("HARMFIELD_SEED", "1234")
        .output()
        .unwrap();
    let c: serde_json::Value = serde_json::from_slice(&env_seeded.stdout).unwrap();
    // The spec file pins its own seed, which wins over the environment.
    assert_eq!(c["provenance"]["seed"], 42);

    let mut no_seed_spec: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(spec_arg("s20_killing.json")).unwrap())
            .unwrap();
    no_seed_spec["sampling"] = serde_json::json!({"count": 60});
    let dir = std::env::temp_dir().join("harmfield_cli_it");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("no_seed.json");
    std::fs::write(&path, serde_json::to_string(&no_seed_spec).unwrap()).unwrap();
    let env_seeded = Command::new(env!("CARGO_BIN_EXE_harmfield"))
        .args(["verify", "--spec", path.to_str().unwrap()])
        .env("HARMFIELD_SEED", "1234")
        .output()
        .unwrap();
    let d: serde_json::Value = serde_json::from_slice(&env_seeded.stdout).unwrap();
    assert_eq!(d["provenance"]["seed"], 1234);
}

#[test]
fn twist_pipeline_reproduces_worked_example() {
    // cgf pole (0,0,1): twist+push lands on the index-1 sphere and stays
    // harmonic at (3, -1/2).
    let out = run(&[
        "twist",
        "--spec",
        &spec_arg("h21_harmonic_cgf.json"),
        "--target",
        "j-anti",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let verdicts = report["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 2);
    assert_eq!(verdicts[0]["pass"], true, "input field is harmonic");
    assert_eq!(
        verdicts[1]["pass"], true,
        "twisted push-forward is harmonic"
    );
    let transformed = &report["output"]["transformed"];
    assert_eq!(transformed["quadric"]["kind"], "sphere");
    assert_eq!(transformed["quadric"]["v"], 1);

    // Twist alone breaks harmonicity (before passes, after fails): exit 1.
    let out = run(&[
        "twist",
        "--spec",
        &spec_arg("h21_harmonic_cgf.json"),
        "--target",
        "j",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let verdicts = report["verdicts"].as_array().unwrap();
    assert_eq!(verdicts[0]["pass"], true);
    assert_eq!(verdicts[1]["pass"], false);
    assert!(verdicts[1]["max_residual"].as_f64().unwrap() > 1e-3);
}

#[test]
fn params_for_killing_and_higher_dimensional_cgf() {
    // Surface Killing field with lambda = eps: the unique pair (3, -1/2).
    let out = run(&["params", "--spec", &spec_arg("h21_harmonic_killing.json")]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let sets = report["parameter_sets"].as_array().unwrap();
    assert_eq!(sets.len(), 1);
    assert_eq!(sets[0]["p"]["num"], 3);
    assert_eq!(sets[0]["q"]["num"], -1);
    assert_eq!(sets[0]["q"]["den"], 2);

    // mu = -1 at n = 4: two exact pairs (5, -11/4) and (-1/2, 0).
    let out = run(&["params", "--spec", &spec_arg("s41_cgf_mu_neg1.json")]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let sets = report["parameter_sets"].as_array().unwrap();
    assert_eq!(sets.len(), 2);
    let rendered: Vec<(i64, i64, i64, i64)> = sets
        .iter()
        .map(|s| {
            (
                s["p"]["num"].as_i64().unwrap(),
                s["p"]["den"].as_i64().unwrap(),
                s["q"]["num"].as_i64().unwrap(),
                s["q"]["den"].as_i64().unwrap(),
            )
        })
        .collect();
    assert!(rendered.contains(&(5, 1, -11, 4)));
    assert!(rendered.contains(&(-1, 2, 0, 1)));
}

#[test]
fn anti_isometry_alone_breaks_harmonicity_via_cli() {
    // The negative-definite sphere's harmonic field pushes (under the
    // identity anti-isometry) to a non-harmonic field on the round sphere.
    let out = run(&[
        "twist",
        "--spec",
        &spec_arg("h22_harmonic_cgf.json"),
        "--target",
        "anti",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let verdicts = report["verdicts"].as_array().unwrap();
    assert_eq!(verdicts[0]["pass"], true, "source field is harmonic");
    assert_eq!(verdicts[1]["pass"], false, "pushed field is not");
    assert!(verdicts[1]["max_residual"].as_f64().unwrap() > 1e-3);
    let transformed = &report["output"]["transformed"];
    assert_eq!(transformed["quadric"]["kind"], "sphere");
    assert_eq!(transformed["quadric"]["v"], 0);
}

#[test]
fn fixed_points_and_normal_form_reports() {
    let out = run(&["fixed-points", "--spec", &spec_arg("h21_fixed_points.json")]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["output"]["category"], "two-fixed");
    let points = report["output"]["points"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    let p0: Vec<f64> = points[0]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((p0[0].abs() - 0.0).abs() < 1e-12 && (p0[2].abs() - 1.0).abs() < 1e-12);

    let out = run(&["normal-form", "--spec", &spec_arg("h21_fixed_points.json")]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["output"]["residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn first_variation_matches_analytic_value() {
    let out = run(&[
        "first-variation",
        "--spec",
        &spec_arg("h21_first_variation.json"),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rel = report["output"]["rel_error"].as_f64().unwrap();
    assert!(rel < 1e-3, "relative error {rel}");
}

#[test]
fn energy_of_zero_field_is_half_dimension() {
    let dir = std::env::temp_dir().join("harmfield_cli_it");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("zero_field.json");
    std::fs::write(
        &path,
        r#"{
  "quadric": {"kind": "hyperbolic", "n": 2, "v": 1},
  "field": {"type": "poly", "polys": [[], [], []]},
  "params": {"p": 2.0, "q": -1.0},
  "sampling": {"count": 50, "seed": 3}
}"#,
    )
    .unwrap();
    let out = run(&["energy", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let stats = &report["output"]["total_energy_density"];
    assert_eq!(stats["min"].as_f64().unwrap(), 1.0);
    assert_eq!(stats["max"].as_f64().unwrap(), 1.0);
}

#[test]
fn help_prints_usage_and_exits_zero() {
    for args in [vec!["help"], vec!["verify", "--help"]] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0));
        assert!(String::from_utf8_lossy(&out.stdout).contains("usage: harmfield"));
    }
    // No arguments at all is still an input error.
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn text_format_renders_pass_lines() {
    let out = run(&[
        "verify",
        "--spec",
        &spec_arg("h21_harmonic_killing.json"),
        "--format",
        "text",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PASS"));
    assert!(text.contains("command: verify"));
}
