//! End-to-end tests of the command-line interface: schemas, determinism and
//! exit codes.

use serde_json::{json, Value};
use std::path::Path;
use std::process::{Command, Output};

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_squintless"))
}

fn write(path: &Path, value: &Value) {
    std::fs::write(path, serde_json::to_string_pretty(value).unwrap()).unwrap();
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn synth_matches_library_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("scenario.json");
    write(
        &config,
        &json!({
            "n_rx": 3, "n_tx": 4, "n_freq": 2,
            "sources": [
                {"omega_r": 0.2, "omega_t": 0.7, "coeffs": [[0.5, 0.1], [-0.2, 0.4]]}
            ]
        }),
    );
    let out_path = dir.path().join("tensor.json");
    let out = run(&["synth", "--config", config.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let tensor: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(tensor["header"]["n_rx"], 3);
    assert_eq!(tensor["header"]["format_version"], 1);

    // entries match the library synthesis
    let sc = squintless::model::Scenario::new(
        3,
        4,
        2,
        vec![squintless::model::Source::new(
            0.2,
            0.7,
            vec![squintless::C64::new(0.5, 0.1), squintless::C64::new(-0.2, 0.4)],
        )],
    )
    .unwrap();
    let y = squintless::model::synthesize(&sc);
    for p in 0..2 {
        for i in 0..3 {
            for j in 0..4 {
                let want = y.slices[p][(i, j)];
                let got = &tensor["slices"][p][i][j];
                assert!((got[0].as_f64().unwrap() - want.re).abs() < 1e-12);
                assert!((got[1].as_f64().unwrap() - want.im).abs() < 1e-12);
            }
        }
    }

    // byte-identical on rerun
    let out2_path = dir.path().join("tensor2.json");
    let out2 = run(&["synth", "--config", config.to_str().unwrap(), "--out", out2_path.to_str().unwrap()]);
    assert_eq!(code(&out2), 0);
    assert_eq!(
        std::fs::read(&out_path).unwrap(),
        std::fs::read(&out2_path).unwrap()
    );
}

#[test]
fn synth_seeded_moduli_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("scenario.json");
    write(
        &config,
        &json!({
            "n_rx": 3, "n_tx": 3, "n_freq": 2,
            "sources": [
                {"omega_r": 0.1, "omega_t": 0.6, "coeff_moduli": [INV_SQRT2, INV_SQRT2]}
            ]
        }),
    );
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let c = dir.path().join("c.json");
    assert_eq!(code(&run(&["synth", "--config", config.to_str().unwrap(), "--out", a.to_str().unwrap(), "--seed", "5"])), 0);
    assert_eq!(code(&run(&["synth", "--config", config.to_str().unwrap(), "--out", b.to_str().unwrap(), "--seed", "5"])), 0);
    assert_eq!(code(&run(&["synth", "--config", config.to_str().unwrap(), "--out", c.to_str().unwrap(), "--seed", "6"])), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn synth_missing_coeffs_exits_2_naming_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    write(
        &config,
        &json!({
            "n_rx": 3, "n_tx": 3, "n_freq": 1,
            "sources": [{"omega_r": 0.1, "omega_t": 0.6}]
        }),
    );
    let out = run(&["synth", "--config", config.to_str().unwrap(), "--out", dir.path().join("t.json").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("coeffs"), "stderr: {err}");
}

#[test]
fn solve_recovers_desk_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("scenario.json");
    // flat per-frequency amplitude moduli: the regime the dilated program
    // recovers exactly
    write(
        &config,
        &json!({
            "n_rx": 5, "n_tx": 5, "n_freq": 2,
            "sources": [
                {"omega_r": 0.15, "omega_t": 0.70, "coeffs": [[0.45, 0.45], [-0.45, 0.45]]},
                {"omega_r": 0.60, "omega_t": 0.25, "coeffs": [[0.1, -0.55], [0.55, -0.1]]}
            ]
        }),
    );
    let tensor = dir.path().join("tensor.json");
    assert_eq!(code(&run(&["synth", "--config", config.to_str().unwrap(), "--out", tensor.to_str().unwrap()])), 0);

    let result = dir.path().join("result.json");
    let out = run(&[
        "solve",
        "--tensor",
        tensor.to_str().unwrap(),
        "--out",
        result.to_str().unwrap(),
        "--grid",
        "64",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let report: Value = serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    assert_eq!(report["converged"], true);
    let pairs = report["pairs"]["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 2);
    let wrap = |a: f64, b: f64| {
        let d = (a - b).rem_euclid(1.0);
        d.min(1.0 - d)
    };
    for (wr, wt) in [(0.15, 0.70), (0.60, 0.25)] {
        assert!(
            pairs.iter().any(|p| {
                wrap(p["omega_r"].as_f64().unwrap(), wr) < 5e-3
                    && wrap(p["omega_t"].as_f64().unwrap(), wt) < 5e-3
            }),
            "no recovered pair near ({wr}, {wt}): {pairs:?}"
        );
    }
    // heatmap emitted with the expected shape
    let heat = std::fs::read_to_string(result.with_extension("heatmap.csv")).unwrap();
    let rows: Vec<&str> = heat.lines().collect();
    assert_eq!(rows.len(), 64);
    assert_eq!(rows[0].split(',').count(), 64);
}

#[test]
fn solve_zero_tensor_yields_empty_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let tensor = dir.path().join("zero.json");
    let zeros = vec![vec![vec![[0.0, 0.0]; 4]; 4]; 2];
    write(
        &tensor,
        &json!({
            "header": {"n_rx": 4, "n_tx": 4, "n_freq": 2, "format_version": 1},
            "slices": zeros
        }),
    );
    let out = run(&["solve", "--tensor", tensor.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pairs"]["pairs"].as_array().unwrap().len(), 0);
}

#[test]
fn solve_corrupted_header_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let tensor = dir.path().join("bad.json");
    let zeros = vec![vec![vec![[0.0, 0.0]; 4]; 4]; 2];
    write(
        &tensor,
        &json!({
            "header": {"n_rx": 5, "n_tx": 4, "n_freq": 2, "format_version": 1},
            "slices": zeros
        }),
    );
    let out = run(&["solve", "--tensor", tensor.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    // max_iter exhaustion reports non-convergence through exit 3
    let good = dir.path().join("good.json");
    write(
        &good,
        &json!({
            "header": {"n_rx": 3, "n_tx": 3, "n_freq": 1, "format_version": 1},
            "slices": [[[[1.0, 0.0], [0.3, 0.1], [0.2, -0.4]],
                        [[0.5, 0.2], [1.0, 0.0], [0.1, 0.1]],
                        [[0.2, 0.4], [0.3, -0.1], [1.0, 0.0]]]]
        }),
    );
    let out = run(&["solve", "--tensor", good.to_str().unwrap(), "--max-iter", "3"]);
    assert_eq!(code(&out), 3, "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn certify_asymptotic_regime_passes() {
    // f_c = 512 arrays: the regime where all certificate clauses hold
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("scenario.json");
    write(
        &config,
        &json!({
            "n_rx": 1025, "n_tx": 1025, "n_freq": 2,
            "sources": [
                {"omega_r": 0.10, "omega_t": 0.20,
                 "coeffs": [[INV_SQRT2, 0.0], [0.0, INV_SQRT2]]},
                {"omega_r": 0.10, "omega_t": 0.205,
                 "coeffs": [[0.0, INV_SQRT2], [INV_SQRT2, 0.0]]}
            ]
        }),
    );
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "certify",
        "--config",
        config.to_str().unwrap(),
        "--grid",
        "128",
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    for key in [
        "support_ok",
        "far_grid_max",
        "near_hessian_ok",
        "bounds",
        "invertibility",
        "hypotheses",
    ] {
        assert!(report.get(key).is_some(), "missing report key {key}");
    }
    assert_eq!(report["support_ok"], true);
    assert!(report["far_grid_max"].as_f64().unwrap() < 1.0);
    assert_eq!(report["bounds"].as_array().unwrap().len(), 2);
}

#[test]
fn certify_below_separation_exits_4_naming_hypothesis() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("scenario.json");
    write(
        &config,
        &json!({
            "n_rx": 9, "n_tx": 9, "n_freq": 1,
            "sources": [
                {"omega_r": 0.10, "omega_t": 0.15, "coeffs": [[1.0, 0.0]]},
                {"omega_r": 0.11, "omega_t": 0.16, "coeffs": [[0.0, 1.0]]}
            ]
        }),
    );
    let out = run(&["certify", "--config", config.to_str().unwrap(), "--grid", "128"]);
    assert_eq!(code(&out), 4, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("separation"), "stderr: {err}");
}

#[test]
fn oracle_reports_tight_bracket_at_p1() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("scenario.json");
    write(
        &config,
        &json!({
            "n_rx": 9, "n_tx": 9, "n_freq": 1,
            "sources": [
                {"omega_r": 0.10, "omega_t": 0.15, "coeffs": [[0.8, 0.0]]},
                {"omega_r": 0.45, "omega_t": 0.60, "coeffs": [[0.0, 0.5]]}
            ]
        }),
    );
    let out = run(&["oracle", "--config", config.to_str().unwrap(), "--grid", "64"]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["dual_feasible"], true);
    let gap = report["gap"].as_f64().unwrap();
    let primal = report["primal"].as_f64().unwrap();
    assert!(gap >= -1e-8 && gap <= 1e-6 * primal, "gap {gap} primal {primal}");
}

#[test]
fn version_subcommand() {
    let out = run(&["version"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("squintless"));
    assert!(text.contains(env!("CARGO_PKG_VERSION")));
}
