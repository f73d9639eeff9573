//! End-to-end checks of the command-line binary: generate, solve, evaluate,
//! sweep, and simulate through real files in a temporary directory.

use std::path::Path;
use std::process::{Command, Output};

fn surfacenet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surfacenet"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn gen_solve_eval_pipeline_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = surfacenet(
        dir.path(),
        &["gen", "--nodes", "12", "--servers", "2", "--users", "5", "--seed", "3"],
    );
    assert_ok(&out);
    assert!(dir.path().join("topology.json").exists());
    assert!(dir.path().join("requests.json").exists());

    for model in ["surfacenet", "raw", "nosplit", "purify"] {
        let out = surfacenet(
            dir.path(),
            &["solve", "--model", model, "--out", &format!("{model}.json")],
        );
        let text = assert_ok(&out);
        assert!(text.contains("codes delivered"), "{text}");
    }

    let out = surfacenet(dir.path(), &["eval", "--schedule", "surfacenet.json"]);
    let text = assert_ok(&out);
    assert!(text.contains("throughput"), "{text}");
    assert!(dir.path().join("metrics.json").exists());
}

#[test]
fn sweep_writes_csv_with_expected_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = surfacenet(
        dir.path(),
        &[
            "sweep",
            "--scenarios",
            "2",
            "--regime",
            "high",
            "--models",
            "raw,purify2",
            "--seed",
            "11",
        ],
    );
    let text = assert_ok(&out);
    assert!(text.contains("mean throughput"), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario,regime,model,gamma_threshold,omega,throughput,avg_fidelity,lp_obj,int_obj,status,wall_ms"
    );
    assert_eq!(lines.count(), 4, "2 scenarios x 2 models");
}

#[test]
fn threshold_sweep_parses_colon_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = surfacenet(
        dir.path(),
        &[
            "threshold-sweep",
            "--grid",
            "0.6:0.8:0.1",
            "--scenarios",
            "1",
            "--regime",
            "low",
            "--models",
            "raw",
            "--seed",
            "5",
        ],
    );
    assert_ok(&out);
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4, "header plus three grid points");
    assert!(surfacenet(dir.path(), &["threshold-sweep", "--grid", "bogus"]).status.code()
        != Some(0));
}

#[test]
fn simulator_commands_print_their_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let out = surfacenet(
        dir.path(),
        &["sfc-sim", "--distance", "3", "--p", "0.02", "--trials", "400", "--seed", "1"],
    );
    let text = assert_ok(&out);
    assert!(text.contains("logical error rate"), "{text}");

    let out = surfacenet(
        dir.path(),
        &["calibrate-omega", "--distance", "3", "--fin", "0.97", "--trials", "400"],
    );
    let text = assert_ok(&out);
    assert!(text.starts_with("omega "), "{text}");
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = surfacenet(dir.path(), &["solve"]);
    assert!(!out.status.success(), "missing topology must fail");
    let out = surfacenet(dir.path(), &["sweep", "--scenarios", "0"]);
    assert!(!out.status.success(), "empty sweep must fail");
    let out = surfacenet(dir.path(), &["sweep", "--models", "warp"]);
    assert!(!out.status.success(), "unknown model must fail");
}
