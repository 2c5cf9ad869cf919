//! End-to-end checks of the binary: artifact layout, manifest content,
//! byte-identical reruns, and the exit-code contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_snapsim"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should spawn")
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("snapsim-cli-{tag}-{}", std::process::id()));
    if dir.exists() {
        std::fs::remove_dir_all(&dir).unwrap();
    }
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn wigner_writes_artifacts_and_is_deterministic() {
    let out_a = tempdir("wigner-a");
    let out_b = tempdir("wigner-b");
    let args = |out: &Path| {
        vec![
            "wigner".to_string(),
            "--state".into(),
            "coherent:1.0".into(),
            "--half-width".into(),
            "2.0".into(),
            "--step".into(),
            "0.5".into(),
            "--out".into(),
            out.display().to_string(),
            "--label".into(),
            "probe".into(),
        ]
    };
    let first = bin().args(args(&out_a)).output().unwrap();
    assert!(
        first.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&first.stderr)
    );
    let second = bin().args(args(&out_b)).output().unwrap();
    assert!(second.status.success());

    let dir_a = out_a.join("wigner/probe");
    let manifest: serde_json::Value =
        serde_json::from_slice(&read(&dir_a.join("manifest.json"))).unwrap();
    assert_eq!(manifest["command"], "wigner");
    assert_eq!(manifest["label"], "probe");
    assert_eq!(manifest["dim"], 40);
    let integral = manifest["results"]["integral"].as_f64().unwrap();
    assert!((integral - 1.0).abs() < 0.05, "integral {integral}");
    for name in ["map.csv", "map.svg"] {
        assert!(dir_a.join(name).exists(), "{name} missing");
    }

    // Byte-identical rerun.
    let dir_b = out_b.join("wigner/probe");
    for name in ["manifest.json", "map.csv", "map.svg"] {
        assert_eq!(
            read(&dir_a.join(name)),
            read(&dir_b.join(name)),
            "{name} differs between reruns"
        );
    }

    // stdout is deterministic too, apart from the artifact path.
    assert_eq!(
        String::from_utf8_lossy(&first.stdout).lines().next(),
        String::from_utf8_lossy(&second.stdout).lines().next()
    );
}

#[test]
fn kerr_correct_reports_unit_fidelity() {
    let out = tempdir("kerr");
    let result = run(&[
        "kerr-correct",
        "--steps",
        "3",
        "--beta",
        "1.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let dir = out.join("kerr-correct/default");
    let manifest: serde_json::Value =
        serde_json::from_slice(&read(&dir.join("manifest.json"))).unwrap();
    assert!(manifest["results"]["final_fidelity"].as_f64().unwrap() > 1.0 - 1e-9);
    let csv = String::from_utf8(read(&dir.join("fidelities.csv"))).unwrap();
    assert_eq!(csv.lines().count(), 4, "header plus one line per step");
    assert_eq!(csv.lines().next(), Some("step,fidelity"));
}

#[test]
fn invalid_state_exits_with_validation_code() {
    let out = tempdir("bad-state");
    let result = run(&[
        "wigner",
        "--state",
        "fock:99",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(2));
    assert!(!out.join("wigner/default/manifest.json").exists());

    let result = run(&["snap-demo", "--target", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn drowned_signal_exits_with_numerical_code() {
    let out = tempdir("drowned");
    // Noise far above every curve's contrast: the sinusoid fits cannot
    // resolve a minimum and the run must fail as a numerical error.
    let result = run(&[
        "fit-hamiltonian",
        "--noise",
        "5.0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("error:"), "stderr: {stderr}");
}
