use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn gradobs(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradobs"))
        .current_dir(dir)
        .env_remove("GRADOBS_OUTDIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn canned_config(dir: &TempDir, variant: &str, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let out = gradobs(dir.path(), &["canned", "example_4_5", "--variant", variant]);
    assert_eq!(code(&out), 0);
    let mut config: Value = serde_json::from_slice(&out.stdout).unwrap();
    config["observer"]["horizon"] = 2.0.into();
    config["observer"]["output_every"] = 100.into();
    edit(&mut config);
    let path = dir.path().join(format!("{variant}.json"));
    fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_strategic_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = canned_config(&dir, "strategic", |_| {});
    let out = gradobs(dir.path(), &["--outdir", "run", "simulate", arg(&config)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["strategic"]["verdict"], true);
    assert_eq!(report["decay"]["status"], "fitted");
    for name in ["report.json", "trajectory.csv", "decay.json"] {
        assert!(dir.path().join("run").join(name).exists(), "{name}");
    }
}

#[test]
fn non_strategic_exits_2_unless_forced() {
    let dir = tempfile::tempdir().unwrap();
    let config = canned_config(&dir, "non-strategic", |_| {});
    let out = gradobs(dir.path(), &["simulate", arg(&config)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not strategic"));
    assert!(dir.path().join("report.json").exists());
    assert!(!dir.path().join("trajectory.csv").exists());

    let forced = gradobs(dir.path(), &["simulate", "--force", arg(&config)]);
    assert_eq!(code(&forced), 0);
    assert!(dir.path().join("trajectory.csv").exists());

    assert_eq!(code(&gradobs(dir.path(), &["analyze", arg(&config)])), 0);
    assert_eq!(code(&gradobs(dir.path(), &["--require-strategic", "analyze", arg(&config)])), 2);
}

#[test]
fn unstable_time_step_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = canned_config(&dir, "strategic", |c| c["observer"]["dt"] = 0.5.into());
    let out = gradobs(dir.path(), &["simulate", arg(&config)]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("stability limit"));
}

#[test]
fn unwritable_outdir_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = canned_config(&dir, "strategic", |_| {});
    fs::write(dir.path().join("blocker"), "").unwrap();
    let out = gradobs(dir.path(), &["--outdir", "blocker/sub", "analyze", arg(&config)]);
    assert_eq!(code(&out), 3);
}

#[test]
fn malformed_configs_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = canned_config(&dir, "strategic", |c| c["observer"]["bogus"] = 1.into());
    let out = gradobs(dir.path(), &["analyze", arg(&unknown)]);
    assert_eq!(code(&out), 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bogus") && stderr.contains("observer"), "{stderr}");

    let outside = canned_config(&dir, "strategic", |c| c["sensors"][0]["b"][0] = 1.5.into());
    assert_eq!(code(&gradobs(dir.path(), &["analyze", arg(&outside)])), 1);

    let positive_mu = canned_config(&dir, "strategic", |c| c["observer"]["target_mu"] = 0.5.into());
    assert_eq!(code(&gradobs(dir.path(), &["simulate", arg(&positive_mu)])), 1);

    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(code(&gradobs(dir.path(), &["analyze", arg(&garbage)])), 1);
    assert_eq!(code(&gradobs(dir.path(), &["analyze", "missing.json"])), 1);
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&gradobs(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&gradobs(dir.path(), &["canned", "example_9_9"])), 1);
    assert_eq!(code(&gradobs(dir.path(), &["canned", "example_4_5", "--variant", "maybe"])), 1);
    assert_eq!(code(&gradobs(dir.path(), &["--help"])), 0);
}

#[test]
fn canned_presets_write_valid_configs() {
    let dir = tempfile::tempdir().unwrap();
    for name in [
        "example_4_5",
        "corollary_5_1",
        "corollary_5_2_one_side",
        "corollary_5_2_two_side",
        "corollary_5_3_internal",
        "corollary_5_3_filament",
        "corollary_5_3_boundary",
    ] {
        for (variant, expected) in [("strategic", true), ("non-strategic", false)] {
            let path = dir.path().join(format!("{name}-{variant}.json"));
            assert_eq!(code(&gradobs(dir.path(), &["canned", name, "--variant", variant, "--out", arg(&path)])), 0);
            let out = gradobs(dir.path(), &["--outdir", "a", "analyze", arg(&path)]);
            assert_eq!(code(&out), 0, "{name} {variant}");
            let report: Value = serde_json::from_slice(&out.stdout).unwrap();
            assert_eq!(report["strategic"]["verdict"], expected, "{name} {variant}");
        }
    }
}

#[test]
fn outputs_are_deterministic_and_honour_env_outdir() {
    let dir = tempfile::tempdir().unwrap();
    let config = canned_config(&dir, "strategic", |_| {});
    let run = |sub: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_gradobs"))
            .current_dir(dir.path())
            .env("GRADOBS_OUTDIR", sub)
            .args(["simulate", arg(&config)])
            .output()
            .unwrap();
        assert_eq!(code(&out), 0);
        let sweep = Command::new(env!("CARGO_BIN_EXE_gradobs"))
            .current_dir(dir.path())
            .env("GRADOBS_OUTDIR", sub)
            .args(["sweep", arg(&config), "--sensor", "0", "--from", "0.3", "--to", "0.7", "--steps", "21", "--random", "4"])
            .output()
            .unwrap();
        assert_eq!(code(&sweep), 0);
        ["report.json", "trajectory.csv", "decay.json", "sweep.csv"].map(|n| fs::read(dir.path().join(sub).join(n)).unwrap())
    };
    let a = run("first");
    let b = run("second");
    assert_eq!(a, b);
    let sweep = String::from_utf8(a[3].clone()).unwrap();
    assert_eq!(sweep.lines().count(), 1 + 25);
    assert!(sweep.lines().any(|l| l.starts_with("5.0000000000000000e-1,0,")));
}

#[test]
fn sweep_require_strategic_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = canned_config(&dir, "strategic", |_| {});
    let args = ["--require-strategic", "sweep", arg(&config), "--sensor", "0", "--from", "0.25", "--to", "0.75", "--steps", "3"];
    assert_eq!(code(&gradobs(dir.path(), &args)), 2);
    assert!(dir.path().join("sweep.csv").exists());
}
