use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_inpaint-lab"));
    c.env_remove("INPAINT_SEED").env_remove("INPAINT_OUTDIR");
    c
}

fn run_in(out: &Path, args: &[&str]) -> Output {
    bin().arg("--outdir").arg(out).arg("--verbosity").arg("warn").args(args).output().unwrap()
}

/// Runs a command that must succeed and returns its run directory.
fn ok(out: &Path, args: &[&str]) -> PathBuf {
    let o = run_in(out, args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    PathBuf::from(String::from_utf8(o.stdout).unwrap().trim())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const TINY_DATA: &[&str] = &[
    "synth-data",
    "--count",
    "40",
    "--resolution",
    "16",
    "--identities",
    "4",
    "--sequences-per-identity",
    "1",
    "--sequence-length",
    "4",
];

#[test]
fn help_and_version_exit_zero() {
    for flag in ["--help", "--version"] {
        let o = bin().arg(flag).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{flag}");
        assert!(!o.stdout.is_empty());
    }
    let o = bin().args(["ablate", "--help"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("--mu"));
}

#[test]
fn usage_errors_exit_two_and_write_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("runs");
    for args in [
        vec!["synth-data", "--no-such-flag"],
        vec!["synth-data", "--count", "many"],
        vec!["frobnicate"],
        vec!["--jobs", "0", "synth-data"],
        vec!["inpaint", "--gan", "g", "--image", "x.png", "--init", "lstm"],
    ] {
        let o = run_in(&out, &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!out.exists(), "{args:?} created {}", out.display());
    }
}

#[test]
fn runtime_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(tmp.path(), &["train-gan", "--data", p(&tmp.path().join("missing"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn synth_data_writes_run_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let run = ok(tmp.path(), TINY_DATA);
    assert!(run.starts_with(tmp.path().join("synth-data")));
    for f in ["resolved-config.json", "logs.txt", "preview.png", "data/manifest.json"] {
        assert!(run.join(f).is_file(), "missing {f}");
    }
    let cfg = read_json(&run.join("resolved-config.json"));
    assert_eq!(cfg["command"], "synth-data");
    assert_eq!(cfg["args"]["count"], 40);
    assert_eq!(cfg["args"]["seed"], 0);
    let m = read_json(&run.join("data/manifest.json"));
    // 40 stills plus 4 sequences of 4 frames.
    assert_eq!(m["items"].as_array().unwrap().len(), 56);
}

#[test]
fn environment_overrides_defaults_and_flags_override_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin()
        .env("INPAINT_SEED", "7")
        .env("INPAINT_SYNTH_DATA_COUNT", "24")
        .arg("--outdir")
        .arg(tmp.path())
        .args(&TINY_DATA[..1])
        .args(["--resolution", "16", "--identities", "4", "--count", "20"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let run = PathBuf::from(String::from_utf8(o.stdout).unwrap().trim());
    let cfg = read_json(&run.join("resolved-config.json"));
    assert_eq!(cfg["args"]["seed"], 7);
    assert_eq!(cfg["args"]["count"], 20);
}

#[test]
fn resolved_config_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let first = ok(&tmp.path().join("a"), &[&["--seed", "3"], TINY_DATA].concat());
    let cfg = first.join("resolved-config.json");
    let o = bin().args(["--config", p(&cfg), "--outdir", p(&tmp.path().join("b"))]).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let second = PathBuf::from(String::from_utf8(o.stdout).unwrap().trim());
    assert!(second.starts_with(tmp.path().join("b")));
    let items = |run: &Path| read_json(&run.join("data/manifest.json"))["items"].clone();
    assert_eq!(items(&first), items(&second));
    for f in ["faces/id_0000/face_000000.png", "sequences/id_0001/seq_00/000003.png"] {
        assert_eq!(fs::read(first.join("data").join(f)).unwrap(), fs::read(second.join("data").join(f)).unwrap());
    }
    // A config written for one command cannot drive another.
    let o = bin().args(["--config", p(&cfg), "train-gan"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tiny_pipeline_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();
    let data = ok(out, TINY_DATA).join("data");
    let d = p(&data);
    let gan = ok(out, &["train-gan", "--data", d, "--latent-dim", "8", "--base-width", "2", "--steps", "4", "--batch-size", "4", "--bn-recalibration", "8"]).join("checkpoint");
    assert!(gan.join("manifest.json").is_file());
    let train = ["--steps", "3", "--batch-size", "4"];
    let init = ok(out, &[&["train-init", "--data", d, "--gan", p(&gan)], &train[..]].concat()).join("checkpoint");
    let seq = ok(
        out,
        &[&["train-seq-init", "--data", d, "--gan", p(&gan), "--warm-start", p(&init), "--windows", "sequences"], &train[..]].concat(),
    )
    .join("checkpoint");

    let face = data.join("faces/id_0000/face_000000.png");
    let run = ok(out, &["inpaint", "--gan", p(&gan), "--image", p(&face), "--init", "learned", "--initializer", p(&init), "--max-iters", "5"]);
    for f in ["result/inpainted.png", "result/mask.png", "result/trace.csv", "result/z_hat.json", "triplet.png", "trace.png"] {
        assert!(run.join(f).is_file(), "inpaint missing {f}");
    }
    let trace = fs::read_to_string(run.join("result/trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 6);

    let run = ok(out, &["inpaint-seq", "--gan", p(&gan), "--frames", p(&data.join("sequences/id_0002/seq_00")), "--init", "lstm", "--seq-init", p(&seq), "--window", "3", "--max-iters", "3"]);
    assert_eq!(fs::read_to_string(run.join("windows.csv")).unwrap().lines().count(), 1 + 2);

    let run = ok(out, &["eval", "--gan", p(&gan), "--initializer", p(&init), "--data", d, "--count", "3", "--random-iters", "4", "--grid-items", "2"]);
    for f in ["summary.json", "per_item.csv", "convergence.csv", "grid.png", "traces.png"] {
        assert!(run.join(f).is_file(), "eval missing {f}");
    }

    let ablate = |dir: &str| {
        ok(&out.join(dir), &["ablate", "--gan", p(&gan), "--seq-init", p(&seq), "--data", d, "--count", "3", "--max-iters", "3", "--embed-steps", "3", "--grid-items", "1"])
    };
    let a = ablate("x");
    for f in ["ablation.csv", "per_item.csv", "aggregates.csv", "tests.csv", "smoothness_curve.csv", "grid.png", "embedder/manifest.json"] {
        assert!(a.join(f).is_file(), "ablate missing {f}");
    }
    let table = fs::read_to_string(a.join("ablation.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 3);
    let b = ablate("y");
    for f in ["ablation.csv", "per_item.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs between seeded runs");
    }

    let run = ok(out, &["plot", "--trace", p(&a.join("smoothness_curve.csv")), "--column", "median_l_sm"]);
    assert!(run.join("plot.png").is_file());
}
