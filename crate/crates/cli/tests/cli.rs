use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn predvar(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_predvar"))
        .args(args)
        .current_dir(dir)
        .env_remove("PREDVAR_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr_error(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("an error line");
    serde_json::from_str::<Value>(line).unwrap()["error"].clone()
}

/// The echoed output directory is the only field that differs between runs
/// written to different places.
fn strip_output_dir(bytes: &[u8]) -> Value {
    let mut v: Value = serde_json::from_slice(bytes).unwrap();
    v["provenance"]["config"]
        .as_object_mut()
        .unwrap()
        .remove("output_dir");
    v
}

const GENERATOR: &str = "\
n_models = 20
n_cases = 400
n_findings = 2
finding_names = [\"Effusion\", \"Hernia\"]
prevalence = 0.25
separation = [1.0, 2.0]
model_noise_sd = 0.5
case_noise_sd = 1.0
";

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("gen.toml"), GENERATOR).unwrap();
    dir
}

fn simulate(dir: &Path) {
    let out = predvar(
        &[
            "simulate",
            "--generator",
            "gen.toml",
            "--seed",
            "5",
            "-o",
            "data",
        ],
        dir,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn simulate_writes_long_format_files() {
    let dir = workspace();
    simulate(dir.path());
    let preds = fs::read_to_string(dir.path().join("data/predictions.csv")).unwrap();
    let labels = fs::read_to_string(dir.path().join("data/labels.csv")).unwrap();
    assert!(preds.starts_with("model_id,case_id,finding,probability\n"));
    assert!(labels.starts_with("case_id,finding,label\n"));
    assert_eq!(preds.lines().count(), 1 + 20 * 400 * 2);
    assert_eq!(labels.lines().count(), 1 + 400 * 2);
    assert!(!preds.contains('\r'));
}

#[test]
fn analysis_subcommands_read_simulated_files() {
    let dir = workspace();
    simulate(dir.path());
    let d = dir.path();
    let io = [
        "--predictions",
        "data/predictions.csv",
        "--labels",
        "data/labels.csv",
    ];

    let out = predvar(&["metrics", io[0], io[1], "--records", "records.csv"], d);
    assert!(out.status.success());
    let m = stdout_json(&out);
    assert_eq!(m["variability"]["overall"]["n_records"], 800);
    assert!(
        fs::read_to_string(d.join("records.csv"))
            .unwrap()
            .lines()
            .count()
            == 801
    );

    let out = predvar(&["ensemble", io[0], io[1], "--group-size", "5"], d);
    let e = stdout_json(&out);
    assert_eq!(e["n_groups"], 4);
    assert!(e["cv_ratio"].as_f64().unwrap() < 0.7);

    let out = predvar(&[&["auc"], &io[..], &["--method", "delong"]].concat(), d);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("finding,model_id,auc,ci_low,ci_high,level,method\n"));
    assert_eq!(text.lines().count(), 1 + 40);

    let out = predvar(&[&["auc"], &io[..], &["--method", "empirical"]].concat(), d);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);

    let out = predvar(
        &[
            &["coverage"],
            &io[..],
            &[
                "--replicates",
                "200",
                "--limited-normals",
                "50",
                "--limited-per-finding",
                "20",
            ],
        ]
        .concat(),
        d,
    );
    let c = stdout_json(&out);
    assert_eq!(c["delong"]["total"], 40);
    assert_eq!(c["bootstrap"]["total"], 40);

    let out = predvar(
        &[
            "sample-limited",
            "--labels",
            "data/labels.csv",
            "--normals",
            "50",
            "--per-finding",
            "10",
        ],
        d,
    );
    let s = stdout_json(&out);
    assert_eq!(
        s["case_ids"].as_array().unwrap().len(),
        s["n_cases"].as_u64().unwrap() as usize
    );
}

#[test]
fn report_is_deterministic_and_complete() {
    let dir = workspace();
    let d = dir.path();
    let run = |out: &str| {
        let o = predvar(
            &[
                "report",
                "--generator",
                "gen.toml",
                "--seed",
                "9",
                "--replicates",
                "200",
                "--group-size",
                "5",
                "-o",
                out,
            ],
            d,
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    run("r1");
    run("r2");
    let a = fs::read(d.join("r1/summary.json")).unwrap();
    let b = fs::read(d.join("r2/summary.json")).unwrap();
    assert_eq!(strip_output_dir(&a), strip_output_dir(&b));

    run("r1");
    assert_eq!(fs::read(d.join("r1/summary.json")).unwrap(), a);

    let summary: Value = serde_json::from_slice(&a).unwrap();
    for key in ["provenance", "variability", "ensemble", "auc", "coverage"] {
        assert!(summary.get(key).is_some(), "{key}");
    }
    assert_eq!(summary["provenance"]["seed"], 9);
    let hist = fs::read_to_string(d.join("r1/hist_ln_ratio_all.csv")).unwrap();
    assert!(hist.starts_with("bin_low,bin_high,count\n"));
    assert!(d.join("r1/hist_pooled_Hernia.csv").exists());
}

#[test]
fn flags_override_config_file() {
    let dir = workspace();
    let d = dir.path();
    let cfg =
        format!("seed = 1\nbootstrap_replicates = 0\ngroup_size = 5\n\n[generator]\n{GENERATOR}");
    fs::write(d.join("run.toml"), cfg).unwrap();
    let out = predvar(
        &["report", "--config", "run.toml", "--seed", "2", "-o", "out"],
        d,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: Value =
        serde_json::from_slice(&fs::read(d.join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["provenance"]["seed"], 2);
    assert_eq!(summary["ensemble"]["group_size"], 5);
    assert!(summary["coverage"]["bootstrap"].is_null());

    // the summary itself is a valid config
    let out = predvar(
        &["report", "--config", "out/summary.json", "-o", "again"],
        d,
    );
    assert!(out.status.success());
    assert_eq!(
        strip_output_dir(&fs::read(d.join("out/summary.json")).unwrap()),
        strip_output_dir(&fs::read(d.join("again/summary.json")).unwrap())
    );
}

#[test]
fn usage_errors_exit_1() {
    let dir = workspace();
    let out = predvar(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_error(&out)["kind"], "usage");

    let out = predvar(&["report", "-o", "x"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_error(&out)["code"], "invalid_config");

    let out = Command::new(env!("CARGO_BIN_EXE_predvar"))
        .args(["metrics", "--generator", "gen.toml"])
        .current_dir(dir.path())
        .env("PREDVAR_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    assert_eq!(predvar(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn data_errors_exit_2() {
    let dir = workspace();
    let d = dir.path();
    fs::write(
        d.join("p.csv"),
        "model_id,case_id,finding,probability\nm1,c1,a,0.3\nm2,c1,a,1.0\n",
    )
    .unwrap();
    let out = predvar(&["metrics", "--predictions", "p.csv"], d);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_error(&out);
    assert_eq!(err["kind"], "data");
    assert_eq!(err["code"], "out_of_range_probability");
    assert_eq!(String::from_utf8_lossy(&out.stderr).lines().count(), 1);

    let out = predvar(&["metrics", "--predictions", "missing.csv"], d);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_errors_exit_3() {
    // one positive in twenty cases: about a third of resamples lack a positive
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut preds = String::from("model_id,case_id,finding,probability\n");
    let mut labels = String::from("case_id,finding,label\n");
    for c in 0..20 {
        for m in 0..2 {
            preds.push_str(&format!(
                "m{m},c{c},a,{}\n",
                0.02 + 0.04 * c as f64 + 0.001 * m as f64
            ));
        }
        labels.push_str(&format!("c{c},a,{}\n", (c == 19) as u8));
    }
    fs::write(d.join("p.csv"), preds).unwrap();
    fs::write(d.join("l.csv"), labels).unwrap();
    let out = predvar(
        &[
            "auc",
            "--predictions",
            "p.csv",
            "--labels",
            "l.csv",
            "--method",
            "bootstrap",
            "--replicates",
            "200",
        ],
        d,
    );
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(stderr_error(&out)["code"], "too_many_degenerate_replicates");
}

#[test]
fn thread_cap_does_not_change_results() {
    let dir = workspace();
    let d = dir.path();
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_predvar"))
            .args(["metrics", "--generator", "gen.toml", "--seed", "3"])
            .current_dir(d)
            .env("PREDVAR_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run("1"), run("0"));
}
