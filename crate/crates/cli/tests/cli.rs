use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use utility_eval::roc::auc_reversal_fixture;

const FACTORY: &str = r#"{"utility": [[15, -335], [-35, 165]]}"#;
const ALTERNATIVE: &str = r#"{"utility": [[45, -335], [-65, 165]]}"#;

fn utileval(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_utileval"))
        .current_dir(dir)
        .args(args)
        .env_remove("UTILEVAL_SEED")
        .env_remove("UTILEVAL_OUT")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

/// Writes one row per item of a `[[pred0 true0, pred0 true1], [pred1 true0, pred1 true1]]`
/// count table.
fn predictions(dir: &Path, name: &str, counts: [[usize; 2]; 2]) {
    let mut s = String::from("true_label,predicted_label\n");
    for (pred, row) in counts.iter().enumerate() {
        for (truth, &n) in row.iter().enumerate() {
            for _ in 0..n {
                s.push_str(&format!("{truth},{pred}\n"));
            }
        }
    }
    fs::write(dir.join(name), s).unwrap();
}

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    predictions(dir.path(), "a.csv", [[27, 15], [23, 35]]);
    predictions(dir.path(), "b.csv", [[43, 18], [7, 32]]);
    fs::write(dir.path().join("factory.json"), FACTORY).unwrap();
    fs::write(dir.path().join("alt.json"), ALTERNATIVE).unwrap();
    dir
}

#[test]
fn evaluate_recovers_counts_and_yield() {
    let dir = workspace();
    let v = json(&utileval(
        dir.path(),
        &[
            "--format",
            "json",
            "evaluate",
            "a.csv",
            "--utilities",
            "factory.json",
        ],
    ));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "evaluate");
    assert_eq!(v["counts"], serde_json::json!([[27, 15], [23, 35]]));
    assert_eq!(v["items"], 100);
    assert!((v["utility_yield"].as_f64().unwrap() - 3.5).abs() < 1e-9);
    assert!((v["f0"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn rank_follows_the_utility() {
    let dir = workspace();
    let first = |cfg: &str| {
        let v = json(&utileval(
            dir.path(),
            &[
                "--format",
                "json",
                "rank",
                "a.csv",
                "b.csv",
                "--utilities",
                cfg,
            ],
        ));
        (v["ranking"][0]["input"].as_str().unwrap().to_string(), v)
    };
    let (top, v) = first("factory.json");
    assert_eq!(top, "a.csv");
    let disagree: Vec<&str> = v["disagreeing_metrics"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m.as_str().unwrap())
        .collect();
    assert!(disagree.contains(&"accuracy"));
    assert!(!disagree.contains(&"specificity"));
    assert_eq!(first("alt.json").0, "b.csv");
}

#[test]
fn mixture_config_is_averaged() {
    let dir = workspace();
    fs::write(
        dir.path().join("mix.json"),
        r#"{"mixture": [{"weight": 0.5, "utility": [[15, -335], [-35, 165]]},
                        {"weight": 0.5, "utility": [[45, -335], [-65, 165]]}]}"#,
    )
    .unwrap();
    let v = json(&utileval(
        dir.path(),
        &[
            "--format",
            "json",
            "evaluate",
            "b.csv",
            "--utilities",
            "mix.json",
        ],
    ));
    let y = v["utility_yield"].as_f64().unwrap();
    assert!((y - 0.5 * (-3.5 + 7.3)).abs() < 1e-9, "{y}");
}

#[test]
fn exit_codes() {
    let dir = workspace();
    assert!(utileval(
        dir.path(),
        &["evaluate", "a.csv", "--utilities", "factory.json"]
    )
    .status
    .success());
    fs::write(
        dir.path().join("bad.csv"),
        "true_label,predicted_label\n0,1\n2,0\n",
    )
    .unwrap();
    let out = utileval(
        dir.path(),
        &["evaluate", "bad.csv", "--utilities", "factory.json"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.csv:3:"));
    let out = utileval(
        dir.path(),
        &["evaluate", "missing.csv", "--utilities", "factory.json"],
    );
    assert_eq!(out.status.code(), Some(2));
    let out = utileval(dir.path(), &["simulate", "--pairs", "10", "--sigma", "0.5"]);
    assert_eq!(out.status.code(), Some(3));
    fs::write(
        dir.path().join("infeasible.json"),
        r#"{"utility": [[0, 1], [1, 0]]}"#,
    )
    .unwrap();
    let out = utileval(
        dir.path(),
        &["evaluate", "a.csv", "--utilities", "infeasible.json"],
    );
    assert_eq!(out.status.code(), Some(3));
    let out = utileval(dir.path(), &["compliance", "no_such_metric"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fixture_files_match_the_generator() {
    let (a, b) = auc_reversal_fixture();
    for (curve, name) in [(a, "auc_reversal_a.csv"), (b, "auc_reversal_b.csv")] {
        let text = fs::read_to_string(fixture(name)).unwrap();
        let rows: Vec<(f64, f64)> = text
            .lines()
            .skip(1)
            .map(|l| {
                let (f, t) = l.split_once(',').unwrap();
                (f.parse().unwrap(), t.parse().unwrap())
            })
            .collect();
        assert_eq!(rows.len(), curve.points().len(), "{name}");
        for (p, (f, t)) in curve.points().iter().zip(rows) {
            assert!(
                (p.fpr - f).abs() < 1e-9 && (p.tpr - t).abs() < 1e-9,
                "{name}"
            );
        }
    }
}

#[test]
fn roc_warns_when_auc_disagrees() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("u.json"),
        r#"{"utility": [[4, 0], [0, 1]], "balance": 0.5}"#,
    )
    .unwrap();
    let a = fixture("auc_reversal_a.csv");
    let b = fixture("auc_reversal_b.csv");
    let out = utileval(
        dir.path(),
        &[
            "--format",
            "json",
            "roc",
            a.to_str().unwrap(),
            b.to_str().unwrap(),
            "--utilities",
            "u.json",
        ],
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("AUC ordering disagrees"));
    let v = json(&out);
    assert_eq!(v["ranking"][0]["curve"], 0);
    assert_eq!(v["warnings"].as_array().unwrap().len(), 1);
    assert!(v["curves"][0]["auc"].as_f64() < v["curves"][1]["auc"].as_f64());
}

#[test]
fn roc_edge_curves() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("u.json"),
        r#"{"utility": [[1, 0], [0, 1]]}"#,
    )
    .unwrap();
    fs::write(
        dir.path().join("perfect.csv"),
        "true_label,score\n0,0.9\n0,0.8\n1,0.2\n1,0.1\n1,0.05\n",
    )
    .unwrap();
    let v = json(&utileval(
        dir.path(),
        &[
            "--format",
            "json",
            "roc",
            "perfect.csv",
            "--utilities",
            "u.json",
        ],
    ));
    let opt = &v["curves"][0]["optimum"];
    assert_eq!(v["balance"].as_f64(), Some(0.4));
    assert_eq!(
        (opt["fpr"].as_f64(), opt["tpr"].as_f64()),
        (Some(0.0), Some(1.0))
    );
    assert_eq!(v["curves"][0]["auc"].as_f64(), Some(1.0));

    fs::write(dir.path().join("diag.csv"), "fpr,tpr\n0,0\n1,1\n").unwrap();
    let v = json(&utileval(
        dir.path(),
        &[
            "--format",
            "json",
            "roc",
            "diag.csv",
            "--utilities",
            "u.json",
            "--balance",
            "0.5",
        ],
    ));
    assert_eq!(v["curves"][0]["auc"].as_f64(), Some(0.5));
    assert!((v["curves"][0]["optimum"]["utility_yield"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    fs::write(
        dir.path().join("one.csv"),
        "true_label,score\n0,0.3\n0,0.7\n",
    )
    .unwrap();
    let out = utileval(
        dir.path(),
        &[
            "roc",
            "one.csv",
            "--utilities",
            "u.json",
            "--balance",
            "0.5",
        ],
    );
    assert_eq!(out.status.code(), Some(2));

    let out = utileval(dir.path(), &["roc", "diag.csv", "--utilities", "u.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn compliance_writes_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&utileval(
        dir.path(),
        &[
            "--format",
            "json",
            "--out",
            "w",
            "compliance",
            "accuracy",
            "f1",
            "--samples",
            "100",
            "--witness",
        ],
    ));
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports[0]["verdict"], "compliant");
    assert_eq!(reports[1]["verdict"], "non_compliant");
    let csv = fs::read_to_string(dir.path().join("w").join("witnesses.csv")).unwrap();
    assert!(csv.lines().count() > 1);
    assert!(csv.contains("f1"));
}

#[test]
fn simulate_seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_utileval"));
        cmd.current_dir(dir.path())
            .args(["simulate", "--pairs", "10000", "--out", sub])
            .env_remove("UTILEVAL_SEED");
        if let Some(s) = seed {
            cmd.env("UTILEVAL_SEED", s);
        }
        assert!(cmd.output().unwrap().status.success());
        fs::read_to_string(dir.path().join(sub).join("simulation.csv")).unwrap()
    };
    let env = run("env", Some("0x2a"));
    let default = run("default", None);
    let flag = Command::new(env!("CARGO_BIN_EXE_utileval"))
        .current_dir(dir.path())
        .args([
            "simulate", "--pairs", "10000", "--out", "flag", "--seed", "42",
        ])
        .env_remove("UTILEVAL_SEED")
        .output()
        .unwrap();
    assert!(flag.status.success());
    let flag = fs::read_to_string(dir.path().join("flag").join("simulation.csv")).unwrap();
    assert_eq!(env, flag);
    assert_ne!(env, default);
    let header = env.lines().next().unwrap();
    assert_eq!(
        header,
        "evaluator,sigma,pairs,misranked,ties,undefined,fraction,std_error"
    );
    let json: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("env/simulation.json")).unwrap())
            .unwrap();
    assert_eq!(json["schema_version"], 1);
}

#[test]
fn scatter_draws_svg() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("u.json"),
        r#"{"utility": [[1, 0], [0, 1]]}"#,
    )
    .unwrap();
    let v = json(&utileval(
        dir.path(),
        &[
            "--format",
            "json",
            "scatter",
            "--utilities",
            "u.json",
            "--metric",
            "f1",
            "--points",
            "200",
            "--witnesses",
            "2",
            "--svg",
            "s.svg",
        ],
    ));
    assert!(v["max_linear_residual"].as_f64().unwrap() > 1e-6);
    let svg = fs::read_to_string(dir.path().join("s.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("stroke=\"red\""));
}
