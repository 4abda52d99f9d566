use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn svreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svreg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn simulate(dir: &Path, setting: &str, n: usize, seed: u64) -> PathBuf {
    let out = dir.join(format!("sim-{setting}-{n}-{seed}"));
    let o = svreg(&[
        "simulate",
        "--setting",
        setting,
        "--n",
        &n.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn data_flags(sim: &Path) -> Vec<String> {
    ["x", "z", "y"]
        .iter()
        .zip(["X.csv", "Z.csv", "y.csv"])
        .flat_map(|(flag, file)| [format!("--{flag}"), sim.join(file).display().to_string()])
        .collect()
}

fn run_with(base: &[&str], extra: &[String]) -> Output {
    let mut all: Vec<&str> = base.to_vec();
    all.extend(extra.iter().map(String::as_str));
    svreg(&all)
}

#[test]
fn simulate_writes_the_dataset_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let a = simulate(tmp.path(), "s1", 100, 7);
    for f in [
        "X.csv",
        "Z.csv",
        "y.csv",
        "groups.json",
        "truth.json",
        "meta.json",
        "manifest.json",
    ] {
        assert!(a.join(f).exists(), "{f}");
    }
    let x = std::fs::read_to_string(a.join("X.csv")).unwrap();
    let lines: Vec<&str> = x.lines().collect();
    assert_eq!(lines.len(), 101);
    assert_eq!(lines[0].split(',').count(), 50);
    let m = json(&a.join("manifest.json"));
    let b = tmp.path().join("again");
    svreg(&[
        "simulate",
        "--setting",
        "s1",
        "--n",
        "100",
        "--seed",
        "7",
        "--out",
        s(&b),
    ]);
    assert_eq!(m["outputs"], json(&b.join("manifest.json"))["outputs"]);
    assert_eq!(m["seeds"], serde_json::json!([7]));
}

#[test]
fn usage_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    assert_eq!(
        code(&svreg(&[
            "simulate",
            "--setting",
            "s9",
            "--n",
            "5",
            "--seed",
            "1",
            "--out",
            s(&out)
        ])),
        2
    );
    assert_eq!(
        code(&svreg(&["bench", "--setting", "s1", "--reps", "1", "--out", s(&out)])),
        2
    );
    let sim = simulate(tmp.path(), "s3", 40, 1);
    let o = run_with(
        &["cv", "--method", "lasso", "--v", "1", "--out", s(&out)],
        &data_flags(&sim),
    );
    assert_eq!(code(&o), 2);
    let o = run_with(
        &["fit", "--method", "svreg", "--lambda", "0.5", "--out", s(&out)],
        &data_flags(&sim),
    );
    assert_eq!(code(&o), 2);
    let msg = String::from_utf8_lossy(&o.stderr);
    assert!(msg.contains("--groups") && msg.contains("--singleton-groups"), "{msg}");
}

#[test]
fn malformed_data_exits_with_3_and_names_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = simulate(tmp.path(), "s3", 30, 2);
    let y = std::fs::read_to_string(sim.join("y.csv")).unwrap();
    let mut lines: Vec<String> = y.lines().map(String::from).collect();
    lines[4] = "abc".into();
    std::fs::write(sim.join("y.csv"), lines.join("\n")).unwrap();
    let o = run_with(
        &[
            "fit",
            "--method",
            "lasso",
            "--lambda",
            "0.5",
            "--out",
            s(&tmp.path().join("f")),
        ],
        &data_flags(&sim),
    );
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains(":5:"));
}

#[test]
fn large_lambda_gives_an_empty_model() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = simulate(tmp.path(), "s1", 60, 3);
    let out = tmp.path().join("fit");
    let o = run_with(
        &["fit", "--method", "svreg", "--lambda", "99", "--out", s(&out)],
        &[
            data_flags(&sim),
            vec!["--groups".into(), sim.join("groups.json").display().to_string()],
        ]
        .concat(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let fit = json(&out.join("fit.json"));
    let c = &fit["coefficients"];
    assert!(c["beta"].as_array().unwrap().iter().all(|b| b.as_f64() == Some(0.0)));
    assert!(c["theta"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r.as_array().unwrap())
        .all(|t| t.as_f64() == Some(0.0)));
    assert_eq!(fit["active_groups"], serde_json::json!([]));
    assert_eq!(fit["converged"], Value::Bool(true));
}

#[test]
fn plasso_equals_svreg_with_singletons_and_unit_weights() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = simulate(tmp.path(), "s1", 80, 4);
    let tight = ["--tol", "1e-12", "--max-iter", "20000", "--lambda", "0.2"];
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let o = run_with(
        &[&["fit", "--method", "plasso", "--out", s(&a)][..], &tight].concat(),
        &data_flags(&sim),
    );
    assert_eq!(code(&o), 0);
    let o = run_with(
        &[
            &[
                "fit",
                "--method",
                "svreg",
                "--singleton-groups",
                "--unit-weights",
                "--out",
                s(&b),
            ][..],
            &tight,
        ]
        .concat(),
        &data_flags(&sim),
    );
    assert_eq!(code(&o), 0);
    let fa = json(&a.join("fit.json"))["objective"].as_f64().unwrap();
    let fb = json(&b.join("fit.json"))["objective"].as_f64().unwrap();
    assert!((fa - fb).abs() < 1e-8, "{fa} vs {fb}");
}

#[test]
fn original_units_reproduce_standardized_predictions() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = simulate(tmp.path(), "s2", 60, 5);
    let out = tmp.path().join("fit");
    run_with(
        &["fit", "--method", "svreg", "--lambda", "0.1", "--out", s(&out)],
        &[
            data_flags(&sim),
            vec!["--groups".into(), sim.join("groups.json").display().to_string()],
        ]
        .concat(),
    );
    let fit = json(&out.join("fit.json"));
    let read = |f: &str| -> Vec<Vec<f64>> {
        std::fs::read_to_string(sim.join(f))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect()
    };
    let (x, z, y) = (read("X.csv"), read("Z.csv"), read("y.csv"));
    let vec = |v: &Value| -> Vec<f64> { v.as_array().unwrap().iter().map(|t| t.as_f64().unwrap()).collect() };
    let predict = |c: &Value, x: &[f64], z: &[f64]| -> f64 {
        let theta: Vec<Vec<f64>> = c["theta"].as_array().unwrap().iter().map(vec).collect();
        let (beta, theta0) = (vec(&c["beta"]), vec(&c["theta0"]));
        let mut v = c["beta0"].as_f64().unwrap() + theta0.iter().zip(z).map(|(t, z)| t * z).sum::<f64>();
        for j in 0..x.len() {
            v += (beta[j] + theta[j].iter().zip(z).map(|(t, z)| t * z).sum::<f64>()) * x[j];
        }
        v
    };
    let rec = &fit["standardization"];
    let (xm, xs, zm, zs) = (
        vec(&rec["x_mean"]),
        vec(&rec["x_scale"]),
        vec(&rec["z_mean"]),
        vec(&rec["z_scale"]),
    );
    let ym = rec["y_mean"].as_f64().unwrap();
    for i in 0..y.len() {
        let xt: Vec<f64> = (0..x[i].len()).map(|j| (x[i][j] - xm[j]) / xs[j]).collect();
        let zt: Vec<f64> = (0..z[i].len()).map(|k| (z[i][k] - zm[k]) / zs[k]).collect();
        let a = ym + predict(&fit["coefficients"], &xt, &zt);
        let b = predict(&fit["coefficients_original"], &x[i], &z[i]);
        assert!((a - b).abs() < 1e-9, "row {i}: {a} vs {b}");
    }
}

#[test]
fn cv_is_reproducible_and_metrics_read_its_fit() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = simulate(tmp.path(), "s3", 60, 6);
    let runs: Vec<PathBuf> = (0..2)
        .map(|i| {
            let out = tmp.path().join(format!("cv{i}"));
            let o = run_with(
                &[
                    "cv",
                    "--method",
                    "plasso",
                    "--grid-coarse",
                    "--v",
                    "5",
                    "--seed",
                    "11",
                    "--out",
                    s(&out),
                ],
                &data_flags(&sim),
            );
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
            out
        })
        .collect();
    let a = std::fs::read(runs[0].join("cv.json")).unwrap();
    assert_eq!(a, std::fs::read(runs[1].join("cv.json")).unwrap());
    let cv = json(&runs[0].join("cv.json"));
    assert_eq!(cv["lambdas"].as_array().unwrap().len(), 60);
    assert_eq!(cv["best_lambda"], json(&runs[0].join("fit.json"))["lambda"]);

    let m = tmp.path().join("m");
    let o = svreg(&[
        "metrics",
        "--fit",
        s(&runs[0].join("fit.json")),
        "--truth",
        s(&sim.join("truth.json")),
        "--out",
        s(&m),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json(&m.join("metrics.json"));
    let rates = &rep[0]["rates"];
    let sens = rates["sensitivity"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&sens));
    assert_eq!(rep[0]["mse"], json(&runs[0].join("fit.json"))["cv_mse"]);
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    let out = tmp.path().join("sim");
    std::fs::write(
        &cfg,
        format!(r#"{{"setting": "s2", "n": 30, "seed": 3, "out": "{}"}}"#, s(&out)),
    )
    .unwrap();
    let o = svreg(&["--config", s(&cfg), "simulate", "--seed", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["config"]["seed"], 4);
    assert_eq!(m["config"]["setting"], "s2");
    assert_eq!(json(&out.join("meta.json"))["n"], 30);

    std::fs::write(&cfg, r#"{"setting": "s2", "bogus": 1}"#).unwrap();
    assert_eq!(code(&svreg(&["--config", s(&cfg), "simulate"])), 2);
}

#[test]
fn bench_writes_every_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("b");
    let o = svreg(&[
        "bench",
        "--setting",
        "s3",
        "--methods",
        "plasso,svreg",
        "--reps",
        "1",
        "--n",
        "60",
        "--grid-coarse",
        "--v",
        "3",
        "--seed",
        "5",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "table.csv",
        "table_se.csv",
        "roc.csv",
        "roc_points.csv",
        "diffcurve.csv",
        "manifest.json",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let table = std::fs::read_to_string(out.join("table.csv")).unwrap();
    assert!(table.starts_with("metric,plasso,svreg\n"));
    let se = std::fs::read_to_string(out.join("table_se.csv")).unwrap();
    let zero_se = se
        .lines()
        .skip(1)
        .flat_map(|l| l.split(',').skip(1).map(String::from).collect::<Vec<_>>())
        .all(|v| v == "NA" || v.parse::<f64>().unwrap() == 0.0);
    assert!(zero_se, "{se}");
}
