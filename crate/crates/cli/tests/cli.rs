use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stagedtree"))
        .args(args)
        .env("STAGEDTREE_COLOR", "0")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(
        o.status.success(),
        "{:?} failed: {}",
        args,
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o)
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn fit_reports_titanic_scores() {
    let out = ok(&["fit", "--data", "builtin:titanic", "--init", "full"]);
    assert!(out.starts_with("logLik -5151.517 df 30\n"), "{}", out);
    let out = ok(&["fit", "--data", "builtin:titanic", "--init", "indep"]);
    assert!(out.starts_with("logLik -5773.349 df 7\n"), "{}", out);
}

#[test]
fn fit_from_count_csv_with_order() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "t.csv");
    std::fs::write(&csv, "A,B,Freq\nx,u,3\nx,v,1\ny,u,2\ny,v,0\n").unwrap();
    let out = ok(&["fit", "--data", &csv, "--freq", "Freq", "--order", "B,A"]);
    assert!(out.contains("df 3"), "{}", out);
    let model = path(dir.path(), "m.json");
    ok(&["fit", "--data", &csv, "--freq", "Freq", "--out", &model]);
    assert_eq!(ok(&["query", "prob", "--model", &model, "--event", "A=x"]), "0.6666667\n");
}

#[test]
fn empty_dataset_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "z.csv");
    std::fs::write(&csv, "A,B,Freq\nx,u,0\nx,v,0\ny,u,0\ny,v,0\n").unwrap();
    let o = run(&["fit", "--data", &csv, "--freq", "Freq", "--lambda", "1", "--no-join-unobserved"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["fit", "--data", "/nonexistent/data.csv"]).status.code(), Some(1));
    assert_eq!(run(&["fit", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(
        run(&["learn", "--data", "builtin:titanic", "--alg", "nope"]).status.code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.json");
    std::fs::write(&bad, "{\"version\": 7}").unwrap();
    assert_eq!(run(&["summary", &bad]).status.code(), Some(2));
}

#[test]
fn learn_hc_matches_reference_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let model = path(dir.path(), "hc.json");
    let out = ok(&["learn", "--data", "builtin:titanic", "--init", "indep", "--alg", "hc", "--out", &model]);
    assert_eq!(out, "logLik -5167.246 df 15\nAIC 10364.492 BIC 10449.942\n");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(format!("{}.manifest.json", model)).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 0);
    assert_eq!(manifest["inputs"][0]["source"], "builtin:titanic");
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert!(manifest["command_line"].as_array().unwrap().iter().any(|a| a == "hc"));

    assert_eq!(ok(&["query", "prob", "--model", &model, "--event", "Survived=Yes"]), "0.3236376\n");
    assert_eq!(ok(&["query", "stage", "--model", &model, "--path", "1st,Male"]), "3\n");
    let paths = ok(&["query", "paths", "--model", &model, "--var", "Sex", "--stage", "1"]);
    assert_eq!(paths, "1st\n2nd\n");
    let s = ok(&["summary", &model]);
    assert!(s.contains("0.9740113  0.0259887"), "{}", s);
}

#[test]
fn learn_from_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let full = path(dir.path(), "full.json");
    ok(&["fit", "--data", "builtin:titanic", "--out", &full]);
    let m = path(dir.path(), "manifest.json");
    let out = ok(&["learn", "--model", &full, "--alg", "bj", "--thr", "0.1", "--manifest", &m]);
    assert!(out.starts_with("logLik -5180.186 df 15\n"), "{}", out);
}

#[test]
fn bj_with_zero_threshold_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (path(dir.path(), "a.json"), path(dir.path(), "b.json"));
    let m = path(dir.path(), "m.json");
    ok(&["fit", "--data", "builtin:titanic", "--out", &a]);
    ok(&["learn", "--model", &a, "--alg", "bj", "--thr", "0", "--out", &b, "--manifest", &m]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ok(&["compare", &a, &b]), "equal\n");
}

#[test]
fn bhcr_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (path(dir.path(), "a.json"), path(dir.path(), "b.json"));
    let m = path(dir.path(), "m.json");
    for out in [&a, &b] {
        ok(&[
            "learn", "--data", "builtin:titanic", "--alg", "bhcr", "--seed", "7", "--max-iter", "100", "--out", out,
            "--manifest", &m,
        ]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn compare_lists_differences() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (path(dir.path(), "a.json"), path(dir.path(), "b.json"));
    ok(&["fit", "--data", "builtin:titanic", "--out", &a]);
    ok(&["fit", "--data", "builtin:titanic", "--init", "indep", "--out", &b]);
    let out = ok(&["compare", &a, &b, "--method", "stages"]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("different"));
    assert!(lines.all(|l| l.contains('\t')));
    assert_eq!(run(&["compare", &a, &b, "--method", "bogus"]).status.code(), Some(2));
}

#[test]
fn ceg_and_dot_exports() {
    let dir = tempfile::tempdir().unwrap();
    let model = path(dir.path(), "m.json");
    ok(&["fit", "--data", "builtin:titanic", "--init", "indep", "--out", &model]);
    let dot = ok(&["ceg", &model]);
    assert!(dot.starts_with("digraph") && dot.trim_end().ends_with('}'));
    let csv = ok(&["ceg", &model, "--format", "adjmat-csv"]);
    let rows: Vec<&str> = csv.lines().collect();
    // one position per stratum plus the sink; the na vertices form their own position
    let n = rows[0].split(',').count() - 1;
    assert_eq!(rows.len(), n + 1);
    assert!(rows[0].ends_with("u_inf"));
    let out = path(dir.path(), "tree.dot");
    ok(&["export-dot", &model, "--out", &out]);
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("digraph"));
    assert_eq!(run(&["ceg", &model, "--format", "png"]).status.code(), Some(2));
}

#[test]
fn sample_and_predict() {
    let dir = tempfile::tempdir().unwrap();
    let model = path(dir.path(), "m.json");
    ok(&["fit", "--data", "builtin:titanic", "--out", &model]);
    let a = ok(&["sample", "--model", &model, "--n", "50", "--seed", "3"]);
    assert_eq!(a, ok(&["sample", "--model", &model, "--n", "50", "--seed", "3"]));
    assert_eq!(a.lines().count(), 51);
    assert_eq!(a.lines().next(), Some("Class,Sex,Age,Survived"));

    let csv = path(dir.path(), "new.csv");
    std::fs::write(&csv, "Sex,Class,Age\nFemale,1st,Adult\nMale,3rd,Adult\n").unwrap();
    let pred = ok(&["predict", "--model", &model, "--class", "Survived", "--data", &csv]);
    assert_eq!(pred, "Survived\nYes\nNo\n");
    std::fs::write(&csv, "Sex,Class,Age\nFemale,1st,Old\n").unwrap();
    let o = run(&["predict", "--model", &model, "--class", "Survived", "--data", &csv]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn lr_test_reports_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let (full, ind) = (path(dir.path(), "f.json"), path(dir.path(), "i.json"));
    ok(&["fit", "--data", "builtin:titanic", "--out", &full]);
    ok(&["fit", "--data", "builtin:titanic", "--init", "indep", "--out", &ind]);
    let out = ok(&["lr-test", &ind, &full]);
    assert!(out.starts_with("statistic 1243.663 df 23 p-value"), "{}", out);
    assert_eq!(run(&["lr-test", &full, &ind]).status.code(), Some(2));
}

#[test]
fn evaluate_is_reproducible_without_timing() {
    let args = [
        "evaluate", "--data", "builtin:titanic", "--class", "Survived", "--alg", "bhc", "--seed", "0", "--no-timing",
        "--manifest", "/dev/null",
    ];
    let a = ok(&args);
    assert_eq!(a, ok(&args));
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "split,df,logLik,AIC,BIC,accuracy");
    assert_eq!(lines.len(), 12);
    let acc: f64 = lines[11].rsplit(',').next().unwrap().parse().unwrap();
    assert!((acc - 0.7934).abs() < 0.02, "{}", acc);
    let timed = ok(&["evaluate", "--data", "builtin:asym", "--splits", "2", "--manifest", "/dev/null"]);
    assert!(timed.starts_with("split,df,logLik,AIC,BIC,accuracy,seconds\n"));
}

#[test]
fn help_lists_interface_flags() {
    let global = ok(&["--help"]);
    for flag in ["--data", "--model", "--out", "--seed", "--order", "--lambda", "--format"] {
        assert!(global.contains(flag), "missing {}", flag);
    }
    for cmd in ["fit", "learn", "query", "sample", "compare", "ceg", "evaluate", "export-dot"] {
        assert!(global.contains(cmd), "missing {}", cmd);
    }
    let learn = ok(&["learn", "--help"]);
    for flag in [
        "--init", "--no-join-unobserved", "--alg", "--score", "--thr", "--k", "--distance", "--linkage", "--max-iter",
        "--scope", "--n-restarts",
    ] {
        assert!(learn.contains(flag), "missing {}", flag);
    }
    assert!(ok(&["fit", "--help"]).contains("--parents"));
    assert!(ok(&["query", "prob", "--help"]).contains("--event"));
    assert!(ok(&["compare", "--help"]).contains("--method"));
    assert!(ok(&["predict", "--help"]).contains("--class"));
}

#[test]
fn color_only_when_enabled_on_terminal() {
    let out = ok(&["fit", "--data", "builtin:titanic"]);
    assert!(!out.contains('\x1b'));
}
