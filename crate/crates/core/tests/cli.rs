use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gradcobra::{io as csvio, persist};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gradcobra"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("spawn gradcobra")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

/// Simulated dataset plus train/test prediction files in `dir`.
fn prepare(dir: &Path) -> (PathBuf, PathBuf) {
    let o = run(
        &["simulate", "--model", "1", "--n", "200", "--d", "8", "--seed", "5", "--out", "data.csv", "--split-prefix", "s"],
        dir,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    (dir.join("s.train.csv"), dir.join("s.test.csv"))
}

#[test]
fn simulate_writes_dataset_layout() {
    let dir = tempfile::tempdir().unwrap();
    prepare(dir.path());
    let data = csvio::load_dataset(dir.path().join("data.csv")).unwrap();
    assert_eq!((data.x.nrows(), data.x.ncols()), (200, 8));
    let text = std::fs::read_to_string(dir.path().join("data.csv")).unwrap();
    assert!(text.starts_with("y,x1,x2,x3,x4,x5,x6,x7,x8\n"));
    let train = csvio::load_prediction_matrix(dir.path().join("s.train.csv")).unwrap();
    assert_eq!(train.learner_names(), ["knn", "ridge", "tree"]);
    assert_eq!(train.len(), 80);
}

#[test]
fn fit_then_predict_matches_in_memory_model() {
    let dir = tempfile::tempdir().unwrap();
    let (train, test) = prepare(dir.path());
    let (train, test) = (train.to_str().unwrap(), test.to_str().unwrap());
    for method in ["gauss", "gauss@grid", "exp4", "triweight", "cobra", "kcobra"] {
        let o = run(
            &["fit", "--predictions", train, "--method", method, "--grid-count", "40", "--out", "m.json", "--trace", "t.csv"],
            dir.path(),
        );
        assert_eq!(code(&o), 0, "{method}: {}", String::from_utf8_lossy(&o.stderr));
        let o = run(&["predict", "--model", "m.json", "--queries", test, "--out", "p.csv"], dir.path());
        assert_eq!(code(&o), 0);
        assert!(String::from_utf8_lossy(&o.stderr).contains("rmse ="));

        let model = persist::load(dir.path().join("m.json")).unwrap();
        let (x, _) = csvio::load_queries(test, model.predictions().learner_names()).unwrap();
        let expected = model.predict(&x).unwrap();
        let written = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
        let got: Vec<f64> = written.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(got.len(), expected.values.len());
        assert!(got.iter().zip(&expected.values).all(|(a, b)| a.to_bits() == b.to_bits()), "{method}");

        let trace = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert!(trace.starts_with("iter,h,loss,grad\n"));
        assert!(trace.lines().count() > 1);
    }
}

#[test]
fn tune_reports_bandwidth() {
    let dir = tempfile::tempdir().unwrap();
    let (train, _) = prepare(dir.path());
    let o = run(&["tune", "--predictions", train.to_str().unwrap(), "--kernel", "gauss", "--tune", "gd"], dir.path());
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("method,h,loss,evaluations,converged"));
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(fields[0], "gauss@gd");
    assert!(fields[1].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn benchmark_writes_report_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "benchmark", "--model", "1", "--n", "120", "--d", "5", "--replications", "2", "--methods", "gauss",
            "--out", "r.csv", "--summary", "s.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(report.starts_with("method,replication,rmse,tune_ms,predict_ms\n"));
    assert_eq!(report.lines().count(), 1 + 2 * 4);
    let summary = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(summary.starts_with("method,completed,mean_rmse,se_rmse,mean_tune_ms,mean_predict_ms\n"));
}

#[test]
fn benchmark_on_loaded_dataset() {
    let dir = tempfile::tempdir().unwrap();
    prepare(dir.path());
    let o = run(
        &["benchmark", "--data", "data.csv", "--replications", "2", "--methods", "kcobra", "--grid-count", "30", "--no-timing"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 1 + 2 * 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (train, test) = prepare(dir.path());
    let (train, test) = (train.to_str().unwrap(), test.to_str().unwrap());
    // usage errors
    assert_eq!(code(&run(&["frobnicate"], dir.path())), 1);
    assert_eq!(code(&run(&["tune", "--predictions", train, "--kernel", "bogus"], dir.path())), 1);
    assert_eq!(code(&run(&["tune", "--predictions", train, "--kernel", "epanechnikov", "--tune", "gd"], dir.path())), 1);
    assert_eq!(code(&run(&["fit", "--predictions", train], dir.path())), 1);
    assert_eq!(code(&run(&["simulate", "--model", "11"], dir.path())), 1);
    assert_eq!(code(&run(&["simulate", "--model", "5", "--d", "10"], dir.path())), 1);
    // data errors
    assert_eq!(code(&run(&["tune", "--predictions", "missing.csv"], dir.path())), 2);
    std::fs::write(dir.path().join("corrupt.json"), "{\"format\": \"gradcobra-model\"").unwrap();
    assert_eq!(code(&run(&["predict", "--model", "corrupt.json", "--queries", test], dir.path())), 2);
    std::fs::write(dir.path().join("bad.csv"), "y,knn\n1,oops\n").unwrap();
    assert_eq!(code(&run(&["tune", "--predictions", "bad.csv"], dir.path())), 2);
}

#[test]
fn version_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (train, test) = prepare(dir.path());
    let o = run(&["fit", "--predictions", train.to_str().unwrap(), "--out", "m.json"], dir.path());
    assert_eq!(code(&o), 0);
    let path = dir.path().join("m.json");
    let text = std::fs::read_to_string(&path).unwrap().replace("\"version\": 1", "\"version\": 9");
    std::fs::write(&path, text).unwrap();
    let o = run(&["predict", "--model", "m.json", "--queries", test.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("version 9"));
}
