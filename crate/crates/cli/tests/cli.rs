use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn stacktext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stacktext"))
        .args(args)
        .env_remove("STACKTEXT_LIAR_DIR")
        .output()
        .expect("launch stacktext")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn quick_config(dir: &Path, data: &Path) -> String {
    let text = format!(
        r#"schema_version = 1
seed = 7
data_dir = "{}"
record_runtime = false

[doc2vec]
dim = 8
epochs = 3
infer_steps = 3

[classical.forest]
n_trees = 5

[ann]
epochs = 10

[hybrid.meta]
epochs = 10
"#,
        data.display()
    );
    let path = dir.join("quick.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn synth_dir(dir: &Path) -> String {
    let data = dir.join("liar");
    let o = stacktext(&[
        "synth",
        "--out",
        data.to_str().unwrap(),
        "--train",
        "300",
        "--test",
        "100",
        "--valid",
        "80",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    data.to_str().unwrap().to_string()
}

#[test]
fn ingest_and_baseline_report_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth_dir(tmp.path());
    let o = stacktext(&["ingest", "--data-dir", &data]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("split\trows\tFAKE\tTRUE\tmajority\n"));
    assert!(out.contains("\ntrain\t300\t"));
    assert!(out.contains("\ntest\t100\t"));

    let o = stacktext(&["baseline", "--split", "valid", "--data-dir", &data]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("majority baseline (valid): "));
    assert!(stdout(&o).contains("of 80 rows)"));
}

#[test]
fn run_writes_reports_in_both_formats() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth_dir(tmp.path());
    let config = quick_config(tmp.path(), Path::new(&data));
    let out = tmp.path().join("out");
    let o = stacktext(&[
        "run",
        "--config",
        &config,
        "--only",
        "svm:tfidf,ann:v2",
        "--out",
        out.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv, stdout(&o));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "model,features,test_acc,valid_acc,seed,runtime_sec");
    assert!(lines[1].starts_with("svm,tfidf,"));
    assert!(lines[2].starts_with("ann,v2,"));
    assert!(lines[1].ends_with(",NA"));

    let o = stacktext(&[
        "run",
        "--config",
        &config,
        "--only",
        "rf:allfeatures",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let md = fs::read_to_string(out.join("report.md")).unwrap();
    assert!(md.contains("### Table 4. Random Forest"));
    assert!(md.contains("| All Features | "));
    assert!(md.contains("### Table 6. Diagnostics"));
}

#[test]
fn failed_cells_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("liar");
    fs::create_dir_all(&data).unwrap();
    // The training split holds a single class, so every fit fails.
    let row = "1.json\ttrue\tThe budget grew.\n";
    fs::write(
        data.join("train.tsv"),
        row.repeat(2) + "2.json\tmostly-true\tTaxes fell.\n",
    )
    .unwrap();
    fs::write(data.join("test.tsv"), row).unwrap();
    fs::write(data.join("valid.tsv"), row).unwrap();
    let config = quick_config(tmp.path(), &data);
    let o = stacktext(&[
        "run",
        "--config",
        &config,
        "--only",
        "svm:countword",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("| CountWord | ERR | ERR |"));
}

#[test]
fn bad_input_exits_with_code_one() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nowhere");
    let o = stacktext(&["baseline", "--data-dir", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("test.tsv"));

    let data = synth_dir(tmp.path());
    let config = quick_config(tmp.path(), Path::new(&data));
    let o = stacktext(&["run", "--config", &config, "--only", "svm:v1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn train_then_predict_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth_dir(tmp.path());
    let config = quick_config(tmp.path(), Path::new(&data));
    for (model, features) in [("logreg", "tfidf"), ("ann", "allfeatures"), ("ann", "v3")] {
        let path = tmp.path().join(format!("{model}-{features}.json"));
        let o = stacktext(&[
            "train",
            "--model",
            model,
            "--features",
            features,
            "--save",
            path.to_str().unwrap(),
            "--config",
            &config,
            "--data-dir",
            &data,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains(&format!("{model}:{features} test accuracy ")));

        let o = stacktext(&[
            "predict",
            "--load",
            path.to_str().unwrap(),
            "--text",
            "The budget grew by 4 percent.",
        ]);
        assert!(o.status.success());
        let out = stdout(&o);
        let (label, score) = out.trim().split_once('\t').unwrap();
        let score: f64 = score.parse().unwrap();
        assert!((0.0..=1.0).contains(&score));
        assert_eq!(label, if score >= 0.5 { "TRUE" } else { "FAKE" });
    }
}
