//! End-to-end tests of the command-line interface: exit codes, file
//! contracts, and the full gen-data → train → eval pipeline.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pairembed"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn pairembed")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path_str(dir: &tempfile::TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

#[test]
fn full_pipeline_reaches_acceptance_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let data = path_str(&dir, "blobs.csv");
    let model = path_str(&dir, "model.json");
    let metrics = path_str(&dir, "metrics.txt");

    // Defaults are the acceptance dataset: blobs, 8 classes, 100 per class.
    let out = run(&["gen-data", "--out", &data]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let out = run(&["train", "--data", &data, "--out-model", &model]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let out = run(&["eval", "--data", &data, "--model", &model, "--out", &metrics]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let text = std::fs::read_to_string(&metrics).unwrap();
    let accuracy: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("accuracy = "))
        .expect("accuracy key")
        .parse()
        .unwrap();
    assert!(accuracy > 0.9, "pipeline accuracy {accuracy}");
    for key in ["mean_intra", "mean_inter", "separability", "margin_violation_rate"] {
        assert!(text.contains(&format!("{key} = ")), "missing {key}");
    }
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let out = run(&["train"]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.lines().count(), 1, "diagnostic not one line: {err}");
    assert!(err.contains("--data"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["gen-data", "--out", "/tmp/x.csv", "--bogus", "1"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = run(&["frobnicate"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn mode_specific_dims_are_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = path_str(&dir, "d.csv");
    let out = run(&["gen-data", "--mode", "blobs", "--side", "8", "--out", &out_path]);
    assert_eq!(code(&out), 1);
    let out = run(&["gen-data", "--mode", "textures", "--dim", "8", "--out", &out_path]);
    assert_eq!(code(&out), 1);
    let out = run(&[
        "gen-data", "--mode", "textures", "--side", "8", "--classes", "3",
        "--per-class", "4", "--out", &out_path,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    // Nonexistent data file.
    let out = run(&["train", "--data", &path_str(&dir, "nope.csv")]);
    assert_eq!(code(&out), 2);

    // Malformed CSV: parse error with line number.
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "label,x0\n0,1.0\n1,oops\n").unwrap();
    let out = run(&["train", "--data", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "missing line number: {err}");

    // Divergent training.
    let data = path_str(&dir, "ok.csv");
    let out = run(&[
        "gen-data", "--classes", "3", "--per-class", "5", "--dim", "4", "--out", &data,
    ]);
    assert_eq!(code(&out), 0);
    let out = run(&["train", "--data", &data, "--lr", "1e12"]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("diverged"), "missing divergence message: {err}");
}

#[test]
fn gradcheck_prints_error_and_respects_threshold() {
    let out = run(&["gradcheck", "--seed", "7"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("max relative gradient error:"),
        "stdout: {stdout}"
    );

    // A huge epsilon wrecks the finite-difference estimate, so the check
    // must fail with exit code 2.
    let out = run(&["gradcheck", "--seed", "7", "--eps", "10.0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn outputs_are_byte_identical_and_inputs_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let data = path_str(&dir, "d.csv");
    let out = run(&[
        "gen-data", "--classes", "3", "--per-class", "6", "--dim", "4", "--seed", "11",
        "--out", &data,
    ]);
    assert_eq!(code(&out), 0);
    let data_before = std::fs::read(&data).unwrap();

    let emb_a = path_str(&dir, "emb_a.csv");
    let emb_b = path_str(&dir, "emb_b.csv");
    let model = path_str(&dir, "m.json");
    let out = run(&[
        "train", "--data", &data, "--epochs", "5", "--seed", "2", "--out-model", &model,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for emb in [&emb_a, &emb_b] {
        let out = run(&[
            "export-embeddings", "--data", &data, "--model", &model, "--out", emb, "--pca2d",
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(
        std::fs::read(&emb_a).unwrap(),
        std::fs::read(&emb_b).unwrap()
    );
    let header = std::fs::read_to_string(&emb_a).unwrap();
    assert!(header.starts_with("id,label,e0,"));
    assert!(header.lines().next().unwrap().ends_with(",px,py"));

    // No command mutated its input.
    assert_eq!(std::fs::read(&data).unwrap(), data_before);
}

#[test]
fn sweep_lambda_writes_expected_table() {
    let dir = tempfile::tempdir().unwrap();
    let train_csv = path_str(&dir, "train.csv");
    let test_csv = path_str(&dir, "test.csv");
    // Two gen-data seeds would draw different class centers, so generate one
    // dataset and split its rows instead.
    let full = path_str(&dir, "full.csv");
    let out = run(&[
        "gen-data", "--classes", "3", "--per-class", "10", "--dim", "4", "--seed", "3",
        "--out", &full,
    ]);
    assert_eq!(code(&out), 0);
    // Split by row count per class, keeping the CSV header.
    let text = std::fs::read_to_string(&full).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    let mut train_rows = vec![header.to_string()];
    let mut test_rows = vec![header.to_string()];
    let mut seen = std::collections::HashMap::new();
    for line in lines {
        let label = line.split(',').next().unwrap().to_string();
        let count = seen.entry(label).or_insert(0usize);
        if *count < 8 {
            train_rows.push(line.to_string());
        } else {
            test_rows.push(line.to_string());
        }
        *count += 1;
    }
    std::fs::write(&train_csv, train_rows.join("\n") + "\n").unwrap();
    std::fs::write(&test_csv, test_rows.join("\n") + "\n").unwrap();

    let cfg = path_str(&dir, "cfg.txt");
    std::fs::write(&cfg, "epochs = 4\nbatch_size = 4\nembed_dim = 4\n").unwrap();
    let sweep = path_str(&dir, "sweep.csv");
    let out = run(&[
        "sweep-lambda", "--train", &train_csv, "--test", &test_csv, "--config", &cfg,
        "--lambdas", "0,1", "--seeds", "1,2", "--out", &sweep,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(&sweep).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "lambda,seed,accuracy,separability");
    assert_eq!(rows.len(), 5, "2 lambdas x 2 seeds plus header: {table}");

    let out = run(&[
        "sweep-lambda", "--train", &train_csv, "--test", &test_csv, "--config", &cfg,
        "--lambdas", "0,banana", "--seeds", "1", "--out", &sweep,
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn config_file_drives_training_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let data = path_str(&dir, "d.csv");
    let out = run(&[
        "gen-data", "--classes", "3", "--per-class", "6", "--dim", "4", "--out", &data,
    ]);
    assert_eq!(code(&out), 0);

    let cfg = path_str(&dir, "cfg.txt");
    std::fs::write(&cfg, "epochs = 2\nembed_dim = 4\nlayers = dense(4,4)\nseed = 5\n").unwrap();

    // Same config, identical flags -> identical models; a --seed override
    // must change the result.
    let m1 = path_str(&dir, "m1.json");
    let m2 = path_str(&dir, "m2.json");
    let m3 = path_str(&dir, "m3.json");
    for (model, extra) in [(&m1, None), (&m2, None), (&m3, Some(["--seed", "6"]))] {
        let mut args = vec!["train", "--data", &data, "--config", &cfg, "--out-model", model];
        if let Some(extra) = &extra {
            args.extend_from_slice(extra);
        }
        let out = run(&args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(std::fs::read(&m1).unwrap(), std::fs::read(&m2).unwrap());
    assert_ne!(std::fs::read(&m1).unwrap(), std::fs::read(&m3).unwrap());
}

#[test]
fn eval_applies_the_stored_training_mean() {
    // Train on data with a large offset; evaluating the same raw file must
    // give the same accuracy as the training log's final epoch, which is
    // only possible if eval re-applies the stored mean.
    let dir = tempfile::tempdir().unwrap();
    let data = path_str(&dir, "d.csv");
    let out = run(&[
        "gen-data", "--classes", "4", "--per-class", "10", "--dim", "6", "--separation",
        "6", "--seed", "13", "--out", &data,
    ]);
    assert_eq!(code(&out), 0);
    let model = path_str(&dir, "m.json");
    let log = path_str(&dir, "log.csv");
    let out = run(&[
        "train", "--data", &data, "--epochs", "10", "--out-model", &model, "--log", &log,
    ]);
    assert_eq!(code(&out), 0);
    let metrics = path_str(&dir, "metrics.txt");
    let out = run(&["eval", "--data", &data, "--model", &model, "--out", &metrics]);
    assert_eq!(code(&out), 0);

    let log_text = std::fs::read_to_string(&log).unwrap();
    let final_acc: f64 = log_text
        .lines()
        .last()
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    let metrics_text = std::fs::read_to_string(&metrics).unwrap();
    let eval_acc: f64 = metrics_text
        .lines()
        .find_map(|l| l.strip_prefix("accuracy = "))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(final_acc, eval_acc);

    // A model checkpoint loads back and carries the mean.
    let model_text = std::fs::read_to_string(&model).unwrap();
    assert!(model_text.contains("\"mean\""));
    assert!(model_text.contains("\"layers\""));
}
