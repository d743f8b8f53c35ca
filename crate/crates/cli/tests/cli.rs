use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = "\
synthetic = true
synth_normal = 160
synth_attack = 70
synth_features = 5
budget = 6
n_init = 3
folds = 3
n_learners_min = 5
n_learners_max = 15
min_leaf_max = 40
max_depth_max = 12
";

fn bogp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bogp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn setup(config: &str) -> (tempfile::TempDir, PathBuf, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, config).unwrap();
    let out = dir.path().join("out");
    (dir, cfg, out)
}

fn run_ok(args: &[&str]) -> String {
    let o = bogp(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn pca_preserves_rows() {
    let (_d, cfg, out) = setup("synthetic = true\nsynth_normal = 60\nsynth_attack = 40\nsynth_features = 4\n");
    let stdout = run_ok(&["pca", "--config", s(&cfg), "--out", s(&out)]);
    assert!(stdout.contains("explained variance"));
    let text = fs::read_to_string(out.join("pca.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("pc1,pc2,label"));
    assert_eq!(text.lines().count(), 101);
    assert!(!out.join(".bogp.lock").exists());
}

#[test]
fn missing_data_file_is_an_input_error_without_output() {
    let (d, _cfg, out) = setup("");
    let missing = d.path().join("nope.csv");
    let o = bogp(&["pca", "--data", s(&missing), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.csv"));
    assert!(!out.join("pca.csv").exists());
}

#[test]
fn no_dataset_and_bad_config_are_input_errors() {
    let (_d, cfg, out) = setup("budgett = 3\n");
    assert_eq!(bogp(&["baseline", "--out", s(&out)]).status.code(), Some(2));
    assert_eq!(bogp(&["baseline", "--config", s(&cfg), "--synthetic"]).status.code(), Some(2));
    assert_eq!(bogp(&["baseline", "--synthetic", "--folds", "1"]).status.code(), Some(2));
    assert_eq!(bogp(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn csv_input_with_text_labels() {
    let (d, _cfg, out) = setup("");
    let data = d.path().join("t.csv");
    let mut body = String::from("ts,a,b,kind,class\n");
    for i in 0..80 {
        let attack = i % 3 == 0;
        body.push_str(&format!(
            "t{i},{},{},x,{}\n",
            if attack { 5.0 + i as f64 * 0.01 } else { i as f64 * 0.01 },
            (i * 7 % 11) as f64,
            if attack { "attack" } else { "normal" }
        ));
    }
    fs::write(&data, body).unwrap();
    let cfg = d.path().join("c.cfg");
    fs::write(&cfg, "exclude = ts\nlabel_column = class\nlabel_normal = normal\nlabel_attack = attack\n").unwrap();
    run_ok(&["baseline", "--config", s(&cfg), "--data", s(&data), "--out", s(&out)]);
    let report = fs::read_to_string(out.join("baseline_report.csv")).unwrap();
    let dt = report.lines().nth(1).unwrap();
    assert!(dt.starts_with("DT,100.0,"), "{report}");
}

#[test]
fn report_without_inputs_names_the_missing_file() {
    let (_d, _cfg, out) = setup("");
    let o = bogp(&["report", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("baseline_report.csv"));
}

#[test]
fn locked_output_directory_is_refused() {
    let (_d, cfg, out) = setup(SMALL);
    fs::create_dir_all(&out).unwrap();
    fs::write(out.join(".bogp.lock"), "1").unwrap();
    let o = bogp(&["pca", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("in use"));
}

#[test]
fn full_pipeline_is_deterministic() {
    let (_d, cfg, out) = setup(SMALL);
    let files = [
        "baseline_report.csv",
        "trace_dt.csv",
        "trace_ensemble.csv",
        "optimized_report.csv",
        "final_report.csv",
        "final_report.md",
        "final_report.json",
    ];
    let mut first = Vec::new();
    for round in 0..2 {
        for cmd in ["baseline", "optimize", "report"] {
            run_ok(&[cmd, "--config", s(&cfg), "--out", s(&out), "--seed", "3"]);
        }
        let contents: Vec<Vec<u8>> = files.iter().map(|f| fs::read(out.join(f)).unwrap()).collect();
        if round == 0 {
            first = contents;
        } else {
            assert_eq!(first, contents);
        }
    }

    let trace = fs::read_to_string(out.join("trace_ensemble.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(
        lines.next(),
        Some("iteration,kind,n_learners,min_leaf_size,learning_rate,objective,best_so_far,duration_s")
    );
    let best: Vec<f64> = lines
        .map(|l| l.split(',').nth(6).unwrap().parse().unwrap())
        .collect();
    assert_eq!(best.len(), 6);
    assert!(best.windows(2).all(|w| w[1] <= w[0]));
    assert!(trace.lines().skip(1).all(|l| l.ends_with(',')));

    let dt = fs::read_to_string(out.join("trace_dt.csv")).unwrap();
    assert!(dt.lines().nth(1).unwrap().contains("DT(max_depth="));

    let final_csv = fs::read_to_string(out.join("final_report.csv")).unwrap();
    let names: Vec<&str> = final_csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names.len(), 6);
    assert_eq!(names[0], "DT");
    let md = fs::read_to_string(out.join("final_report.md")).unwrap();
    assert!(md.contains("**"));
    let json: serde_json::Value = serde_json::from_slice(&first[6]).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn budget_equal_to_init_gives_design_only_trace_and_seed_changes_trace() {
    let (_d, cfg, out) = setup(&format!("{SMALL}budget = 3\ntune_tree = false\n"));
    run_ok(&["optimize", "--config", s(&cfg), "--out", s(&out)]);
    let a = fs::read_to_string(out.join("trace_ensemble.csv")).unwrap();
    assert_eq!(a.lines().count(), 4);
    assert!(!out.join("trace_dt.csv").exists());
    run_ok(&["optimize", "--config", s(&cfg), "--out", s(&out), "--seed", "8"]);
    let b = fs::read_to_string(out.join("trace_ensemble.csv")).unwrap();
    assert_ne!(a, b);
    assert_eq!(a.lines().next(), b.lines().next());
}

#[test]
fn timing_flag_fills_duration_column() {
    let (_d, cfg, out) = setup(&format!("{SMALL}budget = 3\ntune_tree = false\n"));
    run_ok(&["optimize", "--config", s(&cfg), "--out", s(&out), "--timing"]);
    let t = fs::read_to_string(out.join("trace_ensemble.csv")).unwrap();
    assert!(t.lines().skip(1).all(|l| !l.ends_with(',')));
}
