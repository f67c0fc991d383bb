use std::process::Command;

fn limit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_limit"))
}

#[test]
fn run_stats_plot_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let naive = dir.path().join("naive.csv");
    let bayes = dir.path().join("bayes.csv");
    for (algo, out) in [("naive", &naive), ("bayes", &bayes)] {
        let status = limit()
            .args(["run", "--preset", "sim1d", "--algo", algo, "--human", "align", "--seeds", "0..2", "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let text = std::fs::read_to_string(&naive).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 40);
    assert!(!dir.path().join("naive.csv.partial").exists());

    let stats = limit().args(["stats", "--window", "5", "--in"]).arg(&naive).arg(&bayes).output().unwrap();
    assert!(stats.status.success());
    let table = String::from_utf8(stats.stdout).unwrap();
    assert!(table.contains("naive") && table.contains("bayes"));

    let json = limit().args(["stats", "--json", "--in"]).arg(&naive).arg(&bayes).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["comparisons"].as_array().unwrap().len(), 1);

    let svg = dir.path().join("curves.svg");
    let status = limit().args(["plot", "--in"]).arg(&naive).arg(&bayes).arg("--out").arg(&svg).status().unwrap();
    assert!(status.success());
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn config_file_drives_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = limit_core::runner::ExperimentConfig::new(
        "sim2d",
        limit_core::runner::Algorithm::Naive,
        limit_core::humans::HumanKind::Rotate,
        vec![5],
    )
    .unwrap();
    cfg.env.interactions = 7;
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = limit().args(["run", "--config"]).arg(&path).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = limit_core::runner::read_rows(out.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r.seed == 5 && r.preset == "sim2d"));
}

#[test]
fn bad_arguments_fail_cleanly() {
    let out = limit().args(["run", "--preset", "sim9d", "--algo", "naive", "--seeds", "0"]).output().unwrap();
    assert!(!out.status.success());
    let out = limit().args(["run", "--algo", "magic", "--seeds", "0"]).output().unwrap();
    assert!(!out.status.success());
    let out = limit().args(["stats", "--in", "/nonexistent.csv"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn pretrain_writes_loadable_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("learner.json");
    let status = limit()
        .args(["pretrain", "--interactions", "4", "--seed", "2", "--out"])
        .arg(&path)
        .status()
        .unwrap();
    assert!(status.success());
    let learner = limit_core::learner::LimitLearner::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(learner.config().theta_dim, 2);
}
