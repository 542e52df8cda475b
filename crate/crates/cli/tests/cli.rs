//! End-to-end tests of the `resolver` binary.

use std::path::Path;
use std::process::{Command, Output};

fn resolver() -> Command {
    Command::new(env!("CARGO_BIN_EXE_resolver"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    resolver()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

const SIM_CONFIG: &str = r#"
expected_records = 200
distortion = "low"
duplication_mu = 1.0
seed = 42
output = "simout"
"#;

const FIT_CONFIG: &str = r#"
dataset = "simout/dataset.csv"
output = "fitout"

[run]
iterations = 300
burn_in = 100
thin = 10
seed = 7

[attributes.first_name]
distance = "normalized-levenshtein"
cutoff = 0.3

[attributes.last_name]
distance = "normalized-levenshtein"
cutoff = 0.3

[attributes.gender]
distance = "constant"

[attributes.birth_year]
distance = "constant"

[attributes.birth_month]
distance = "constant"

[attributes.birth_day]
distance = "constant"

[attributes.zipcode]
distance = "constant"
base = "frequency"
"#;

#[test]
fn simulate_fit_evaluate_diagnose_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write(&root.join("sim.toml"), SIM_CONFIG);
    write(&root.join("exp.toml"), FIT_CONFIG);

    let out = run(&["simulate", "sim.toml"], root);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(root.join("simout/dataset.csv").exists());
    assert!(root.join("simout/truth.csv").exists());

    let out = run(&["fit", "exp.toml"], root);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["links.csv", "scalars.csv", "run.json"] {
        assert!(root.join("fitout").join(file).exists(), "{file}");
    }
    let links = std::fs::read_to_string(root.join("fitout/links.csv")).unwrap();
    // 20 stored samples x 200-ish records, plus a header.
    let lines = links.lines().count();
    assert_eq!(links.lines().next().unwrap(), "sample_index,record_id,entity_label");
    assert!(lines > 20 * 150, "{lines} rows");

    let out = run(
        &[
            "evaluate",
            "--links",
            "fitout/links.csv",
            "--truth",
            "simout/truth.csv",
            "--output",
            "evalout",
        ],
        root,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(root.join("evalout/summary.csv")).unwrap();
    assert!(summary.starts_with("metric,median,ci_lower,ci_upper"));
    assert!(summary.contains("\nf1,"));
    assert!(root.join("evalout/metrics.csv").exists());

    let out = run(
        &[
            "diagnose",
            "--scalars",
            "fitout/scalars.csv",
            "--output",
            "diagout",
        ],
        root,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let geweke = std::fs::read_to_string(root.join("diagout/geweke.csv")).unwrap();
    assert!(geweke.starts_with("scalar,z,status"));
    assert!(root.join("diagout/trace.csv").exists());
}

#[test]
fn fit_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write(&root.join("sim.toml"), SIM_CONFIG);
    assert!(run(&["simulate", "sim.toml"], root).status.success());
    write(&root.join("exp.toml"), FIT_CONFIG);
    write(
        &root.join("exp2.toml"),
        &FIT_CONFIG.replace("output = \"fitout\"", "output = \"fitout2\""),
    );

    assert!(run(&["fit", "exp.toml"], root).status.success());
    assert!(run(&["fit", "exp2.toml"], root).status.success());
    for file in ["links.csv", "scalars.csv"] {
        let one = std::fs::read(root.join("fitout").join(file)).unwrap();
        let two = std::fs::read(root.join("fitout2").join(file)).unwrap();
        assert_eq!(one, two, "{file} differs between identically seeded runs");
    }
}

#[test]
fn multi_chain_fit_writes_per_chain_directories() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write(&root.join("sim.toml"), SIM_CONFIG);
    assert!(run(&["simulate", "sim.toml"], root).status.success());
    write(&root.join("exp.toml"), FIT_CONFIG);

    let out = resolver()
        .args(["fit", "exp.toml", "--chains", "2"])
        .env("RESOLVER_THREADS", "1")
        .current_dir(root)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(root.join("fitout/chain-0/links.csv").exists());
    assert!(root.join("fitout/chain-1/links.csv").exists());
    let one = std::fs::read(root.join("fitout/chain-0/links.csv")).unwrap();
    let two = std::fs::read(root.join("fitout/chain-1/links.csv")).unwrap();
    assert_ne!(one, two, "chains with different seeds should differ");
}

#[test]
fn missing_attribute_spec_exits_2_naming_the_column() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write(&root.join("sim.toml"), SIM_CONFIG);
    assert!(run(&["simulate", "sim.toml"], root).status.success());
    // Drop the zipcode spec.
    let broken = FIT_CONFIG.replace("[attributes.zipcode]\ndistance = \"constant\"\nbase = \"frequency\"\n", "");
    write(&root.join("exp.toml"), &broken);
    let out = run(&["fit", "exp.toml"], root);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("zipcode"), "stderr: {stderr}");
}

#[test]
fn invalid_simulation_rate_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write(
        &root.join("sim.toml"),
        &SIM_CONFIG.replace("duplication_mu = 1.0", "duplication_mu = -3.0"),
    );
    let out = run(&["simulate", "sim.toml"], root);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn evaluate_perfect_links_scores_one_with_degenerate_interval() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let truth = "record_id,entity_id\n0,5\n1,5\n2,9\n3,9\n";
    write(&root.join("truth.csv"), truth);
    let mut links = String::from("sample_index,record_id,entity_label\n");
    for sample in 0..3 {
        for (record, entity) in [(0, 0), (1, 0), (2, 2), (3, 2)] {
            links.push_str(&format!("{sample},{record},{entity}\n"));
        }
    }
    write(&root.join("links.csv"), &links);
    let out = run(
        &[
            "evaluate",
            "--links",
            "links.csv",
            "--truth",
            "truth.csv",
            "--output",
            "out",
        ],
        root,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(root.join("out/summary.csv")).unwrap();
    for metric in ["precision", "recall", "f1"] {
        assert!(summary.contains(&format!("{metric},1,1,1")), "{summary}");
    }
}

#[test]
fn evaluate_rejects_mismatched_ids() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write(&root.join("truth.csv"), "record_id,entity_id\n0,0\n1,1\n2,2\n");
    write(
        &root.join("links.csv"),
        "sample_index,record_id,entity_label\n0,0,0\n0,1,0\n0,7,0\n",
    );
    let out = run(
        &[
            "evaluate",
            "--links",
            "links.csv",
            "--truth",
            "truth.csv",
            "--output",
            "out",
        ],
        root,
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains('7'), "stderr: {stderr}");
}

#[test]
fn diagnose_handles_short_and_constant_traces() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let mut scalars = String::from("sample_index,E,theta\n");
    for i in 0..30 {
        scalars.push_str(&format!("{i},4,{}\n", 0.25));
    }
    write(&root.join("scalars.csv"), &scalars);
    let out = run(
        &["diagnose", "--scalars", "scalars.csv", "--output", "out"],
        root,
    );
    assert!(out.status.success());
    let geweke = std::fs::read_to_string(root.join("out/geweke.csv")).unwrap();
    assert!(geweke.contains("E,,not-applicable"));
    assert!(geweke.contains("theta,,not-applicable"));
}

#[test]
fn blink_preset_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write(&root.join("sim.toml"), SIM_CONFIG);
    assert!(run(&["simulate", "sim.toml"], root).status.success());
    let blink = FIT_CONFIG.replace(
        "output = \"fitout\"",
        "output = \"fitout\"\ndistortion_model = \"blink\"",
    );
    write(&root.join("exp.toml"), &blink);
    let out = run(&["fit", "exp.toml"], root);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = std::fs::read_to_string(root.join("fitout/run.json")).unwrap();
    assert!(manifest.contains("\"distortion_model\": \"blink\""));
    assert!(manifest.contains("\"ep_regime\": \"coupon-fixed\""));
}
