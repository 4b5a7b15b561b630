//! End-to-end tests of the command-line interface, driving the built binary.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use cabin::bayesnet::{k2_learn, order_nodes, BayesianNetworkModel, Cpt, Dag, NodeSpec};
use cabin::discretizer::{
    build_scheme_with, discretize_series, DiscretizationScheme, GaussianTerm, SampleSeries,
    DEFAULT_EPSILON, DEFAULT_K_MAX,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cabin_cmd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cabin"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Writes a small CSV with two informative columns and one constant column.
fn write_sample_trace(path: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut csv = String::from("metric,constant,score\n");
    for _ in 0..2000 {
        let mode = if rng.random::<f64>() < 0.5 { 0.0 } else { 10.0 };
        let metric = mode + rng.random::<f64>() - 0.5;
        let score = mode / 10.0 + rng.random::<f64>() * 0.1;
        csv.push_str(&format!("{metric},5.0,{score}\n"));
    }
    std::fs::write(path, csv).unwrap();
}

#[test]
fn discretize_writes_a_scheme() {
    let dir = tempfile::tempdir().unwrap();
    write_sample_trace(&dir.path().join("trace.csv"));
    let out = cabin_cmd(
        dir.path(),
        &["discretize", "--input", "trace.csv", "--variable", "metric"],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let scheme =
        DiscretizationScheme::from_json(&std::fs::read_to_string(dir.path().join("metric.scheme.json")).unwrap())
            .unwrap();
    assert_eq!(scheme.term_count(), 2);
}

#[test]
fn discretize_unknown_variable_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    write_sample_trace(&dir.path().join("trace.csv"));
    let out = cabin_cmd(
        dir.path(),
        &["discretize", "--input", "trace.csv", "--variable", "nope"],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_of(&out).contains("unknown variable"));
}

#[test]
fn discretize_constant_column_warns_and_emits_single_value() {
    let dir = tempfile::tempdir().unwrap();
    write_sample_trace(&dir.path().join("trace.csv"));
    let out = cabin_cmd(
        dir.path(),
        &["discretize", "--input", "trace.csv", "--variable", "constant"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr_of(&out).contains("constant"));
    let scheme =
        DiscretizationScheme::from_json(&std::fs::read_to_string(dir.path().join("constant.scheme.json")).unwrap())
            .unwrap();
    assert_eq!(scheme.term_count(), 1);
}

#[test]
fn discretize_missing_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = cabin_cmd(
        dir.path(),
        &["discretize", "--input", "nothing.csv", "--variable", "x"],
    );
    assert_eq!(out.status.code(), Some(2));
}

/// Chain-generated continuous trace: a drives b drives c.
fn write_chain_trace(path: &Path) -> Vec<(String, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let modes = [0.0, 10.0, 20.0];
    let mut cols: Vec<(String, Vec<f64>)> = ["a", "b", "c"]
        .iter()
        .map(|n| (n.to_string(), Vec::new()))
        .collect();
    for _ in 0..4000 {
        let ai = rng.random_range(0..3usize);
        let bi = if rng.random::<f64>() < 0.85 {
            ai
        } else {
            rng.random_range(0..3)
        };
        let ci = if rng.random::<f64>() < 0.85 {
            bi
        } else {
            rng.random_range(0..3)
        };
        for (col, idx) in cols.iter_mut().zip([ai, bi, ci]) {
            col.1.push(modes[idx] + rng.random::<f64>() - 0.5);
        }
    }
    let mut csv = String::from("a,b,c\n");
    for row in 0..4000 {
        csv.push_str(&format!(
            "{},{},{}\n",
            cols[0].1[row], cols[1].1[row], cols[2].1[row]
        ));
    }
    std::fs::write(path, csv).unwrap();
    cols
}

#[test]
fn learn_recovers_the_chain_and_matches_the_library_path() {
    let dir = tempfile::tempdir().unwrap();
    let cols = write_chain_trace(&dir.path().join("chain.csv"));
    let out = cabin_cmd(
        dir.path(),
        &[
            "learn",
            "--input",
            "chain.csv",
            "--qos",
            "c",
            "--tunable",
            "a",
            "--output",
            "chain_model.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let model =
        BayesianNetworkModel::load(&dir.path().join("chain_model.json")).unwrap();

    // Oracle: run the same pipeline through the library directly.
    let mut schemes = BTreeMap::new();
    let mut series_list = Vec::new();
    for (name, values) in &cols {
        let series = SampleSeries::new(name.clone(), "", values.clone()).unwrap();
        schemes.insert(
            name.clone(),
            build_scheme_with(&series, DEFAULT_K_MAX, DEFAULT_EPSILON).unwrap(),
        );
        series_list.push(series);
    }
    let mut names = Vec::new();
    let mut cards = Vec::new();
    let mut columns = Vec::new();
    for series in &series_list {
        let scheme = &schemes[&series.variable];
        names.push(series.variable.clone());
        cards.push(scheme.term_count());
        columns.push(discretize_series(scheme, series).unwrap().labels);
    }
    let data = cabin::bayesnet::TraceDataset::new(names, cards, columns).unwrap();
    let ordering = order_nodes(&data, "c").unwrap();
    let dag = k2_learn(&data, &ordering, 3).unwrap();

    let edge_names = |dag: &Dag| -> Vec<(String, String)> {
        dag.edges()
            .iter()
            .map(|&(p, c)| (dag.node(p).name.clone(), dag.node(c).name.clone()))
            .collect()
    };
    assert_eq!(edge_names(model.dag()), edge_names(&dag));
}

#[test]
fn learn_missing_qos_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    write_chain_trace(&dir.path().join("chain.csv"));
    let out = cabin_cmd(dir.path(), &["learn", "--input", "chain.csv", "--qos", "zzz"]);
    assert_eq!(out.status.code(), Some(3));
}

/// Builds and saves the 3-rate hand model used by the tuner examples.
fn write_rate_model(path: &Path) {
    let scheme = |name: &str, means: &[f64]| DiscretizationScheme {
        variable: name.into(),
        unit: String::new(),
        terms: means
            .iter()
            .map(|&m| GaussianTerm {
                amplitude: 1.0,
                mean: m,
                width: 50.0,
            })
            .collect(),
        normalized: true,
        epsilon: 0.05,
        k_max: 6,
    };
    let nodes = vec![
        NodeSpec::context("rate", 3, true),
        NodeSpec::context("env", 2, false),
        NodeSpec::qos("quality", 2),
    ];
    let mut dag = Dag::new(nodes, vec![0, 1, 2]).unwrap();
    dag.add_edge(0, 2).unwrap();
    let cpts = vec![
        Cpt {
            node: 0,
            parents: vec![],
            parent_cards: vec![],
            cardinality: 3,
            rows: vec![vec![0.3, 0.4, 0.3]],
        },
        Cpt {
            node: 1,
            parents: vec![],
            parent_cards: vec![],
            cardinality: 2,
            rows: vec![vec![0.5, 0.5]],
        },
        Cpt {
            node: 2,
            parents: vec![0],
            parent_cards: vec![3],
            cardinality: 2,
            rows: vec![vec![0.8, 0.2], vec![0.1, 0.9], vec![0.5, 0.5]],
        },
    ];
    let mut schemes = BTreeMap::new();
    schemes.insert("rate".to_string(), scheme("rate", &[300.0, 700.0, 1100.0]));
    schemes.insert("env".to_string(), scheme("env", &[0.0, 1.0]));
    schemes.insert("quality".to_string(), scheme("quality", &[24.0, 38.0]));
    let model = BayesianNetworkModel::new(dag, cpts, schemes).unwrap();
    model.save(path).unwrap();
}

#[test]
fn tune_matches_the_hand_model() {
    let dir = tempfile::tempdir().unwrap();
    write_rate_model(&dir.path().join("model.json"));
    let out = cabin_cmd(
        dir.path(),
        &["tune", "--model", "model.json", "--target", "1"],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let v: serde_json::Value = serde_json::from_str(stdout_of(&out).trim()).unwrap();
    assert_eq!(v["qos_node"], "quality");
    assert_eq!(v["target_label"], 1);
    assert_eq!(v["assignment"]["rate"]["label"], 1);
    assert_eq!(v["assignment"]["rate"]["value"].as_f64().unwrap(), 700.0);
    assert!((v["probability"].as_f64().unwrap() - 0.9).abs() < 1e-9);
}

#[test]
fn tune_best_walks_the_preference() {
    let dir = tempfile::tempdir().unwrap();
    write_rate_model(&dir.path().join("model.json"));
    let out = cabin_cmd(
        dir.path(),
        &["tune", "--model", "model.json", "--target", "best"],
    );
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout_of(&out).trim()).unwrap();
    // Highest class mean first; label 1 is reachable at p = 0.9 >= 0.5.
    assert_eq!(v["target_label"], 1);
}

#[test]
fn tune_evidence_on_tunable_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    write_rate_model(&dir.path().join("model.json"));
    let out = cabin_cmd(
        dir.path(),
        &[
            "tune",
            "--model",
            "model.json",
            "--target",
            "1",
            "--evidence",
            "rate=0",
        ],
    );
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr_of(&out).contains("tunable"));
}

#[test]
fn tune_unknown_evidence_node_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    write_rate_model(&dir.path().join("model.json"));
    let out = cabin_cmd(
        dir.path(),
        &[
            "tune",
            "--model",
            "model.json",
            "--target",
            "1",
            "--evidence",
            "ghost=0",
        ],
    );
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr_of(&out).contains("unknown evidence node"));
}

#[test]
fn simulate_is_deterministic_and_counts_frames() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--strategy",
        "ton",
        "--participants",
        "4",
        "--seed",
        "42",
    ];
    let first = cabin_cmd(dir.path(), &args);
    assert_eq!(first.status.code(), Some(0), "stderr: {}", stderr_of(&first));
    let summary1 = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    let trace1 = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let second = cabin_cmd(dir.path(), &args);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(summary1, std::fs::read_to_string(dir.path().join("summary.json")).unwrap());
    assert_eq!(trace1, std::fs::read_to_string(dir.path().join("trace.csv")).unwrap());

    let v: serde_json::Value = serde_json::from_str(&summary1).unwrap();
    // 300 s at 25 fps.
    assert_eq!(v["frames_emitted_per_participant"], 7500);
    assert_eq!(
        trace1.lines().next().unwrap(),
        "time_s,participant_id,strategy,video_rate_kbps,avail_bw_kbps,est_bw_kbps,buffer_ms,loss_frac,rtt_ms,frame_psnr_db"
    );
}

#[test]
fn simulate_cabin_without_model_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = cabin_cmd(dir.path(), &["simulate", "--strategy", "cabin"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("train"));
}

#[test]
fn compare_small_grid_has_the_report_contract() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "compare",
        "--scenarios",
        "4",
        "--reps",
        "2",
        "--strategies",
        "ton,don",
        "--duration",
        "50",
    ];
    let out = cabin_cmd(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(
        lines.next().unwrap(),
        "participants,strategy,metric,mean,ci95_lo,ci95_hi,reps"
    );
    // 1 scenario x 2 strategies x 3 metrics.
    assert_eq!(lines.count(), 6);

    // Byte-identical on repetition.
    let again = cabin_cmd(dir.path(), &args);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(
        report,
        std::fs::read_to_string(dir.path().join("report.csv")).unwrap()
    );
}

#[test]
fn compare_single_rep_warns_and_leaves_ci_empty() {
    let dir = tempfile::tempdir().unwrap();
    let out = cabin_cmd(
        dir.path(),
        &[
            "compare",
            "--scenarios",
            "4",
            "--reps",
            "1",
            "--strategies",
            "don",
            "--duration",
            "50",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr_of(&out).contains("confidence intervals"));
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let row = report.lines().nth(1).unwrap();
    assert!(row.contains(",,"), "CI fields should be empty: {row}");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        "{\"participants\": 2, \"duration_s\": 50.0, \"seed\": 9}",
    )
    .unwrap();
    let out = cabin_cmd(
        dir.path(),
        &[
            "simulate",
            "--strategy",
            "don",
            "--config",
            "cfg.json",
            "--participants",
            "3",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    // Flag wins over the file; file wins over the defaults.
    assert_eq!(v["participants"], 3);
    assert_eq!(v["seed"], 9);
    assert_eq!(v["duration_s"].as_f64().unwrap(), 50.0);
}

#[test]
fn invalid_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), "{\"not_a_knob\": 1}").unwrap();
    let out = cabin_cmd(
        dir.path(),
        &["simulate", "--strategy", "don", "--config", "cfg.json"],
    );
    assert_eq!(out.status.code(), Some(2));
}
