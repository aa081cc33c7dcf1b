mod common;

use common::*;
use graphset::graph::write_tud_dataset;
use graphset::{Graph, GraphCollection, Labels};

fn read(path: &std::path::Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn embed_two_graph_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_fixture(tmp.path(), "tiny", &two_class_collection(2, 20, 1));
    let out = tmp.path().join("out");
    let cfg = tmp.path().join("cfg.json");
    write_config(&cfg, &base_config(&data, &out));
    let o = graphset(&["embed", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out.join("embedding.csv"));
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# config_hash: "));
    assert_eq!(lines[1], "graph_id,label,e_1,e_2,e_3,e_4");
    assert_eq!(lines.len(), 4);
    let manifest: serde_json::Value = serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert!(manifest["outputs"].as_array().unwrap().iter().any(|v| v == "embedding.csv"));
    let sidecar: serde_json::Value = serde_json::from_str(&read(&out.join("embedding.json"))).unwrap();
    assert!(sidecar["singular_values"].is_array());
}

#[test]
fn classify_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_fixture(tmp.path(), "planted", &two_class_collection(30, 30, 2));
    let out = tmp.path().join("out");
    let cfg = tmp.path().join("cfg.json");
    write_config(&cfg, &base_config(&data, &out));
    let o = graphset(&["classify", "--config", cfg.to_str().unwrap(), "--threads", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&read(&out.join("report.json"))).unwrap();
    let acc = report["eval"]["accuracy"]["mean"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));
    assert!(report["eval"]["accuracy"]["std"].is_number());
    assert!(read(&out.join("summary.csv")).lines().nth(2).unwrap().starts_with("planted,classify,10,"));
}

#[test]
fn invalid_rate_exits_2_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_fixture(tmp.path(), "planted", &two_class_collection(12, 20, 3));
    let out = tmp.path().join("out");
    let mut c = base_config(&data, &out);
    c["sweep"] = serde_json::json!({"rates": [1.0, 1.2]});
    let cfg = tmp.path().join("cfg.json");
    write_config(&cfg, &c);
    let o = graphset(&["similarity", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn config_and_ingestion_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = tmp.path().join("cfg.json");

    let mut c = base_config(&tmp.path().join("missing"), &out);
    write_config(&cfg, &c);
    assert_eq!(graphset(&["embed", "--config", cfg.to_str().unwrap()]).status.code(), Some(3));

    c["embedding"]["dimension"] = 3.into();
    write_config(&cfg, &c);
    assert_eq!(graphset(&["embed", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unshifted_eigenvector_on_bipartite_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    // stars are bipartite: plain power iteration oscillates
    let graphs: Vec<Graph> = (0..4)
        .map(|i| Graph::from_id_edges(0, &(1..5 + i).map(|j| (0, j)).collect::<Vec<_>>()).unwrap())
        .collect();
    let c = GraphCollection::new("stars", graphs, Some(Labels::Class(vec![0, 1, 0, 1]))).unwrap();
    let dir = tmp.path().join("stars");
    std::fs::create_dir_all(&dir).unwrap();
    write_tud_dataset(&c, &dir, "stars").unwrap();
    let mut config = base_config(&dir, &tmp.path().join("out"));
    config["features"] = serde_json::json!([{"name": "eigenvector_centrality", "length": 1}]);
    config["embedding"]["dim"] = 1.into();
    let cfg = tmp.path().join("cfg.json");
    write_config(&cfg, &config);
    let o = graphset(&["embed", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn select_and_bench() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_fixture(tmp.path(), "planted", &two_class_collection(20, 24, 4));
    let out = tmp.path().join("out");
    let mut c = base_config(&data, &out);
    c["selection"] = serde_json::json!({"final_reference_size": 4});
    let cfg = tmp.path().join("cfg.json");
    write_config(&cfg, &c);
    let o = graphset(&["select", "--method", "greedy", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sel: serde_json::Value = serde_json::from_str(&read(&out.join("selection.json"))).unwrap();
    assert_eq!(sel["ordered_features"].as_array().unwrap().len(), 3);
    assert_eq!(read(&out.join("selection.csv")).lines().nth(1), Some("prefix,mean,std"));

    let o = graphset(&["select", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let bench_out = tmp.path().join("bench");
    let o = graphset(&["bench", "--config", cfg.to_str().unwrap(), "--out", bench_out.to_str().unwrap()]);
    assert!(o.status.success());
    let bench: serde_json::Value = serde_json::from_str(&read(&bench_out.join("bench.json"))).unwrap();
    assert!(bench["timing"]["features_and_embedding_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn outputs_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_fixture(tmp.path(), "planted", &two_class_collection(20, 24, 5));
    let cfg = tmp.path().join("cfg.json");
    let mut c = base_config(&data, &tmp.path().join("unused"));
    c["embedding"] = serde_json::json!({"method": "wasserstein", "dim": 3, "reference_size": 6});
    write_config(&cfg, &c);
    let mut seen = Vec::new();
    for threads in ["1", "3"] {
        let out = tmp.path().join(format!("out{threads}"));
        let o = graphset(&["classify", "--config", cfg.to_str().unwrap(), "--threads", threads, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        seen.push((read(&out.join("embedding.csv")), read(&out.join("report.json"))));
    }
    assert_eq!(seen[0], seen[1]);
}
