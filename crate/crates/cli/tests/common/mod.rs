#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Output;

use graphset::graph::{generate_planted_partition, write_tud_dataset};
use graphset::{Graph, GraphCollection, Labels};

/// Two classes of planted-partition graphs differing in average degree.
pub fn two_class_collection(m: usize, n: usize, seed: u64) -> GraphCollection {
    let graphs: Vec<Graph> = (0..m)
        .map(|i| {
            let degree = if i % 2 == 0 { 4 } else { 6 };
            let xi = 0.2 + 0.6 * (i as f64 / m as f64);
            generate_planted_partition(n, &[n / 2, n - n / 2], xi, seed * 10_000 + i as u64, degree).unwrap()
        })
        .collect();
    let labels = Labels::Class((0..m).map(|i| (i % 2) as i64).collect());
    GraphCollection::new("planted", graphs, Some(labels)).unwrap()
}

/// Write `collection` as a TUD dataset under `root/<name>` and return that
/// directory.
pub fn write_fixture(root: &Path, name: &str, collection: &GraphCollection) -> PathBuf {
    let dir = root.join(name);
    std::fs::create_dir_all(&dir).unwrap();
    write_tud_dataset(collection, &dir, name).unwrap();
    dir
}

pub fn write_config(path: &Path, value: &serde_json::Value) {
    std::fs::write(path, serde_json::to_vec_pretty(value).unwrap()).unwrap();
}

pub fn graphset(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_graphset"))
        .args(args)
        .env_remove("GRAPHSET_THREADS")
        .output()
        .unwrap()
}

pub fn base_config(dataset: &Path, out: &Path) -> serde_json::Value {
    serde_json::json!({
        "dataset": {"path": dataset, "format": "tud"},
        "features": [
            {"name": "self_walk", "length": 3},
            {"name": "expansion", "length": 3},
            {"name": "degree_centrality", "length": 2}
        ],
        "embedding": {"method": "approximate", "dim": 4},
        "eval": {"n_runs": 10, "forest": {"n_trees": 30}},
        "seed": 7,
        "output_dir": out
    })
}
