//! Dataset ingestion: plain edge-list directories and the TU-Dortmund
//! benchmark layout.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::{info, warn};

use super::{Graph, GraphCollection, Labels};
use crate::error::{Error, Result};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Ingest {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Parse whitespace-separated integer pairs, one edge per line. `#` starts a
/// comment line. Only ids that take part in an edge become nodes.
pub fn parse_edge_list(text: &str, graph_id: usize, source: &Path) -> Result<Graph> {
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: source.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(parse_err(format!(
                "expected two node ids, found {} fields (weighted input is not supported)",
                tokens.len()
            )));
        }
        let mut ids = [0i64; 2];
        for (slot, tok) in ids.iter_mut().zip(&tokens) {
            *slot = tok
                .parse()
                .map_err(|_| parse_err(format!("'{tok}' is not an integer node id")))?;
        }
        if ids[0] == ids[1] {
            warn!("{}:{}: dropping self-loop on {}", source.display(), lineno + 1, ids[0]);
            continue;
        }
        edges.push((ids[0], ids[1]));
    }
    if edges.is_empty() {
        return Err(Error::EmptyGraph(format!("{} contains no edges", source.display())));
    }
    Graph::from_id_edges(graph_id, &edges)
}

/// Load one graph per file from a directory (files taken in name order), or
/// a single graph from a file path.
pub fn load_edge_list(path: &Path) -> Result<GraphCollection> {
    let files: Vec<PathBuf> = if path.is_dir() {
        let mut files = Vec::new();
        let entries = fs::read_dir(path).map_err(|e| Error::Ingest {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        for entry in entries {
            let entry = entry?;
            let p = entry.path();
            let hidden = entry.file_name().to_string_lossy().starts_with('.');
            if p.is_file() && !hidden {
                files.push(p);
            }
        }
        files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
        files
    } else {
        vec![path.to_path_buf()]
    };
    if files.is_empty() {
        return Err(Error::Ingest {
            path: path.to_path_buf(),
            message: "no edge-list files found".into(),
        });
    }
    let graphs = files
        .iter()
        .enumerate()
        .map(|(i, f)| parse_edge_list(&read(f)?, i, f))
        .collect::<Result<Vec<_>>>()?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    GraphCollection::new(name, graphs, None)
}

fn non_empty_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

const OPTIONAL_TUD_FILES: [&str; 5] = [
    "node_labels",
    "node_attributes",
    "edge_labels",
    "edge_attributes",
    "graph_attributes",
];

/// Load a TU-Dortmund benchmark dataset from `dir`.
///
/// Node ids in `NAME_A.txt` are the 1-based global ids of
/// `NAME_graph_indicator.txt`; graphs are ordered by indicator value and
/// labelled in that order from `NAME_graph_labels.txt`. Node and edge
/// attribute files are not used.
pub fn load_tud_dataset(dir: &Path, name: &str) -> Result<GraphCollection> {
    let file = |suffix: &str| dir.join(format!("{name}_{suffix}.txt"));
    let a_path = file("A");
    let ind_path = file("graph_indicator");
    let lab_path = file("graph_labels");
    for p in [&a_path, &ind_path, &lab_path] {
        if !p.is_file() {
            return Err(Error::Ingest {
                path: p.clone(),
                message: "required file is missing".into(),
            });
        }
    }
    for extra in OPTIONAL_TUD_FILES {
        if file(extra).is_file() {
            info!("{name}: ignoring {name}_{extra}.txt");
        }
    }

    let indicator_text = read(&ind_path)?;
    let mut indicator = Vec::new();
    for (line, tok) in non_empty_lines(&indicator_text) {
        let gid: i64 = tok.parse().map_err(|_| Error::Parse {
            path: ind_path.clone(),
            line,
            message: format!("'{tok}' is not a graph id"),
        })?;
        indicator.push(gid);
    }
    // graph id -> dense index, ascending
    let order: BTreeMap<i64, usize> = {
        let mut ids: Vec<i64> = indicator.clone();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter().enumerate().map(|(i, g)| (g, i)).collect()
    };
    let mut members: Vec<Vec<i64>> = vec![Vec::new(); order.len()];
    for (node, gid) in indicator.iter().enumerate() {
        members[order[gid]].push(node as i64 + 1);
    }

    let a_text = read(&a_path)?;
    let mut edges: Vec<Vec<(i64, i64)>> = vec![Vec::new(); order.len()];
    for (line, tok) in non_empty_lines(&a_text) {
        let parse_err = |message: String| Error::Parse {
            path: a_path.clone(),
            line,
            message,
        };
        let parts: Vec<&str> = tok.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(parse_err(format!("expected 'u, v', found '{tok}'")));
        }
        let mut ends = [0i64; 2];
        for (slot, p) in ends.iter_mut().zip(&parts) {
            *slot = p
                .parse()
                .map_err(|_| parse_err(format!("'{p}' is not an integer node id")))?;
            if *slot < 1 || *slot as usize > indicator.len() {
                return Err(parse_err(format!(
                    "node id {} outside 1..={}",
                    slot,
                    indicator.len()
                )));
            }
        }
        let (u, v) = (ends[0], ends[1]);
        let (gu, gv) = (indicator[u as usize - 1], indicator[v as usize - 1]);
        if gu != gv {
            return Err(Error::Format(format!(
                "{}:{line}: edge {u}-{v} joins graphs {gu} and {gv}",
                a_path.display()
            )));
        }
        if u == v {
            warn!("{}:{line}: dropping self-loop on {u}", a_path.display());
            continue;
        }
        edges[order[&gu]].push((u, v));
    }

    let mut graphs = Vec::with_capacity(order.len());
    for (i, (ids, es)) in members.into_iter().zip(edges).enumerate() {
        let index: std::collections::HashMap<i64, usize> =
            ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();
        let pairs: Vec<(usize, usize)> = es.iter().map(|(u, v)| (index[u], index[v])).collect();
        let g = Graph::from_edges(i, ids, pairs)?;
        g.validate()?;
        graphs.push(g);
    }

    let label_text = read(&lab_path)?;
    let tokens: Vec<&str> = non_empty_lines(&label_text).map(|(_, t)| t).collect();
    if tokens.len() != graphs.len() {
        return Err(Error::Format(format!(
            "{} has {} labels for {} graphs",
            lab_path.display(),
            tokens.len(),
            graphs.len()
        )));
    }
    let labels = Labels::parse(&tokens).map_err(|message| Error::Parse {
        path: lab_path.clone(),
        line: 0,
        message,
    })?;
    GraphCollection::new(name, graphs, Some(labels))
}

/// Write a labelled collection in TU-Dortmund layout, assigning consecutive
/// global node ids graph by graph.
pub fn write_tud_dataset(collection: &GraphCollection, dir: &Path, name: &str) -> Result<()> {
    let labels = collection
        .labels()
        .ok_or_else(|| Error::Parameter("TU-Dortmund output requires graph labels".into()))?;
    fs::create_dir_all(dir)?;
    let mut a = fs::File::create(dir.join(format!("{name}_A.txt")))?;
    let mut ind = fs::File::create(dir.join(format!("{name}_graph_indicator.txt")))?;
    let mut lab = fs::File::create(dir.join(format!("{name}_graph_labels.txt")))?;
    let mut base = 1usize;
    for (gi, g) in collection.graphs().iter().enumerate() {
        for _ in 0..g.node_count() {
            writeln!(ind, "{}", gi + 1)?;
        }
        for u in 0..g.node_count() {
            for &v in g.neighbors(u) {
                writeln!(a, "{}, {}", base + u, base + v)?;
            }
        }
        writeln!(lab, "{}", labels.display(gi))?;
        base += g.node_count();
    }
    Ok(())
}
