//! Per-node structural feature vectors.
//!
//! Every feature produces a fixed number of columns per node. Built-in
//! features are selected by name; custom ones can be added through a
//! [`FeatureRegistry`]. Feature matrices of a collection are computed graph
//! by graph (in parallel) and assembled in graph order.

mod centrality;
mod structural;
mod transform;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphCollection, NodeSample};
use crate::output::fmt_num;

pub use centrality::{base_centrality, khop_average_expand, Centrality};
pub use structural::{expansion_feature, lsme_feature, self_walk_feature};
pub use transform::{concatenate_features, pca_reduce, standardize_features, PcaSummary};
pub(crate) use transform::orient;

/// Built-in node features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureKind {
    Expansion,
    Lsme,
    SelfWalk,
    PageRank,
    DegreeCentrality,
    ClosenessCentrality,
    EigenvectorCentrality,
    LoadCentrality,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 8] = [
        FeatureKind::Expansion,
        FeatureKind::Lsme,
        FeatureKind::SelfWalk,
        FeatureKind::PageRank,
        FeatureKind::DegreeCentrality,
        FeatureKind::ClosenessCentrality,
        FeatureKind::EigenvectorCentrality,
        FeatureKind::LoadCentrality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Expansion => "expansion",
            FeatureKind::Lsme => "lsme",
            FeatureKind::SelfWalk => "self_walk",
            FeatureKind::PageRank => "page_rank",
            FeatureKind::DegreeCentrality => "degree_centrality",
            FeatureKind::ClosenessCentrality => "closeness_centrality",
            FeatureKind::EigenvectorCentrality => "eigenvector_centrality",
            FeatureKind::LoadCentrality => "load_centrality",
        }
    }

    fn centrality(self) -> Option<Centrality> {
        match self {
            FeatureKind::PageRank => Some(Centrality::PageRank),
            FeatureKind::DegreeCentrality => Some(Centrality::Degree),
            FeatureKind::ClosenessCentrality => Some(Centrality::Closeness),
            FeatureKind::EigenvectorCentrality => Some(Centrality::Eigenvector),
            FeatureKind::LoadCentrality => Some(Centrality::Load),
            _ => None,
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownFeature(s.to_string()))
    }
}

/// Tunables shared by the built-in features; each feature reads only the
/// fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureParams {
    /// PageRank damping factor.
    pub damping: f64,
    /// Random walks started from each node (LSME).
    pub walks_per_node: usize,
    /// Convergence tolerance for power iterations.
    pub tolerance: f64,
    /// Iteration cap for power iterations; `None` picks the per-measure
    /// default (200 for PageRank, 1000 for eigenvector centrality).
    pub max_iters: Option<usize>,
    /// Diagonal shift `s` in the eigenvector iteration `(A + sI)x`. Zero
    /// runs the plain iteration, which fails to converge on bipartite graphs.
    pub eigenvector_shift: f64,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            damping: 0.85,
            walks_per_node: 200,
            tolerance: 1e-9,
            max_iters: None,
            eigenvector_shift: 0.0,
        }
    }
}

/// One requested feature: its name, its per-node length `k`, and settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSpec {
    pub name: String,
    pub length: usize,
    #[serde(default)]
    pub params: FeatureParams,
}

impl FeatureSpec {
    pub fn new(kind: FeatureKind, length: usize) -> Self {
        Self {
            name: kind.name().to_string(),
            length,
            params: FeatureParams::default(),
        }
    }

    pub fn with_params(mut self, params: FeatureParams) -> Self {
        self.params = params;
        self
    }

    pub fn validate(&self, registry: &FeatureRegistry) -> Result<()> {
        if self.length == 0 {
            return Err(Error::Parameter(format!("feature '{}' has length 0", self.name)));
        }
        if self.name.parse::<FeatureKind>().is_err() && !registry.contains(&self.name) {
            return Err(Error::UnknownFeature(self.name.clone()));
        }
        Ok(())
    }
}

/// Column names `name_1 .. name_k`.
pub fn column_names(name: &str, k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("{name}_{i}")).collect()
}

/// Node-by-feature table for one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub graph_id: usize,
    pub columns: Vec<String>,
    /// One row per entry of `node_index`.
    pub values: DMatrix<f64>,
    /// Row to node-index map into the source graph.
    pub node_index: Vec<usize>,
}

impl FeatureMatrix {
    pub fn new(
        graph_id: usize,
        columns: Vec<String>,
        values: DMatrix<f64>,
        node_index: Vec<usize>,
    ) -> Result<Self> {
        if values.nrows() != node_index.len() || values.ncols() != columns.len() {
            return Err(Error::Shape(format!(
                "{}x{} values for {} nodes and {} columns",
                values.nrows(),
                values.ncols(),
                node_index.len(),
                columns.len()
            )));
        }
        let mut sorted = columns.clone();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Shape(format!("duplicate column '{}'", w[0])));
        }
        Ok(Self {
            graph_id,
            columns,
            values,
            node_index,
        })
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn width(&self) -> usize {
        self.values.ncols()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Matrix restricted to the named columns, in the order given.
    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<FeatureMatrix> {
        let idx = names
            .iter()
            .map(|n| {
                self.column_index(n.as_ref())
                    .ok_or_else(|| Error::UnknownFeature(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let values = self.values.select_columns(&idx);
        FeatureMatrix::new(
            self.graph_id,
            idx.iter().map(|&i| self.columns[i].clone()).collect(),
            values,
            self.node_index.clone(),
        )
    }

    /// Matrix restricted to the given rows.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            graph_id: self.graph_id,
            columns: self.columns.clone(),
            values: self.values.select_rows(rows),
            node_index: rows.iter().map(|&r| self.node_index[r]).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    pub(crate) fn from_rows(graph_id: usize, name: &str, nodes: &[usize], k: usize, data: Vec<f64>) -> Self {
        // data is row-major: one k-vector per node
        let values = DMatrix::from_row_slice(nodes.len(), k, &data);
        FeatureMatrix {
            graph_id,
            columns: column_names(name, k),
            values,
            node_index: nodes.to_vec(),
        }
    }
}

/// Signature of a user-supplied node feature: given the graph, the node
/// subset and the declared length, return one row per node.
pub type CustomFeature = dyn Fn(&Graph, &[usize], usize) -> Result<DMatrix<f64>> + Send + Sync;

/// Named custom features that can be requested alongside the built-ins.
#[derive(Clone, Default)]
pub struct FeatureRegistry {
    custom: BTreeMap<String, Arc<CustomFeature>>,
}

impl fmt::Debug for FeatureRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.custom.keys()).finish()
    }
}

impl FeatureRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register `f` under `name`. Built-in names cannot be shadowed.
    pub fn register<F>(&mut self, name: impl Into<String>, f: F) -> Result<()>
    where
        F: Fn(&Graph, &[usize], usize) -> Result<DMatrix<f64>> + Send + Sync + 'static,
    {
        let name = name.into();
        if name.parse::<FeatureKind>().is_ok() {
            return Err(Error::Parameter(format!("'{name}' is a built-in feature")));
        }
        self.custom.insert(name, Arc::new(f));
        Ok(())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.custom.contains_key(name)
    }

    fn compute_custom(&self, spec: &FeatureSpec, g: &Graph, nodes: &[usize]) -> Result<FeatureMatrix> {
        let f = self
            .custom
            .get(&spec.name)
            .ok_or_else(|| Error::UnknownFeature(spec.name.clone()))?;
        let values = f(g, nodes, spec.length)?;
        if values.nrows() != nodes.len() || values.ncols() != spec.length {
            return Err(Error::Shape(format!(
                "custom feature '{}' returned {}x{}, expected {}x{}",
                spec.name,
                values.nrows(),
                values.ncols(),
                nodes.len(),
                spec.length
            )));
        }
        FeatureMatrix::new(g.graph_id(), column_names(&spec.name, spec.length), values, nodes.to_vec())
    }
}

/// Compute one feature on a node subset of `g`.
pub fn compute_feature(
    g: &Graph,
    nodes: &[usize],
    spec: &FeatureSpec,
    registry: &FeatureRegistry,
    seed: u64,
) -> Result<FeatureMatrix> {
    spec.validate(registry)?;
    for &v in nodes {
        g.check_node(v)?;
    }
    let Ok(kind) = spec.name.parse::<FeatureKind>() else {
        return registry.compute_custom(spec, g, nodes);
    };
    let k = spec.length;
    let p = &spec.params;
    match kind {
        FeatureKind::Expansion => expansion_feature(g, nodes, k),
        FeatureKind::Lsme => Ok(lsme_feature(g, nodes, k, p.walks_per_node, seed)),
        FeatureKind::SelfWalk => Ok(self_walk_feature(g, nodes, k)),
        _ => {
            let c = kind.centrality().expect("centrality kind");
            let base = base_centrality(g, c, p)?;
            let mut m = khop_average_expand(g, &base, nodes, k)?;
            m.columns = column_names(kind.name(), k);
            Ok(m)
        }
    }
}

/// Compute and concatenate every requested feature for one graph.
pub fn compute_graph_features(
    g: &Graph,
    nodes: &[usize],
    specs: &[FeatureSpec],
    registry: &FeatureRegistry,
    seed: u64,
) -> Result<FeatureMatrix> {
    if specs.is_empty() {
        return Err(Error::Parameter("no features requested".into()));
    }
    let parts = specs
        .iter()
        .map(|s| compute_feature(g, nodes, s, registry, seed))
        .collect::<Result<Vec<_>>>()?;
    let m = concatenate_features(&parts)?;
    if !m.all_finite() {
        return Err(Error::Pipeline {
            graph_id: g.graph_id(),
            message: "non-finite feature value".into(),
        });
    }
    Ok(m)
}

/// Feature matrices for every graph, in graph order. With `samples`, only
/// the sampled nodes of each graph get a row.
pub fn compute_collection_features(
    collection: &GraphCollection,
    specs: &[FeatureSpec],
    registry: &FeatureRegistry,
    seed: u64,
    samples: Option<&[NodeSample]>,
) -> Result<Vec<FeatureMatrix>> {
    for s in specs {
        s.validate(registry)?;
    }
    if let Some(samples) = samples {
        if samples.len() != collection.len() {
            return Err(Error::Shape(format!(
                "{} node samples for {} graphs",
                samples.len(),
                collection.len()
            )));
        }
    }
    collection
        .graphs()
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let nodes: Vec<usize> = match samples {
                Some(s) => s[i].kept_nodes.clone(),
                None => (0..g.node_count()).collect(),
            };
            compute_graph_features(g, &nodes, specs, registry, seed).map_err(|e| match e {
                e @ Error::Pipeline { .. } => e,
                e if e.is_numeric() => e,
                e => Error::Pipeline {
                    graph_id: i,
                    message: e.to_string(),
                },
            })
        })
        .collect()
}

/// Write `graph_id,node_id,<feature columns>` rows with a header.
pub fn write_features_csv<W: Write>(
    out: &mut W,
    collection: &GraphCollection,
    matrices: &[FeatureMatrix],
) -> Result<()> {
    let Some(first) = matrices.first() else {
        return Ok(());
    };
    write!(out, "graph_id,node_id")?;
    for c in &first.columns {
        write!(out, ",{c}")?;
    }
    writeln!(out)?;
    for m in matrices {
        let g = &collection.graphs()[m.graph_id];
        for r in 0..m.rows() {
            write!(out, "{},{}", m.graph_id, g.node_id(m.node_index[r]))?;
            for c in 0..m.width() {
                write!(out, ",{}", fmt_num(m.values[(r, c)]))?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    #[test]
    fn kinds_round_trip_by_name() {
        for k in FeatureKind::ALL {
            assert_eq!(k.name().parse::<FeatureKind>().unwrap(), k);
        }
        assert!(matches!("nope".parse::<FeatureKind>(), Err(Error::UnknownFeature(_))));
    }

    #[test]
    fn graph_features_concatenate_in_spec_order() {
        let g = cycle(6);
        let specs = [
            FeatureSpec::new(FeatureKind::Lsme, 3),
            FeatureSpec::new(FeatureKind::Expansion, 3),
        ];
        let nodes: Vec<usize> = (0..6).collect();
        let m = compute_graph_features(&g, &nodes, &specs, &FeatureRegistry::new(), 1).unwrap();
        assert_eq!(m.width(), 6);
        assert_eq!(m.columns[0], "lsme_1");
        assert_eq!(m.columns[5], "expansion_3");
    }

    #[test]
    fn custom_feature_registration() {
        let mut reg = FeatureRegistry::new();
        reg.register("degree_squared", |g: &Graph, nodes: &[usize], k| {
            Ok(DMatrix::from_fn(nodes.len(), k, |r, _| (g.degree(nodes[r]) as f64).powi(2)))
        })
        .unwrap();
        assert!(reg.register("lsme", |_: &Graph, _: &[usize], _| unreachable!()).is_err());
        let spec = FeatureSpec {
            name: "degree_squared".into(),
            length: 2,
            params: FeatureParams::default(),
        };
        let m = compute_feature(&star(3), &[0, 1], &spec, &reg, 0).unwrap();
        assert_eq!(m.values[(0, 1)], 9.0);
        assert_eq!(m.columns, vec!["degree_squared_1", "degree_squared_2"]);

        reg.register("bad", |_: &Graph, _: &[usize], _| Ok(DMatrix::zeros(1, 1))).unwrap();
        let bad = FeatureSpec { name: "bad".into(), ..spec };
        assert!(matches!(compute_feature(&star(3), &[0, 1], &bad, &reg, 0), Err(Error::Shape(_))));
    }

    #[test]
    fn sampled_rows_only() {
        let c = GraphCollection::new("t", vec![cycle(8), path(5)], None).unwrap();
        let samples = vec![
            crate::graph::sample_nodes(&c.graphs()[0], 0.5, 3).unwrap(),
            crate::graph::sample_nodes(&c.graphs()[1], 0.4, 3).unwrap(),
        ];
        let specs = [FeatureSpec::new(FeatureKind::PageRank, 2)];
        let reg = FeatureRegistry::new();
        let full = compute_collection_features(&c, &specs, &reg, 0, None).unwrap();
        let part = compute_collection_features(&c, &specs, &reg, 0, Some(&samples)).unwrap();
        assert_eq!(part[0].rows(), 4);
        assert_eq!(part[1].rows(), 2);
        // sampling changes which rows are computed, never their values
        for (p, f) in part.iter().zip(&full) {
            for (r, &node) in p.node_index.iter().enumerate() {
                assert_eq!(p.values.row(r), f.values.row(node));
            }
        }
    }

    #[test]
    fn csv_layout() {
        let c = GraphCollection::new("t", vec![path(2)], None).unwrap();
        let specs = [FeatureSpec::new(FeatureKind::DegreeCentrality, 1)];
        let m = compute_collection_features(&c, &specs, &FeatureRegistry::new(), 0, None).unwrap();
        let mut buf = Vec::new();
        write_features_csv(&mut buf, &c, &m).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "graph_id,node_id,degree_centrality_1\n0,0,1\n0,1,1\n"
        );
    }
}
