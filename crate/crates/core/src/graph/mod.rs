//! Simple undirected graphs, labelled collections, and the preprocessing
//! steps applied before feature extraction.

mod generate;
mod io;

use std::collections::{HashMap, VecDeque};

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

pub use generate::generate_planted_partition;
pub use io::{load_edge_list, load_tud_dataset, parse_edge_list, write_tud_dataset};

/// Marker for an unreachable node in distance arrays.
pub const UNREACHED: usize = usize::MAX;

/// A simple undirected graph in compressed sparse row form.
///
/// Each edge is stored once per endpoint so that `neighbors(u)` contains `v`
/// exactly when `neighbors(v)` contains `u`. Neighbor lists are ordered by
/// external node id, which makes every traversal independent of how the
/// nodes happen to be indexed internally.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    graph_id: usize,
    node_ids: Vec<i64>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Graph {
    /// Build a graph from node ids and index pairs. Duplicate and reversed
    /// pairs collapse to one edge; self-loops and out-of-range indices are
    /// rejected.
    pub fn from_edges<I>(graph_id: usize, node_ids: Vec<i64>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let n = node_ids.len();
        {
            let mut seen = HashMap::with_capacity(n);
            for (idx, &id) in node_ids.iter().enumerate() {
                if let Some(prev) = seen.insert(id, idx) {
                    return Err(Error::Format(format!(
                        "node id {id} appears at indices {prev} and {idx}"
                    )));
                }
            }
        }
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::NodeIndex {
                    index: u.max(v),
                    node_count: n,
                });
            }
            if u == v {
                return Err(Error::Format(format!("self-loop on node id {}", node_ids[u])));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for list in &mut adjacency {
            list.sort_unstable_by_key(|&w| (node_ids[w], w));
            list.dedup();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        Ok(Self {
            graph_id,
            node_ids,
            offsets,
            targets,
        })
    }

    /// Build a graph whose node set is exactly the ids mentioned by `edges`,
    /// indexed in ascending id order.
    pub fn from_id_edges(graph_id: usize, edges: &[(i64, i64)]) -> Result<Self> {
        let mut ids: Vec<i64> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        ids.sort_unstable();
        ids.dedup();
        let index: HashMap<i64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let pairs: Vec<(usize, usize)> = edges.iter().map(|(a, b)| (index[a], index[b])).collect();
        Self::from_edges(graph_id, ids, pairs)
    }

    pub fn empty(graph_id: usize) -> Self {
        Self {
            graph_id,
            node_ids: Vec::new(),
            offsets: vec![0],
            targets: Vec::new(),
        }
    }

    pub fn graph_id(&self) -> usize {
        self.graph_id
    }

    pub fn with_graph_id(mut self, graph_id: usize) -> Self {
        self.graph_id = graph_id;
        self
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn node_ids(&self) -> &[i64] {
        &self.node_ids
    }

    pub fn node_id(&self, v: usize) -> i64 {
        self.node_ids[v]
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count())
            .flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u, v)))
            .filter(|(u, v)| u < v)
    }

    /// Mean degree `2|E| / N`; zero for the empty graph.
    pub fn average_degree(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.targets.len() as f64 / self.node_count() as f64
        }
    }

    pub fn check_node(&self, v: usize) -> Result<()> {
        if v < self.node_count() {
            Ok(())
        } else {
            Err(Error::NodeIndex {
                index: v,
                node_count: self.node_count(),
            })
        }
    }

    /// Induced subgraph on `keep`, preserving original ids. Nodes are
    /// re-indexed in the order given.
    pub fn induced_subgraph(&self, keep: &[usize]) -> Graph {
        let mut remap = vec![UNREACHED; self.node_count()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let ids = keep.iter().map(|&v| self.node_ids[v]).collect();
        let edges: Vec<(usize, usize)> = self
            .edges()
            .filter(|&(u, v)| remap[u] != UNREACHED && remap[v] != UNREACHED)
            .map(|(u, v)| (remap[u], remap[v]))
            .collect();
        Graph::from_edges(self.graph_id, ids, edges).expect("induced subgraph of a valid graph")
    }

    /// Same graph with node indices reordered: new index `i` holds old node
    /// `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Graph> {
        let mut seen = vec![false; self.node_count()];
        if order.len() != self.node_count() {
            return Err(Error::Shape(format!(
                "permutation of length {} for {} nodes",
                order.len(),
                self.node_count()
            )));
        }
        for &v in order {
            self.check_node(v)?;
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::Parameter(format!("node {v} repeated in permutation")));
            }
        }
        Ok(self.induced_subgraph(order))
    }

    /// Structural invariants: symmetry and absence of loops or duplicates.
    pub fn validate(&self) -> Result<()> {
        for u in 0..self.node_count() {
            let nbrs = self.neighbors(u);
            for (i, &v) in nbrs.iter().enumerate() {
                if v == u {
                    return Err(Error::Format(format!("self-loop at node {u}")));
                }
                if i > 0 && nbrs[i - 1] == v {
                    return Err(Error::Format(format!("duplicate edge {u}-{v}")));
                }
                if !self.neighbors(v).contains(&u) {
                    return Err(Error::Format(format!("asymmetric edge {u}->{v}")));
                }
            }
        }
        Ok(())
    }

    /// Hop distances from `source`, truncated at `max_depth`; nodes beyond
    /// the cut-off are [`UNREACHED`].
    pub fn distances_from(&self, source: usize, max_depth: usize) -> Vec<usize> {
        let mut dist = vec![UNREACHED; self.node_count()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            if du == max_depth {
                continue;
            }
            for &w in self.neighbors(u) {
                if dist[w] == UNREACHED {
                    dist[w] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Connected components as sorted node-index lists, in order of their
    /// smallest member index.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut label = vec![UNREACHED; n];
        let mut comps = Vec::new();
        for start in 0..n {
            if label[start] != UNREACHED {
                continue;
            }
            let cid = comps.len();
            let mut members = vec![start];
            label[start] = cid;
            let mut head = 0;
            while head < members.len() {
                let u = members[head];
                head += 1;
                for &w in self.neighbors(u) {
                    if label[w] == UNREACHED {
                        label[w] = cid;
                        members.push(w);
                    }
                }
            }
            members.sort_unstable();
            comps.push(members);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() <= 1 || self.connected_components().len() == 1
    }
}

/// Nodes grouped by exact hop distance from `v`: layer 0 is `{v}`, layer
/// `i` the nodes at shortest-path distance `i`, up to `max_depth`. Trailing
/// empty layers are not emitted.
pub fn bfs_layers(g: &Graph, v: usize, max_depth: usize) -> Result<Vec<Vec<usize>>> {
    g.check_node(v)?;
    let dist = g.distances_from(v, max_depth);
    let mut layers: Vec<Vec<usize>> = Vec::new();
    for (u, &d) in dist.iter().enumerate() {
        if d == UNREACHED {
            continue;
        }
        if layers.len() <= d {
            layers.resize_with(d + 1, Vec::new);
        }
        layers[d].push(u);
    }
    Ok(layers)
}

/// Induced subgraph on the largest connected component. Equal-sized
/// components are ranked by their smallest original node id.
pub fn largest_component(g: &Graph) -> Result<Graph> {
    if g.is_empty() {
        return Err(Error::EmptyGraph(format!("graph {} has no nodes", g.graph_id())));
    }
    let best = g
        .connected_components()
        .into_iter()
        .map(|c| {
            let min_id = c.iter().map(|&v| g.node_id(v)).min().unwrap_or(i64::MAX);
            (c, min_id)
        })
        .max_by(|(a, ida), (b, idb)| a.len().cmp(&b.len()).then(idb.cmp(ida)))
        .map(|(c, _)| c)
        .expect("non-empty graph has a component");
    Ok(g.induced_subgraph(&best))
}

/// Maximal induced subgraph in which every node has degree at least `k`.
pub fn k_core(g: &Graph, k: usize) -> Result<Graph> {
    if k == 0 {
        return Err(Error::Parameter("k-core order must be at least 1".into()));
    }
    let n = g.node_count();
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&v| degree[v] < k).collect();
    for &v in &stack {
        removed[v] = true;
    }
    while let Some(v) = stack.pop() {
        for &w in g.neighbors(v) {
            if removed[w] {
                continue;
            }
            degree[w] -= 1;
            if degree[w] < k {
                removed[w] = true;
                stack.push(w);
            }
        }
    }
    let keep: Vec<usize> = (0..n).filter(|&v| !removed[v]).collect();
    Ok(g.induced_subgraph(&keep))
}

/// Uniformly sampled node subset of a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSample {
    pub graph_id: usize,
    pub kept_nodes: Vec<usize>,
    pub rate: f64,
}

/// Number of nodes kept at `rate`: `max(1, round(rate * n))`, capped at `n`.
pub fn sample_size(n: usize, rate: f64) -> usize {
    ((rate * n as f64).round() as usize).max(1).min(n)
}

pub fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 && rate <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("sampling rate {rate} outside (0, 1]")))
    }
}

/// Uniform sample without replacement. The graph itself is untouched; only
/// the set of nodes on which features will be computed is chosen.
pub fn sample_nodes(g: &Graph, rate: f64, seed: u64) -> Result<NodeSample> {
    check_rate(rate)?;
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph(format!("graph {} has no nodes", g.graph_id())));
    }
    let kept_nodes = if rate == 1.0 {
        (0..n).collect()
    } else {
        let mut rng = seed::rng_for(seed, &[seed::TAG_SAMPLE, g.graph_id() as u64]);
        let mut kept = index::sample(&mut rng, n, sample_size(n, rate)).into_vec();
        kept.sort_unstable();
        kept
    };
    Ok(NodeSample {
        graph_id: g.graph_id(),
        kept_nodes,
        rate,
    })
}

/// Per-graph target values: categorical classes or real-valued responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum Labels {
    Class(Vec<i64>),
    Real(Vec<f64>),
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Class(v) => v.len(),
            Labels::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self, Labels::Class(_))
    }

    pub fn subset(&self, idx: &[usize]) -> Labels {
        match self {
            Labels::Class(v) => Labels::Class(idx.iter().map(|&i| v[i]).collect()),
            Labels::Real(v) => Labels::Real(idx.iter().map(|&i| v[i]).collect()),
        }
    }

    /// Parse label tokens: all-integer input becomes categorical, anything
    /// else numeric becomes real-valued.
    pub fn parse<S: AsRef<str>>(tokens: &[S]) -> std::result::Result<Labels, String> {
        let ints: Option<Vec<i64>> = tokens.iter().map(|t| t.as_ref().trim().parse().ok()).collect();
        if let Some(v) = ints {
            return Ok(Labels::Class(v));
        }
        tokens
            .iter()
            .map(|t| {
                let t = t.as_ref().trim();
                t.parse::<f64>().map_err(|_| format!("label '{t}' is not numeric"))
            })
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map(Labels::Real)
    }

    /// Label of graph `i` rendered for CSV output.
    pub fn display(&self, i: usize) -> String {
        match self {
            Labels::Class(v) => v[i].to_string(),
            Labels::Real(v) => crate::output::fmt_num(v[i]),
        }
    }
}

/// Ordered collection of graphs analysed jointly.
#[derive(Debug, Clone)]
pub struct GraphCollection {
    name: String,
    graphs: Vec<Graph>,
    labels: Option<Labels>,
}

impl GraphCollection {
    /// Assemble a collection; graph ids are reassigned to `0..m` in order.
    pub fn new(name: impl Into<String>, graphs: Vec<Graph>, labels: Option<Labels>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != graphs.len() {
                return Err(Error::Shape(format!(
                    "{} labels for {} graphs",
                    l.len(),
                    graphs.len()
                )));
            }
        }
        let graphs = graphs
            .into_iter()
            .enumerate()
            .map(|(i, g)| g.with_graph_id(i))
            .collect();
        Ok(Self {
            name: name.into(),
            graphs,
            labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    /// Replace every graph with `f(graph)`, keeping ids and labels.
    pub fn map_graphs<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&Graph) -> Result<Graph>,
    {
        let graphs = self.graphs.iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(self.name.clone(), graphs, self.labels.clone())
    }

    /// Collection restricted to (and reordered by) `order`.
    pub fn select(&self, order: &[usize]) -> Result<Self> {
        let graphs = order.iter().map(|&i| self.graphs[i].clone()).collect();
        let labels = self.labels.as_ref().map(|l| l.subset(order));
        Self::new(self.name.clone(), graphs, labels)
    }

    pub fn mean_node_count(&self) -> f64 {
        mean(self.graphs.iter().map(|g| g.node_count() as f64))
    }

    pub fn mean_edge_count(&self) -> f64 {
        mean(self.graphs.iter().map(|g| g.edge_count() as f64))
    }

    pub fn class_count(&self) -> Option<usize> {
        match &self.labels {
            Some(Labels::Class(v)) => {
                let mut v = v.clone();
                v.sort_unstable();
                v.dedup();
                Some(v.len())
            }
            _ => None,
        }
    }
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = it.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if c == 0 {
        0.0
    } else {
        s / c as f64
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::Graph;

    pub fn path(n: usize) -> Graph {
        Graph::from_edges(0, (0..n as i64).collect(), (1..n).map(|i| (i - 1, i))).unwrap()
    }

    pub fn cycle(n: usize) -> Graph {
        Graph::from_edges(0, (0..n as i64).collect(), (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    pub fn complete(n: usize) -> Graph {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::from_edges(0, (0..n as i64).collect(), edges).unwrap()
    }

    /// Star with `leaves` leaves; node 0 is the centre.
    pub fn star(leaves: usize) -> Graph {
        Graph::from_edges(0, (0..=leaves as i64).collect(), (1..=leaves).map(|i| (0, i))).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn sizes(layers: &[Vec<usize>]) -> Vec<usize> {
        layers.iter().map(Vec::len).collect()
    }

    #[test]
    fn duplicate_and_reversed_edges_collapse() {
        let g = Graph::from_id_edges(0, &[(0, 1), (1, 0), (0, 1)]).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        g.validate().unwrap();
    }

    #[test]
    fn self_loops_and_repeated_ids_rejected() {
        assert!(Graph::from_edges(0, vec![0, 1], [(0, 0)]).is_err());
        assert!(Graph::from_edges(0, vec![3, 3], [(0, 1)]).is_err());
        assert!(matches!(
            Graph::from_edges(0, vec![0, 1], [(0, 2)]),
            Err(Error::NodeIndex { .. })
        ));
    }

    #[test]
    fn bfs_layer_sizes() {
        for v in 0..6 {
            assert_eq!(sizes(&bfs_layers(&cycle(6), v, 3).unwrap()), vec![1, 2, 2, 1]);
        }
        assert_eq!(sizes(&bfs_layers(&complete(4), 2, 5).unwrap()), vec![1, 3]);
        let isolated = Graph::from_edges(0, vec![0, 1, 2], [(1, 2)]).unwrap();
        assert_eq!(bfs_layers(&isolated, 0, 4).unwrap(), vec![vec![0]]);
        assert!(matches!(bfs_layers(&isolated, 3, 1), Err(Error::NodeIndex { .. })));
        // depth cut-off
        assert_eq!(sizes(&bfs_layers(&path(6), 0, 2).unwrap()), vec![1, 1, 1]);
    }

    #[test]
    fn largest_component_cases() {
        let g = Graph::from_id_edges(0, &[(0, 1), (1, 2), (2, 0), (10, 11)]).unwrap();
        let lc = largest_component(&g).unwrap();
        assert_eq!(lc.node_ids(), &[0, 1, 2]);
        assert_eq!(lc.edge_count(), 3);

        let c = cycle(5);
        assert_eq!(largest_component(&c).unwrap(), c);

        // equal sizes: the component holding the smallest id wins
        let twins = Graph::from_id_edges(0, &[(3, 4), (4, 5), (5, 3), (0, 1), (1, 2), (2, 0)]).unwrap();
        let lc = largest_component(&twins).unwrap();
        assert!(lc.node_ids().contains(&0));
        assert_eq!(lc.node_count(), 3);

        assert!(matches!(largest_component(&Graph::empty(0)), Err(Error::EmptyGraph(_))));
    }

    #[test]
    fn k_core_cases() {
        assert_eq!(k_core(&complete(3), 2).unwrap().node_count(), 3);
        assert!(k_core(&path(3), 2).unwrap().is_empty());
        // K4 minus an edge: degrees (2,2,3,3); peeling at k=3 removes everything
        let k4e = Graph::from_edges(0, vec![0, 1, 2, 3], [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert!(k_core(&k4e, 3).unwrap().is_empty());
        assert_eq!(k_core(&k4e, 2).unwrap().node_count(), 4);
        assert!(k_core(&k4e, 0).is_err());
    }

    #[test]
    fn sampling_sizes_and_determinism() {
        let g = cycle(10);
        assert_eq!(sample_nodes(&g, 1.0, 1).unwrap().kept_nodes, (0..10).collect::<Vec<_>>());
        let a = sample_nodes(&g, 0.5, 9).unwrap();
        assert_eq!(a.kept_nodes.len(), 5);
        assert_eq!(a, sample_nodes(&g, 0.5, 9).unwrap());
        assert_eq!(sample_nodes(&complete(3), 0.1, 4).unwrap().kept_nodes.len(), 1);
        for bad in [0.0, -0.2, 1.5, f64::NAN] {
            assert!(matches!(sample_nodes(&g, bad, 1), Err(Error::Parameter(_))));
        }
    }

    #[test]
    fn labels_parse() {
        assert_eq!(Labels::parse(&["1", "-1", " 0"]).unwrap(), Labels::Class(vec![1, -1, 0]));
        assert_eq!(Labels::parse(&["1", "0.5"]).unwrap(), Labels::Real(vec![1.0, 0.5]));
        assert!(Labels::parse(&["x"]).is_err());
    }

    #[test]
    fn collection_checks_label_count() {
        let gs = vec![path(3), path(4)];
        assert!(GraphCollection::new("x", gs.clone(), Some(Labels::Class(vec![1]))).is_err());
        let c = GraphCollection::new("x", gs, Some(Labels::Class(vec![1, 2]))).unwrap();
        assert_eq!(c.graphs()[1].graph_id(), 1);
        assert_eq!(c.class_count(), Some(2));
    }
}
