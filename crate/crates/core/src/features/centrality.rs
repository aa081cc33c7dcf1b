//! Scalar node centralities and their extension to k-vectors by averaging
//! over exact-distance rings.

use std::collections::VecDeque;

use super::{column_names, FeatureMatrix, FeatureParams};
use crate::error::{Error, Result};
use crate::graph::{Graph, UNREACHED};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Centrality {
    PageRank,
    Degree,
    Closeness,
    Eigenvector,
    Load,
}

/// One value per node of `g`.
pub fn base_centrality(g: &Graph, kind: Centrality, params: &FeatureParams) -> Result<Vec<f64>> {
    match kind {
        Centrality::PageRank => page_rank(
            g,
            params.damping,
            params.tolerance,
            params.max_iters.unwrap_or(200),
        ),
        Centrality::Degree => Ok(degree(g)),
        Centrality::Closeness => Ok(closeness(g)),
        Centrality::Eigenvector => eigenvector(
            g,
            params.eigenvector_shift,
            params.tolerance,
            params.max_iters.unwrap_or(1000),
        ),
        Centrality::Load => Ok(load(g)),
    }
}

/// Power iteration; mass on isolated nodes is spread uniformly. Stops when
/// the L1 change drops below `tol`.
fn page_rank(g: &Graph, damping: f64, tol: f64, max_iters: usize) -> Result<Vec<f64>> {
    let n = g.node_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    let nf = n as f64;
    let mut x = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    for _ in 0..max_iters {
        let dangling: f64 = (0..n).filter(|&v| g.degree(v) == 0).map(|v| x[v]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        for (v, slot) in next.iter_mut().enumerate() {
            let inflow: f64 = g
                .neighbors(v)
                .iter()
                .map(|&u| x[u] / g.degree(u) as f64)
                .sum();
            *slot = base + damping * inflow;
        }
        let change: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if change < tol {
            return Ok(x);
        }
    }
    Err(Error::Convergence(format!(
        "page rank on graph {} did not converge in {max_iters} iterations",
        g.graph_id()
    )))
}

/// `deg(v) / (n - 1)`; zero for a single-node graph.
fn degree(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    if n <= 1 {
        return vec![0.0; n];
    }
    (0..n).map(|v| g.degree(v) as f64 / (n - 1) as f64).collect()
}

/// Closeness scaled by the reachable fraction, so disconnected graphs stay
/// well defined: `((r-1)/(n-1)) * ((r-1)/sum of distances)` where `r`
/// counts the nodes reachable from `v` including `v`.
fn closeness(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    (0..n)
        .map(|v| {
            let dist = g.distances_from(v, usize::MAX - 1);
            let (reach, total) = dist
                .iter()
                .filter(|&&d| d != UNREACHED)
                .fold((0usize, 0usize), |(r, t), &d| (r + 1, t + d));
            if total == 0 || n <= 1 {
                0.0
            } else {
                let r1 = (reach - 1) as f64;
                (r1 / (n - 1) as f64) * (r1 / total as f64)
            }
        })
        .collect()
}

/// Principal eigenvector of `A + shift*I` from an all-ones start,
/// L2-normalised with non-negative orientation.
fn eigenvector(g: &Graph, shift: f64, tol: f64, max_iters: usize) -> Result<Vec<f64>> {
    let n = g.node_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    if g.edge_count() == 0 {
        return Err(Error::DegenerateGraph(format!(
            "graph {} has no edges; eigenvector centrality is undefined",
            g.graph_id()
        )));
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut next = vec![0.0; n];
    for _ in 0..max_iters {
        for (v, slot) in next.iter_mut().enumerate() {
            *slot = shift * x[v] + g.neighbors(v).iter().map(|&u| x[u]).sum::<f64>();
        }
        let norm = next.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        next.iter_mut().for_each(|a| *a /= norm);
        let change: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if change < n as f64 * tol {
            if x.iter().sum::<f64>() < 0.0 {
                x.iter_mut().for_each(|a| *a = -*a);
            }
            return Ok(x);
        }
    }
    Err(Error::Convergence(format!(
        "eigenvector centrality on graph {} did not converge in {max_iters} iterations \
         (bipartite graphs oscillate without a diagonal shift)",
        g.graph_id()
    )))
}

/// Newman load: a unit packet between every ordered pair of nodes follows
/// shortest paths, splitting evenly at each branch. Endpoints are not
/// credited; totals are scaled by `1 / ((n-1)(n-2))`.
fn load(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut total = vec![0.0; n];
    let mut dist = vec![UNREACHED; n];
    let mut order = Vec::with_capacity(n);
    let mut carried = vec![0.0; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        dist.iter_mut().for_each(|d| *d = UNREACHED);
        order.clear();
        dist[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &w in g.neighbors(u) {
                if dist[w] == UNREACHED {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        // every reached node sends one packet back towards s
        for &u in &order {
            carried[u] = 1.0;
        }
        for &u in order.iter().rev() {
            if u == s {
                continue;
            }
            let preds: Vec<usize> = g
                .neighbors(u)
                .iter()
                .copied()
                .filter(|&p| dist[p] != UNREACHED && dist[p] + 1 == dist[u])
                .collect();
            let share = carried[u] / preds.len() as f64;
            for p in preds {
                if p != s {
                    carried[p] += share;
                }
            }
        }
        for &u in &order {
            if u != s {
                total[u] += carried[u] - 1.0;
            }
        }
    }
    if n <= 2 {
        return vec![0.0; n];
    }
    let scale = 1.0 / ((n - 1) * (n - 2)) as f64;
    total.into_iter().map(|t| t * scale).collect()
}

/// Extend a scalar measure to `k` values per node: element 1 is `base(v)`,
/// element `i` the mean of `base` over nodes at distance exactly `i - 1`
/// (0 when that ring is empty).
pub fn khop_average_expand(g: &Graph, base: &[f64], nodes: &[usize], k: usize) -> Result<FeatureMatrix> {
    if base.len() != g.node_count() {
        return Err(Error::Shape(format!(
            "{} base values for {} nodes",
            base.len(),
            g.node_count()
        )));
    }
    if k == 0 {
        return Err(Error::Parameter("k-hop expansion length must be at least 1".into()));
    }
    let mut data = Vec::with_capacity(nodes.len() * k);
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for &v in nodes {
        g.check_node(v)?;
        sums.iter_mut().for_each(|s| *s = 0.0);
        counts.iter_mut().for_each(|c| *c = 0);
        let dist = g.distances_from(v, k - 1);
        for (u, &d) in dist.iter().enumerate() {
            if d != UNREACHED {
                sums[d] += base[u];
                counts[d] += 1;
            }
        }
        data.extend(sums.iter().zip(&counts).map(|(&s, &c)| if c == 0 { 0.0 } else { s / c as f64 }));
    }
    let mut m = FeatureMatrix::from_rows(g.graph_id(), "khop", nodes, k, data);
    m.columns = column_names("khop", k);
    Ok(m)
}
