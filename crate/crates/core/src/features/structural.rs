//! Features read directly off the graph structure: expansion profile,
//! layer-transition random walks, and closed-walk counts.

use rand::Rng;

use super::FeatureMatrix;
use crate::error::{Error, Result};
use crate::graph::{Graph, UNREACHED};
use crate::seed;

/// Expansion profile: element `i` is `m_i / (m_{i-1} * d)` where `m_i` is
/// the number of nodes at distance exactly `i` (with `m_0 = 1`) and `d` the
/// graph's average degree. Once a layer is empty the remaining elements are
/// zero.
pub fn expansion_feature(g: &Graph, nodes: &[usize], k: usize) -> Result<FeatureMatrix> {
    let avg = g.average_degree();
    if avg <= 0.0 {
        return Err(Error::DegenerateGraph(format!(
            "graph {} has no edges; expansion is undefined",
            g.graph_id()
        )));
    }
    let mut data = Vec::with_capacity(nodes.len() * k);
    for &v in nodes {
        let dist = g.distances_from(v, k);
        let mut layer = vec![0usize; k + 1];
        for d in dist.into_iter().filter(|&d| d != UNREACHED) {
            layer[d] += 1;
        }
        for i in 1..=k {
            let prev = layer[i - 1];
            // an empty layer stays empty further out, so every later element is 0 too
            data.push(if prev == 0 {
                0.0
            } else {
                layer[i] as f64 / (prev as f64 * avg)
            });
        }
    }
    Ok(FeatureMatrix::from_rows(g.graph_id(), "expansion", nodes, k, data))
}

/// Layer-transition signature.
///
/// Nodes within distance `k` of `v` are grouped into BFS layers. From `v`,
/// `walks` random walks of `k` steps are run; element `i` is the pooled
/// fraction of steps taken from layer `i - 1` that land in layer `i`. Layers
/// never visited give 0. Each node's walks use their own generator derived
/// from `(seed, graph id, node id)`.
pub fn lsme_feature(g: &Graph, nodes: &[usize], k: usize, walks: usize, seed: u64) -> FeatureMatrix {
    let mut data = Vec::with_capacity(nodes.len() * k);
    let mut visits = vec![0u64; k];
    let mut outward = vec![0u64; k];
    for &v in nodes {
        let dist = g.distances_from(v, k);
        visits.iter_mut().for_each(|c| *c = 0);
        outward.iter_mut().for_each(|c| *c = 0);
        let mut rng = seed::rng_for(
            seed,
            &[seed::TAG_LSME, g.graph_id() as u64, g.node_id(v) as u64],
        );
        for _ in 0..walks {
            let mut at = v;
            for _ in 0..k {
                let nbrs = g.neighbors(at);
                if nbrs.is_empty() {
                    break;
                }
                let next = nbrs[rng.gen_range(0..nbrs.len())];
                // after t < k steps the walker is within distance t of v
                let layer = dist[at];
                visits[layer] += 1;
                if dist[next] == layer + 1 {
                    outward[layer] += 1;
                }
                at = next;
            }
        }
        data.extend(visits.iter().zip(&outward).map(|(&n, &o)| {
            if n == 0 {
                0.0
            } else {
                o as f64 / n as f64
            }
        }));
    }
    FeatureMatrix::from_rows(g.graph_id(), "lsme", nodes, k, data)
}

/// Closed-walk counts: element `j` is the number of closed walks of length
/// `j + 1` through the node, i.e. `diag(A^(j+1))`. Length 1 is skipped as
/// there are no self-loops.
pub fn self_walk_feature(g: &Graph, nodes: &[usize], k: usize) -> FeatureMatrix {
    let n = g.node_count();
    let mut data = Vec::with_capacity(nodes.len() * k);
    let mut x = vec![0.0f64; n];
    let mut y = vec![0.0f64; n];
    for &v in nodes {
        x.iter_mut().for_each(|c| *c = 0.0);
        x[v] = 1.0;
        // x holds walk counts from v after t steps
        for t in 1..=k + 1 {
            for (u, slot) in y.iter_mut().enumerate() {
                *slot = g.neighbors(u).iter().map(|&w| x[w]).sum();
            }
            std::mem::swap(&mut x, &mut y);
            if t >= 2 {
                data.push(x[v]);
            }
        }
    }
    FeatureMatrix::from_rows(g.graph_id(), "self_walk", nodes, k, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use approx::assert_abs_diff_eq;

    fn all(g: &Graph) -> Vec<usize> {
        (0..g.node_count()).collect()
    }

    #[test]
    fn expansion_examples() {
        let m = expansion_feature(&cycle(6), &all(&cycle(6)), 2).unwrap();
        for r in 0..6 {
            assert_eq!(m.values.row(r).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.5]);
        }
        let m = expansion_feature(&complete(4), &[0, 3], 2).unwrap();
        assert_eq!(m.values.row(1).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0]);
        // star centre: average degree 10/6, five neighbours, nothing further
        let m = expansion_feature(&star(5), &[0], 2).unwrap();
        assert_abs_diff_eq!(m.values[(0, 0)], 3.0, epsilon = 1e-12);
        assert_eq!(m.values[(0, 1)], 0.0);
        let edgeless = Graph::from_edges(0, vec![0, 1], []).unwrap();
        assert!(matches!(expansion_feature(&edgeless, &[0], 2), Err(Error::DegenerateGraph(_))));
    }

    #[test]
    fn expansion_regular_first_element_is_one() {
        for g in [cycle(9), complete(5)] {
            let m = expansion_feature(&g, &all(&g), 3).unwrap();
            assert!(m.values.column(0).iter().all(|&x| x == 1.0));
        }
    }

    /// Exact expected step counts from propagating the walker's distribution.
    fn lsme_exact(g: &Graph, v: usize, k: usize) -> Vec<f64> {
        let dist = g.distances_from(v, k);
        let mut p = vec![0.0; g.node_count()];
        p[v] = 1.0;
        let mut visits = vec![0.0; k];
        let mut outward = vec![0.0; k];
        for _ in 0..k {
            let mut next = vec![0.0; g.node_count()];
            for x in 0..g.node_count() {
                if p[x] == 0.0 || g.degree(x) == 0 {
                    continue;
                }
                let share = p[x] / g.degree(x) as f64;
                visits[dist[x]] += p[x];
                for &w in g.neighbors(x) {
                    if dist[w] == dist[x] + 1 {
                        outward[dist[x]] += share;
                    }
                    next[w] += share;
                }
            }
            p = next;
        }
        visits.iter().zip(&outward).map(|(n, o)| if *n == 0.0 { 0.0 } else { o / n }).collect()
    }

    #[test]
    fn lsme_vertex_transitive_cycle() {
        let g = cycle(8);
        let exact = lsme_exact(&g, 0, 3);
        assert_eq!(exact, vec![1.0, 0.5, 0.5]);
        let walks = 2000;
        let m = lsme_feature(&g, &all(&g), 3, walks, 17);
        // visits to layer i-1 before the last step: one per walk for layers
        // 0 and 1 at best, half the walks for layer 2 on the cycle
        let visits = [walks as f64, walks as f64, walks as f64 / 2.0];
        for c in 0..3 {
            let se = (exact[c] * (1.0 - exact[c]) / visits[c]).sqrt();
            let col: Vec<f64> = m.values.column(c).iter().copied().collect();
            let spread = col.iter().cloned().fold(f64::MIN, f64::max) - col.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread <= 8.0 * se + 1e-12, "column {c} spread {spread}");
            for x in col {
                assert!((x - exact[c]).abs() <= 4.0 * se + 1e-12, "column {c} value {x}");
            }
        }
    }

    #[test]
    fn lsme_matches_exact_chain_on_irregular_graph() {
        let g = Graph::from_id_edges(0, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (3, 4), (4, 5)]).unwrap();
        let m = lsme_feature(&g, &all(&g), 3, 20_000, 5);
        for v in 0..g.node_count() {
            let exact = lsme_exact(&g, v, 3);
            for c in 0..3 {
                assert!((m.values[(v, c)] - exact[c]).abs() < 0.02, "node {v} col {c}");
            }
        }
    }

    #[test]
    fn lsme_trivial_cases() {
        let edge = path(2);
        let m = lsme_feature(&edge, &[0, 1], 1, 10, 0);
        assert_eq!(m.values[(0, 0)], 1.0);
        assert_eq!(m.values[(1, 0)], 1.0);
        assert_eq!(lsme_feature(&star(4), &[0], 1, 10, 0).values[(0, 0)], 1.0);
        let lonely = Graph::from_edges(0, vec![0, 1, 2], [(1, 2)]).unwrap();
        assert_eq!(lsme_feature(&lonely, &[0], 2, 10, 0).values.iter().sum::<f64>(), 0.0);
        assert_eq!(lsme_feature(&cycle(6), &[2], 3, 50, 9), lsme_feature(&cycle(6), &[2], 3, 50, 9));
    }

    #[test]
    fn self_walk_examples() {
        let m = self_walk_feature(&complete(3), &[0, 1, 2], 2);
        for r in 0..3 {
            assert_eq!(m.values.row(r).iter().copied().collect::<Vec<_>>(), vec![2.0, 2.0]);
        }
        assert_eq!(self_walk_feature(&path(3), &[1], 1).values[(0, 0)], 2.0);
        let m = self_walk_feature(&path(2), &[0], 2);
        assert_eq!(m.values.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0]);
    }
}
