//! Planted-partition generator used to build synthetic collections with a
//! tunable amount of background noise.

use std::collections::HashSet;

use rand::Rng;

use super::Graph;
use crate::error::{Error, Result};
use crate::seed;

const MAX_RETRIES: usize = 100;

/// Random graph on `n` nodes split into consecutive communities of the given
/// sizes. Each node initiates about `degree / 2` edges (so ends up with about
/// `degree`); with probability `xi` the partner is drawn uniformly from all
/// nodes, otherwise from the node's own community. Colliding draws are
/// retried a bounded number of times and then skipped.
pub fn generate_planted_partition(
    n: usize,
    communities: &[usize],
    xi: f64,
    seed: u64,
    degree: usize,
) -> Result<Graph> {
    if communities.iter().sum::<usize>() != n {
        return Err(Error::Generation(format!(
            "community sizes sum to {}, expected {n}",
            communities.iter().sum::<usize>()
        )));
    }
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::Generation(format!("xi = {xi} outside [0, 1]")));
    }
    let smallest = communities.iter().copied().min().unwrap_or(0);
    if smallest == 0 || degree >= smallest {
        return Err(Error::Generation(format!(
            "degree {degree} must be below the smallest community size {smallest}"
        )));
    }

    let mut community_of = Vec::with_capacity(n);
    let mut starts = Vec::with_capacity(communities.len());
    let mut start = 0;
    for (c, &size) in communities.iter().enumerate() {
        starts.push(start);
        community_of.extend(std::iter::repeat(c).take(size));
        start += size;
    }

    let mut rng = seed::rng_for(seed, &[seed::TAG_GENERATOR, n as u64, degree as u64]);
    let mut present: HashSet<(usize, usize)> = HashSet::new();
    let mut edges = Vec::new();
    for v in 0..n {
        let initiated = degree / 2 + usize::from(degree % 2 == 1 && v % 2 == 1);
        for _ in 0..initiated {
            for _ in 0..MAX_RETRIES {
                let w = if rng.gen::<f64>() < xi {
                    rng.gen_range(0..n)
                } else {
                    let c = community_of[v];
                    starts[c] + rng.gen_range(0..communities[c])
                };
                let key = (v.min(w), v.max(w));
                if w != v && present.insert(key) {
                    edges.push(key);
                    break;
                }
            }
        }
    }
    Graph::from_edges(0, (0..n as i64).collect(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn community(v: usize) -> usize {
        v / 20
    }

    #[test]
    fn xi_zero_keeps_edges_inside_communities() {
        let g = generate_planted_partition(200, &[20; 10], 0.0, 3, 5).unwrap();
        assert!(g.edges().all(|(u, v)| community(u) == community(v)));
    }

    #[test]
    fn xi_one_spreads_edges() {
        let g = generate_planted_partition(200, &[20; 10], 1.0, 3, 5).unwrap();
        let inter = g.edges().filter(|&(u, v)| community(u) != community(v)).count();
        // uniform partners land outside the community about 90% of the time
        let frac = inter as f64 / g.edge_count() as f64;
        assert!(frac > 0.8, "{frac}");
    }

    #[test]
    fn reference_configuration_edge_count() {
        let g = generate_planted_partition(200, &[20; 10], 0.2, 11, 5).unwrap();
        g.validate().unwrap();
        // 200 * 5 / 2 = 500 requested edges, collisions are retried
        assert!((490..=500).contains(&g.edge_count()), "{}", g.edge_count());
        let lc = super::super::largest_component(&g).unwrap();
        assert!(lc.node_count() >= 190);
        assert_eq!(g, generate_planted_partition(200, &[20; 10], 0.2, 11, 5).unwrap());
    }

    #[test]
    fn infeasible_parameters() {
        assert!(generate_planted_partition(10, &[5, 4], 0.1, 0, 2).is_err());
        assert!(generate_planted_partition(10, &[5, 5], 1.5, 0, 2).is_err());
        assert!(generate_planted_partition(10, &[5, 5], 0.1, 0, 5).is_err());
    }
}
