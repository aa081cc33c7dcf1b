use graphset::features::{
    compute_graph_features, standardize_features, FeatureKind, FeatureMatrix, FeatureParams, FeatureRegistry,
    FeatureSpec,
};
use graphset::graph::{k_core, largest_component, sample_nodes};
use graphset::Graph;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn graph_strategy() -> impl Strategy<Value = Graph> {
    (2usize..12).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..3 * n).prop_map(move |pairs| {
            let edges: Vec<(usize, usize)> = pairs.into_iter().filter(|(u, v)| u != v).collect();
            let ids: Vec<i64> = (0..n as i64).map(|i| 100 + 7 * i).collect();
            Graph::from_edges(0, ids, edges).unwrap()
        })
    })
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
    order
}

fn specs() -> Vec<FeatureSpec> {
    let shifted = FeatureParams {
        eigenvector_shift: 1.0,
        ..FeatureParams::default()
    };
    vec![
        FeatureSpec::new(FeatureKind::SelfWalk, 3),
        FeatureSpec::new(FeatureKind::Lsme, 3),
        FeatureSpec::new(FeatureKind::PageRank, 2),
        FeatureSpec::new(FeatureKind::DegreeCentrality, 2),
        FeatureSpec::new(FeatureKind::ClosenessCentrality, 2),
        FeatureSpec::new(FeatureKind::EigenvectorCentrality, 2).with_params(shifted),
        FeatureSpec::new(FeatureKind::LoadCentrality, 2),
    ]
}

/// Feature rows keyed by external node id.
fn by_id(g: &Graph, m: &FeatureMatrix) -> Vec<(i64, Vec<f64>)> {
    let mut rows: Vec<(i64, Vec<f64>)> = (0..m.rows())
        .map(|r| (g.node_id(m.node_index[r]), m.values.row(r).iter().copied().collect()))
        .collect();
    rows.sort_by_key(|r| r.0);
    rows
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn degree_sum_is_twice_edges(g in graph_strategy()) {
        let total: usize = (0..g.node_count()).map(|v| g.degree(v)).sum();
        prop_assert_eq!(total, 2 * g.edge_count());
        prop_assert!(g.validate().is_ok());
    }

    #[test]
    fn core_and_component_invariants(g in graph_strategy(), k in 1usize..4) {
        if let Ok(core) = k_core(&g, k) {
            prop_assert!((0..core.node_count()).all(|v| core.degree(v) >= k));
        }
        if g.edge_count() > 0 {
            let lc = largest_component(&g).unwrap();
            prop_assert!(lc.is_connected());
            prop_assert!(g.connected_components().iter().all(|c| c.len() <= lc.node_count()));
        }
    }

    #[test]
    fn features_ignore_node_numbering(g in graph_strategy(), seed in 0u64..1000) {
        prop_assume!(g.edge_count() > 0);
        let g = largest_component(&g).unwrap();
        let p = g.permuted(&shuffled(g.node_count(), seed)).unwrap();
        let registry = FeatureRegistry::new();
        let all_a: Vec<usize> = (0..g.node_count()).collect();
        let fa = compute_graph_features(&g, &all_a, &specs(), &registry, 3).unwrap();
        let fb = compute_graph_features(&p, &all_a, &specs(), &registry, 3).unwrap();
        for ((ia, ra), (ib, rb)) in by_id(&g, &fa).into_iter().zip(by_id(&p, &fb)) {
            prop_assert_eq!(ia, ib);
            for (x, y) in ra.iter().zip(&rb) {
                prop_assert!((x - y).abs() < 1e-9, "node {}: {} vs {}", ia, x, y);
            }
        }
    }

    #[test]
    fn sampling_is_sorted_and_sized(g in graph_strategy(), rate in 0.05f64..=1.0, seed in 0u64..50) {
        let s = sample_nodes(&g, rate, seed).unwrap();
        prop_assert!(s.kept_nodes.windows(2).all(|w| w[0] < w[1]));
        let expected = ((rate * g.node_count() as f64).round() as usize).clamp(1, g.node_count());
        prop_assert_eq!(s.kept_nodes.len(), expected);
        prop_assert_eq!(s, sample_nodes(&g, rate, seed).unwrap());
    }

    #[test]
    fn standardized_columns_are_unit(
        vals in prop::collection::vec(prop::collection::vec(-50.0..50.0f64, 6), 2..5)
    ) {
        let mats: Vec<FeatureMatrix> = vals
            .iter()
            .enumerate()
            .map(|(g, v)| {
                FeatureMatrix::new(g, vec!["a_1".into(), "a_2".into()], DMatrix::from_row_slice(3, 2, v), vec![0, 1, 2])
                    .unwrap()
            })
            .collect();
        let z = standardize_features(&mats).unwrap();
        for c in 0..2 {
            let pooled: Vec<f64> = z.iter().flat_map(|m| m.values.column(c).iter().copied().collect::<Vec<_>>()).collect();
            let n = pooled.len() as f64;
            let mean = pooled.iter().sum::<f64>() / n;
            let var = pooled.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            prop_assert!(mean.abs() < 1e-9);
            prop_assert!((var - 1.0).abs() < 1e-9 || var == 0.0);
        }
    }
}
