use graphset::embedding::{embed_collection, EmbeddingConfig, EmbeddingMethod};
use graphset::features::{compute_collection_features, standardize_features, FeatureKind, FeatureRegistry, FeatureSpec};
use graphset::graph::generate_planted_partition;
use graphset::{Graph, GraphCollection};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn collection(m: usize, seed: u64) -> GraphCollection {
    planted(m, seed, 24, &[12, 12], 4)
}

fn planted(m: usize, seed: u64, n: usize, communities: &[usize], degree: usize) -> GraphCollection {
    let graphs: Vec<Graph> = (0..m)
        .map(|i| {
            let xi = 0.1 + 0.8 * i as f64 / m as f64;
            generate_planted_partition(n, communities, xi, seed * 1000 + i as u64, degree).unwrap()
        })
        .collect();
    GraphCollection::new("planted", graphs, None).unwrap()
}

fn specs() -> Vec<FeatureSpec> {
    vec![
        FeatureSpec::new(FeatureKind::SelfWalk, 2),
        FeatureSpec::new(FeatureKind::Expansion, 2),
    ]
}

fn embed(c: &GraphCollection, method: EmbeddingMethod) -> nalgebra::DMatrix<f64> {
    let registry = FeatureRegistry::new();
    let f = compute_collection_features(c, &specs(), &registry, 1, None).unwrap();
    let f = standardize_features(&f).unwrap();
    let config = EmbeddingConfig {
        method,
        dim: 3,
        reference_size: Some(6),
        seed: 2,
        sinkhorn_epsilon: None,
    };
    embed_collection(c, &f, &config).unwrap().matrix
}

fn relabel(c: &GraphCollection, seed: u64) -> GraphCollection {
    c.map_graphs(|g| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + g.graph_id() as u64);
        let mut order: Vec<usize> = (0..g.node_count()).collect();
        order.shuffle(&mut rng);
        g.permuted(&order)
    })
    .unwrap()
}

const METHODS: [EmbeddingMethod; 3] = [
    EmbeddingMethod::Approximate,
    EmbeddingMethod::Wasserstein,
    EmbeddingMethod::Sinkhorn,
];

#[test]
fn relabeling_nodes_leaves_embedding_unchanged() {
    let c = collection(8, 1);
    let r = relabel(&c, 9);
    for method in METHODS {
        let (a, b) = (embed(&c, method), embed(&r, method));
        assert!((a - b).amax() < 1e-9, "{method:?}");
    }
}

#[test]
fn graph_order_permutes_rows() {
    let c = collection(8, 2);
    let order = vec![3, 0, 7, 1, 6, 2, 5, 4];
    let p = c.select(&order).unwrap();
    for method in METHODS {
        let (a, b) = (embed(&c, method), embed(&p, method));
        for (new, &old) in order.iter().enumerate() {
            assert!((a.row(old) - b.row(new)).amax() < 1e-9, "{method:?}");
        }
    }
}

#[test]
fn embeddings_do_not_depend_on_thread_count() {
    let c = collection(10, 3);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| METHODS.map(|m| embed(&c, m)))
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn exact_and_sinkhorn_agree_on_distances() {
    let c = collection(10, 4);
    let registry = FeatureRegistry::new();
    let f = standardize_features(&compute_collection_features(&c, &specs(), &registry, 1, None).unwrap()).unwrap();
    let config = |method, eps| EmbeddingConfig {
        method,
        dim: 4,
        reference_size: Some(8),
        seed: 0,
        sinkhorn_epsilon: eps,
    };
    let exact = embed_collection(&c, &f, &config(EmbeddingMethod::Wasserstein, None)).unwrap().matrix;
    // small enough to be close to exact, large enough to converge within the
    // default iteration cap
    let sink = embed_collection(&c, &f, &config(EmbeddingMethod::Sinkhorn, Some(0.01))).unwrap().matrix;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..10 {
        for j in i + 1..10 {
            let de = (exact.row(i) - exact.row(j)).norm();
            let ds = (sink.row(i) - sink.row(j)).norm();
            num += (de - ds).abs();
            den += de;
        }
    }
    assert!(num / den < 0.05, "relative distance gap {}", num / den);
}

#[test]
fn approximate_embedding_tracks_mixing() {
    // the first axis should order the collection by xi; graphs need to be
    // large enough for the mixing to show in the features
    let c = planted(20, 5, 100, &[25; 4], 6);
    let e = embed(&c, EmbeddingMethod::Approximate);
    let axis: Vec<f64> = e.column(0).iter().copied().collect();
    let xi: Vec<f64> = (0..20).map(|i| i as f64).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (ma, mx) = (mean(&axis), mean(&xi));
    let cov: f64 = axis.iter().zip(&xi).map(|(a, x)| (a - ma) * (x - mx)).sum();
    let va: f64 = axis.iter().map(|a| (a - ma).powi(2)).sum();
    let vx: f64 = xi.iter().map(|x| (x - mx).powi(2)).sum();
    assert!((cov / (va * vx).sqrt()).abs() > 0.7);
}
