//! Node-sampling diagnostics: how far an embedding built from a fraction of
//! each graph's nodes drifts from the full-node embedding, what it does to
//! accuracy, and what it saves in time.

use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::classifier::{evaluate_repeated, EvalParams, MeanStd};
use crate::embedding::{embed_collection, EmbeddingConfig, GraphEmbedding};
use crate::error::{Error, Result};
use crate::features::{
    compute_collection_features, pca_reduce, standardize_features, FeatureMatrix, FeatureRegistry, FeatureSpec,
};
use crate::graph::{check_rate, sample_nodes, GraphCollection, NodeSample};
use crate::ot::wasserstein_1d;
use crate::output::fmt_num;
use crate::seed;

/// Features → optional standardisation/PCA → graph embedding.
pub struct EmbeddingPipeline<'a> {
    pub specs: Vec<FeatureSpec>,
    pub registry: &'a FeatureRegistry,
    pub standardize: bool,
    pub reduce_dim: Option<usize>,
    pub embedding: EmbeddingConfig,
}

impl EmbeddingPipeline<'_> {
    /// Node features (after any transforms) and the embedding built on them.
    pub fn run(
        &self,
        collection: &GraphCollection,
        samples: Option<&[NodeSample]>,
        seed: u64,
    ) -> Result<(Vec<FeatureMatrix>, GraphEmbedding)> {
        let mut features = compute_collection_features(collection, &self.specs, self.registry, seed, samples)?;
        if self.standardize {
            features = standardize_features(&features)?;
        }
        if let Some(d) = self.reduce_dim {
            let (reduced, summary) = pca_reduce(&features, d)?;
            log::info!("PCA to {d} dimensions keeps {:.4} of the variance", summary.retained_variance());
            features = reduced;
        }
        let embedding = embed_collection(collection, &features, &self.embedding)?;
        Ok((features, embedding))
    }
}

/// Distances from the reference row to each probe row, divided by their mean.
/// `None` when every distance is zero.
fn distance_profile(e: &DMatrix<f64>, reference: usize, probe: &[usize]) -> Option<Vec<f64>> {
    let d: Vec<f64> = probe.iter().map(|&p| (e.row(p) - e.row(reference)).norm()).collect();
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    (mean > 0.0).then(|| d.iter().map(|x| x / mean).collect())
}

/// `1 / (1 + W1)` between the mean-normalised reference-to-probe distance
/// lists of the two embeddings. Invariant to uniform scaling of either.
pub fn embedding_similarity_score(
    full: &DMatrix<f64>,
    sampled: &DMatrix<f64>,
    reference: usize,
    probe: &[usize],
) -> Result<f64> {
    if full.nrows() != sampled.nrows() {
        return Err(Error::Shape(format!(
            "embeddings with {} and {} graphs",
            full.nrows(),
            sampled.nrows()
        )));
    }
    let m = full.nrows();
    if reference >= m {
        return Err(Error::NodeIndex {
            index: reference,
            node_count: m,
        });
    }
    if probe.is_empty() || probe.iter().any(|&p| p == reference || p >= m) {
        return Err(Error::Parameter(
            "probe set must be non-empty, in range and exclude the reference graph".into(),
        ));
    }
    match (distance_profile(full, reference, probe), distance_profile(sampled, reference, probe)) {
        (Some(a), Some(b)) => Ok(1.0 / (1.0 + wasserstein_1d(&a, &b)?)),
        (None, None) => {
            log::warn!("both embeddings are degenerate around the reference graph; similarity 1");
            Ok(1.0)
        }
        _ => {
            log::warn!("one embedding is degenerate around the reference graph; similarity 0");
            Ok(0.0)
        }
    }
}

/// Up to `size` random graphs other than `reference`, sorted.
pub fn default_probe(m: usize, reference: usize, size: usize, seed: u64) -> Vec<usize> {
    let others: Vec<usize> = (0..m).filter(|&g| g != reference).collect();
    let take = size.min(others.len());
    let mut rng = seed::rng_for(seed, &[seed::TAG_PROBE]);
    let mut probe: Vec<usize> = index::sample(&mut rng, others.len(), take)
        .into_iter()
        .map(|i| others[i])
        .collect();
    probe.sort_unstable();
    probe
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Sampling rates r (fraction of nodes kept), each in (0, 1].
    pub rates: Vec<f64>,
    pub reference_graph: usize,
    pub probe_size: usize,
    /// Evaluate each rate when the collection is labelled.
    pub evaluate: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            rates: vec![1.0, 0.9, 0.7, 0.5, 0.3, 0.1],
            reference_graph: 0,
            probe_size: 30,
            evaluate: true,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rates.is_empty() {
            return Err(Error::Parameter("sweep needs at least one rate".into()));
        }
        self.rates.iter().try_for_each(|&r| check_rate(r))?;
        if self.probe_size == 0 {
            return Err(Error::Parameter("probe_size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rate: f64,
    pub similarity: f64,
    pub accuracy: Option<MeanStd>,
    pub seconds: f64,
    pub normalized_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub reference_graph: usize,
    pub probe: Vec<usize>,
    pub threads: usize,
}

impl SweepReport {
    /// `rate,similarity,accuracy_mean,accuracy_std,normalized_time`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "rate,similarity,accuracy_mean,accuracy_std,normalized_time")?;
        for r in &self.rows {
            let (am, asd) = match r.accuracy {
                Some(a) => (fmt_num(a.mean), fmt_num(a.std)),
                None => (String::new(), String::new()),
            };
            writeln!(
                out,
                "{},{},{am},{asd},{}",
                fmt_num(r.rate),
                fmt_num(r.similarity),
                fmt_num(r.normalized_time)
            )?;
        }
        Ok(())
    }
}

/// For each rate: sample nodes per graph, compute features on the sampled
/// nodes only, embed, compare with the full-node embedding and optionally
/// evaluate. Rates run one after another so the timings do not compete;
/// times are relative to the full-node run, which is reused at rate 1.
pub fn sampling_sweep(
    collection: &GraphCollection,
    pipeline: &EmbeddingPipeline<'_>,
    sweep: &SweepConfig,
    eval: &EvalParams,
    seed: u64,
) -> Result<SweepReport> {
    sweep.validate()?;
    let m = collection.len();
    if sweep.reference_graph >= m {
        return Err(Error::Parameter(format!(
            "reference graph {} outside a collection of {m}",
            sweep.reference_graph
        )));
    }
    let probe = default_probe(m, sweep.reference_graph, sweep.probe_size, seed);
    let labels = collection.labels().filter(|_| sweep.evaluate);
    let evaluate = |e: &GraphEmbedding| -> Result<Option<MeanStd>> {
        labels
            .map(|l| evaluate_repeated(&e.matrix, l, eval, seed).map(|r| r.primary()))
            .transpose()
    };

    let start = Instant::now();
    let (_, full) = pipeline.run(collection, None, seed)?;
    let base_seconds = start.elapsed().as_secs_f64().max(1e-9);
    let full_accuracy = if sweep.rates.contains(&1.0) { evaluate(&full)? } else { None };

    let mut rows = Vec::with_capacity(sweep.rates.len());
    for &rate in &sweep.rates {
        if rate == 1.0 {
            rows.push(SweepRow {
                rate,
                similarity: embedding_similarity_score(&full.matrix, &full.matrix, sweep.reference_graph, &probe)?,
                accuracy: full_accuracy,
                seconds: base_seconds,
                normalized_time: 1.0,
            });
            continue;
        }
        let start = Instant::now();
        let samples = collection
            .graphs()
            .iter()
            .map(|g| sample_nodes(g, rate, seed))
            .collect::<Result<Vec<_>>>()?;
        let (_, sampled) = pipeline.run(collection, Some(&samples), seed)?;
        let seconds = start.elapsed().as_secs_f64().max(1e-9);
        rows.push(SweepRow {
            rate,
            similarity: embedding_similarity_score(&full.matrix, &sampled.matrix, sweep.reference_graph, &probe)?,
            accuracy: evaluate(&sampled)?,
            seconds,
            normalized_time: seconds / base_seconds,
        });
    }
    Ok(SweepReport {
        rows,
        reference_graph: sweep.reference_graph,
        probe,
        threads: rayon::current_num_threads(),
    })
}
