//! Feature ordering: greedy and worst-first forward selection, the fast
//! importance-based ordering, the label-free variance ordering and a random
//! baseline.
//!
//! A "feature" here is one [`FeatureSpec`] (possibly several columns). All
//! supervised scores come from the approximate Wasserstein embedding of the
//! chosen features with one embedding dimension per feature.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Mutex;

use nalgebra::DMatrix;
use rand::seq::{index, SliceRandom};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{evaluate_repeated, feature_importances, train_forest, EvalParams, EvalReport, MeanStd};
use crate::embedding::{approx_wasserstein_embed, build_reference, clouds_from_features, lot_vectorize, LotSolver};
use crate::error::{Error, Result};
use crate::features::{
    compute_collection_features, concatenate_features, standardize_features, FeatureMatrix, FeatureRegistry,
    FeatureSpec,
};
use crate::graph::{GraphCollection, Labels};
use crate::ot::wasserstein_1d;
use crate::output::fmt_num;
use crate::seed;

/// Per-feature matrices for every graph of a collection.
#[derive(Debug, Clone)]
pub struct FeatureBank {
    names: Vec<String>,
    /// `matrices[f][g]`: feature `f` on graph `g`.
    matrices: Vec<Vec<FeatureMatrix>>,
}

impl FeatureBank {
    /// Compute each candidate separately; with `standardize` each feature's
    /// columns are z-scored over all nodes of all graphs.
    pub fn compute(
        collection: &GraphCollection,
        specs: &[FeatureSpec],
        registry: &FeatureRegistry,
        seed: u64,
        standardize: bool,
    ) -> Result<Self> {
        let mut matrices = Vec::with_capacity(specs.len());
        for spec in specs {
            let m = compute_collection_features(collection, std::slice::from_ref(spec), registry, seed, None)?;
            matrices.push(if standardize { standardize_features(&m)? } else { m });
        }
        Self::from_matrices(specs.iter().map(|s| s.name.clone()).collect(), matrices)
    }

    pub fn from_matrices(names: Vec<String>, matrices: Vec<Vec<FeatureMatrix>>) -> Result<Self> {
        if names.is_empty() || names.len() != matrices.len() {
            return Err(Error::Parameter(format!(
                "{} feature names for {} matrix sets",
                names.len(),
                matrices.len()
            )));
        }
        let mut sorted = names.clone();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Parameter(format!("duplicate candidate feature '{}'", w[0])));
        }
        let graphs = matrices[0].len();
        if graphs == 0 || matrices.iter().any(|m| m.len() != graphs) {
            return Err(Error::Shape("every feature needs one matrix per graph".into()));
        }
        Ok(Self { names, matrices })
    }

    /// One candidate per column, named by the column (`page_rank_4`, ...).
    pub fn split_columns(&self) -> Result<FeatureBank> {
        let mut names = Vec::new();
        let mut matrices = Vec::new();
        for set in &self.matrices {
            for column in &set[0].columns {
                names.push(column.clone());
                matrices.push(
                    set.iter()
                        .map(|m| m.select_columns(&[column]))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
        }
        Self::from_matrices(names, matrices)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn graph_count(&self) -> usize {
        self.matrices[0].len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Features sorted by name, so a subset always yields the same columns
    /// regardless of the order in which it was assembled.
    fn canonical(&self, subset: &[usize]) -> Vec<usize> {
        let mut s = subset.to_vec();
        s.sort_by(|&a, &b| self.names[a].cmp(&self.names[b]));
        s
    }

    /// Concatenated per-graph matrices of `subset` in canonical order.
    pub fn subset_matrices(&self, subset: &[usize]) -> Result<Vec<FeatureMatrix>> {
        let order = self.canonical(subset);
        (0..self.graph_count())
            .map(|g| {
                let parts: Vec<FeatureMatrix> = order.iter().map(|&f| self.matrices[f][g].clone()).collect();
                concatenate_features(&parts)
            })
            .collect()
    }

    /// Approximate embedding with one dimension per feature in `subset`.
    pub fn approx_embedding(&self, subset: &[usize]) -> Result<DMatrix<f64>> {
        let clouds = clouds_from_features(&self.subset_matrices(subset)?)?;
        Ok(approx_wasserstein_embed(&clouds, subset.len())?.matrix)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionParams {
    pub eval: EvalParams,
    pub seed: u64,
    /// Re-embed the best greedy/worst prefix with exact-Wasserstein LOT.
    pub final_reembed: bool,
    /// Reference size for that re-embedding; `None` means the median node
    /// count.
    pub final_reference_size: Option<usize>,
}

impl Default for SelectionParams {
    fn default() -> Self {
        Self {
            eval: EvalParams::default(),
            seed: 0,
            final_reembed: true,
            final_reference_size: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: String,
    pub ordered_features: Vec<String>,
    /// One entry per prefix size; accuracy for supervised methods, the
    /// penalised variance score for the unsupervised one.
    pub step_scores: Vec<MeanStd>,
    pub best_prefix: Vec<String>,
    /// Candidate subsets evaluated at each step.
    pub evaluations_per_step: Vec<usize>,
    pub embeddings_built: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_report: Option<EvalReport>,
}

impl SelectionResult {
    /// `prefix,mean,std` rows with a header.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "prefix,mean,std")?;
        for (i, s) in self.step_scores.iter().enumerate() {
            writeln!(out, "{},{},{}", i + 1, fmt_num(s.mean), fmt_num(s.std))?;
        }
        Ok(())
    }
}

/// Evaluates feature subsets through the approximate embedding, memoising
/// by canonical subset. All subsets share the evaluation seed, so they are
/// compared on identical splits.
pub struct SubsetEvaluator<'a> {
    bank: &'a FeatureBank,
    labels: &'a Labels,
    eval: &'a EvalParams,
    seed: u64,
    cache: Mutex<HashMap<Vec<usize>, MeanStd>>,
}

impl<'a> SubsetEvaluator<'a> {
    pub fn new(bank: &'a FeatureBank, labels: &'a Labels, eval: &'a EvalParams, seed: u64) -> Result<Self> {
        if !labels.is_categorical() {
            return Err(Error::Mode(
                "supervised selection needs class labels; use unsupervised selection".into(),
            ));
        }
        if labels.len() != bank.graph_count() {
            return Err(Error::Shape(format!(
                "{} labels for {} graphs",
                labels.len(),
                bank.graph_count()
            )));
        }
        eval.validate()?;
        Ok(Self {
            bank,
            labels,
            eval,
            seed,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// Mean and std of accuracy over the repeated splits.
    pub fn accuracy(&self, subset: &[usize]) -> Result<MeanStd> {
        let key = self.bank.canonical(subset);
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let x = self.bank.approx_embedding(&key)?;
        let score = evaluate_repeated(&x, self.labels, self.eval, self.seed)?.primary();
        self.cache.lock().expect("cache lock").insert(key, score);
        Ok(score)
    }

    /// Accuracy of every prefix of `order`.
    pub fn prefix_curve(&self, order: &[usize]) -> Result<Vec<MeanStd>> {
        (1..=order.len()).map(|p| self.accuracy(&order[..p])).collect()
    }

    pub fn prefix_curve_by_name(&self, order: &[String]) -> Result<Vec<MeanStd>> {
        let idx = order
            .iter()
            .map(|n| {
                self.bank
                    .index_of(n)
                    .ok_or_else(|| Error::UnknownFeature(n.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        self.prefix_curve(&idx)
    }
}

/// Best prefix by score; ties go to the shorter prefix.
fn best_prefix(order: &[String], scores: &[MeanStd]) -> Vec<String> {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if s.mean > scores[best].mean {
            best = i;
        }
    }
    order[..=best].to_vec()
}

fn names_sorted(bank: &FeatureBank, idx: &mut [usize]) {
    idx.sort_by(|&a, &b| bank.names[a].cmp(&bank.names[b]));
}

fn forward_select(
    bank: &FeatureBank,
    labels: &Labels,
    params: &SelectionParams,
    collection: Option<&GraphCollection>,
    worst: bool,
) -> Result<SelectionResult> {
    let evaluator = SubsetEvaluator::new(bank, labels, &params.eval, params.seed)?;
    let mut remaining: Vec<usize> = (0..bank.len()).collect();
    names_sorted(bank, &mut remaining);
    let mut chosen: Vec<usize> = Vec::new();
    let mut step_scores = Vec::new();
    let mut evaluations_per_step = Vec::new();
    while !remaining.is_empty() {
        let scores = remaining
            .par_iter()
            .map(|&c| {
                let mut subset = chosen.clone();
                subset.push(c);
                evaluator.accuracy(&subset)
            })
            .collect::<Result<Vec<_>>>()?;
        evaluations_per_step.push(remaining.len());
        // candidates are in name order, so the first extreme wins ties
        let mut pick = 0;
        for (i, s) in scores.iter().enumerate() {
            let better = if worst { s.mean < scores[pick].mean } else { s.mean > scores[pick].mean };
            if better {
                pick = i;
            }
        }
        step_scores.push(scores[pick]);
        chosen.push(remaining.remove(pick));
    }
    let ordered_features: Vec<String> = chosen.iter().map(|&i| bank.names[i].clone()).collect();
    let best = best_prefix(&ordered_features, &step_scores);
    let final_report = if params.final_reembed {
        Some(reembed_exact(bank, labels, &best, params, collection)?)
    } else {
        None
    };
    Ok(SelectionResult {
        method: if worst { "worst" } else { "greedy" }.into(),
        ordered_features,
        step_scores,
        best_prefix: best,
        embeddings_built: evaluations_per_step.iter().sum(),
        evaluations_per_step,
        final_report,
    })
}

/// Exact-Wasserstein LOT embedding of a prefix, evaluated like the steps.
fn reembed_exact(
    bank: &FeatureBank,
    labels: &Labels,
    prefix: &[String],
    params: &SelectionParams,
    collection: Option<&GraphCollection>,
) -> Result<EvalReport> {
    let idx: Vec<usize> = prefix.iter().filter_map(|n| bank.index_of(n)).collect();
    let matrices = bank.subset_matrices(&idx)?;
    let clouds = clouds_from_features(&matrices)?;
    let r = params.final_reference_size.unwrap_or_else(|| {
        let mut counts: Vec<usize> = matrices.iter().map(FeatureMatrix::rows).collect();
        counts.sort_unstable();
        counts[(counts.len() - 1) / 2]
    });
    let reference = build_reference(&clouds, r.max(1), params.seed)?;
    let d = idx.len().min(clouds.len());
    let emb = lot_vectorize(&clouds, &reference, LotSolver::Exact, d)?;
    if let Some(c) = collection {
        log::info!("{}: best prefix {:?} re-embedded with exact transport", c.name(), prefix);
    }
    evaluate_repeated(&emb.matrix, labels, &params.eval, params.seed)
}

/// Add, at each step, the unused feature whose inclusion gives the highest
/// mean accuracy (ties by feature name). Step `i` evaluates `k - i`
/// subsets. The best prefix is finally re-embedded with exact transport.
pub fn greedy_select(
    bank: &FeatureBank,
    labels: Option<&Labels>,
    params: &SelectionParams,
) -> Result<SelectionResult> {
    forward_select(bank, require_labels(labels)?, params, None, false)
}

/// Greedy selection that always adds the lowest-scoring feature.
pub fn worst_select(bank: &FeatureBank, labels: Option<&Labels>, params: &SelectionParams) -> Result<SelectionResult> {
    forward_select(bank, require_labels(labels)?, params, None, true)
}

fn require_labels(labels: Option<&Labels>) -> Result<&Labels> {
    labels.ok_or_else(|| Error::Mode("selection needs labels; use unsupervised selection instead".into()))
}

/// One-dimensional approximate embedding per feature, a forest on the
/// stacked columns, and features ordered by its importances (ties by name).
/// Prefix scores are computed on the stacked one-dimensional columns.
pub fn fast_select(bank: &FeatureBank, labels: Option<&Labels>, params: &SelectionParams) -> Result<SelectionResult> {
    let labels = require_labels(labels)?;
    if !labels.is_categorical() {
        return Err(Error::Mode("fast selection needs class labels".into()));
    }
    let k = bank.len();
    let columns = (0..k)
        .into_par_iter()
        .map(|f| bank.approx_embedding(&[f]))
        .collect::<Result<Vec<_>>>()?;
    let m = bank.graph_count();
    let stacked = DMatrix::from_fn(m, k, |i, j| columns[j][(i, 0)]);
    let model = train_forest(&stacked, labels, &params.eval.forest, params.seed)?;
    let importance = feature_importances(&model);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        importance[b]
            .total_cmp(&importance[a])
            .then_with(|| bank.names[a].cmp(&bank.names[b]))
    });
    let step_scores = (1..=k)
        .map(|p| {
            let cols = bank.canonical(&order[..p]);
            let x = stacked.select_columns(&cols);
            Ok(evaluate_repeated(&x, labels, &params.eval, params.seed)?.primary())
        })
        .collect::<Result<Vec<_>>>()?;
    let ordered_features: Vec<String> = order.iter().map(|&i| bank.names[i].clone()).collect();
    Ok(SelectionResult {
        method: "fast".into(),
        best_prefix: best_prefix(&ordered_features, &step_scores),
        ordered_features,
        step_scores,
        evaluations_per_step: vec![1; k],
        embeddings_built: k,
        final_report: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnsupervisedParams {
    /// Nodes sampled per graph (M).
    pub nodes_per_graph: usize,
    /// Graph pairs sampled (P); `None` means `min(200, m(m-1)/2)`.
    pub pairs: Option<usize>,
}

impl Default for UnsupervisedParams {
    fn default() -> Self {
        Self {
            nodes_per_graph: 20,
            pairs: None,
        }
    }
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return 0.0;
    }
    (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
}

/// Label-free ordering. For every feature, the 1-D Wasserstein distances
/// between the sampled per-graph value distributions (averaged over the
/// feature's columns) are computed on a shared random set of graph pairs;
/// the variance of those distances is the feature's score. Later picks are
/// penalised by `1 - max |corr|` against the distance profiles of features
/// already chosen.
pub fn unsupervised_select(bank: &FeatureBank, params: &UnsupervisedParams, seed: u64) -> Result<SelectionResult> {
    let m = bank.graph_count();
    if m < 2 {
        return Err(Error::Parameter("unsupervised selection needs at least 2 graphs".into()));
    }
    if params.nodes_per_graph == 0 {
        return Err(Error::Parameter("nodes_per_graph must be positive".into()));
    }
    let smallest = bank.matrices[0].iter().map(FeatureMatrix::rows).min().unwrap_or(0);
    let nodes = if params.nodes_per_graph > smallest {
        log::info!("nodes per graph clamped from {} to {smallest}", params.nodes_per_graph);
        smallest
    } else {
        params.nodes_per_graph
    };
    let rows: Vec<Vec<usize>> = (0..m)
        .map(|g| {
            let n = bank.matrices[0][g].rows();
            let mut rng = seed::rng_for(seed, &[seed::TAG_SAMPLE, g as u64, 1]);
            let mut r = index::sample(&mut rng, n, nodes).into_vec();
            r.sort_unstable();
            r
        })
        .collect();
    let all_pairs = m * (m - 1) / 2;
    let p = params.pairs.unwrap_or(200).min(all_pairs).max(1);
    let mut picked = index::sample(&mut seed::rng_for(seed, &[seed::TAG_PAIRS]), all_pairs, p).into_vec();
    picked.sort_unstable();
    let pair_list: Vec<(usize, usize)> = {
        let mut all = Vec::with_capacity(all_pairs);
        for i in 0..m {
            for j in i + 1..m {
                all.push((i, j));
            }
        }
        picked.iter().map(|&k| all[k]).collect()
    };

    let profiles = (0..bank.len())
        .into_par_iter()
        .map(|f| {
            let width = bank.matrices[f][0].width();
            let sampled: Vec<Vec<Vec<f64>>> = (0..m)
                .map(|g| {
                    let mat = &bank.matrices[f][g].values;
                    (0..width).map(|c| rows[g].iter().map(|&r| mat[(r, c)]).collect()).collect()
                })
                .collect();
            pair_list
                .iter()
                .map(|&(a, b)| {
                    let mut total = 0.0;
                    for c in 0..width {
                        total += wasserstein_1d(&sampled[a][c], &sampled[b][c])?;
                    }
                    Ok(total / width as f64)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let raw: Vec<f64> = profiles.iter().map(|d| MeanStd::of(d).std.powi(2)).collect();

    let mut remaining: Vec<usize> = (0..bank.len()).collect();
    let mut chosen: Vec<usize> = Vec::new();
    let mut step_scores = Vec::new();
    while !remaining.is_empty() {
        let score = |f: usize| {
            let max_corr = chosen
                .iter()
                .map(|&s| pearson(&profiles[f], &profiles[s]).abs())
                .fold(0.0, f64::max);
            raw[f] * (1.0 - max_corr)
        };
        let mut best = 0;
        for i in 1..remaining.len() {
            let (a, b) = (remaining[i], remaining[best]);
            let ord = score(a)
                .total_cmp(&score(b))
                .then(raw[a].total_cmp(&raw[b]))
                .then_with(|| bank.names[b].cmp(&bank.names[a]));
            if ord.is_gt() {
                best = i;
            }
        }
        let f = remaining.remove(best);
        step_scores.push(MeanStd { mean: score(f), std: 0.0 });
        chosen.push(f);
    }
    let ordered_features: Vec<String> = chosen.iter().map(|&i| bank.names[i].clone()).collect();
    Ok(SelectionResult {
        method: "unsupervised".into(),
        best_prefix: best_prefix(&ordered_features, &step_scores),
        ordered_features,
        step_scores,
        evaluations_per_step: vec![0; bank.len()],
        embeddings_built: 0,
        final_report: None,
    })
}

/// Random orderings and their prefix-accuracy curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomBaseline {
    pub runs: Vec<SelectionResult>,
    /// Mean and std over the runs of the accuracy at each prefix size.
    pub curve: Vec<MeanStd>,
}

impl RandomBaseline {
    /// The averaged curve as a single result for reporting.
    pub fn summary(&self) -> SelectionResult {
        SelectionResult {
            method: "random".into(),
            ordered_features: self.runs.first().map(|r| r.ordered_features.clone()).unwrap_or_default(),
            step_scores: self.curve.clone(),
            best_prefix: Vec::new(),
            evaluations_per_step: Vec::new(),
            embeddings_built: 0,
            final_report: None,
        }
    }
}

/// `n_outer` uniformly random orderings, each seeded from `(seed, run)`.
pub fn random_baseline(
    bank: &FeatureBank,
    labels: Option<&Labels>,
    n_outer: usize,
    params: &SelectionParams,
) -> Result<RandomBaseline> {
    let labels = require_labels(labels)?;
    if n_outer == 0 {
        return Err(Error::Parameter("n_outer must be at least 1".into()));
    }
    let evaluator = SubsetEvaluator::new(bank, labels, &params.eval, params.seed)?;
    let runs = (0..n_outer)
        .into_par_iter()
        .map(|run| {
            let mut order: Vec<usize> = (0..bank.len()).collect();
            order.shuffle(&mut seed::rng_for(params.seed, &[seed::TAG_RANDOM_ORDER, run as u64]));
            let step_scores = evaluator.prefix_curve(&order)?;
            let ordered_features: Vec<String> = order.iter().map(|&i| bank.names[i].clone()).collect();
            Ok(SelectionResult {
                method: "random".into(),
                best_prefix: best_prefix(&ordered_features, &step_scores),
                ordered_features,
                step_scores,
                evaluations_per_step: vec![1; bank.len()],
                embeddings_built: bank.len(),
                final_report: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let curve = (0..bank.len())
        .map(|p| MeanStd::of(&runs.iter().map(|r| r.step_scores[p].mean).collect::<Vec<_>>()))
        .collect();
    Ok(RandomBaseline { runs, curve })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::ForestParams;
    use crate::features::FeatureMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Graph `g` has class `g % 2`; "signal" shifts with the class, "noise"
    /// does not, "flat" is constant.
    fn toy_bank(m: usize, seed: u64) -> (FeatureBank, Labels) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = Labels::Class((0..m).map(|g| (g % 2) as i64).collect());
        let make = |name: &str, rng: &mut ChaCha8Rng, f: &dyn Fn(usize, &mut ChaCha8Rng) -> f64| -> Vec<FeatureMatrix> {
            (0..m)
                .map(|g| {
                    let values = DMatrix::from_fn(12, 1, |_, _| f(g, rng));
                    FeatureMatrix::new(g, vec![format!("{name}_1")], values, (0..12).collect()).unwrap()
                })
                .collect()
        };
        let signal = make("signal", &mut rng, &|g, r| (g % 2) as f64 * 2.0 + r.gen_range(-1.0..1.0));
        let noise = make("noise", &mut rng, &|_, r| r.gen_range(-1.0..1.0));
        let flat = make("flat", &mut rng, &|_, _| 1.0);
        let bank = FeatureBank::from_matrices(
            vec!["signal".into(), "noise".into(), "flat".into()],
            vec![signal, noise, flat],
        )
        .unwrap();
        (bank, labels)
    }

    fn params() -> SelectionParams {
        SelectionParams {
            eval: EvalParams {
                n_runs: 10,
                forest: ForestParams {
                    n_trees: 20,
                    ..ForestParams::default()
                },
                ..EvalParams::default()
            },
            seed: 1,
            final_reembed: true,
            final_reference_size: Some(4),
        }
    }

    fn is_permutation(r: &SelectionResult, bank: &FeatureBank) -> bool {
        let mut a = r.ordered_features.clone();
        let mut b = bank.names().to_vec();
        a.sort();
        b.sort();
        a == b
    }

    #[test]
    fn greedy_and_worst() {
        let (bank, labels) = toy_bank(40, 2);
        let g = greedy_select(&bank, Some(&labels), &params()).unwrap();
        assert_eq!(g.ordered_features[0], "signal");
        assert_eq!(g.evaluations_per_step, vec![3, 2, 1]);
        assert_eq!(g.step_scores.len(), 3);
        assert!(is_permutation(&g, &bank));
        assert!(g.final_report.is_some());
        let w = worst_select(&bank, Some(&labels), &params()).unwrap();
        assert_eq!(w.ordered_features.last().unwrap(), "signal");
        assert!(is_permutation(&w, &bank));
        // the full set scores the same whichever order built it
        assert_eq!(g.step_scores[2], w.step_scores[2]);
        assert!(matches!(greedy_select(&bank, None, &params()), Err(Error::Mode(_))));
    }

    #[test]
    fn fast_ranks_signal_first() {
        let (bank, labels) = toy_bank(40, 3);
        let f = fast_select(&bank, Some(&labels), &params()).unwrap();
        assert_eq!(f.ordered_features[0], "signal");
        assert_eq!(f.embeddings_built, 3);
        assert!(is_permutation(&f, &bank));
    }

    #[test]
    fn unsupervised_defers_flat_and_duplicates() {
        let (bank, _) = toy_bank(30, 4);
        let mut names = bank.names().to_vec();
        let mut mats = bank.matrices.clone();
        names.push("signal_copy".into());
        mats.push(bank.matrices[0].clone());
        let bank = FeatureBank::from_matrices(names, mats).unwrap();
        let u = unsupervised_select(&bank, &UnsupervisedParams::default(), 5).unwrap();
        assert_eq!(u.ordered_features[0], "signal");
        assert_eq!(u.ordered_features[1], "noise");
        assert_eq!(u.step_scores.last().unwrap().mean, 0.0);
        assert!(is_permutation(&u, &bank));
        assert_eq!(u, unsupervised_select(&bank, &UnsupervisedParams::default(), 5).unwrap());
    }

    #[test]
    fn random_baseline_full_prefix_collapses() {
        let (bank, labels) = toy_bank(30, 6);
        let r = random_baseline(&bank, Some(&labels), 12, &params()).unwrap();
        assert_eq!(r.runs.len(), 12);
        assert!(r.curve[2].std < 1e-15);
        assert_eq!(r, random_baseline(&bank, Some(&labels), 12, &params()).unwrap());
    }

    #[test]
    fn column_split_names_each_column() {
        let (bank, _) = toy_bank(4, 7);
        let wide = FeatureBank::from_matrices(
            vec!["pair".into()],
            vec![(0..4)
                .map(|g| concatenate_features(&[bank.matrices[0][g].clone(), bank.matrices[1][g].clone()]).unwrap())
                .collect()],
        )
        .unwrap();
        let split = wide.split_columns().unwrap();
        assert_eq!(split.names(), &["signal_1".to_string(), "noise_1".to_string()]);
        assert_eq!(split.matrices[1][2].values, bank.matrices[1][2].values);
    }

    #[test]
    fn pearson_edge_cases() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]) - 1.0).abs() < 1e-12);
        assert_eq!(pearson(&[1.0, 1.0], &[0.0, 2.0]), 0.0);
    }
}
