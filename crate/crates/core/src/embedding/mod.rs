//! Graph embeddings from per-node feature clouds.
//!
//! Three vectorizations are provided. The two linear-optimal-transport
//! methods transport every graph's cloud onto a shared reference cloud
//! (exactly or with Sinkhorn), read off the barycentric displacement of each
//! reference point, and reduce the stacked displacements with an SVD. The
//! approximate method collapses the reference to a single point, which
//! reduces each graph to its mean feature vector before the SVD.

mod kmeans;

use std::io::Write;

use nalgebra::{DMatrix, DVector, SVD};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::GraphCollection;
use crate::ot::{exact_ot, sinkhorn_ot, PointCloud, SinkhornParams};
use crate::output::fmt_num;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingMethod {
    /// LOT with exact transport plans.
    Wasserstein,
    /// LOT with entropically regularised plans.
    Sinkhorn,
    /// Single averaged reference point.
    Approximate,
}

impl EmbeddingMethod {
    pub fn name(self) -> &'static str {
        match self {
            EmbeddingMethod::Wasserstein => "wasserstein",
            EmbeddingMethod::Sinkhorn => "sinkhorn",
            EmbeddingMethod::Approximate => "approximate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub method: EmbeddingMethod,
    pub dim: usize,
    /// Reference cloud size for the LOT methods; defaults to the median
    /// node count of the collection.
    #[serde(default)]
    pub reference_size: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Absolute Sinkhorn regularisation; defaults to `0.05 * mean(C)` per
    /// instance.
    #[serde(default)]
    pub sinkhorn_epsilon: Option<f64>,
}

impl EmbeddingConfig {
    pub fn approximate(dim: usize) -> Self {
        Self {
            method: EmbeddingMethod::Approximate,
            dim,
            reference_size: None,
            seed: 0,
            sinkhorn_epsilon: None,
        }
    }
}

/// Shared target cloud for LOT, uniformly weighted.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDistribution {
    pub points: DMatrix<f64>,
}

impl ReferenceDistribution {
    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn cloud(&self) -> Result<PointCloud> {
        PointCloud::uniform(self.points.clone())
    }
}

/// One row per graph, in graph order.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphEmbedding {
    pub matrix: DMatrix<f64>,
    pub method: String,
    pub feature_columns: Vec<String>,
    pub singular_values: Vec<f64>,
}

impl GraphEmbedding {
    pub fn graph_count(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.matrix.row(i).transpose()
    }

    /// Write `graph_id[,label],e_1..e_d` with a header row.
    pub fn write_csv<W: Write>(&self, out: &mut W, collection: Option<&GraphCollection>) -> Result<()> {
        let labels = collection.and_then(GraphCollection::labels);
        write!(out, "graph_id")?;
        if labels.is_some() {
            write!(out, ",label")?;
        }
        for c in 1..=self.dim() {
            write!(out, ",e_{c}")?;
        }
        writeln!(out)?;
        for r in 0..self.graph_count() {
            write!(out, "{r}")?;
            if let Some(l) = labels {
                write!(out, ",{}", l.display(r))?;
            }
            for c in 0..self.dim() {
                write!(out, ",{}", fmt_num(self.matrix[(r, c)]))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Pooled node vectors sorted lexicographically, so that everything derived
/// from them is independent of graph and node order.
fn pooled_sorted(clouds: &[PointCloud]) -> Result<DMatrix<f64>> {
    let dim = clouds
        .first()
        .ok_or_else(|| Error::Parameter("no point clouds".into()))?
        .dim();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for c in clouds {
        if c.dim() != dim {
            return Err(Error::Shape(format!("clouds of dimension {} and {dim}", c.dim())));
        }
        rows.extend(c.points().row_iter().map(|r| r.iter().copied().collect::<Vec<_>>()));
    }
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]))
}

/// Reference cloud from seeded k-means over the pooled node vectors of all
/// graphs (k-means++ seeding, 10 restarts, 100 iterations). When `r` is at
/// least the pooled count the pooled points themselves are used.
pub fn build_reference(clouds: &[PointCloud], r: usize, seed: u64) -> Result<ReferenceDistribution> {
    if r == 0 {
        return Err(Error::Parameter("reference size must be at least 1".into()));
    }
    let pooled = pooled_sorted(clouds)?;
    if r >= pooled.nrows() {
        if r > pooled.nrows() {
            log::info!("reference size {r} clamped to {} pooled points", pooled.nrows());
        }
        return Ok(ReferenceDistribution { points: pooled });
    }
    let points = kmeans::kmeans(&pooled, r, seed, &kmeans::KMeansParams::default());
    Ok(ReferenceDistribution { points })
}

/// Which transport solver LOT uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LotSolver {
    Exact,
    Sinkhorn(SinkhornParams),
}

/// Per-graph LOT vector: for each reference point the √mass-weighted
/// displacement from the reference point to its barycentric image.
fn lot_row(cloud: &PointCloud, reference: &PointCloud, solver: LotSolver) -> Result<Vec<f64>> {
    let plan = match solver {
        LotSolver::Exact => exact_ot(cloud, reference)?,
        LotSolver::Sinkhorn(p) => sinkhorn_ot(cloud, reference, p)?,
    };
    let (r, k) = (reference.len(), reference.dim());
    let mut row = Vec::with_capacity(r * k);
    for j in 0..r {
        let column = plan.plan.column(j);
        let mass = column.sum();
        let anchor = reference.points().row(j);
        if mass <= 1e-15 {
            // no mass arrives: the map stays at the reference point
            row.extend(std::iter::repeat(0.0).take(k));
            continue;
        }
        let image = (cloud.points().transpose() * column) / mass;
        let w = mass.sqrt();
        row.extend((0..k).map(|d| w * (image[d] - anchor[d])));
    }
    Ok(row)
}

/// Centre the rows of `x`, take its SVD and return the first `d` columns of
/// `U * S` together with all singular values (descending). Each right
/// singular vector is oriented so its largest-magnitude entry is positive.
/// Columns beyond the rank of `x` are zero.
fn centered_svd_embedding(mut x: DMatrix<f64>, d: usize) -> (DMatrix<f64>, Vec<f64>) {
    let (m, p) = x.shape();
    let mean = x.row_mean();
    for mut row in x.row_iter_mut() {
        row -= &mean;
    }
    let svd = SVD::new(x.clone(), false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut out = DMatrix::zeros(m, d);
    for (c, &src) in order.iter().take(d.min(p)).enumerate() {
        let mut axis: DVector<f64> = v_t.row(src).transpose();
        crate::features::orient(&mut axis);
        out.set_column(c, &(&x * axis));
    }
    (out, singular_values)
}

/// LOT embedding of `clouds` against `reference`.
pub fn lot_vectorize(
    clouds: &[PointCloud],
    reference: &ReferenceDistribution,
    solver: LotSolver,
    d: usize,
) -> Result<GraphEmbedding> {
    let m = clouds.len();
    let (r, k) = (reference.len(), reference.points.ncols());
    if d == 0 || d > m.min(r * k) {
        return Err(Error::Parameter(format!(
            "embedding dimension {d} must lie in 1..={} (graphs {m}, reference {r} x {k})",
            m.min(r * k)
        )));
    }
    if let Some(c) = clouds.iter().find(|c| c.dim() != k) {
        return Err(Error::Shape(format!(
            "cloud of dimension {} against a {k}-dimensional reference",
            c.dim()
        )));
    }
    let target = reference.cloud()?;
    let rows = clouds
        .par_iter()
        .map(|c| lot_row(c, &target, solver))
        .collect::<Result<Vec<_>>>()?;
    let x = DMatrix::from_fn(m, r * k, |i, j| rows[i][j]);
    let (matrix, singular_values) = centered_svd_embedding(x, d);
    let method = match solver {
        LotSolver::Exact => EmbeddingMethod::Wasserstein,
        LotSolver::Sinkhorn(_) => EmbeddingMethod::Sinkhorn,
    };
    Ok(GraphEmbedding {
        matrix,
        method: method.name().into(),
        feature_columns: Vec::new(),
        singular_values,
    })
}

/// Approximate Wasserstein embedding: each graph's signature is the weighted
/// mean of its node vectors; the centred signatures are reduced by SVD and
/// scaled by the singular values.
pub fn approx_wasserstein_embed(clouds: &[PointCloud], d: usize) -> Result<GraphEmbedding> {
    let k = clouds
        .first()
        .ok_or_else(|| Error::Parameter("no point clouds".into()))?
        .dim();
    if d == 0 || d > k {
        return Err(Error::Parameter(format!(
            "approximate embedding dimension {d} must lie in 1..={k}"
        )));
    }
    let mut x = DMatrix::zeros(clouds.len(), k);
    for (i, c) in clouds.iter().enumerate() {
        if c.dim() != k {
            return Err(Error::Shape(format!("clouds of dimension {} and {k}", c.dim())));
        }
        x.set_row(i, &c.mean().transpose());
    }
    let (matrix, singular_values) = centered_svd_embedding(x, d);
    Ok(GraphEmbedding {
        matrix,
        method: EmbeddingMethod::Approximate.name().into(),
        feature_columns: Vec::new(),
        singular_values,
    })
}

/// Lower median of the row counts.
fn median_rows(features: &[FeatureMatrix]) -> usize {
    let mut counts: Vec<usize> = features.iter().map(FeatureMatrix::rows).collect();
    counts.sort_unstable();
    counts[(counts.len() - 1) / 2]
}

/// Uniformly weighted clouds from feature matrices, checking that they line
/// up with the collection.
pub fn clouds_from_features(features: &[FeatureMatrix]) -> Result<Vec<PointCloud>> {
    features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            if f.rows() == 0 {
                return Err(Error::Pipeline {
                    graph_id: f.graph_id,
                    message: "feature matrix has no rows".into(),
                });
            }
            if f.graph_id != i {
                return Err(Error::Pipeline {
                    graph_id: f.graph_id,
                    message: format!("feature matrix found at position {i}"),
                });
            }
            PointCloud::uniform(f.values.clone())
        })
        .collect()
}

/// Embed a collection from its per-graph feature matrices (one per graph,
/// in order). When features were computed on sampled nodes only those rows
/// take part.
pub fn embed_collection(
    collection: &GraphCollection,
    features: &[FeatureMatrix],
    config: &EmbeddingConfig,
) -> Result<GraphEmbedding> {
    if features.len() != collection.len() {
        return Err(Error::Shape(format!(
            "{} feature matrices for {} graphs",
            features.len(),
            collection.len()
        )));
    }
    let clouds = clouds_from_features(features)?;
    let mut emb = match config.method {
        EmbeddingMethod::Approximate => approx_wasserstein_embed(&clouds, config.dim)?,
        EmbeddingMethod::Wasserstein | EmbeddingMethod::Sinkhorn => {
            let r = config.reference_size.unwrap_or_else(|| median_rows(features)).max(1);
            let reference = build_reference(&clouds, r, config.seed)?;
            let solver = match config.method {
                EmbeddingMethod::Wasserstein => LotSolver::Exact,
                _ => LotSolver::Sinkhorn(SinkhornParams {
                    epsilon: config.sinkhorn_epsilon,
                    ..SinkhornParams::default()
                }),
            };
            lot_vectorize(&clouds, &reference, solver, config.dim)?
        }
    };
    emb.feature_columns = features[0].columns.clone();
    Ok(emb)
}
