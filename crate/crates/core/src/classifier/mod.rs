//! Seedable random forest (CART trees on bootstrap samples) for
//! classification and regression, with impurity-based importances and a
//! repeated random-split evaluator.

mod eval;
mod tree;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Labels;
use crate::seed;
use tree::{Target, Tree, TreeParams};

pub use eval::{evaluate_repeated, EvalParams, EvalReport, MeanStd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForestMode {
    Classify,
    Regress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features tried per split; `None` means `floor(sqrt(d))`.
    pub feature_subsample: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 6,
            min_leaf: 2,
            feature_subsample: None,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    trees: Vec<Tree>,
    n_features: usize,
    mode: ForestMode,
    /// Sorted class ids; leaf distributions are indexed in this order.
    classes: Vec<i64>,
    seed: u64,
}

impl ForestModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn mode(&self) -> ForestMode {
        self.mode
    }

    pub fn classes(&self) -> &[i64] {
        &self.classes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }
}

/// Fit a forest; each tree gets its own sub-seed so the model does not
/// depend on how trees are scheduled.
pub fn train_forest(x: &DMatrix<f64>, y: &Labels, params: &ForestParams, seed: u64) -> Result<ForestModel> {
    let (m, d) = x.shape();
    if y.len() != m {
        return Err(Error::Shape(format!("{} labels for {m} rows", y.len())));
    }
    if m < 2 {
        return Err(Error::Parameter(format!("need at least 2 training rows, got {m}")));
    }
    if d == 0 {
        return Err(Error::Parameter("no feature columns".into()));
    }
    if params.n_trees == 0 || params.min_leaf == 0 {
        return Err(Error::Parameter("n_trees and min_leaf must be positive".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("non-finite training value".into()));
    }
    let max_features = params
        .feature_subsample
        .unwrap_or_else(|| ((d as f64).sqrt().floor() as usize).max(1))
        .clamp(1, d);
    let tp = TreeParams {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        max_features,
    };
    let (mode, classes, class_idx, reals) = match y {
        Labels::Class(v) => {
            let mut classes = v.clone();
            classes.sort_unstable();
            classes.dedup();
            if classes.len() < 2 {
                log::warn!("single-class training set: the model predicts class {}", classes[0]);
            }
            let idx: Vec<usize> = v.iter().map(|c| classes.binary_search(c).expect("class present")).collect();
            (ForestMode::Classify, classes, idx, Vec::new())
        }
        Labels::Real(v) => {
            if v.iter().any(|t| !t.is_finite()) {
                return Err(Error::Parameter("non-finite regression target".into()));
            }
            (ForestMode::Regress, Vec::new(), Vec::new(), v.clone())
        }
    };
    let target = match mode {
        ForestMode::Classify => Target::Class {
            y: &class_idx,
            n_classes: classes.len(),
        },
        ForestMode::Regress => Target::Real(&reals),
    };
    let trees: Vec<Tree> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng_for(seed, &[seed::TAG_TREE, t as u64]);
            let rows: Vec<usize> = if params.bootstrap {
                (0..m).map(|_| rng.gen_range(0..m)).collect()
            } else {
                (0..m).collect()
            };
            Tree::fit(x, &target, rows, &tp, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        trees,
        n_features: d,
        mode,
        classes,
        seed,
    })
}

fn argmax_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Majority vote (ties toward the smaller class id) or mean of tree outputs.
pub fn predict(model: &ForestModel, x: &DMatrix<f64>) -> Result<Labels> {
    if model.trees.is_empty() {
        return Err(Error::Parameter("forest has no trees".into()));
    }
    if x.ncols() != model.n_features {
        return Err(Error::Shape(format!(
            "model expects {} features, got {}",
            model.n_features,
            x.ncols()
        )));
    }
    let rows = 0..x.nrows();
    Ok(match model.mode {
        ForestMode::Classify => Labels::Class(
            rows.map(|r| {
                let mut votes = vec![0.0; model.classes.len()];
                for t in &model.trees {
                    votes[argmax_first(t.leaf(|f| x[(r, f)]))] += 1.0;
                }
                model.classes[argmax_first(&votes)]
            })
            .collect(),
        ),
        ForestMode::Regress => Labels::Real(
            rows.map(|r| {
                model.trees.iter().map(|t| t.leaf(|f| x[(r, f)])[0]).sum::<f64>() / model.trees.len() as f64
            })
            .collect(),
        ),
    })
}

/// Mean decrease in impurity: per-tree importances normalized to one, then
/// averaged and renormalized. All zeros when no tree ever split.
pub fn feature_importances(model: &ForestModel) -> Vec<f64> {
    let mut total = vec![0.0; model.n_features];
    for t in &model.trees {
        let s: f64 = t.importance.iter().sum();
        if s > 0.0 {
            for (acc, v) in total.iter_mut().zip(&t.importance) {
                *acc += v / s;
            }
        }
    }
    let s: f64 = total.iter().sum();
    if s <= 0.0 || model.trees.iter().all(|t| t.split_count() == 0) {
        log::warn!("forest has no splits; importances are all zero");
        return vec![0.0; model.n_features];
    }
    total.iter().map(|v| v / s).collect()
}
