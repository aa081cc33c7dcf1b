//! Repeated random train/test splits.

use std::io::Write;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{predict, train_forest, ForestParams};
use crate::error::{Error, Result};
use crate::graph::Labels;
use crate::output::fmt_num;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalParams {
    pub n_runs: usize,
    pub train_fraction: f64,
    pub forest: ForestParams,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            n_runs: 50,
            train_fraction: 0.7,
            forest: ForestParams::default(),
        }
    }
}

impl EvalParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_runs == 0 {
            return Err(Error::Parameter("n_runs must be at least 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Parameter(format!(
                "train_fraction {} outside (0, 1)",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// Mean and population standard deviation over runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> MeanStd {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        MeanStd { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: String,
    pub n_runs: usize,
    pub train_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<MeanStd>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<MeanStd>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recall: Option<MeanStd>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f1: Option<MeanStd>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mae: Option<MeanStd>,
    /// Runs where some precision/recall denominator was zero (scored as 0).
    pub zero_division_runs: usize,
    /// Runs whose test split lacks at least one class.
    pub missing_class_runs: usize,
}

impl EvalReport {
    /// The headline number: mean accuracy, or mean MAE for regression.
    pub fn primary(&self) -> MeanStd {
        self.accuracy.or(self.mae).expect("report carries a metric")
    }

    pub fn csv_header() -> &'static str {
        "dataset,task,n_runs,accuracy_mean,accuracy_std,precision_mean,precision_std,recall_mean,recall_std,f1_mean,f1_std,mae_mean,mae_std"
    }

    pub fn write_csv_line<W: Write>(&self, out: &mut W, dataset: &str) -> Result<()> {
        let cell = |m: Option<MeanStd>| match m {
            Some(m) => format!("{},{}", fmt_num(m.mean), fmt_num(m.std)),
            None => ",".to_string(),
        };
        writeln!(
            out,
            "{dataset},{},{},{},{},{},{},{}",
            self.task,
            self.n_runs,
            cell(self.accuracy),
            cell(self.precision),
            cell(self.recall),
            cell(self.f1),
            cell(self.mae)
        )?;
        Ok(())
    }
}

struct ClassScores {
    accuracy: f64,
    precision: f64,
    recall: f64,
    f1: f64,
    zero_division: bool,
}

fn ratio(num: f64, den: f64, zero: &mut bool) -> f64 {
    if den == 0.0 {
        *zero = true;
        0.0
    } else {
        num / den
    }
}

/// Binary problems score the larger class id as positive; otherwise scores
/// are macro-averaged over all classes of the full label set.
fn class_scores(truth: &[i64], pred: &[i64], classes: &[i64]) -> ClassScores {
    let n = truth.len() as f64;
    let accuracy = truth.iter().zip(pred).filter(|(a, b)| a == b).count() as f64 / n;
    let mut zero = false;
    let mut per_class = |c: i64| {
        let tp = truth.iter().zip(pred).filter(|(t, p)| **t == c && **p == c).count() as f64;
        let predicted = pred.iter().filter(|p| **p == c).count() as f64;
        let actual = truth.iter().filter(|t| **t == c).count() as f64;
        let p = ratio(tp, predicted, &mut zero);
        let r = ratio(tp, actual, &mut zero);
        let f = ratio(2.0 * p * r, p + r, &mut zero);
        (p, r, f)
    };
    let scored: Vec<(f64, f64, f64)> = if classes.len() == 2 {
        vec![per_class(classes[1])]
    } else {
        classes.iter().map(|&c| per_class(c)).collect()
    };
    let k = scored.len() as f64;
    ClassScores {
        accuracy,
        precision: scored.iter().map(|s| s.0).sum::<f64>() / k,
        recall: scored.iter().map(|s| s.1).sum::<f64>() / k,
        f1: scored.iter().map(|s| s.2).sum::<f64>() / k,
        zero_division: zero,
    }
}

/// `n_runs` independent shuffles and train/test splits; the split and the
/// forest of run `i` are seeded from `(seed, i)` alone. Classes are not
/// rebalanced.
pub fn evaluate_repeated(x: &DMatrix<f64>, y: &Labels, params: &EvalParams, seed: u64) -> Result<EvalReport> {
    params.validate()?;
    let m = x.nrows();
    if m < 10 {
        return Err(Error::Parameter(format!("evaluation needs at least 10 graphs, got {m}")));
    }
    if y.len() != m {
        return Err(Error::Shape(format!("{} labels for {m} rows", y.len())));
    }
    let n_train = ((params.train_fraction * m as f64).round() as usize).clamp(2, m - 1);
    let classes: Vec<i64> = match y {
        Labels::Class(v) => {
            let mut c = v.clone();
            c.sort_unstable();
            c.dedup();
            c
        }
        Labels::Real(_) => Vec::new(),
    };
    let runs: Vec<(Vec<f64>, bool, bool)> = (0..params.n_runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = seed::rng_for(seed, &[seed::TAG_SPLIT, run as u64]);
            let mut order: Vec<usize> = (0..m).collect();
            order.shuffle(&mut rng);
            let (train, test) = order.split_at(n_train);
            let model_seed = seed::derive(seed, &[seed::TAG_SPLIT, run as u64, 1]);
            let model = train_forest(&x.select_rows(train), &y.subset(train), &params.forest, model_seed)?;
            let pred = predict(&model, &x.select_rows(test))?;
            Ok(match (y.subset(test), pred) {
                (Labels::Class(t), Labels::Class(p)) => {
                    let s = class_scores(&t, &p, &classes);
                    let missing = classes.iter().any(|c| !t.contains(c));
                    (vec![s.accuracy, s.precision, s.recall, s.f1], s.zero_division, missing)
                }
                (Labels::Real(t), Labels::Real(p)) => {
                    let mae = t.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum::<f64>() / t.len() as f64;
                    (vec![mae], false, false)
                }
                _ => unreachable!("prediction kind follows the labels"),
            })
        })
        .collect::<Result<_>>()?;
    let column = |i: usize| MeanStd::of(&runs.iter().map(|r| r.0[i]).collect::<Vec<_>>());
    let zero_division_runs = runs.iter().filter(|r| r.1).count();
    let missing_class_runs = runs.iter().filter(|r| r.2).count();
    if zero_division_runs > 0 {
        log::info!("{zero_division_runs} run(s) scored a zero-division metric as 0");
    }
    let classify = y.is_categorical();
    Ok(EvalReport {
        task: if classify { "classify" } else { "regress" }.into(),
        n_runs: params.n_runs,
        train_fraction: params.train_fraction,
        accuracy: classify.then(|| column(0)),
        precision: classify.then(|| column(1)),
        recall: classify.then(|| column(2)),
        f1: classify.then(|| column(3)),
        mae: (!classify).then(|| column(0)),
        zero_division_runs,
        missing_class_runs,
    })
}
