//! Single CART tree on a bootstrap sample.

use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng;

/// Training target in internal form: class indices `0..n_classes` or reals.
pub(crate) enum Target<'a> {
    Class { y: &'a [usize], n_classes: usize },
    Real(&'a [f64]),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Class distribution (classification) or a single mean (regression).
    Leaf(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Tree {
    pub nodes: Vec<Node>,
    /// Weighted impurity decrease per feature, summed over the splits.
    pub importance: Vec<f64>,
}

pub(crate) struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub max_features: usize,
}

struct Builder<'a, R> {
    x: &'a DMatrix<f64>,
    target: &'a Target<'a>,
    params: &'a TreeParams,
    rng: &'a mut R,
    total: f64,
    nodes: Vec<Node>,
    importance: Vec<f64>,
}

/// Impurity of a sample set: gini for classes, variance for reals.
fn impurity(target: &Target<'_>, rows: &[usize]) -> f64 {
    let n = rows.len() as f64;
    match target {
        Target::Class { y, n_classes } => {
            let mut counts = vec![0.0; *n_classes];
            for &r in rows {
                counts[y[r]] += 1.0;
            }
            1.0 - counts.iter().map(|c| (c / n).powi(2)).sum::<f64>()
        }
        Target::Real(y) => {
            let mean = rows.iter().map(|&r| y[r]).sum::<f64>() / n;
            rows.iter().map(|&r| (y[r] - mean).powi(2)).sum::<f64>() / n
        }
    }
}

fn leaf_value(target: &Target<'_>, rows: &[usize]) -> Vec<f64> {
    let n = rows.len() as f64;
    match target {
        Target::Class { y, n_classes } => {
            let mut counts = vec![0.0; *n_classes];
            for &r in rows {
                counts[y[r]] += 1.0 / n;
            }
            counts
        }
        Target::Real(y) => vec![rows.iter().map(|&r| y[r]).sum::<f64>() / n],
    }
}

/// Running sufficient statistics so a sorted sweep costs O(n) per feature.
enum Stats {
    Class { counts: Vec<f64> },
    Real { sum: f64, sq: f64 },
}

impl Stats {
    fn empty(target: &Target<'_>) -> Self {
        match target {
            Target::Class { n_classes, .. } => Stats::Class {
                counts: vec![0.0; *n_classes],
            },
            Target::Real(_) => Stats::Real { sum: 0.0, sq: 0.0 },
        }
    }

    fn add(&mut self, target: &Target<'_>, r: usize, sign: f64) {
        match (self, target) {
            (Stats::Class { counts }, Target::Class { y, .. }) => counts[y[r]] += sign,
            (Stats::Real { sum, sq }, Target::Real(y)) => {
                *sum += sign * y[r];
                *sq += sign * y[r] * y[r];
            }
            _ => unreachable!("statistics match the target kind"),
        }
    }

    fn impurity(&self, n: f64) -> f64 {
        match self {
            Stats::Class { counts } => 1.0 - counts.iter().map(|c| (c / n).powi(2)).sum::<f64>(),
            Stats::Real { sum, sq } => (sq / n - (sum / n).powi(2)).max(0.0),
        }
    }
}

impl<R: Rng> Builder<'_, R> {
    fn best_split(&mut self, rows: &[usize], parent: f64) -> Option<(usize, f64, f64)> {
        let d = self.x.ncols();
        let mut features = index::sample(self.rng, d, self.params.max_features.min(d)).into_vec();
        features.sort_unstable();
        let n = rows.len();
        let min_leaf = self.params.min_leaf.max(1);
        let mut best: Option<(usize, f64, f64)> = None;
        for f in features {
            let mut sorted = rows.to_vec();
            sorted.sort_by(|&a, &b| self.x[(a, f)].total_cmp(&self.x[(b, f)]).then(a.cmp(&b)));
            let mut left = Stats::empty(self.target);
            let mut right = Stats::empty(self.target);
            for &r in &sorted {
                right.add(self.target, r, 1.0);
            }
            for i in 0..n - 1 {
                left.add(self.target, sorted[i], 1.0);
                right.add(self.target, sorted[i], -1.0);
                let (lo, hi) = (self.x[(sorted[i], f)], self.x[(sorted[i + 1], f)]);
                let nl = i + 1;
                if lo == hi || nl < min_leaf || n - nl < min_leaf {
                    continue;
                }
                let (wl, wr) = (nl as f64 / n as f64, (n - nl) as f64 / n as f64);
                let gain = parent - wl * left.impurity(nl as f64) - wr * right.impurity((n - nl) as f64);
                if gain > 1e-12 && best.map_or(true, |b| gain > b.2 + 1e-15) {
                    let mid = lo + (hi - lo) / 2.0;
                    // keep the threshold strictly below the upper value
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some((f, threshold, gain));
                }
            }
        }
        best
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(Vec::new()));
        let parent = impurity(self.target, &rows);
        let splittable = depth < self.params.max_depth
            && rows.len() >= 2 * self.params.min_leaf.max(1)
            && parent > 1e-12;
        let split = if splittable { self.best_split(&rows, parent) } else { None };
        match split {
            None => self.nodes[id] = Node::Leaf(leaf_value(self.target, &rows)),
            Some((feature, threshold, gain)) => {
                self.importance[feature] += gain * rows.len() as f64 / self.total;
                let (l, r): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&row| self.x[(row, feature)] <= threshold);
                let left = self.grow(l, depth + 1);
                let right = self.grow(r, depth + 1);
                self.nodes[id] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
            }
        }
        id
    }
}

impl Tree {
    pub(crate) fn fit<R: Rng>(
        x: &DMatrix<f64>,
        target: &Target<'_>,
        rows: Vec<usize>,
        params: &TreeParams,
        rng: &mut R,
    ) -> Tree {
        let mut b = Builder {
            x,
            target,
            params,
            rng,
            total: rows.len() as f64,
            nodes: Vec::new(),
            importance: vec![0.0; x.ncols()],
        };
        b.grow(rows, 0);
        Tree {
            nodes: b.nodes,
            importance: b.importance,
        }
    }

    pub(crate) fn leaf<'a>(&'a self, row: impl Fn(usize) -> f64) -> &'a [f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row(*feature) <= *threshold { *left } else { *right },
            }
        }
    }

    pub(crate) fn split_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }
}
