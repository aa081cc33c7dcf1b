//! Discrete optimal transport between weighted point clouds.
//!
//! Ground cost is the Euclidean distance between points, so transport costs
//! are order-1 Wasserstein distances.

mod simplex;
mod sinkhorn;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use simplex::exact_ot;
pub use sinkhorn::{default_epsilon, sinkhorn_ot, SinkhornParams};

/// Points (one per row) carrying non-negative weights that sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: DMatrix<f64>,
    weights: DVector<f64>,
}

impl PointCloud {
    pub fn new(points: DMatrix<f64>, weights: DVector<f64>) -> Result<Self> {
        if points.nrows() == 0 {
            return Err(Error::Parameter("point cloud needs at least one point".into()));
        }
        if weights.len() != points.nrows() {
            return Err(Error::Shape(format!(
                "{} weights for {} points",
                weights.len(),
                points.nrows()
            )));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parameter("point cloud contains non-finite coordinates".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Parameter("weights must be finite and non-negative".into()));
        }
        let total = weights.sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { points, weights })
    }

    /// Uniform weights `1/n`.
    pub fn uniform(points: DMatrix<f64>) -> Result<Self> {
        let n = points.nrows().max(1);
        Self::new(points, DVector::from_element(n, 1.0 / n as f64))
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// Weighted mean of the points.
    pub fn mean(&self) -> DVector<f64> {
        self.points.transpose() * &self.weights
    }
}

/// Coupling between two clouds together with its transport cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    /// Source points by rows, target points by columns.
    pub plan: DMatrix<f64>,
    pub cost: f64,
    /// False when an iterative solver hit its iteration cap first.
    pub converged: bool,
    pub iterations: usize,
}

impl TransportPlan {
    /// Largest absolute deviation of the plan's marginals from the weights.
    pub fn marginal_error(&self, a: &PointCloud, b: &PointCloud) -> f64 {
        let rows = self.plan.column_sum() - a.weights();
        let cols = self.plan.row_sum().transpose() - b.weights();
        rows.amax().max(cols.amax())
    }
}

/// Pairwise Euclidean distances, `a` by rows and `b` by columns.
pub fn cost_matrix(a: &PointCloud, b: &PointCloud) -> Result<DMatrix<f64>> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!(
            "cannot compare {}-dimensional and {}-dimensional points",
            a.dim(),
            b.dim()
        )));
    }
    Ok(DMatrix::from_fn(a.len(), b.len(), |i, j| {
        (a.points.row(i) - b.points.row(j)).norm()
    }))
}

pub(crate) fn plan_cost(plan: &DMatrix<f64>, cost: &DMatrix<f64>) -> f64 {
    plan.iter().zip(cost.iter()).map(|(p, c)| p * c).sum()
}

/// Order-1 Wasserstein distance between two uniformly weighted samples on
/// the real line, integrating the gap between their empirical CDFs.
pub fn wasserstein_1d(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Parameter("1-D Wasserstein needs non-empty samples".into()));
    }
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (nx, ny) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut prev = xs[0].min(ys[0]);
    let mut total = 0.0;
    while i < xs.len() || j < ys.len() {
        let next = match (xs.get(i), ys.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        total += (next - prev) * (i as f64 / nx - j as f64 / ny).abs();
        while i < xs.len() && xs[i] == next {
            i += 1;
        }
        while j < ys.len() && ys[j] == next {
            j += 1;
        }
        prev = next;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cloud(rows: usize, dim: usize, data: &[f64]) -> PointCloud {
        PointCloud::uniform(DMatrix::from_row_slice(rows, dim, data)).unwrap()
    }

    #[test]
    fn cloud_validation() {
        assert!(PointCloud::uniform(DMatrix::zeros(0, 2)).is_err());
        let p = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        assert!(PointCloud::new(p.clone(), DVector::from_vec(vec![0.5, 0.6])).is_err());
        assert!(PointCloud::new(p.clone(), DVector::from_vec(vec![1.5, -0.5])).is_err());
        assert!(PointCloud::new(DMatrix::from_row_slice(1, 1, &[f64::NAN]), DVector::from_vec(vec![1.0])).is_err());
        assert_eq!(PointCloud::new(p, DVector::from_vec(vec![0.25, 0.75])).unwrap().mean()[0], 0.75);
    }

    #[test]
    fn cost_matrix_examples() {
        let s = cloud(1, 2, &[1.0, 2.0]);
        assert_eq!(cost_matrix(&s, &s).unwrap()[(0, 0)], 0.0);
        assert_eq!(cost_matrix(&cloud(1, 1, &[0.0]), &cloud(1, 1, &[3.0])).unwrap()[(0, 0)], 3.0);
        let c = cost_matrix(&cloud(2, 2, &[0.0, 0.0, 1.0, 0.0]), &cloud(1, 2, &[0.0, 1.0])).unwrap();
        assert_eq!(c[(0, 0)], 1.0);
        assert_abs_diff_eq!(c[(1, 0)], 2f64.sqrt());
        assert!(matches!(cost_matrix(&s, &cloud(1, 1, &[0.0])), Err(Error::Shape(_))));
    }

    #[test]
    fn wasserstein_1d_examples() {
        assert_eq!(wasserstein_1d(&[3.0, 1.0], &[1.0, 3.0]).unwrap(), 0.0);
        assert_eq!(wasserstein_1d(&[0.0], &[5.0]).unwrap(), 5.0);
        assert_eq!(wasserstein_1d(&[0.0, 1.0], &[1.0, 2.0]).unwrap(), 1.0);
        // CDF gap is 1/6 on [0,1) and 1/3 on [1,3)
        assert_abs_diff_eq!(wasserstein_1d(&[0.0, 1.0], &[0.0, 0.0, 3.0]).unwrap(), 5.0 / 6.0, epsilon = 1e-15);
        assert!(wasserstein_1d(&[], &[1.0]).is_err());
    }
}
