//! Entropically regularised transport, iterated on dual potentials in the
//! log domain so that small regularisation does not underflow.

use nalgebra::DMatrix;

use super::{cost_matrix, plan_cost, PointCloud, TransportPlan};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornParams {
    /// Regularisation strength; `None` uses [`default_epsilon`].
    pub epsilon: Option<f64>,
    pub max_iters: usize,
    /// Stop once the L1 violation of the source marginal drops below this.
    pub tol: f64,
}

impl Default for SinkhornParams {
    fn default() -> Self {
        Self {
            epsilon: None,
            max_iters: 1000,
            tol: 1e-6,
        }
    }
}

/// `0.05 * mean(C)`, falling back to 1 when every cost is zero.
pub fn default_epsilon(cost: &DMatrix<f64>) -> f64 {
    let mean = cost.mean();
    if mean > 0.0 {
        0.05 * mean
    } else {
        1.0
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Sinkhorn plan for kernel `exp(-C / epsilon)`. The reported cost is the
/// transport cost of the plan without the entropy term. Hitting the
/// iteration cap is not an error; the plan is returned with
/// `converged = false`.
pub fn sinkhorn_ot(a: &PointCloud, b: &PointCloud, params: SinkhornParams) -> Result<TransportPlan> {
    let cost = cost_matrix(a, b)?;
    let eps = params.epsilon.unwrap_or_else(|| default_epsilon(&cost));
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Parameter(format!("sinkhorn epsilon {eps} must be positive")));
    }
    let (n, r) = (a.len(), b.len());
    let log_a: Vec<f64> = a.weights().iter().map(|w| w.ln()).collect();
    let log_b: Vec<f64> = b.weights().iter().map(|w| w.ln()).collect();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; r];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iters {
        iterations += 1;
        for i in 0..n {
            f[i] = eps * log_a[i] - eps * log_sum_exp((0..r).map(|j| (g[j] - cost[(i, j)]) / eps));
        }
        for j in 0..r {
            g[j] = eps * log_b[j] - eps * log_sum_exp((0..n).map(|i| (f[i] - cost[(i, j)]) / eps));
        }
        // column marginals are exact after the g update; check the rows
        let violation: f64 = (0..n)
            .map(|i| {
                let row: f64 = (0..r).map(|j| ((f[i] + g[j] - cost[(i, j)]) / eps).exp()).sum();
                (row - a.weights()[i]).abs()
            })
            .sum();
        if violation < params.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("sinkhorn stopped at the iteration cap ({}) with epsilon {eps}", params.max_iters);
    }
    let plan = DMatrix::from_fn(n, r, |i, j| ((f[i] + g[j] - cost[(i, j)]) / eps).exp());
    let total = plan_cost(&plan, &cost);
    Ok(TransportPlan {
        plan,
        cost: total,
        converged,
        iterations,
    })
}
