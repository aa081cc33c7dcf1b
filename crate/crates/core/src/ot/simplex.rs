//! Exact transport by the transportation (network) simplex method.
//!
//! The basis is a spanning tree over the `n + r` supply and demand nodes
//! with `n + r - 1` basic cells, started from the north-west corner rule.
//! Entering and leaving cells follow Bland's smallest-index rule, which
//! rules out cycling on degenerate instances and keeps the pivot sequence
//! fixed for a given input.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use super::{cost_matrix, plan_cost, PointCloud, TransportPlan};
use crate::error::{Error, Result};

pub fn exact_ot(a: &PointCloud, b: &PointCloud) -> Result<TransportPlan> {
    let cost = cost_matrix(a, b)?;
    let supply: Vec<f64> = a.weights().iter().copied().collect();
    let demand: Vec<f64> = b.weights().iter().copied().collect();
    let (plan, pivots) = solve_transport(&supply, &demand, &cost)?;
    let total = plan_cost(&plan, &cost);
    Ok(TransportPlan {
        plan,
        cost: total,
        converged: true,
        iterations: pivots,
    })
}

struct Basis {
    n: usize,
    r: usize,
    /// Basic cells as `i * r + j`.
    cells: Vec<usize>,
    is_basic: Vec<bool>,
    flow: DMatrix<f64>,
}

impl Basis {
    fn north_west(supply: &[f64], demand: &[f64]) -> Self {
        let (n, r) = (supply.len(), demand.len());
        let mut flow = DMatrix::zeros(n, r);
        let mut cells = Vec::with_capacity(n + r - 1);
        let mut is_basic = vec![false; n * r];
        let (mut left_a, mut left_b) = (supply.to_vec(), demand.to_vec());
        let (mut i, mut j) = (0, 0);
        loop {
            let x = left_a[i].min(left_b[j]).max(0.0);
            flow[(i, j)] = x;
            cells.push(i * r + j);
            is_basic[i * r + j] = true;
            left_a[i] -= x;
            left_b[j] -= x;
            if i == n - 1 && j == r - 1 {
                break;
            }
            if i == n - 1 {
                j += 1;
            } else if j == r - 1 || left_a[i] <= left_b[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self {
            n,
            r,
            cells,
            is_basic,
            flow,
        }
    }

    /// Tree adjacency: node `i < n` is supply row `i`, node `n + j` demand
    /// column `j`; entries are `(other node, cell)`.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n + self.r];
        for &c in &self.cells {
            let (i, j) = (c / self.r, c % self.r);
            adj[i].push((self.n + j, c));
            adj[self.n + j].push((i, c));
        }
        adj
    }

    /// Dual potentials with `u[0] = 0` and `u_i + v_j = c_ij` on basic cells.
    fn potentials(&self, adj: &[Vec<(usize, usize)>], cost: &DMatrix<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut pot = vec![f64::NAN; self.n + self.r];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        let mut seen = 1;
        while let Some(x) = queue.pop_front() {
            for &(y, c) in &adj[x] {
                if pot[y].is_nan() {
                    let cij = cost[(c / self.r, c % self.r)];
                    pot[y] = cij - pot[x];
                    seen += 1;
                    queue.push_back(y);
                }
            }
        }
        if seen != self.n + self.r {
            return Err(Error::Solver(format!(
                "basis of a {}x{} instance is not a spanning tree",
                self.n, self.r
            )));
        }
        let v = pot.split_off(self.n);
        Ok((pot, v))
    }

    /// Tree path from demand node `n + j` to supply node `i`, as cells.
    fn path(&self, adj: &[Vec<(usize, usize)>], i: usize, j: usize) -> Vec<usize> {
        let target = self.n + j;
        let mut via = vec![usize::MAX; self.n + self.r];
        let mut prev = vec![usize::MAX; self.n + self.r];
        let mut queue = VecDeque::from([i]);
        prev[i] = i;
        while let Some(x) = queue.pop_front() {
            if x == target {
                break;
            }
            for &(y, c) in &adj[x] {
                if prev[y] == usize::MAX {
                    prev[y] = x;
                    via[y] = c;
                    queue.push_back(y);
                }
            }
        }
        let mut cells = Vec::new();
        let mut x = target;
        while x != i {
            cells.push(via[x]);
            x = prev[x];
        }
        cells
    }
}

/// Solve the balanced transportation problem; returns the plan and the
/// number of pivots.
pub(crate) fn solve_transport(supply: &[f64], demand: &[f64], cost: &DMatrix<f64>) -> Result<(DMatrix<f64>, usize)> {
    let (n, r) = (supply.len(), demand.len());
    if n == 0 || r == 0 {
        return Err(Error::Parameter("transport between empty clouds".into()));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::Solver(format!("non-finite cost in {n}x{r} instance")));
    }
    let scale = cost.amax().max(1.0);
    let tol = 1e-12 * scale;
    let max_pivots = 50 * n * r + 1000;

    let mut basis = Basis::north_west(supply, demand);
    for pivots in 0..max_pivots {
        let adj = basis.adjacency();
        let (u, v) = basis.potentials(&adj, cost)?;
        // Bland: first improving cell in row-major order enters
        let entering = (0..n * r).find(|&c| {
            let (i, j) = (c / r, c % r);
            !basis.is_basic[c] && cost[(i, j)] - u[i] - v[j] < -tol
        });
        let Some(enter) = entering else {
            return Ok((basis.flow, pivots));
        };
        let (ei, ej) = (enter / r, enter % r);
        let path = basis.path(&adj, ei, ej);
        // the cell touching column ej loses flow, then signs alternate
        let leave = path
            .iter()
            .step_by(2)
            .copied()
            .min_by(|&x, &y| {
                basis.flow[(x / r, x % r)]
                    .total_cmp(&basis.flow[(y / r, y % r)])
                    .then(x.cmp(&y))
            })
            .expect("cycle has a decreasing cell");
        let theta = basis.flow[(leave / r, leave % r)];
        for (k, &c) in path.iter().enumerate() {
            let f = &mut basis.flow[(c / r, c % r)];
            if k % 2 == 0 {
                *f = (*f - theta).max(0.0);
            } else {
                *f += theta;
            }
        }
        basis.flow[(leave / r, leave % r)] = 0.0;
        basis.flow[(ei, ej)] = theta;
        basis.is_basic[leave] = false;
        basis.is_basic[enter] = true;
        let slot = basis.cells.iter().position(|&c| c == leave).expect("leaving cell is basic");
        basis.cells[slot] = enter;
    }
    Err(Error::Solver(format!(
        "no optimum after {max_pivots} pivots on a {n}x{r} instance (cost range {scale})"
    )))
}
