//! Seeded k-means with k-means++ seeding and restarts.

use nalgebra::DMatrix;
use rand::Rng;

use crate::seed;

pub(crate) struct KMeansParams {
    pub restarts: usize,
    pub max_iters: usize,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iters: 100,
        }
    }
}

fn sq_dist(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    (0..points.ncols())
        .map(|d| (points[(i, d)] - centers[(c, d)]).powi(2))
        .sum()
}

fn plus_plus_init<R: Rng>(points: &DMatrix<f64>, k: usize, rng: &mut R) -> DMatrix<f64> {
    let n = points.nrows();
    let mut centers = DMatrix::zeros(k, points.ncols());
    let first = rng.gen_range(0..n);
    centers.set_row(0, &points.row(first));
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centers, 0)).collect();
    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centers.set_row(c, &points.row(pick));
        for (i, slot) in nearest.iter_mut().enumerate() {
            *slot = slot.min(sq_dist(points, i, &centers, c));
        }
    }
    centers
}

/// Lloyd iterations from `centers`; returns the inertia.
fn lloyd(points: &DMatrix<f64>, centers: &mut DMatrix<f64>, max_iters: usize) -> f64 {
    let (n, k, dim) = (points.nrows(), centers.nrows(), points.ncols());
    let mut assign = vec![usize::MAX; n];
    for _ in 0..max_iters {
        let mut changed = false;
        for i in 0..n {
            let best = (0..k)
                .map(|c| (c, sq_dist(points, i, centers, c)))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .map(|(c, _)| c)
                .expect("at least one centre");
            if assign[i] != best {
                assign[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = DMatrix::<f64>::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for i in 0..n {
            let c = assign[i];
            counts[c] += 1;
            for d in 0..dim {
                sums[(c, d)] += points[(i, d)];
            }
        }
        for c in 0..k {
            // an emptied cluster keeps its previous centre
            if counts[c] > 0 {
                for d in 0..dim {
                    centers[(c, d)] = sums[(c, d)] / counts[c] as f64;
                }
            }
        }
    }
    (0..n)
        .map(|i| (0..k).map(|c| sq_dist(points, i, centers, c)).fold(f64::INFINITY, f64::min))
        .sum()
}

/// Best of `restarts` runs by inertia; `k <= points.nrows()`.
pub(crate) fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64, params: &KMeansParams) -> DMatrix<f64> {
    let mut best: Option<(f64, DMatrix<f64>)> = None;
    for restart in 0..params.restarts.max(1) {
        let mut rng = seed::rng_for(seed, &[seed::TAG_KMEANS, restart as u64]);
        let mut centers = plus_plus_init(points, k, &mut rng);
        let inertia = lloyd(points, &mut centers, params.max_iters);
        if best.as_ref().map_or(true, |(b, _)| inertia < *b) {
            best = Some((inertia, centers));
        }
    }
    best.expect("at least one restart").1
}
