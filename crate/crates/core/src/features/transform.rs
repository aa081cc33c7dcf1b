//! Column-wise operations on feature matrices: concatenation, pooled
//! standardisation and PCA.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{column_names, FeatureMatrix};
use crate::error::{Error, Result};

/// Horizontal concatenation of matrices describing the same nodes.
pub fn concatenate_features(parts: &[FeatureMatrix]) -> Result<FeatureMatrix> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Parameter("nothing to concatenate".into()))?;
    for p in &parts[1..] {
        if p.graph_id != first.graph_id || p.node_index != first.node_index {
            return Err(Error::Shape(format!(
                "cannot concatenate features of graph {} ({} rows) with graph {} ({} rows)",
                first.graph_id,
                first.rows(),
                p.graph_id,
                p.rows()
            )));
        }
    }
    let width: usize = parts.iter().map(FeatureMatrix::width).sum();
    let mut values = DMatrix::zeros(first.rows(), width);
    let mut columns = Vec::with_capacity(width);
    let mut at = 0;
    for p in parts {
        values.columns_mut(at, p.width()).copy_from(&p.values);
        columns.extend(p.columns.iter().cloned());
        at += p.width();
    }
    FeatureMatrix::new(first.graph_id, columns, values, first.node_index.clone())
}

fn check_same_columns(matrices: &[FeatureMatrix]) -> Result<usize> {
    let first = matrices
        .first()
        .ok_or_else(|| Error::Parameter("no feature matrices".into()))?;
    if let Some(m) = matrices.iter().find(|m| m.columns != first.columns) {
        return Err(Error::Shape(format!(
            "graph {} has columns {:?}, expected {:?}",
            m.graph_id, m.columns, first.columns
        )));
    }
    Ok(first.width())
}

/// Pooled mean and (population) covariance over all rows of all matrices.
fn pooled_moments(matrices: &[FeatureMatrix], width: usize) -> (DVector<f64>, DMatrix<f64>, usize) {
    let count: usize = matrices.iter().map(FeatureMatrix::rows).sum();
    let mut mean = DVector::zeros(width);
    for m in matrices {
        for r in 0..m.rows() {
            mean += m.values.row(r).transpose();
        }
    }
    mean /= count.max(1) as f64;
    let mut cov = DMatrix::zeros(width, width);
    for m in matrices {
        for r in 0..m.rows() {
            let d = m.values.row(r).transpose() - &mean;
            cov += &d * d.transpose();
        }
    }
    cov /= count.max(1) as f64;
    (mean, cov, count)
}

/// z-score every column with the mean and standard deviation pooled over
/// all nodes of all graphs. Columns without spread become zero.
pub fn standardize_features(matrices: &[FeatureMatrix]) -> Result<Vec<FeatureMatrix>> {
    let width = check_same_columns(matrices)?;
    let count: usize = matrices.iter().map(FeatureMatrix::rows).sum();
    if count == 0 {
        return Err(Error::Parameter("no nodes to standardise".into()));
    }
    let mut mean = vec![0.0; width];
    for m in matrices {
        for (c, slot) in mean.iter_mut().enumerate() {
            *slot += m.values.column(c).sum();
        }
    }
    mean.iter_mut().for_each(|s| *s /= count as f64);
    let mut var = vec![0.0; width];
    for m in matrices {
        for (c, slot) in var.iter_mut().enumerate() {
            *slot += m.values.column(c).iter().map(|x| (x - mean[c]).powi(2)).sum::<f64>();
        }
    }
    let scale: Vec<f64> = var
        .iter()
        .zip(&mean)
        .map(|(v, mu)| {
            let sd = (v / count as f64).sqrt();
            // spread at rounding level of the mean counts as constant
            if sd <= 1e-12 * mu.abs().max(1.0) {
                0.0
            } else {
                1.0 / sd
            }
        })
        .collect();
    Ok(matrices
        .iter()
        .map(|m| {
            let mut out = m.clone();
            for c in 0..width {
                for x in out.values.column_mut(c).iter_mut() {
                    *x = (*x - mean[c]) * scale[c];
                }
            }
            out
        })
        .collect())
}

/// Spectrum of the pooled covariance used by [`pca_reduce`].
#[derive(Debug, Clone, PartialEq)]
pub struct PcaSummary {
    /// Covariance eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Principal axes as columns (width x target_dim).
    pub components: DMatrix<f64>,
    pub mean: DVector<f64>,
}

impl PcaSummary {
    /// Share of total variance captured by the kept components.
    pub fn retained_variance(&self) -> f64 {
        let total: f64 = self.eigenvalues.iter().map(|e| e.max(0.0)).sum();
        if total == 0.0 {
            return 1.0;
        }
        let kept: f64 = self.eigenvalues[..self.components.ncols()].iter().map(|e| e.max(0.0)).sum();
        kept / total
    }
}

/// Project every matrix onto the top `target_dim` principal axes of the
/// pooled node vectors. Each axis is oriented so its largest-magnitude
/// loading is positive.
pub fn pca_reduce(matrices: &[FeatureMatrix], target_dim: usize) -> Result<(Vec<FeatureMatrix>, PcaSummary)> {
    let width = check_same_columns(matrices)?;
    if target_dim == 0 || target_dim > width {
        return Err(Error::Parameter(format!(
            "target dimension {target_dim} must lie in 1..={width}"
        )));
    }
    let (mean, cov, count) = pooled_moments(matrices, width);
    if count == 0 {
        return Err(Error::Parameter("no nodes to reduce".into()));
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..width).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut components = DMatrix::zeros(width, target_dim);
    for (j, &src) in order.iter().take(target_dim).enumerate() {
        let mut axis = eig.eigenvectors.column(src).clone_owned();
        orient(&mut axis);
        components.set_column(j, &axis);
    }
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let names = column_names("pca", target_dim);
    let reduced = matrices
        .iter()
        .map(|m| {
            let mut centered = m.values.clone();
            for mut row in centered.row_iter_mut() {
                row -= mean.transpose();
            }
            FeatureMatrix::new(m.graph_id, names.clone(), centered * &components, m.node_index.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((
        reduced,
        PcaSummary {
            eigenvalues,
            components,
            mean,
        },
    ))
}

/// Flip `v` so that its largest-magnitude entry (first on ties) is positive.
pub(crate) fn orient(v: &mut DVector<f64>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v.len() > 0 && v[best] < 0.0 {
        v.neg_mut();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fm(graph_id: usize, cols: &[&str], rows: usize, data: &[f64]) -> FeatureMatrix {
        FeatureMatrix::new(
            graph_id,
            cols.iter().map(|s| s.to_string()).collect(),
            DMatrix::from_row_slice(rows, cols.len(), data),
            (0..rows).collect(),
        )
        .unwrap()
    }

    fn random_mats(seed: u64, width: usize) -> Vec<FeatureMatrix> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<String> = (0..width).map(|i| format!("f_{i}")).collect();
        (0..3)
            .map(|g| {
                let rows = 5 + g;
                let data: Vec<f64> = (0..rows * width).map(|_| rng.gen_range(-2.0..2.0)).collect();
                FeatureMatrix::new(g, cols.clone(), DMatrix::from_row_slice(rows, width, &data), (0..rows).collect()).unwrap()
            })
            .collect()
    }

    #[test]
    fn concatenation() {
        let a = fm(0, &["lsme_1", "lsme_2", "lsme_3"], 2, &[1., 2., 3., 4., 5., 6.]);
        let b = fm(0, &["expansion_1", "expansion_2", "expansion_3"], 2, &[7., 8., 9., 10., 11., 12.]);
        let c = concatenate_features(&[a.clone(), b]).unwrap();
        assert_eq!(c.width(), 6);
        assert_eq!(c.values[(1, 5)], 12.0);
        assert_eq!(concatenate_features(&[a.clone()]).unwrap(), a);
        let other_nodes = fm(0, &["x"], 3, &[1., 2., 3.]);
        assert!(matches!(concatenate_features(&[a.clone(), other_nodes]), Err(Error::Shape(_))));
        assert!(matches!(concatenate_features(&[a.clone(), a]), Err(Error::Shape(_))));
    }

    #[test]
    fn standardize_cases() {
        let out = standardize_features(&[fm(0, &["a", "b"], 1, &[0., 5.]), fm(1, &["a", "b"], 1, &[2., 5.])]).unwrap();
        assert_eq!(out[0].values[(0, 0)], -1.0);
        assert_eq!(out[1].values[(0, 0)], 1.0);
        assert_eq!(out[0].values[(0, 1)], 0.0);
        assert_eq!(out[1].values[(0, 1)], 0.0);
        let mats = random_mats(3, 4);
        let once = standardize_features(&mats).unwrap();
        let twice = standardize_features(&once).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            assert!((&a.values - &b.values).amax() < 1e-12);
        }
        // pooled moments after standardisation
        let (mean, cov, _) = pooled_moments(&once, 4);
        assert!(mean.amax() < 1e-9);
        for c in 0..4 {
            assert!((cov[(c, c)].sqrt() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn pca_full_rank_preserves_distances() {
        let mats = random_mats(5, 4);
        let (red, summary) = pca_reduce(&mats, 4).unwrap();
        assert!((summary.retained_variance() - 1.0).abs() < 1e-12);
        let all = |ms: &[FeatureMatrix]| -> Vec<DVector<f64>> {
            ms.iter().flat_map(|m| m.values.row_iter().map(|r| r.transpose()).collect::<Vec<_>>()).collect()
        };
        let (a, b) = (all(&mats), all(&red));
        for i in 0..a.len() {
            for j in 0..a.len() {
                assert!(((&a[i] - &a[j]).norm() - (&b[i] - &b[j]).norm()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pca_rank_one_reconstruction() {
        let dir = [1.0, -2.0, 0.5];
        let rows: Vec<f64> = (0..6).flat_map(|t| dir.iter().map(move |d| d * t as f64 + 1.0)).collect();
        let m = fm(0, &["a", "b", "c"], 6, &rows);
        let (red, s) = pca_reduce(&[m.clone()], 1).unwrap();
        let recon = &red[0].values * s.components.transpose();
        for r in 0..6 {
            let back = recon.row(r).transpose() + &s.mean;
            assert!((back - m.values.row(r).transpose()).amax() < 1e-9);
        }
        // largest loading is 'b' with negative direction, flipped positive
        assert!(s.components[(1, 0)] > 0.0);
    }

    #[test]
    fn pca_retained_variance_matches_spectrum() {
        let mats = random_mats(11, 6);
        let (red, s) = pca_reduce(&mats, 4).unwrap();
        // oracle: variance of the projected data against the full eigendecomposition
        let (_, cov, _) = pooled_moments(&mats, 6);
        let mut eig: Vec<f64> = SymmetricEigen::new(cov.clone()).eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        let expected = eig[..4].iter().sum::<f64>() / cov.trace();
        assert!((s.retained_variance() - expected).abs() < 1e-12);
        let (_, cov_red, _) = pooled_moments(&red, 4);
        assert!((cov_red.trace() / cov.trace() - expected).abs() < 1e-9);
        assert!(matches!(pca_reduce(&mats, 7), Err(Error::Parameter(_))));
    }
}
