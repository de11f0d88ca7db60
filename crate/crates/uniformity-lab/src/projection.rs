//! PCA and min-max scaling — the 2-D visualization pipeline.
//!
//! Fit PCA on the full dataset, project any subset into the top-k subspace,
//! then min-max scale to [0,1]^k for plotting. Everything is deterministic:
//! the eigen-solve is the crate's Jacobi solver and each component's sign is
//! fixed by the rule "first nonzero entry is positive", so repeated runs
//! produce identical CSVs.

use crate::error::{Error, Result};
use crate::ingest::EmbeddedDataset;
use crate::linalg::{dot, jacobi_eigen, Mat};

/// Fitted PCA basis.
#[derive(Debug, Clone)]
pub struct PcaModel {
    /// Sample mean of the fit data.
    pub mean: Vec<f64>,
    /// Top-k orthonormal principal directions (rows, each in ℝ^d).
    pub components: Vec<Vec<f64>>,
    /// Matching covariance eigenvalues, nonincreasing.
    pub explained_variance: Vec<f64>,
    /// Sum of all d covariance eigenvalues (for explained-fraction reports).
    pub total_variance: f64,
}

impl PcaModel {
    /// Fraction of total variance captured by the k components.
    #[must_use]
    pub fn explained_fraction(&self) -> f64 {
        if self.total_variance == 0.0 {
            return 0.0;
        }
        self.explained_variance.iter().sum::<f64>() / self.total_variance
    }
}

/// Fits a k-component PCA on the dataset: sample covariance with divisor
/// N − 1, symmetric Jacobi eigen-solve, components sorted by descending
/// eigenvalue, each sign-fixed so its first nonzero entry is positive.
pub fn pca_fit(ds: &EmbeddedDataset, k: usize) -> Result<PcaModel> {
    let n = ds.len();
    let d = ds.dim();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    if k == 0 || k > d.min(n - 1) {
        return Err(Error::InvalidInput(format!(
            "k must lie in 1..=min(N-1, d) = {}, got {k}",
            d.min(n - 1)
        )));
    }
    let mut mean = vec![0.0; d];
    for p in ds.points() {
        for (m, v) in mean.iter_mut().zip(&p.vector) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = Mat::zeros(d, d);
    for p in ds.points() {
        let dev: Vec<f64> = p.vector.iter().zip(&mean).map(|(v, m)| v - m).collect();
        for i in 0..d {
            for j in i..d {
                cov[(i, j)] += dev[i] * dev[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = cov[(i, j)] / (n - 1) as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let (vals, vecs) = jacobi_eigen(&cov)?;
    if vals.iter().all(|&v| v < 1e-14) {
        return Err(Error::DegenerateCovariance);
    }
    let total_variance = vals.iter().map(|v| v.max(0.0)).sum();
    let mut components = Vec::with_capacity(k);
    for col in 0..k {
        let mut comp: Vec<f64> = (0..d).map(|r| vecs[(r, col)]).collect();
        if comp.iter().find(|v| **v != 0.0).is_some_and(|&first| first < 0.0) {
            for v in &mut comp {
                *v = -*v;
            }
        }
        components.push(comp);
    }
    let explained_variance = vals.iter().take(k).map(|v| v.max(0.0)).collect();
    Ok(PcaModel { mean, components, explained_variance, total_variance })
}

/// Projects every point: y = componentsᵀ(x − mean), input order preserved.
pub fn pca_project(model: &PcaModel, ds: &EmbeddedDataset) -> Result<Vec<(String, Vec<f64>)>> {
    if ds.dim() != model.mean.len() {
        return Err(Error::DimensionMismatch { expected: model.mean.len(), got: ds.dim() });
    }
    Ok(ds
        .points()
        .iter()
        .map(|p| {
            let dev: Vec<f64> = p.vector.iter().zip(&model.mean).map(|(v, m)| v - m).collect();
            let y = model.components.iter().map(|c| dot(c, &dev)).collect();
            (p.id.clone(), y)
        })
        .collect())
}

/// Per-coordinate affine rescale sending min → 0 and max → 1 (endpoints
/// attained exactly). A coordinate without two distinct values has no such
/// map and is rejected by index.
pub fn minmax_scale(coords: &[(String, Vec<f64>)]) -> Result<Vec<(String, Vec<f64>)>> {
    let Some(first) = coords.first() else {
        return Err(Error::TooFewPoints { needed: 2, got: 0 });
    };
    if coords.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: coords.len() });
    }
    let k = first.1.len();
    let mut lo = vec![f64::INFINITY; k];
    let mut hi = vec![f64::NEG_INFINITY; k];
    for (_, v) in coords {
        for c in 0..k {
            lo[c] = lo[c].min(v[c]);
            hi[c] = hi[c].max(v[c]);
        }
    }
    for c in 0..k {
        if hi[c] <= lo[c] {
            return Err(Error::ConstantCoordinate { coord: c });
        }
    }
    Ok(coords
        .iter()
        .map(|(id, v)| {
            let scaled = (0..k).map(|c| (v[c] - lo[c]) / (hi[c] - lo[c])).collect();
            (id.clone(), scaled)
        })
        .collect())
}
