//! PCA and the two PCA-based clustering baselines: splitting on the sign of
//! the first principal coefficient, and k-means on PCA-reduced data.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmm::Dataset;
use crate::linalg::{axpy, dot, Matrix};
use crate::lloyd::{self, Assignment, InitStrategy, KMeansResult};
use crate::rng::RngStream;

/// Reduced dimension used by the practice experiment.
pub const DEFAULT_D_PCA: usize = 4;

/// Top principal directions of a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k x d`, rows orthonormal.
    pub components: Matrix,
    /// Sample variance (divisor `n - 1`) along each component, descending.
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn k(&self) -> usize {
        self.components.rows()
    }

    pub fn d(&self) -> usize {
        self.components.cols()
    }

    /// Coefficients of `x - mean` along each component.
    pub fn coefficients(&self, x: &[f64]) -> Vec<f64> {
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        self.components.iter_rows().map(|c| dot(c, &centered)).collect()
    }
}

fn centered(dataset: &Dataset) -> (Vec<f64>, Matrix) {
    let mean = dataset.samples().column_means();
    let mut c = dataset.samples().clone();
    for i in 0..c.rows() {
        axpy(-1.0, &mean, c.row_mut(i));
    }
    (mean, c)
}

/// Eigenpairs sorted by decreasing eigenvalue.
fn sorted_eigen(m: DMatrix<f64>) -> Vec<(f64, Vec<f64>)> {
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, Vec<f64>)> = eig
        .eigenvalues
        .iter()
        .zip(eig.eigenvectors.column_iter())
        .map(|(&l, v)| (l, v.iter().copied().collect()))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}

/// Makes `v` orthogonal to `basis` and unit length; `None` if nothing is left.
fn orthonormalize(mut v: Vec<f64>, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    // two passes keep orthogonality at rounding level
    for _ in 0..2 {
        for b in basis {
            let p = dot(&v, b);
            axpy(-p, b, &mut v);
        }
    }
    let norm = dot(&v, &v).sqrt();
    if norm < 1e-6 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Some(v)
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Top-`k` principal components of the centered samples.
///
/// Uses the `n x n` Gram matrix when `n < d` and the `d x d` covariance
/// otherwise. Directions with zero variance are completed to an orthonormal
/// set from the standard basis. Each component's largest-magnitude coordinate
/// is made positive.
pub fn pca_fit(dataset: &Dataset, k: usize) -> Result<PcaModel> {
    let n = dataset.n();
    let d = dataset.d();
    if k < 1 || k > n.min(d) {
        return Err(Error::Domain(format!("PCA rank must be in 1..={}, got {k}", n.min(d))));
    }
    let (mean, xc) = centered(dataset);
    let denom = (n - 1).max(1) as f64;

    let pairs: Vec<(f64, Vec<f64>)> = if n < d {
        let mut g = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = dot(xc.row(i), xc.row(j));
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        // v = X^T u / sqrt(lambda)
        sorted_eigen(g)
            .into_iter()
            .map(|(l, u)| {
                let mut v = vec![0.0; d];
                for (i, ui) in u.iter().enumerate() {
                    axpy(*ui, xc.row(i), &mut v);
                }
                (l, v)
            })
            .collect()
    } else {
        let mut c = DMatrix::<f64>::zeros(d, d);
        for r in xc.iter_rows() {
            for a in 0..d {
                for b in 0..=a {
                    c[(a, b)] += r[a] * r[b];
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                c[(b, a)] = c[(a, b)];
            }
        }
        sorted_eigen(c)
    };

    let top = pairs.first().map_or(0.0, |p| p.0).max(0.0);
    let cutoff = top * 1e-12;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut variance = Vec::with_capacity(k);
    for (l, v) in pairs {
        if basis.len() == k || l <= cutoff || l <= 0.0 {
            break;
        }
        if let Some(u) = orthonormalize(v, &basis) {
            basis.push(u);
            variance.push(l / denom);
        }
    }
    let mut e = 0;
    while basis.len() < k {
        let mut unit = vec![0.0; d];
        unit[e] = 1.0;
        if let Some(u) = orthonormalize(unit, &basis) {
            basis.push(u);
            variance.push(0.0);
        }
        e += 1;
    }
    for b in &mut basis {
        fix_sign(b);
    }
    Ok(PcaModel {
        mean,
        components: Matrix::from_rows(&basis)?,
        explained_variance: variance,
    })
}

/// `n x k` centered projections; truth metadata is carried over.
pub fn pca_project(model: &PcaModel, dataset: &Dataset) -> Result<Dataset> {
    if model.d() != dataset.d() {
        return Err(Error::Dimension {
            expected: model.d(),
            actual: dataset.d(),
            context: "PCA model dimension",
        });
    }
    let rows: Vec<Vec<f64>> = dataset.samples().iter_rows().map(|x| model.coefficients(x)).collect();
    let projected = Matrix::from_vec(dataset.n(), model.k(), rows.concat())?;
    dataset.with_samples(projected)
}

/// Two clusters by the sign of the first principal coefficient: label 0 for
/// coefficients `>= 0`, label 1 otherwise. Consumes no randomness.
pub fn sign_split(dataset: &Dataset) -> Result<Assignment> {
    if dataset.n() < 2 {
        return Err(Error::Precondition("sign split needs n >= 2".into()));
    }
    let model = pca_fit(dataset, 1)?;
    let labels = dataset
        .samples()
        .iter_rows()
        .map(|x| usize::from(model.coefficients(x)[0] < 0.0))
        .collect();
    Assignment::new(labels, 2)
}

/// Lloyd's algorithm on the `d_pca`-dimensional projection, initialised with
/// `strategy` in the reduced space.
///
/// The returned assignment indexes the original samples; `loss` and
/// `centroids` are recomputed on the original data. `loss_history` stays in
/// the reduced space.
pub fn pca_kmeans(
    dataset: &Dataset,
    d_pca: usize,
    strategy: InitStrategy,
    stream: &mut RngStream,
    max_iters: usize,
) -> Result<KMeansResult> {
    let model = pca_fit(dataset, d_pca)?;
    let reduced = pca_project(&model, dataset)?;
    let k = dataset.params().k;
    let init = strategy.initialize(stream, &reduced, k)?;
    let mut result = lloyd::run_lloyd(&reduced, init, max_iters)?;
    result.centroids = lloyd::average(dataset, &result.final_assignment)?;
    result.loss = lloyd::loss(dataset, &result.final_assignment)?;
    Ok(result)
}
