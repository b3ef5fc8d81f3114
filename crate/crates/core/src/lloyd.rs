//! Lloyd's k-means: averaging and assignment steps, the loss, three
//! initialisations, and the fixed-point / single-sample reassignment tests
//! that the bounds are about.
//!
//! Cluster labels are 0-based (`0..K`).
//!
//! Two policies matter for reproducibility:
//!
//! * **Ties.** When a sample is exactly equidistant from several centroids the
//!   assignment step keeps its previous label if that label is among the
//!   nearest; otherwise the lowest index wins. A partition is therefore a fixed
//!   point exactly when no sample is *strictly* closer to another centroid.
//! * **Empty clusters.** The averaging step re-seeds an emptied centroid with
//!   the sample farthest from its own cluster mean (lowest index on ties, each
//!   sample used at most once) and records the cluster in
//!   [`Centroids::reseeded`]; runs that hit this are flagged degenerate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmm::Dataset;
use crate::linalg::{axpy, squared_distance, Matrix};
use crate::rng::RngStream;

pub const DEFAULT_MAX_ITERS: usize = 500;

/// A partition of sample indices into `k` labelled clusters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    labels: Vec<usize>,
    k: usize,
}

impl Assignment {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams("assignment needs k >= 1".into()));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidParams(format!("label {bad} out of range for k = {k}")));
        }
        Ok(Assignment { labels, k })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }

    /// Indices with label `k`, ascending.
    pub fn members(&self, k: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == k).then_some(i))
            .collect()
    }

    fn check_for(&self, dataset: &Dataset) -> Result<()> {
        if self.len() != dataset.n() {
            return Err(Error::Dimension {
                expected: dataset.n(),
                actual: self.len(),
                context: "assignment length",
            });
        }
        Ok(())
    }
}

/// Cluster means and sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Centroids {
    pub means: Matrix,
    pub sizes: Vec<usize>,
    /// Empty clusters whose mean was re-seeded from a sample.
    pub reseeded: Vec<usize>,
}

impl Centroids {
    /// Centroids placed at the given points, each with a placeholder size of 1.
    pub fn from_points(means: Matrix) -> Self {
        let k = means.rows();
        Centroids {
            means,
            sizes: vec![1; k],
            reseeded: Vec::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.means.rows()
    }

    /// First empty cluster whose mean is undefined, if any.
    pub fn undefined_cluster(&self) -> Option<usize> {
        self.sizes
            .iter()
            .enumerate()
            .find(|(k, &s)| s == 0 && !self.reseeded.contains(k))
            .map(|(k, _)| k)
    }

    pub fn is_degenerate(&self) -> bool {
        self.undefined_cluster().is_some()
    }
}

/// Raw per-cluster means (zero rows for empty clusters) and sizes.
fn cluster_sums(dataset: &Dataset, assignment: &Assignment) -> (Matrix, Vec<usize>) {
    let mut means = Matrix::zeros(assignment.k(), dataset.d());
    let sizes = assignment.sizes();
    for (i, &l) in assignment.labels().iter().enumerate() {
        axpy(1.0, dataset.sample(i), means.row_mut(l));
    }
    for (k, &s) in sizes.iter().enumerate() {
        if s > 0 {
            let inv = 1.0 / s as f64;
            means.row_mut(k).iter_mut().for_each(|v| *v *= inv);
        }
    }
    (means, sizes)
}

/// The averaging step: `mu_k` is the mean of the samples labelled `k`.
pub fn average(dataset: &Dataset, assignment: &Assignment) -> Result<Centroids> {
    assignment.check_for(dataset)?;
    let (mut means, sizes) = cluster_sums(dataset, assignment);
    let mut reseeded = Vec::new();
    let empty: Vec<usize> = (0..sizes.len()).filter(|&k| sizes[k] == 0).collect();
    if !empty.is_empty() {
        let mut dist: Vec<f64> = (0..dataset.n())
            .map(|i| squared_distance(dataset.sample(i), means.row(assignment.label(i))))
            .collect();
        for k in empty {
            let mut far = 0;
            for i in 1..dist.len() {
                if dist[i] > dist[far] {
                    far = i;
                }
            }
            means.row_mut(k).copy_from_slice(dataset.sample(far));
            dist[far] = f64::NEG_INFINITY;
            reseeded.push(k);
        }
    }
    Ok(Centroids {
        means,
        sizes,
        reseeded,
    })
}

/// Nearest centroid with the tie rule: keep `previous` if it is among the
/// nearest, else the lowest index.
#[inline]
fn nearest(x: &[f64], means: &Matrix, previous: Option<usize>) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    let mut prev_d = f64::NAN;
    for k in 0..means.rows() {
        let d = squared_distance(x, means.row(k));
        if Some(k) == previous {
            prev_d = d;
        }
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    match previous {
        Some(p) if prev_d == best_d => p,
        _ => best,
    }
}

/// The assignment step `z_j = argmin_k ||x_j - mu_k||^2`.
pub fn assign(
    dataset: &Dataset,
    centroids: &Centroids,
    previous: Option<&Assignment>,
) -> Result<Assignment> {
    if let Some(k) = centroids.undefined_cluster() {
        return Err(Error::Degenerate(k));
    }
    if centroids.means.cols() != dataset.d() {
        return Err(Error::Dimension {
            expected: dataset.d(),
            actual: centroids.means.cols(),
            context: "centroid dimension",
        });
    }
    if let Some(p) = previous {
        p.check_for(dataset)?;
    }
    let labels = (0..dataset.n())
        .map(|i| nearest(dataset.sample(i), &centroids.means, previous.map(|p| p.label(i))))
        .collect();
    Assignment::new(labels, centroids.k())
}

/// The k-means objective: within-cluster sum of squared distances to the
/// cluster means. Empty clusters contribute nothing.
pub fn loss(dataset: &Dataset, assignment: &Assignment) -> Result<f64> {
    assignment.check_for(dataset)?;
    let (means, _) = cluster_sums(dataset, assignment);
    Ok((0..dataset.n())
        .map(|i| squared_distance(dataset.sample(i), means.row(assignment.label(i))))
        .sum())
}

/// Uniformly random partition with sizes differing by at most one.
pub fn init_random_partition(stream: &mut RngStream, n: usize, k: usize) -> Result<Assignment> {
    if k == 0 || n < k {
        return Err(Error::InvalidParams(format!("need n >= K >= 1, got n={n}, K={k}")));
    }
    let mut labels: Vec<usize> = (0..n).map(|i| i % k).collect();
    stream.shuffle(&mut labels);
    Assignment::new(labels, k)
}

/// `k` distinct indices uniformly without replacement (partial Fisher-Yates
/// from the front).
pub fn random_point_indices(stream: &mut RngStream, n: usize, k: usize) -> Result<Vec<usize>> {
    if k == 0 || n < k {
        return Err(Error::InvalidParams(format!("need n >= K >= 1, got n={n}, K={k}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + stream.index(n - i);
        idx.swap(i, j);
    }
    idx.truncate(k);
    Ok(idx)
}

fn centroids_at(dataset: &Dataset, indices: &[usize]) -> Centroids {
    let mut means = Matrix::zeros(indices.len(), dataset.d());
    for (k, &i) in indices.iter().enumerate() {
        means.row_mut(k).copy_from_slice(dataset.sample(i));
    }
    Centroids::from_points(means)
}

/// Centroids at `k` distinct uniformly chosen samples.
pub fn init_random_points(stream: &mut RngStream, dataset: &Dataset, k: usize) -> Result<Centroids> {
    let idx = random_point_indices(stream, dataset.n(), k)?;
    Ok(centroids_at(dataset, &idx))
}

/// k-means++ seeding: the first index is uniform, each next one is drawn with
/// probability proportional to the squared distance to the nearest chosen
/// point. If every remaining weight is zero the pick is uniform over the
/// unchosen indices.
pub fn kmeanspp_indices(stream: &mut RngStream, dataset: &Dataset, k: usize) -> Result<Vec<usize>> {
    let n = dataset.n();
    if k == 0 || n < k {
        return Err(Error::InvalidParams(format!("need n >= K >= 1, got n={n}, K={k}")));
    }
    let mut chosen = vec![stream.index(n)];
    let mut d2: Vec<f64> = (0..n)
        .map(|i| squared_distance(dataset.sample(i), dataset.sample(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = stream.uniform() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total implies a positive weight")
        } else {
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[stream.index(free.len())]
        };
        chosen.push(next);
        let c = dataset.sample(next);
        for (i, w) in d2.iter_mut().enumerate() {
            *w = w.min(squared_distance(dataset.sample(i), c));
        }
    }
    Ok(chosen)
}

pub fn init_kmeanspp(stream: &mut RngStream, dataset: &Dataset, k: usize) -> Result<Centroids> {
    let idx = kmeanspp_indices(stream, dataset, k)?;
    Ok(centroids_at(dataset, &idx))
}

/// Starting point of a Lloyd run.
#[derive(Clone, Debug)]
pub enum Init {
    /// Start with an averaging step.
    Partition(Assignment),
    /// Start with an assignment step.
    Centroids(Centroids),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    RandomPartition,
    RandomPoints,
    Kmeanspp,
}

impl InitStrategy {
    pub const ALL: [InitStrategy; 3] = [
        InitStrategy::RandomPartition,
        InitStrategy::RandomPoints,
        InitStrategy::Kmeanspp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InitStrategy::RandomPartition => "random_partition",
            InitStrategy::RandomPoints => "random_points",
            InitStrategy::Kmeanspp => "kmeanspp",
        }
    }

    pub fn initialize(self, stream: &mut RngStream, dataset: &Dataset, k: usize) -> Result<Init> {
        Ok(match self {
            InitStrategy::RandomPartition => Init::Partition(init_random_partition(stream, dataset.n(), k)?),
            InitStrategy::RandomPoints => Init::Centroids(init_random_points(stream, dataset, k)?),
            InitStrategy::Kmeanspp => Init::Centroids(init_kmeanspp(stream, dataset, k)?),
        })
    }
}

impl std::str::FromStr for InitStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InitStrategy::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown init strategy {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct KMeansResult {
    pub final_assignment: Assignment,
    pub centroids: Centroids,
    pub loss: f64,
    /// Number of assignment steps performed.
    pub iterations: usize,
    /// Some averaging step produced an empty cluster.
    pub degenerate: bool,
    /// The last assignment step changed nothing.
    pub converged: bool,
    pub initial_assignment: Assignment,
    /// Loss of the assignment after each assignment step.
    pub loss_history: Vec<f64>,
}

/// Alternates assignment and averaging until the assignment stops changing or
/// `max_iters` assignment steps have run.
pub fn run_lloyd(dataset: &Dataset, init: Init, max_iters: usize) -> Result<KMeansResult> {
    if max_iters == 0 {
        return Err(Error::InvalidParams("max_iters must be >= 1".into()));
    }
    let mut iterations = 0;
    let mut history = Vec::new();
    let mut current = match init {
        Init::Partition(a) => a,
        Init::Centroids(c) => {
            let a = assign(dataset, &c, None)?;
            iterations += 1;
            history.push(loss(dataset, &a)?);
            a
        }
    };
    let initial_assignment = current.clone();
    let mut centroids = average(dataset, &current)?;
    let mut degenerate = !centroids.reseeded.is_empty();
    let mut converged = false;
    while iterations < max_iters {
        let next = assign(dataset, &centroids, Some(&current))?;
        iterations += 1;
        history.push(loss(dataset, &next)?);
        if next == current {
            converged = true;
            break;
        }
        current = next;
        centroids = average(dataset, &current)?;
        degenerate |= !centroids.reseeded.is_empty();
    }
    let loss = loss(dataset, &current)?;
    Ok(KMeansResult {
        final_assignment: current,
        centroids,
        loss,
        iterations,
        degenerate,
        converged,
        initial_assignment,
        loss_history: history,
    })
}

/// Whether no sample is strictly closer to another cluster's mean than to its
/// own; also returns the violating ("mover") indices.
pub fn is_fixed_point(dataset: &Dataset, assignment: &Assignment) -> Result<(bool, Vec<usize>)> {
    assignment.check_for(dataset)?;
    let (means, sizes) = cluster_sums(dataset, assignment);
    if let Some(k) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::Precondition(format!("cluster {k} is empty")));
    }
    let movers: Vec<usize> = (0..dataset.n())
        .filter(|&i| {
            let own = assignment.label(i);
            let x = dataset.sample(i);
            let d_own = squared_distance(x, means.row(own));
            (0..means.rows()).any(|k| k != own && squared_distance(x, means.row(k)) < d_own)
        })
        .collect();
    Ok((movers.is_empty(), movers))
}

/// For two clusters: is sample `j` strictly closer to the other cluster's mean
/// than to the mean of its own cluster (which includes `j`)?
pub fn reassignment_event(dataset: &Dataset, partition: &Assignment, j: usize) -> Result<bool> {
    partition.check_for(dataset)?;
    if partition.k() != 2 {
        return Err(Error::Precondition(format!(
            "reassignment event is defined for K = 2, got {}",
            partition.k()
        )));
    }
    if j >= dataset.n() {
        return Err(Error::Precondition(format!("sample index {j} out of range")));
    }
    let (means, sizes) = cluster_sums(dataset, partition);
    if sizes.iter().any(|&s| s < 2) {
        return Err(Error::Precondition(format!(
            "both clusters need at least two samples, sizes are {sizes:?}"
        )));
    }
    let own = partition.label(j);
    let x = dataset.sample(j);
    Ok(squared_distance(x, means.row(1 - own)) < squared_distance(x, means.row(own)))
}
