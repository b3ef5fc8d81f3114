//! Plain k-means against its two PCA baselines on balanced two-cluster data.

use crate::error::Result;
use crate::gmm::{sample_model, LabelMode};
use crate::lloyd::{loss, run_lloyd, InitStrategy};
use crate::metrics::{loss_score, nmi};
use crate::params::ModelParams;
use crate::reduce::{pca_kmeans, sign_split};
use crate::rng::instance_stream;

use super::{par_map, SweepConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Kmeans,
    PcaKmeans,
    PcaSplit,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Kmeans => "kmeans",
            Algorithm::PcaKmeans => "pca_kmeans",
            Algorithm::PcaSplit => "pca_split",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PracticeRow {
    pub d: usize,
    pub sigma2: f64,
    pub init: InitStrategy,
    pub algorithm: Algorithm,
    pub rep: u64,
    pub nmi: f64,
    pub loss: f64,
    pub loss_gt: f64,
    pub loss_score: i8,
    pub iterations: usize,
    pub degenerate: bool,
}

/// For every `(sigma2, d)` cell, repetition and initialisation: plain
/// k-means, k-means on `d_pca` principal coefficients, and the sign split.
///
/// The dataset depends only on `(cell, rep)`. Both k-means variants start
/// from copies of the same initialisation stream. Sign-split rows do not
/// depend on the initialisation and are repeated under each one so every
/// `(init, algorithm)` series is complete. Losses are on the original data.
pub fn exp_practice(config: &SweepConfig, workers: usize) -> Result<Vec<PracticeRow>> {
    let cells: Vec<(usize, f64)> = config
        .sigma2_grid
        .iter()
        .flat_map(|&s| config.d_grid.iter().map(move |&d| (d, s)))
        .collect();
    let reps = config.reps as usize;
    let per_task = par_map(workers, cells.len() * reps, |t| {
        let cell = t / reps;
        let rep = (t % reps) as u64;
        let (d, sigma2) = cells[cell];
        let params = ModelParams::new(d, config.n, 2, config.tau, sigma2.sqrt())?;
        let mut data_stream = instance_stream(config.base_seed, "practice/data", cell as u64, rep);
        let data = sample_model(&mut data_stream, &params, LabelMode::Balanced)?;
        let truth = data.true_assignment().labels();
        let loss_gt = loss(&data, data.true_assignment())?;

        let split = sign_split(&data)?;
        let split_loss = loss(&data, &split)?;

        let mut rows = Vec::with_capacity(config.inits.len() * 3);
        for &init in &config.inits {
            let tag = format!("practice/init/{}", init.name());
            let init_stream = instance_stream(config.base_seed, &tag, cell as u64, rep);
            let row = |algorithm, assignment: &[usize], l: f64, iterations, degenerate| -> Result<PracticeRow> {
                Ok(PracticeRow {
                    d,
                    sigma2,
                    init,
                    algorithm,
                    rep,
                    nmi: nmi(assignment, truth)?,
                    loss: l,
                    loss_gt,
                    loss_score: loss_score(l, loss_gt),
                    iterations,
                    degenerate,
                })
            };

            let start = init.initialize(&mut init_stream.clone(), &data, 2)?;
            let plain = run_lloyd(&data, start, config.max_iters)?;
            rows.push(row(
                Algorithm::Kmeans,
                plain.final_assignment.labels(),
                plain.loss,
                plain.iterations,
                plain.degenerate,
            )?);

            let reduced = pca_kmeans(&data, config.d_pca, init, &mut init_stream.clone(), config.max_iters)?;
            rows.push(row(
                Algorithm::PcaKmeans,
                reduced.final_assignment.labels(),
                reduced.loss,
                reduced.iterations,
                reduced.degenerate,
            )?);

            rows.push(row(Algorithm::PcaSplit, split.labels(), split_loss, 0, false)?);
        }
        Ok(rows)
    })?;
    Ok(per_task.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_ranges_and_split_independence() {
        let c = SweepConfig {
            reps: 3,
            d_grid: vec![8, 32],
            sigma2_grid: vec![4.0],
            n: 12,
            ..SweepConfig::for_experiment(super::super::Experiment::Practice)
        };
        let rows = exp_practice(&c, 2).unwrap();
        assert_eq!(rows.len(), 2 * 3 * 3 * 3);
        for r in &rows {
            assert!((0.0..=1.0).contains(&r.nmi));
            assert!(r.loss >= 0.0 && r.loss_gt >= 0.0);
        }
        let splits: Vec<&PracticeRow> = rows.iter().filter(|r| r.algorithm == Algorithm::PcaSplit).collect();
        for group in splits.chunks(3) {
            assert!(group.iter().all(|r| r.nmi == group[0].nmi && r.loss == group[0].loss));
        }
    }
}
