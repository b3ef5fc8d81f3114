//! Experiments whose output is a success proportion per grid cell, set
//! against a closed-form bound.

use crate::bounds::{self, typical_size_window};
use crate::error::{Error, Result};
use crate::gmm::{sample_centers, sample_model, LabelMode};
use crate::linalg::squared_distance;
use crate::lloyd::{init_random_partition, is_fixed_point, reassignment_event, Assignment};
use crate::metrics::wilson_interval;
use crate::params::ModelParams;
use crate::rng::{instance_stream, RngStream};

use super::{par_map, SweepConfig, MAX_REJECTIONS};

#[derive(Clone, Debug, PartialEq)]
pub struct ProportionRow {
    pub experiment: String,
    pub variant: String,
    pub d: usize,
    pub sigma2: f64,
    /// Noise level relative to the regime threshold, when the sweep is in
    /// those units.
    pub beta: Option<f64>,
    pub trials: u64,
    pub successes: u64,
    /// Draws rejected and resampled because they fell outside the bound's
    /// conditioning event.
    pub rejected: u64,
    pub ratio: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub alpha: f64,
    pub theory_bound: f64,
    pub bound_valid: bool,
}

struct Cell {
    experiment: &'static str,
    variant: &'static str,
    /// Stream tag; distinct per variant.
    tag: String,
    index: u64,
    d: usize,
    sigma2: f64,
    beta: Option<f64>,
    bound: f64,
    bound_valid: bool,
}

#[derive(Clone, Copy)]
struct Trial {
    success: bool,
    rejected: u64,
}

fn run_cells<F>(config: &SweepConfig, workers: usize, cells: Vec<Cell>, trial: F) -> Result<Vec<ProportionRow>>
where
    F: Fn(&Cell, &mut RngStream) -> Result<Trial> + Sync + Send,
{
    let reps = config.reps as usize;
    let outcomes = par_map(workers, cells.len() * reps, |t| {
        let cell = &cells[t / reps];
        let mut stream = instance_stream(config.base_seed, &cell.tag, cell.index, (t % reps) as u64);
        trial(cell, &mut stream)
    })?;
    cells
        .iter()
        .zip(outcomes.chunks(reps))
        .map(|(cell, trials)| {
            let successes = trials.iter().filter(|t| t.success).count() as u64;
            let rejected = trials.iter().map(|t| t.rejected).sum();
            let est = wilson_interval(successes, config.reps - successes, config.alpha)?;
            Ok(ProportionRow {
                experiment: cell.experiment.to_string(),
                variant: cell.variant.to_string(),
                d: cell.d,
                sigma2: cell.sigma2,
                beta: cell.beta,
                trials: config.reps,
                successes,
                rejected,
                ratio: est.ratio,
                wilson_lo: est.wilson_lo,
                wilson_hi: est.wilson_hi,
                alpha: est.alpha,
                theory_bound: cell.bound,
                bound_valid: cell.bound_valid,
            })
        })
        .collect()
}

/// Cells over `sigma2_grid x d_grid` (d varying fastest).
fn sigma2_cells(
    config: &SweepConfig,
    experiment: &'static str,
    variant: &'static str,
    bound: impl Fn(f64, usize) -> (f64, bool),
) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &sigma2 in &config.sigma2_grid {
        for &d in &config.d_grid {
            let (b, valid) = bound(sigma2, d);
            cells.push(Cell {
                experiment,
                variant,
                tag: format!("{experiment}/{variant}"),
                index: cells.len() as u64,
                d,
                sigma2,
                beta: None,
                bound: b,
                bound_valid: valid,
            });
        }
    }
    cells
}

fn two_cluster_params(config: &SweepConfig, d: usize, sigma2: f64) -> Result<ModelParams> {
    ModelParams::new(d, config.n, 2, config.tau, sigma2.sqrt())
}

/// Single-sample reassignment under equal cluster sizes `n/2`.
///
/// Variant `random`: balanced ground truth, an independent uniformly random
/// equal-size partition, and `j` uniform in cluster 0. Variant `worst`: true
/// class sizes `n/2 + 1` and `n/2 - 1`; `j` is a sample of the larger class
/// moved into the cluster holding the smaller class. Success means `j` is
/// strictly closer to the other cluster's mean. The bound is
/// `rho_equal(sigma, n/2)^(d/4)` (with `tau` folded into `sigma / tau`).
pub fn exp_reassign_equal(config: &SweepConfig, workers: usize) -> Result<Vec<ProportionRow>> {
    let half = config.n / 2;
    let bound = |sigma2: f64, d: usize| {
        let rho = bounds::rho_equal(sigma2.sqrt() / config.tau, half as u64);
        (rho.pow_quarter_d(d as f64), rho.valid)
    };
    let mut cells = sigma2_cells(config, "reassign", "random", bound);
    cells.extend(sigma2_cells(config, "reassign", "worst", bound));

    run_cells(config, workers, cells, |cell, stream| {
        let params = two_cluster_params(config, cell.d, cell.sigma2)?;
        let success = if cell.variant == "worst" {
            let truth: Vec<usize> = (0..config.n).map(|i| usize::from(i > half)).collect();
            let data = sample_model(stream, &params, LabelMode::Explicit(truth.clone()))?;
            // sample 0 belongs to the larger class 0; put it with class 1
            let mut labels = truth;
            labels[0] = 1;
            reassignment_event(&data, &Assignment::new(labels, 2)?, 0)?
        } else {
            let data = sample_model(stream, &params, LabelMode::Balanced)?;
            let partition = init_random_partition(stream, config.n, 2)?;
            let members = partition.members(0);
            let j = members[stream.index(members.len())];
            reassignment_event(&data, &partition, j)?
        };
        Ok(Trial { success, rejected: 0 })
    })
}

/// Reassignment of sample 0 when both the truth and the partition are i.i.d.
/// uniform labelings. Partitions outside the typical size window (or with a
/// cluster smaller than 2) are redrawn from the same stream and counted as
/// rejected. Noise is set through `sigma = beta * sigma_typical(1, n, q)`; the
/// bound is `rho_typical^(d/4)`.
pub fn exp_typical(config: &SweepConfig, workers: usize) -> Result<Vec<ProportionRow>> {
    let (lo, hi) = typical_size_window(config.n as u64, config.q);
    let mut cells = Vec::new();
    for &beta in &config.beta_grid {
        let sigma = config.tau * bounds::sigma_typical(beta, config.n as u64, config.q)?;
        let rho = bounds::rho_typical(sigma / config.tau, config.n as u64, config.q);
        for &d in &config.d_grid {
            cells.push(Cell {
                experiment: "typical",
                variant: "iid",
                tag: "typical/iid".into(),
                index: cells.len() as u64,
                d,
                sigma2: sigma * sigma,
                beta: Some(beta),
                bound: rho.pow_quarter_d(d as f64),
                bound_valid: rho.valid,
            });
        }
    }
    run_cells(config, workers, cells, |cell, stream| {
        let params = two_cluster_params(config, cell.d, cell.sigma2)?;
        let data = sample_model(stream, &params, LabelMode::IidUniform)?;
        let mut rejected = 0;
        let partition = loop {
            let labels: Vec<usize> = (0..config.n).map(|_| stream.index(2)).collect();
            let ones = labels.iter().sum::<usize>();
            let sizes = [config.n - ones, ones];
            if sizes.iter().all(|&s| s >= 2 && (s as f64) > lo && (s as f64) < hi) {
                break Assignment::new(labels, 2)?;
            }
            rejected += 1;
            if rejected > MAX_REJECTIONS {
                return Err(Error::Precondition("typical size window is practically never hit".into()));
            }
        };
        Ok(Trial {
            success: reassignment_event(&data, &partition, 0)?,
            rejected,
        })
    })
}

/// Whether a random equal-size partition of balanced data has at least one
/// sample strictly closer to the other cluster's mean. The bound is the union
/// bound `min(1, n rho_equal^(d/4))`.
pub fn exp_union(config: &SweepConfig, workers: usize) -> Result<Vec<ProportionRow>> {
    let half = config.n / 2;
    let n = config.n as f64;
    let cells = sigma2_cells(config, "union", "equal", |sigma2, d| {
        let rho = bounds::rho_equal(sigma2.sqrt() / config.tau, half as u64);
        (rho.union_pow_quarter_d(n, d as f64), rho.valid)
    });
    run_cells(config, workers, cells, |cell, stream| {
        let params = two_cluster_params(config, cell.d, cell.sigma2)?;
        let data = sample_model(stream, &params, LabelMode::Balanced)?;
        let partition = init_random_partition(stream, config.n, 2)?;
        let (fixed, _) = is_fixed_point(&data, &partition)?;
        Ok(Trial { success: !fixed, rejected: 0 })
    })
}

/// With known centers `mu_T` (true) and `mu_W` (wrong), whether a sample from
/// `mu_T` is strictly closer to `mu_W`. The bound is `rho_warmup^(d/4)`.
pub fn exp_warmup(config: &SweepConfig, workers: usize) -> Result<Vec<ProportionRow>> {
    let cells = sigma2_cells(config, "warmup", "centers", |sigma2, d| {
        let rho = bounds::rho_warmup(sigma2.sqrt(), config.tau);
        (rho.pow_quarter_d(d as f64), rho.valid)
    });
    run_cells(config, workers, cells, |cell, stream| {
        let params = ModelParams::new(cell.d, 2, 2, config.tau, cell.sigma2.sqrt())?;
        let centers = sample_centers(stream, &params)?;
        let mut x = vec![0.0; cell.d];
        stream.fill_std_normal(&mut x);
        for (xi, m) in x.iter_mut().zip(centers.center(0)) {
            *xi = m + params.sigma * *xi;
        }
        let success = squared_distance(&x, centers.center(1)) < squared_distance(&x, centers.center(0));
        Ok(Trial { success, rejected: 0 })
    })
}

/// Rows whose ratio exceeds the bound by more than the statistical slack
/// `wilson_hi - ratio` at level `alpha`. Only valid-regime rows are checked.
pub fn bound_violations(rows: &[ProportionRow], alpha: f64) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for r in rows.iter().filter(|r| r.bound_valid) {
        let est = wilson_interval(r.successes, r.trials - r.successes, alpha)?;
        let slack = est.wilson_hi - est.ratio;
        if est.ratio > r.theory_bound + slack {
            out.push(format!(
                "{}/{} d={} sigma2={}: ratio {} exceeds bound {} + slack {}",
                r.experiment, r.variant, r.d, r.sigma2, est.ratio, r.theory_bound, slack
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(reps: u64) -> SweepConfig {
        SweepConfig {
            reps,
            d_grid: vec![4, 64],
            sigma2_grid: vec![0.0, 25.0],
            ..SweepConfig::default()
        }
    }

    #[test]
    fn reassign_shape_and_noiseless_worst_case() {
        let rows = exp_reassign_equal(&small(50), 1).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 2);
        for r in rows.iter().filter(|r| r.variant == "worst" && r.sigma2 == 0.0) {
            assert_eq!(r.ratio, 1.0);
        }
        for r in &rows {
            assert!(r.successes <= r.trials);
            assert!((0.0..=1.0).contains(&r.theory_bound));
            assert_eq!(r.bound_valid, r.sigma2 > 18.05);
        }
    }

    #[test]
    fn union_noiseless_always_moves() {
        let rows = exp_union(&small(600), 2).unwrap();
        // Without noise a random equal partition has a mover unless each
        // cluster holds 10 samples of each class (probability
        // C(20,10)^2 / C(40,20)); then the two means agree in exact
        // arithmetic, and rounding decides whether anything moves.
        let p_tie = 184_756f64.powi(2) / 137_846_528_820.0;
        for r in rows.iter().filter(|r| r.sigma2 == 0.0) {
            assert!(r.wilson_hi >= 1.0 - p_tie && r.ratio < 1.0, "{r:?}");
        }
        let r = rows.iter().find(|r| r.sigma2 == 25.0).unwrap();
        let rho = bounds::rho_equal(5.0, 20);
        assert_eq!(r.theory_bound, (40.0 * rho.value.powf(r.d as f64 / 4.0)).min(1.0));
    }

    #[test]
    fn typical_window_and_control_row() {
        let c = SweepConfig {
            reps: 30,
            d_grid: vec![16, 256, 4096],
            beta_grid: vec![0.9, 1.1, 1.25],
            ..SweepConfig::default()
        };
        let rows = exp_typical(&c, 1).unwrap();
        assert_eq!(rows.len(), 9);
        for r in &rows {
            assert_eq!(r.bound_valid, r.beta.unwrap() > 1.0);
        }
        for b in [1.1, 1.25] {
            let bs: Vec<f64> = rows.iter().filter(|r| r.beta == Some(b)).map(|r| r.theory_bound).collect();
            assert!(bs.iter().all(|&x| x < 1.0));
            assert!(bs.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn warmup_symmetric_limit() {
        let c = SweepConfig {
            reps: 4000,
            d_grid: vec![8],
            sigma2_grid: vec![1.0],
            tau: 1e-6,
            ..SweepConfig::default()
        };
        let r = &exp_warmup(&c, 1).unwrap()[0];
        assert!((r.ratio - 0.5).abs() < 0.05, "{}", r.ratio);
    }

    #[test]
    fn compliance_flags_only_real_excess() {
        let mut row = ProportionRow {
            experiment: "x".into(),
            variant: "y".into(),
            d: 1,
            sigma2: 1.0,
            beta: None,
            trials: 1000,
            successes: 100,
            rejected: 0,
            ratio: 0.1,
            wilson_lo: 0.0,
            wilson_hi: 0.0,
            alpha: 0.05,
            theory_bound: 0.09,
            bound_valid: true,
        };
        assert!(bound_violations(&[row.clone()], 0.01).unwrap().is_empty());
        row.theory_bound = 0.05;
        assert_eq!(bound_violations(&[row.clone()], 0.01).unwrap().len(), 1);
        row.bound_valid = false;
        assert!(bound_violations(&[row], 0.01).unwrap().is_empty());
    }
}
