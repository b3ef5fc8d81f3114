//! Exhaustive count of two-cluster fixed points at small `n`.

use crate::error::Result;
use crate::gmm::{sample_model, LabelMode};
use crate::lloyd::{is_fixed_point, Assignment};
use crate::params::ModelParams;
use crate::rng::instance_stream;

use super::{par_map, SweepConfig};

/// Largest `n` whose `2^n` labelings are enumerated.
pub const MAX_CENSUS_N: usize = 14;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusRow {
    pub rep: u64,
    pub n: usize,
    pub d: usize,
    /// Stored as bits so the row stays `Eq`; see [`CensusRow::sigma2`].
    sigma2_bits: u64,
    /// Labelings with both clusters of size at least 2.
    pub total_partitions_checked: u64,
    pub fixed_point_count: u64,
    /// Labelings skipped because a cluster has fewer than 2 samples.
    pub excluded_small_clusters: u64,
    /// Checked labelings whose cluster sizes differ by at most one.
    pub balanced_checked: u64,
    pub balanced_fixed: u64,
}

impl CensusRow {
    pub fn sigma2(&self) -> f64 {
        f64::from_bits(self.sigma2_bits)
    }

    pub fn fixed_fraction(&self) -> f64 {
        self.fixed_point_count as f64 / self.total_partitions_checked as f64
    }
}

/// For every `(sigma2, d)` cell and repetition, draws one balanced dataset of
/// `n` samples and tests all `2^n` two-cluster labelings with
/// [`is_fixed_point`].
pub fn exp_census(config: &SweepConfig, workers: usize) -> Result<Vec<CensusRow>> {
    let n = config.n;
    let cells: Vec<(usize, f64)> = config
        .sigma2_grid
        .iter()
        .flat_map(|&s| config.d_grid.iter().map(move |&d| (d, s)))
        .collect();
    let reps = config.reps as usize;
    par_map(workers, cells.len() * reps, |t| {
        let cell = t / reps;
        let rep = (t % reps) as u64;
        let (d, sigma2) = cells[cell];
        let params = ModelParams::new(d, n, 2, config.tau, sigma2.sqrt())?;
        let mut stream = instance_stream(config.base_seed, "census", cell as u64, rep);
        let data = sample_model(&mut stream, &params, LabelMode::Balanced)?;
        let mut row = CensusRow {
            rep,
            n,
            d,
            sigma2_bits: sigma2.to_bits(),
            total_partitions_checked: 0,
            fixed_point_count: 0,
            excluded_small_clusters: 0,
            balanced_checked: 0,
            balanced_fixed: 0,
        };
        for mask in 0u32..(1u32 << n) {
            let ones = mask.count_ones() as usize;
            if ones < 2 || n - ones < 2 {
                row.excluded_small_clusters += 1;
                continue;
            }
            let labels = (0..n).map(|i| ((mask >> i) & 1) as usize).collect();
            let (fixed, _) = is_fixed_point(&data, &Assignment::new(labels, 2)?)?;
            let balanced = ones.abs_diff(n - ones) <= 1;
            row.total_partitions_checked += 1;
            row.fixed_point_count += u64::from(fixed);
            row.balanced_checked += u64::from(balanced);
            row.balanced_fixed += u64::from(balanced && fixed);
        }
        Ok(row)
    })
}
