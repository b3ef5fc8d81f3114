//! Seeded, parallel Monte Carlo experiments.
//!
//! Every Monte Carlo instance draws from its own stream, derived from the
//! experiment tag, the grid cell index and the repetition index. Instances
//! run on a rayon pool and are collected in index order, so output tables
//! are byte-identical for any worker count.

mod census;
mod config;
mod fsd;
mod practice;
mod proportion;
mod tables;

pub use census::{exp_census, CensusRow, MAX_CENSUS_N};
pub use config::{Experiment, FsdCase, SweepConfig};
pub use fsd::{exp_fsd_check, FsdRow};
pub use practice::{exp_practice, Algorithm, PracticeRow};
pub use proportion::{
    bound_violations, exp_reassign_equal, exp_typical, exp_union, exp_warmup, ProportionRow,
};
pub use tables::{CENSUS_HEADER, FSD_HEADER, PRACTICE_HEADER, PROPORTION_HEADER};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::report::Table;

/// Cap on consecutive rejected draws before an instance gives up.
pub const MAX_REJECTIONS: u64 = 100_000;

/// Worker count used when the caller passes 0.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Maps `f` over `0..count` on a pool of `workers` threads (0 = all cores),
/// returning results in index order.
pub fn par_map<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let workers = if workers == 0 { default_workers() } else { workers };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(f).collect())
}

/// Result rows of any experiment.
#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentOutput {
    Proportion(Vec<ProportionRow>),
    Practice(Vec<PracticeRow>),
    Fsd(Vec<FsdRow>),
    Census(Vec<CensusRow>),
}

impl ExperimentOutput {
    pub fn to_table(&self) -> Table {
        match self {
            ExperimentOutput::Proportion(r) => tables::proportion_table(r),
            ExperimentOutput::Practice(r) => tables::practice_table(r),
            ExperimentOutput::Fsd(r) => tables::fsd_table(r),
            ExperimentOutput::Census(r) => tables::census_table(r),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ExperimentOutput::Proportion(r) => r.len(),
            ExperimentOutput::Practice(r) => r.len(),
            ExperimentOutput::Fsd(r) => r.len(),
            ExperimentOutput::Census(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Hard invariant failures: bound violations beyond statistical slack and
    /// failed dominance checks.
    pub fn failures(&self, config: &SweepConfig) -> Result<Vec<String>> {
        Ok(match self {
            ExperimentOutput::Proportion(r) => bound_violations(r, config.compliance_alpha)?,
            ExperimentOutput::Fsd(r) => r
                .iter()
                .filter(|row| !row.passed)
                .map(|row| {
                    format!(
                        "dominance violated: d={} side={} construction={} violation={} slack={}",
                        row.d, row.side, row.construction, row.max_violation, row.slack
                    )
                })
                .collect(),
            ExperimentOutput::Practice(_) | ExperimentOutput::Census(_) => Vec::new(),
        })
    }
}

/// Validates `config` for `experiment` and runs it.
pub fn run_experiment(experiment: Experiment, config: &SweepConfig, workers: usize) -> Result<ExperimentOutput> {
    config.validate_for(experiment)?;
    Ok(match experiment {
        Experiment::Reassign => ExperimentOutput::Proportion(exp_reassign_equal(config, workers)?),
        Experiment::Typical => ExperimentOutput::Proportion(exp_typical(config, workers)?),
        Experiment::Union => ExperimentOutput::Proportion(exp_union(config, workers)?),
        Experiment::Warmup => ExperimentOutput::Proportion(exp_warmup(config, workers)?),
        Experiment::Practice => ExperimentOutput::Practice(exp_practice(config, workers)?),
        Experiment::Fsd => ExperimentOutput::Fsd(exp_fsd_check(config, workers)?),
        Experiment::Census => ExperimentOutput::Census(exp_census(config, workers)?),
    })
}
