//! CSV layouts of the experiment outputs. These headers are a public
//! interface: the plotting scripts read them by name.

use crate::report::{fmt_real, Table};

use super::{CensusRow, FsdRow, PracticeRow, ProportionRow};

pub const PROPORTION_HEADER: [&str; 14] = [
    "experiment",
    "variant",
    "d",
    "sigma2",
    "beta",
    "trials",
    "successes",
    "rejected",
    "ratio",
    "wilson_lo",
    "wilson_hi",
    "alpha",
    "theory_bound",
    "bound_valid",
];

pub const PRACTICE_HEADER: [&str; 11] = [
    "d",
    "sigma2",
    "init",
    "algorithm",
    "rep",
    "nmi",
    "loss",
    "loss_gt",
    "loss_score",
    "iterations",
    "degenerate",
];

pub const FSD_HEADER: [&str; 13] = [
    "d",
    "sigma",
    "tau",
    "s_c",
    "s_t",
    "side",
    "construction",
    "n_draws",
    "grid_points",
    "max_violation",
    "ks_distance",
    "slack",
    "passed",
];

pub const CENSUS_HEADER: [&str; 9] = [
    "rep",
    "n",
    "d",
    "sigma2",
    "total_partitions_checked",
    "fixed_point_count",
    "excluded_small_clusters",
    "balanced_checked",
    "balanced_fixed",
];

pub(super) fn proportion_table(rows: &[ProportionRow]) -> Table {
    let mut t = Table::new(&PROPORTION_HEADER);
    for r in rows {
        t.push(vec![
            r.experiment.clone(),
            r.variant.clone(),
            r.d.to_string(),
            fmt_real(r.sigma2),
            r.beta.map(fmt_real).unwrap_or_default(),
            r.trials.to_string(),
            r.successes.to_string(),
            r.rejected.to_string(),
            fmt_real(r.ratio),
            fmt_real(r.wilson_lo),
            fmt_real(r.wilson_hi),
            fmt_real(r.alpha),
            fmt_real(r.theory_bound),
            r.bound_valid.to_string(),
        ]);
    }
    t
}

pub(super) fn practice_table(rows: &[PracticeRow]) -> Table {
    let mut t = Table::new(&PRACTICE_HEADER);
    for r in rows {
        t.push(vec![
            r.d.to_string(),
            fmt_real(r.sigma2),
            r.init.name().to_string(),
            r.algorithm.name().to_string(),
            r.rep.to_string(),
            fmt_real(r.nmi),
            fmt_real(r.loss),
            fmt_real(r.loss_gt),
            r.loss_score.to_string(),
            r.iterations.to_string(),
            r.degenerate.to_string(),
        ]);
    }
    t
}

pub(super) fn fsd_table(rows: &[FsdRow]) -> Table {
    let mut t = Table::new(&FSD_HEADER);
    for r in rows {
        t.push(vec![
            r.d.to_string(),
            fmt_real(r.sigma),
            fmt_real(r.tau),
            r.s_c.to_string(),
            r.s_t.to_string(),
            r.side.clone(),
            r.construction.clone(),
            r.n_draws.to_string(),
            r.grid_points.to_string(),
            fmt_real(r.max_violation),
            fmt_real(r.ks_distance),
            fmt_real(r.slack),
            r.passed.to_string(),
        ]);
    }
    t
}

pub(super) fn census_table(rows: &[CensusRow]) -> Table {
    let mut t = Table::new(&CENSUS_HEADER);
    for r in rows {
        t.push(vec![
            r.rep.to_string(),
            r.n.to_string(),
            r.d.to_string(),
            fmt_real(r.sigma2()),
            r.total_partitions_checked.to_string(),
            r.fixed_point_count.to_string(),
            r.excluded_small_clusters.to_string(),
            r.balanced_checked.to_string(),
            r.balanced_fixed.to_string(),
        ]);
    }
    t
}
