//! Empirical check that the squared distances from a sample to the two
//! cluster means are ordered against scaled chi-squared variables in the
//! sense of first-order stochastic dominance.
//!
//! Side `T`: `||x_j - mu_T||^2` (with `j` outside `T`) should dominate
//! `a_T chi^2_d`, so its ECDF lies at or below. Side `C`: `||x_j - mu_C||^2`
//! (with `j` inside `C`) should be dominated by `a_C chi^2_d`, so its ECDF
//! lies at or above. The `worst` constructions reach equality: on side `T`
//! all of `T` shares `j`'s class, on side `C` every other member of `C`
//! comes from the other class. The `mixed` constructions split the other
//! members between the two classes.

use crate::bounds::{a_c, a_t};
use crate::error::Result;
use crate::linalg::{axpy, squared_distance};
use crate::rng::{instance_stream, sample_chi_squared, RngStream};

use super::{par_map, FsdCase, SweepConfig};

/// Draws per parallel task.
const CHUNK: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct FsdRow {
    pub d: usize,
    pub sigma: f64,
    pub tau: f64,
    pub s_c: usize,
    pub s_t: usize,
    /// `T` or `C`.
    pub side: String,
    /// `worst` or `mixed`.
    pub construction: String,
    pub n_draws: u64,
    pub grid_points: usize,
    /// Largest amount by which the ECDFs are ordered the wrong way on the
    /// grid (negative when the ordering holds strictly everywhere).
    pub max_violation: f64,
    pub ks_distance: f64,
    /// Sum of the two one-sample DKW half-widths at the compliance level.
    pub slack: f64,
    pub passed: bool,
}

#[derive(Clone, Copy)]
struct Spec {
    case: FsdCase,
    d: usize,
    side_t: bool,
    worst: bool,
}

impl Spec {
    /// Number of the other members drawn from `j`'s own class.
    fn same_class(&self) -> usize {
        match (self.side_t, self.worst) {
            (true, true) => self.case.s_t,
            (true, false) => self.case.s_t.div_ceil(2),
            (false, true) => 0,
            (false, false) => (self.case.s_c - 1).div_ceil(2),
        }
    }

    fn others(&self) -> usize {
        if self.side_t {
            self.case.s_t
        } else {
            self.case.s_c - 1
        }
    }

    fn scale(&self) -> f64 {
        if self.side_t {
            a_t(self.case.sigma, self.case.s_t as u64)
        } else {
            a_c(self.case.sigma, self.case.tau, self.case.s_c as u64)
        }
    }
}

/// One draw of `(distance, scale * chi^2_d)`.
fn draw(spec: &Spec, stream: &mut RngStream, buf: &mut [Vec<f64>; 4]) -> Result<(f64, f64)> {
    let d = spec.d;
    let FsdCase { sigma, tau, .. } = spec.case;
    let [own, other, x, mean] = buf;
    stream.fill_std_normal(own);
    stream.fill_std_normal(other);
    own.iter_mut().chain(other.iter_mut()).for_each(|v| *v *= tau);

    let noisy = |center: &[f64], out: &mut [f64], stream: &mut RngStream| {
        stream.fill_std_normal(out);
        for (o, c) in out.iter_mut().zip(center) {
            *o = c + sigma * *o;
        }
    };
    noisy(own, x, stream);
    mean.iter_mut().for_each(|v| *v = 0.0);
    let mut y = vec![0.0; d];
    let same = spec.same_class();
    for i in 0..spec.others() {
        let center = if i < same { &*own } else { &*other };
        noisy(center, &mut y, stream);
        axpy(1.0, &y, mean);
    }
    let members = if spec.side_t {
        spec.others()
    } else {
        axpy(1.0, x, mean);
        spec.others() + 1
    };
    let inv = 1.0 / members as f64;
    mean.iter_mut().for_each(|v| *v *= inv);
    let dist = squared_distance(x, mean);
    let reference = sample_chi_squared(stream, d, spec.scale())?;
    Ok((dist, reference))
}

fn ecdf(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
}

/// Runs every case, dimension, side and construction with `reps` draws per
/// distribution, comparing ECDFs on `fsd_grid_points` pooled quantiles.
pub fn exp_fsd_check(config: &SweepConfig, workers: usize) -> Result<Vec<FsdRow>> {
    let mut specs = Vec::new();
    for &case in &config.fsd_cases {
        for &d in &config.d_grid {
            for side_t in [true, false] {
                for worst in [true, false] {
                    specs.push(Spec { case, d, side_t, worst });
                }
            }
        }
    }
    let n = config.reps as usize;
    let chunks = n.div_ceil(CHUNK);
    let drawn = par_map(workers, specs.len() * chunks, |t| {
        let spec = &specs[t / chunks];
        let chunk = t % chunks;
        let count = CHUNK.min(n - chunk * CHUNK);
        let mut stream = instance_stream(config.base_seed, "fsd", (t / chunks) as u64, chunk as u64);
        let mut buf = [vec![0.0; spec.d], vec![0.0; spec.d], vec![0.0; spec.d], vec![0.0; spec.d]];
        (0..count).map(|_| draw(spec, &mut stream, &mut buf)).collect::<Result<Vec<_>>>()
    })?;

    let slack = 2.0 * ((2.0 / config.compliance_alpha).ln() / (2.0 * n as f64)).sqrt();
    let g = config.fsd_grid_points;
    Ok(specs
        .iter()
        .zip(drawn.chunks(chunks))
        .map(|(spec, parts)| {
            let (mut xs, mut ys): (Vec<f64>, Vec<f64>) = parts.iter().flatten().copied().unzip();
            xs.sort_by(f64::total_cmp);
            ys.sort_by(f64::total_cmp);
            let mut pooled: Vec<f64> = xs.iter().chain(&ys).copied().collect();
            pooled.sort_by(f64::total_cmp);
            let mut max_violation = f64::NEG_INFINITY;
            let mut ks: f64 = 0.0;
            for i in 0..g {
                let p = (i as f64 + 0.5) / g as f64;
                let at = pooled[((p * pooled.len() as f64) as usize).min(pooled.len() - 1)];
                let diff = ecdf(&xs, at) - ecdf(&ys, at);
                let wrong_way = if spec.side_t { diff } else { -diff };
                max_violation = max_violation.max(wrong_way);
                ks = ks.max(diff.abs());
            }
            FsdRow {
                d: spec.d,
                sigma: spec.case.sigma,
                tau: spec.case.tau,
                s_c: spec.case.s_c,
                s_t: spec.case.s_t,
                side: if spec.side_t { "T" } else { "C" }.to_string(),
                construction: if spec.worst { "worst" } else { "mixed" }.to_string(),
                n_draws: config.reps,
                grid_points: g,
                max_violation,
                ks_distance: ks,
                slack,
                passed: max_violation <= slack,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Experiment;

    #[test]
    fn small_run_passes_and_worst_case_matches() {
        let c = SweepConfig {
            reps: 20_000,
            d_grid: vec![4],
            fsd_cases: vec![FsdCase { sigma: 1.0, tau: 1.0, s_c: 3, s_t: 2 }],
            ..SweepConfig::for_experiment(Experiment::Fsd)
        };
        let rows = exp_fsd_check(&c, 2).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            assert!(r.passed, "{r:?}");
            if r.construction == "worst" {
                assert!(r.ks_distance <= r.slack, "{r:?}");
            }
        }
        let mixed_t = rows.iter().find(|r| r.side == "T" && r.construction == "mixed").unwrap();
        assert!(mixed_t.ks_distance > mixed_t.slack, "mixed T side should be strictly dominated");
    }
}
