//! Clustering agreement, binomial confidence intervals and loss comparison.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Normalized mutual information with arithmetic-mean normalization
/// `2 I(U;V) / (H(U) + H(V))`, natural logarithms.
///
/// Two constant labelings score 0 (the `0/0` case is defined as 0), so a
/// clustering that finds no structure never looks perfect.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            actual: b.len(),
            context: "nmi label lengths",
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyRequest("nmi of empty labelings"));
    }
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let mut joint = vec![0usize; ka * kb];
    let mut ca = vec![0usize; ka];
    let mut cb = vec![0usize; kb];
    for (&x, &y) in a.iter().zip(b) {
        joint[x * kb + y] += 1;
        ca[x] += 1;
        cb[y] += 1;
    }
    let n = a.len() as f64;
    let entropy = |counts: &[usize]| -> f64 {
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let ha = entropy(&ca);
    let hb = entropy(&cb);
    let mut mi = 0.0;
    for x in 0..ka {
        for y in 0..kb {
            let c = joint[x * kb + y];
            if c == 0 {
                continue;
            }
            let c = c as f64;
            mi += c / n * (c * n / (ca[x] as f64 * cb[y] as f64)).ln();
        }
    }
    let denom = ha + hb;
    if denom <= 0.0 {
        return Ok(0.0);
    }
    Ok((2.0 * mi / denom).clamp(0.0, 1.0))
}

/// Standard normal quantile.
pub fn quantile_std_normal(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("quantile needs 0 < p < 1, got {p}")));
    }
    Ok(Normal::standard().inverse_cdf(p))
}

/// A success proportion with its two-sided Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProportionEstimate {
    pub n_s: u64,
    pub n_f: u64,
    pub ratio: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub alpha: f64,
}

/// Wilson score interval at level `1 - alpha` for `n_s` successes and `n_f`
/// failures, clipped to `[0, 1]`.
pub fn wilson_interval(n_s: u64, n_f: u64, alpha: f64) -> Result<ProportionEstimate> {
    let total = n_s + n_f;
    if total == 0 {
        return Err(Error::EmptyRequest("proportion of zero trials"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("need 0 < alpha < 1, got {alpha}")));
    }
    let z = quantile_std_normal(1.0 - alpha / 2.0)?;
    let n = total as f64;
    let s = n_s as f64;
    let f = n_f as f64;
    let z2 = z * z;
    let center = (s + z2 / 2.0) / (n + z2);
    let half = z / (n + z2) * (s * f / n + z2 / 4.0).sqrt();
    let mut lo = (center - half).clamp(0.0, 1.0);
    let mut hi = (center + half).clamp(0.0, 1.0);
    // the interval is exact at the edges; rounding should not exclude them
    if n_s == 0 {
        lo = 0.0;
    }
    if n_f == 0 {
        hi = 1.0;
    }
    Ok(ProportionEstimate {
        n_s,
        n_f,
        ratio: s / n,
        wilson_lo: lo,
        wilson_hi: hi,
        alpha,
    })
}

/// Relative tolerance used by [`loss_score`].
pub const LOSS_RTOL: f64 = 1e-6;

/// `-1` if the algorithm's loss beats the ground-truth loss, `+1` if it is
/// worse, `0` when they agree within a relative `1e-6`.
pub fn loss_score(loss_alg: f64, loss_gt: f64) -> i8 {
    let scale = loss_alg.abs().max(loss_gt.abs());
    if (loss_alg - loss_gt).abs() <= LOSS_RTOL * scale {
        0
    } else if loss_alg < loss_gt {
        -1
    } else {
        1
    }
}
