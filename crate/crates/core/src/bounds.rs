//! Closed-form probability bounds and thresholds for two-cluster k-means
//! under the Gaussian model, as pure scalar functions.
//!
//! Every contraction factor `rho` carries both its value and its complement
//! `1 - rho`, computed from the scaled chi-squared parameters as
//! `((a_T - a_C) / (a_T + a_C))^2`. Powers `rho^(d/4)` are then evaluated as
//! `exp(d/4 * ln_1p(-(1 - rho)))`, which stays accurate when `rho` is within
//! `1e-12` of one and `d` is in the hundreds of thousands.
//!
//! Regime violations do not fail: the value is still computed and returned
//! with `valid = false` and the failed conditions listed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sizes of the current cluster `C` (holding the sample) and the other
/// cluster `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSizes {
    pub s_c: u64,
    pub s_t: u64,
}

impl ClusterSizes {
    pub fn new(s_c: u64, s_t: u64) -> Result<Self> {
        if s_c < 2 || s_t < 1 {
            return Err(Error::Domain(format!(
                "cluster sizes need s_C >= 2 and s_T >= 1, got ({s_c}, {s_t})"
            )));
        }
        Ok(ClusterSizes { s_c, s_t })
    }

    pub fn equal(s: u64) -> Result<Self> {
        Self::new(s, s)
    }
}

/// A probability bound in `[0, 1]` with its regime report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    /// `1 - value`, computed without cancellation where the formula allows.
    pub complement: f64,
    pub valid: bool,
    pub failed: Vec<String>,
}

impl BoundValue {
    /// A bound known only by value (assumed valid when it lies in `[0, 1)`).
    pub fn from_value(value: f64) -> Self {
        let v = value.clamp(0.0, 1.0);
        let mut failed = Vec::new();
        if !(value < 1.0) {
            failed.push("value < 1".to_string());
        }
        BoundValue {
            value: v,
            complement: 1.0 - v,
            valid: failed.is_empty(),
            failed,
        }
    }

    fn build(value: f64, complement: f64, failed: Vec<String>) -> Self {
        BoundValue {
            value: value.clamp(0.0, 1.0),
            complement: complement.clamp(0.0, 1.0),
            valid: failed.is_empty(),
            failed,
        }
    }

    /// `ln(value)` via the complement.
    pub fn ln(&self) -> f64 {
        if self.complement >= 1.0 {
            f64::NEG_INFINITY
        } else {
            (-self.complement).ln_1p()
        }
    }

    /// `value^(d/4)`, the per-sample reassignment bound in dimension `d`.
    pub fn pow_quarter_d(&self, d: f64) -> f64 {
        if self.complement == 0.0 {
            return 1.0;
        }
        (0.25 * d * self.ln()).exp().clamp(0.0, 1.0)
    }

    /// `min(1, count * value^(d/4))`, the union bound over `count` samples.
    pub fn union_pow_quarter_d(&self, count: f64, d: f64) -> f64 {
        if self.complement == 0.0 {
            return 1.0;
        }
        (count.ln() + 0.25 * d * self.ln()).exp().min(1.0)
    }

    /// The failed conditions joined with `;` (empty when valid).
    pub fn report(&self) -> String {
        self.failed.join("; ")
    }
}

fn check_scales(b1: f64, b2: f64) -> Result<()> {
    if !(b2 > 0.0 && b1 > b2) || !b1.is_finite() {
        return Err(Error::Regime(format!("need b1 > b2 > 0, got b1={b1}, b2={b2}")));
    }
    Ok(())
}

/// Upper bound on `P(Y1 - Y2 <= m)` when `Y1` dominates `b1 chi^2_d` and `Y2`
/// is dominated by `b2 chi^2_d`:
/// `exp(m (b1-b2)/(8 b1 b2)) * ((b1+b2)^2/(4 b1 b2))^(-d/4)`, clipped to 1.
pub fn lemma_chibound(b1: f64, b2: f64, m: f64, d: u64) -> Result<BoundValue> {
    check_scales(b1, b2)?;
    if d < 1 {
        return Err(Error::Domain("d must be >= 1".into()));
    }
    // (b1+b2)^2 / (4 b1 b2) = 1 + (b1-b2)^2 / (4 b1 b2)
    let log_base = ((b1 - b2).powi(2) / (4.0 * b1 * b2)).ln_1p();
    let log_value = m * t_max(b1, b2)? - 0.25 * d as f64 * log_base;
    let value = log_value.exp();
    let complement = -log_value.exp_m1();
    Ok(BoundValue::build(value.min(1.0), complement.max(0.0), Vec::new()))
}

/// The optimising Chernoff exponent `(b1 - b2) / (8 b1 b2)`.
pub fn t_max(b1: f64, b2: f64) -> Result<f64> {
    check_scales(b1, b2)?;
    Ok((b1 - b2) / (8.0 * b1 * b2))
}

/// Scale of the chi-squared variable dominated by `||x_j - mu_T||^2`:
/// `(1 + 1/s_T) sigma^2`.
pub fn a_t(sigma: f64, s_t: u64) -> f64 {
    (1.0 + 1.0 / s_t as f64) * sigma * sigma
}

/// Scale of the chi-squared variable dominating `||x_j - mu_C||^2`:
/// `sigma^2 (1 - 1/s_C) + 2 tau^2 (s_C - 1)^2 / s_C^2`.
pub fn a_c(sigma: f64, tau: f64, s_c: u64) -> f64 {
    let s = s_c as f64;
    sigma * sigma * (1.0 - 1.0 / s) + 2.0 * tau * tau * (s - 1.0).powi(2) / (s * s)
}

/// Noise level above which `a_T > a_C`:
/// `sqrt(2) tau (s_C - 1) / sqrt(s_C^2 / s_T + s_C)`.
pub fn sigma_threshold(tau: f64, sizes: ClusterSizes) -> f64 {
    let sc = sizes.s_c as f64;
    let st = sizes.s_t as f64;
    std::f64::consts::SQRT_2 * tau * (sc - 1.0) / (sc * sc / st + sc).sqrt()
}

/// `4 b1 b2 / (b1 + b2)^2` and its complement `((b1 - b2)/(b1 + b2))^2`.
fn rho_from_scales(b1: f64, b2: f64) -> (f64, f64) {
    let sum = b1 + b2;
    (4.0 * b1 * b2 / (sum * sum), ((b1 - b2) / sum).powi(2))
}

fn positive(name: &str, v: f64, failed: &mut Vec<String>) {
    if !(v > 0.0) {
        failed.push(format!("{name} > 0"));
    }
}

/// The single-sample reassignment factor for clusters of sizes
/// `(s_C, s_T)`; `P(reassign) <= rho^(d/4)` whenever `sigma` exceeds
/// [`sigma_threshold`].
pub fn rho_general(sigma: f64, tau: f64, sizes: ClusterSizes) -> BoundValue {
    let mut failed = Vec::new();
    positive("sigma", sigma, &mut failed);
    positive("tau", tau, &mut failed);
    let threshold = sigma_threshold(tau, sizes);
    if !(sigma > threshold) {
        failed.push(format!("sigma > {threshold} (sigma_threshold)"));
    }
    let (value, complement) = rho_from_scales(a_t(sigma, sizes.s_t), a_c(sigma, tau, sizes.s_c));
    BoundValue::build(value, complement, failed)
}

/// Equal cluster sizes `s` and `tau = 1`:
/// `sigma^2 s (s^2-1) ((sigma^2+2) s - 2) / (s ((sigma^2+1) s - 2) + 1)^2`.
pub fn rho_equal(sigma: f64, s: u64) -> BoundValue {
    let mut failed = Vec::new();
    positive("sigma", sigma, &mut failed);
    if s < 2 {
        failed.push("s >= 2".into());
    }
    let sf = s as f64;
    let threshold = (sf - 1.0) / sf.sqrt();
    if !(sigma > threshold) {
        failed.push(format!("sigma > {threshold} ((s-1)/sqrt(s))"));
    }
    let s2 = sigma * sigma;
    let den = sf * ((s2 + 1.0) * sf - 2.0) + 1.0;
    let value = s2 * sf * (sf * sf - 1.0) * ((s2 + 2.0) * sf - 2.0) / (den * den);
    let (_, complement) = rho_from_scales(a_t(sigma, s.max(1)), a_c(sigma, 1.0, s.max(1)));
    BoundValue::build(value, complement, failed)
}

/// Known-centers factor `(1 + 2 tau^2/sigma^2) / (1 + tau^2/sigma^2)^2`.
pub fn rho_warmup(sigma: f64, tau: f64) -> BoundValue {
    let mut failed = Vec::new();
    positive("sigma", sigma, &mut failed);
    positive("tau", tau, &mut failed);
    let r = (tau * tau) / (sigma * sigma);
    let value = (1.0 + 2.0 * r) / (1.0 + r).powi(2);
    let complement = (r / (1.0 + r)).powi(2);
    BoundValue::build(value, complement, failed)
}

/// Minimum sample count for the typical-partition result:
/// `2 (q^2 + 2) + 2 sqrt(q^4 + 4 q^2)`.
pub fn n_threshold(q: f64) -> f64 {
    let q2 = q * q;
    2.0 * (q2 + 2.0) + 2.0 * (q2 * q2 + 4.0 * q2).sqrt()
}

/// Largest admissible cluster size `n/2 + q sqrt(n/4)` in a typical partition.
pub fn typical_max_size(n: u64, q: f64) -> f64 {
    let nf = n as f64;
    nf / 2.0 + q * (nf / 4.0).sqrt()
}

/// Open window `(n/2 - q sqrt(n/4), n/2 + q sqrt(n/4))` for typical cluster
/// sizes.
pub fn typical_size_window(n: u64, q: f64) -> (f64, f64) {
    let nf = n as f64;
    let half = q * (nf / 4.0).sqrt();
    (nf / 2.0 - half, nf / 2.0 + half)
}

/// Noise level `beta (sqrt(n) q + n - 2) / (sqrt(2) sqrt(sqrt(n) q + n))`.
pub fn sigma_typical(beta: f64, n: u64, q: f64) -> Result<f64> {
    let nth = n_threshold(q);
    if !(n as f64 > nth) {
        return Err(Error::Regime(format!("need n > {nth}, got n = {n}")));
    }
    let nf = n as f64;
    let r = nf.sqrt() * q + nf;
    Ok(beta * (r - 2.0) / (std::f64::consts::SQRT_2 * r.sqrt()))
}

/// Reassignment factor for a sample in a typical partition (`tau = 1`).
pub fn rho_typical(sigma: f64, n: u64, q: f64) -> BoundValue {
    let mut failed = Vec::new();
    positive("sigma", sigma, &mut failed);
    if !(q > 1.0) {
        failed.push("q > 1".into());
    }
    let nth = n_threshold(q);
    let nf = n as f64;
    if !(nf > nth) {
        failed.push(format!("n > {nth} (n_threshold)"));
    }
    let r = nf.sqrt();
    let base = r * q + nf;
    let threshold = (base - 2.0) / (std::f64::consts::SQRT_2 * base.sqrt());
    if !(sigma > threshold) {
        failed.push(format!("sigma > {threshold} (beta > 1)"));
    }
    let s2 = sigma * sigma;
    let num = s2 * (base - 2.0) * base * (base + 2.0) * (r * (s2 + 2.0) * (r + q) - 4.0);
    let den = nf * s2 * (r + q).powi(2) + (base - 2.0).powi(2);
    let value = num / (den * den);

    // the same factor through the scaled chi-squared parameters at the largest
    // admissible size, for an accurate complement
    let s = typical_max_size(n, q);
    let at = (1.0 + 1.0 / s) * s2;
    let ac = s2 * (1.0 - 1.0 / s) + 2.0 * (s - 1.0).powi(2) / (s * s);
    let (_, complement) = rho_from_scales(at, ac);
    BoundValue::build(value, complement, failed)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("need 0 < eps < 1, got {eps}")));
    }
    Ok(())
}

fn usable_rho(rho: &BoundValue) -> Result<f64> {
    if !rho.valid || !(rho.complement > 0.0) {
        return Err(Error::Regime(format!(
            "rho must be valid and < 1 (value {}, failed: {})",
            rho.value,
            rho.report()
        )));
    }
    Ok(-rho.ln())
}

fn smallest_exceeding(x: f64) -> u64 {
    x.floor() as u64 + 1
}

/// Smallest integer `d` with `d > 4 ln(1/eps) / ln(1/rho)`.
pub fn d_threshold_sample(eps: f64, rho: &BoundValue) -> Result<u64> {
    check_eps(eps)?;
    let denom = usable_rho(rho)?;
    Ok(smallest_exceeding(4.0 * (1.0 / eps).ln() / denom))
}

/// Smallest integer `d` with `d > 4 ln(n/eps) / ln(1/rho)`.
pub fn d_threshold_partition(eps: f64, n: u64, rho: &BoundValue) -> Result<u64> {
    check_eps(eps)?;
    let denom = usable_rho(rho)?;
    Ok(smallest_exceeding(4.0 * (n as f64 / eps).ln() / denom))
}

/// Smallest integer `d` with `d > 4 (ln(n/eps) + n ln 2) / ln(1/rho)`.
pub fn d_threshold_all(eps: f64, n: u64, rho: &BoundValue) -> Result<u64> {
    check_eps(eps)?;
    let denom = usable_rho(rho)?;
    let nf = n as f64;
    Ok(smallest_exceeding(
        4.0 * ((nf / eps).ln() + nf * std::f64::consts::LN_2) / denom,
    ))
}

/// `sqrt(2) sqrt(ln(4/delta))`: beyond this `q`, at most a `delta` fraction of
/// two-way partitions is atypical.
pub fn q_threshold(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("need 0 < delta < 1, got {delta}")));
    }
    Ok(std::f64::consts::SQRT_2 * (4.0 / delta).ln().sqrt())
}

/// Large-`n` expansion of `sigma_typical(beta, n, q)^2` through the `1/n`
/// term: `beta^2 n/2 + beta^2 q sqrt(n)/2 - 2 beta^2 + 2 beta^2 / n`.
pub fn sigma2_typical_expansion(beta: f64, n: f64, q: f64) -> f64 {
    let b2 = beta * beta;
    b2 * n / 2.0 + b2 * q * n.sqrt() / 2.0 - 2.0 * b2 + 2.0 * b2 / n
}

/// Large-`n` expansion of `1 - rho_typical` at `sigma = sigma_typical(beta)`:
/// `4 (beta^2-1)^2 / (beta^4 n^2) - 8 (beta^2-1)^2 q / (beta^4 n^(5/2))`.
pub fn rho_typical_complement_expansion(beta: f64, n: f64, q: f64) -> f64 {
    let c = (beta * beta - 1.0).powi(2) / beta.powi(4);
    4.0 * c / (n * n) - 8.0 * c * q / n.powf(2.5)
}

/// Leading-order dimension threshold for all typical partitions to be fixed
/// points: `beta^4 n^3 ln 2 / (beta^2 - 1)^2`.
pub fn d_threshold_all_expansion(beta: f64, n: f64) -> f64 {
    beta.powi(4) * n.powi(3) * std::f64::consts::LN_2 / (beta * beta - 1.0).powi(2)
}
