use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Knobs of the two-level Gaussian model: `K` centers drawn from
/// `N(0, tau^2 I_d)` and `n` samples equal to their center plus
/// `N(0, sigma^2 I_d)` noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub tau: f64,
    /// Noise standard deviation. Zero is accepted and yields noiseless data.
    pub sigma: f64,
}

impl ModelParams {
    pub fn new(d: usize, n: usize, k: usize, tau: f64, sigma: f64) -> Result<Self> {
        let p = ModelParams { d, n, k, tau, sigma };
        p.validate()?;
        Ok(p)
    }

    /// Two clusters with `tau = 1`, parameterised by the noise variance.
    pub fn two_clusters(d: usize, n: usize, sigma2: f64) -> Result<Self> {
        Self::new(d, n, 2, 1.0, sigma2.max(0.0).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 1 {
            return Err(Error::InvalidParams("d must be >= 1".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidParams("n must be >= 2".into()));
        }
        if self.k < 2 {
            return Err(Error::InvalidParams("K must be >= 2".into()));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidParams(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParams(format!(
                "sigma must be non-negative, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma * self.sigma
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ModelParams::new(1, 2, 2, 1.0, 1.0).is_ok());
        assert!(ModelParams::new(0, 2, 2, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1, 1, 2, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1, 2, 1, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1, 2, 2, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1, 2, 2, 1.0, -1.0).is_err());
        assert!(ModelParams::new(1, 2, 2, 1.0, f64::NAN).is_err());
        assert_eq!(ModelParams::two_clusters(3, 4, 25.0).unwrap().sigma, 5.0);
    }
}
