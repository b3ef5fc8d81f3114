use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bounds::n_threshold;
use crate::error::{Error, Result};
use crate::lloyd::InitStrategy;

use super::census::MAX_CENSUS_N;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Reassign,
    Typical,
    Union,
    Warmup,
    Practice,
    Fsd,
    Census,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Reassign,
        Experiment::Typical,
        Experiment::Union,
        Experiment::Warmup,
        Experiment::Practice,
        Experiment::Fsd,
        Experiment::Census,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Reassign => "reassign",
            Experiment::Typical => "typical",
            Experiment::Union => "union",
            Experiment::Warmup => "warmup",
            Experiment::Practice => "practice",
            Experiment::Fsd => "fsd",
            Experiment::Census => "census",
        }
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

/// One parameter set for the dominance check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FsdCase {
    pub sigma: f64,
    pub tau: f64,
    pub s_c: usize,
    pub s_t: usize,
}

/// Configuration shared by all experiments. Fields an experiment does not use
/// are ignored by it (but still echoed into the manifest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub base_seed: u64,
    /// Samples per instance (census: samples to enumerate over).
    pub n: usize,
    pub k: usize,
    pub tau: f64,
    pub d_grid: Vec<usize>,
    pub sigma2_grid: Vec<f64>,
    /// Noise levels relative to the typical-partition threshold.
    pub beta_grid: Vec<f64>,
    /// Half-width multiplier of the typical size window.
    pub q: f64,
    /// Repetitions per cell (fsd: draws per distribution).
    pub reps: u64,
    /// Level of the Wilson intervals written to the tables.
    pub alpha: f64,
    /// Level used for hard bound-compliance and dominance checks.
    pub compliance_alpha: f64,
    pub inits: Vec<InitStrategy>,
    pub d_pca: usize,
    pub max_iters: usize,
    pub fsd_cases: Vec<FsdCase>,
    pub fsd_grid_points: usize,
}

const FIG_D_GRID: [usize; 5] = [16, 64, 256, 1024, 4096];

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            base_seed: 20_240_601,
            n: 40,
            k: 2,
            tau: 1.0,
            d_grid: FIG_D_GRID.to_vec(),
            sigma2_grid: vec![20.0, 25.0, 36.0],
            beta_grid: vec![0.9, 1.1, 1.25, 1.5],
            q: 2.0,
            reps: 10_000,
            alpha: 0.05,
            compliance_alpha: 0.01,
            inits: InitStrategy::ALL.to_vec(),
            d_pca: crate::reduce::DEFAULT_D_PCA,
            max_iters: crate::lloyd::DEFAULT_MAX_ITERS,
            fsd_cases: vec![
                FsdCase { sigma: 1.0, tau: 1.0, s_c: 2, s_t: 2 },
                FsdCase { sigma: 5.0, tau: 1.0, s_c: 10, s_t: 10 },
            ],
            fsd_grid_points: 200,
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl SweepConfig {
    /// Default configuration of each experiment at the scale of the
    /// corresponding figure.
    pub fn for_experiment(experiment: Experiment) -> Self {
        let base = SweepConfig::default();
        match experiment {
            Experiment::Reassign | Experiment::Typical => base,
            Experiment::Union => SweepConfig {
                d_grid: (10..=16).map(|p| 1 << p).collect(),
                sigma2_grid: vec![25.0],
                reps: 1_000,
                ..base
            },
            Experiment::Warmup => SweepConfig {
                d_grid: vec![2, 8, 32, 128, 512],
                sigma2_grid: vec![1.0, 4.0, 16.0],
                reps: 100_000,
                ..base
            },
            Experiment::Practice => SweepConfig {
                sigma2_grid: vec![25.0],
                reps: 100,
                ..base
            },
            Experiment::Fsd => SweepConfig {
                d_grid: vec![4, 64],
                reps: 100_000,
                ..base
            },
            Experiment::Census => SweepConfig {
                n: 10,
                d_grid: vec![5000],
                sigma2_grid: vec![8.0],
                reps: 50,
                ..base
            },
        }
    }

    /// Experiment defaults, overlaid with the keys of a JSON document, then
    /// with `key=value` overrides. Values are parsed as JSON; a bare word is
    /// a string, a comma list becomes an array, and a scalar given for a list
    /// field becomes a one-element list.
    pub fn resolve(experiment: Experiment, document: Option<&str>, overrides: &[(String, String)]) -> Result<Self> {
        let mut value = serde_json::to_value(Self::for_experiment(experiment))
            .map_err(|e| config_err(e.to_string()))?;
        let map = value.as_object_mut().expect("config serializes to an object");
        if let Some(doc) = document {
            let parsed: Value = serde_json::from_str(doc).map_err(|e| config_err(format!("config is not valid JSON: {e}")))?;
            let Value::Object(obj) = parsed else {
                return Err(config_err("config must be a JSON object"));
            };
            for (k, v) in obj {
                map.insert(k, v);
            }
        }
        for (key, raw) in overrides {
            let list_field = matches!(map.get(key), Some(Value::Array(_)));
            let mut v = parse_override(raw);
            if list_field && !v.is_array() {
                v = Value::Array(vec![v]);
            }
            map.insert(key.clone(), v);
        }
        serde_json::from_value(value).map_err(|e| config_err(e.to_string()))
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn validate_for(&self, experiment: Experiment) -> Result<()> {
        if self.reps < 1 {
            return Err(config_err("reps must be >= 1"));
        }
        if self.k != 2 {
            return Err(config_err(format!("only K = 2 is supported, got {}", self.k)));
        }
        if self.d_grid.is_empty() || self.d_grid.contains(&0) {
            return Err(config_err("d_grid must be nonempty with entries >= 1"));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(config_err("tau must be positive"));
        }
        for (name, a) in [("alpha", self.alpha), ("compliance_alpha", self.compliance_alpha)] {
            if !(a > 0.0 && a < 1.0) {
                return Err(config_err(format!("{name} must lie in (0, 1)")));
            }
        }
        if self.max_iters < 1 {
            return Err(config_err("max_iters must be >= 1"));
        }
        let sigma2_ok = || -> Result<()> {
            if self.sigma2_grid.is_empty() || self.sigma2_grid.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
                return Err(config_err("sigma2_grid must be nonempty with finite entries >= 0"));
            }
            Ok(())
        };
        match experiment {
            Experiment::Reassign | Experiment::Union => {
                sigma2_ok()?;
                if self.n < 4 || self.n % 2 == 1 {
                    return Err(config_err(format!("{experiment} needs an even n >= 4, got {}", self.n)));
                }
            }
            Experiment::Typical => {
                if self.beta_grid.is_empty() || self.beta_grid.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
                    return Err(config_err("beta_grid must be nonempty with positive entries"));
                }
                if !(self.q > 0.0) {
                    return Err(config_err("q must be positive"));
                }
                let nth = n_threshold(self.q);
                if !(self.n as f64 > nth) {
                    return Err(config_err(format!("typical needs n > {nth} for q = {}", self.q)));
                }
            }
            Experiment::Warmup => sigma2_ok()?,
            Experiment::Practice => {
                sigma2_ok()?;
                if self.n < 2 {
                    return Err(config_err("practice needs n >= 2"));
                }
                if self.inits.is_empty() {
                    return Err(config_err("inits must be nonempty"));
                }
                let dmin = *self.d_grid.iter().min().unwrap();
                if self.d_pca < 1 || self.d_pca > self.n.min(dmin) {
                    return Err(config_err(format!(
                        "d_pca must lie in 1..={}, got {}",
                        self.n.min(dmin),
                        self.d_pca
                    )));
                }
            }
            Experiment::Fsd => {
                if self.fsd_cases.is_empty() {
                    return Err(config_err("fsd_cases must be nonempty"));
                }
                for c in &self.fsd_cases {
                    if c.s_c < 2 || c.s_t < 1 || !(c.sigma > 0.0) || !(c.tau > 0.0) {
                        return Err(config_err(format!("invalid fsd case {c:?}")));
                    }
                }
                if self.fsd_grid_points < 1 {
                    return Err(config_err("fsd_grid_points must be >= 1"));
                }
            }
            Experiment::Census => {
                sigma2_ok()?;
                if self.n > MAX_CENSUS_N {
                    return Err(config_err(format!(
                        "census enumerates 2^n labelings; n = {} exceeds the cap of {MAX_CENSUS_N}",
                        self.n
                    )));
                }
                if self.n < 4 {
                    return Err(config_err("census needs n >= 4"));
                }
            }
        }
        Ok(())
    }
}

fn parse_override(raw: &str) -> Value {
    if let Ok(v) = serde_json::from_str::<Value>(raw) {
        return v;
    }
    if raw.contains(',') {
        return Value::Array(raw.split(',').map(|p| parse_override(p.trim())).collect());
    }
    Value::String(raw.to_string())
}
