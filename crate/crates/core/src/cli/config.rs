//! Experiment configuration files.
//!
//! A config is a flat list of typed `key = value` lines (TOML syntax, no
//! tables). Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::TrialConfig;
use crate::error::{Error, Result};
use crate::paths::Delta;
use crate::reconstruct::chain::ChainOptions;
use crate::reconstruct::params::{check_delta, parse_delta, ThresholdProfile};
use crate::walk::{IncrementDistribution, DEFAULT_TRUNCATION_BOUND};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    LazySimple,
    GeometricTail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchMode {
    Point,
    Whole,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub profile: String,

    pub family: FamilyName,
    pub epsilon: f64,
    pub decay_c: Option<f64>,
    /// Share of the non-unit mass placed at 0; defaults to the smallest
    /// value compatible with the tail condition.
    pub p_zero_frac: Option<f64>,
    pub truncation_bound: usize,

    pub n: usize,
    /// `"1/64"` or a decimal.
    pub delta: String,
    pub n0: usize,
    pub target_n: usize,
    pub mode: BatchMode,

    pub trials: u64,
    pub seed: u64,

    pub t_base: f64,
    pub b_base: f64,
    pub c_base: f64,
    pub horizon_cap: u64,
    pub chain_max_n: usize,
    pub outside_band: Option<usize>,
    pub f_max_jump: Option<i64>,

    pub out: Option<PathBuf>,
    /// `--check` fails a batch whose success rate is below this.
    pub min_success: f64,
    /// `--check` fails a batch whose 95% lower bound is not above this.
    pub chance_level: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let profile = ThresholdProfile::default();
        ExperimentConfig {
            profile: "desk".into(),
            family: FamilyName::LazySimple,
            epsilon: 0.02,
            decay_c: None,
            p_zero_frac: None,
            truncation_bound: DEFAULT_TRUNCATION_BOUND,
            n: 12,
            delta: "1/64".into(),
            n0: 8,
            target_n: 12,
            mode: BatchMode::Point,
            trials: 100,
            seed: 0,
            t_base: profile.t_base,
            b_base: profile.b_base,
            c_base: profile.c_base,
            horizon_cap: profile.horizon_cap,
            chain_max_n: ChainOptions::default().max_n,
            outside_band: None,
            f_max_jump: None,
            out: None,
            min_success: 0.6,
            chance_level: 0.2,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    pub fn delta(&self) -> Result<Delta> {
        parse_delta(&self.delta)
    }

    pub fn walk(&self) -> Result<IncrementDistribution> {
        match self.family {
            FamilyName::LazySimple => {
                if self.decay_c.is_some() || self.p_zero_frac.is_some() {
                    return Err(Error::Config(
                        "decay_c and p_zero_frac apply to geometric_tail only".into(),
                    ));
                }
                IncrementDistribution::lazy_simple(self.epsilon)
            }
            FamilyName::GeometricTail => {
                let c = self
                    .decay_c
                    .ok_or_else(|| Error::Config("geometric_tail needs decay_c".into()))?;
                let p0 = self.p_zero_frac.unwrap_or_else(|| {
                    IncrementDistribution::min_feasible_p_zero_frac(c, self.truncation_bound)
                });
                IncrementDistribution::geometric_tail(self.epsilon, c, p0, self.truncation_bound)
            }
        }
    }

    pub fn threshold_profile(&self) -> ThresholdProfile {
        ThresholdProfile {
            t_base: self.t_base,
            b_base: self.b_base,
            c_base: self.c_base,
            horizon_cap: self.horizon_cap,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_delta(self.delta()?)?;
        self.walk()?;
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.n0 == 0 || self.target_n < self.n0 {
            return Err(Error::Config(format!(
                "need 0 < n0 <= target_n, got n0 = {}, target_n = {}",
                self.n0, self.target_n
            )));
        }
        for (name, v) in [("t_base", self.t_base), ("b_base", self.b_base), ("c_base", self.c_base)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.horizon_cap == 0 {
            return Err(Error::Config("horizon_cap must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.min_success) || !(0.0..=1.0).contains(&self.chance_level) {
            return Err(Error::Config("min_success and chance_level must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn trial_config(&self) -> Result<TrialConfig> {
        self.validate()?;
        let mut cfg = TrialConfig::new(self.walk()?, self.n, self.delta()?, self.threshold_profile());
        cfg.chain = ChainOptions {
            max_n: self.chain_max_n,
            outside_band: self.outside_band,
        };
        cfg.f_max_jump = self.f_max_jump;
        Ok(cfg)
    }

    /// SHA-256 of everything that affects a trial's outcome, in hex.
    ///
    /// The trial count, master seed, output path and `--check` thresholds are
    /// left out, so records from different batches of the same experiment
    /// share a digest.
    pub fn params_digest(&self) -> String {
        let key = ExperimentConfig {
            trials: 0,
            seed: 0,
            out: None,
            min_success: 0.0,
            chance_level: 0.0,
            ..self.clone()
        };
        let canonical = serde_json::to_string(&key).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}
