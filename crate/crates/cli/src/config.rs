//! Scenario files (TOML).
//!
//! ```toml
//! headroom_factor = 1.15
//! strategies = ["unmatched", "ideal_rate", "artificial_noise"]
//!
//! [link]
//! xi_ch = 0.01
//! t_rec = 0.7
//! xi_rec = 0.01
//! # t_ch = 0.4      optional, see `OperatingPointSource`
//! # v_mod = 2.0
//!
//! [code]
//! preset = "met-ldpc-0.1"   # or: rate = 0.1, beta = 0.9395, label = "..."
//!
//! [sweep]
//! t_ch_min = 1.0
//! t_ch_max = 2.0
//! n_points = 21
//! spacing = "linear"        # or "log"
//! relative = true           # bounds are multiples of the nominal t_ch
//!
//! [[baseline_points]]
//! t_total = 0.3
//! snr = 0.2
//! beta_eff = 0.9345
//!
//! [sim]
//! n_symbols = 1000000
//! seed = 1
//! ```

use std::path::Path;

use cvqkd_core::rate_match::DEFAULT_HEADROOM;
use cvqkd_core::{BaselinePoint, CodeSpec, LinkParams, Strategy};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_headroom")]
    pub headroom_factor: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub strategies: Vec<String>,
    pub link: LinkConfig,
    #[serde(default)]
    pub code: CodeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub baseline_points: Vec<BaselinePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimBlock>,
}

fn default_headroom() -> f64 {
    DEFAULT_HEADROOM
}

/// Link parameters. Artificial noise is always computed, never configured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub xi_ch: f64,
    pub t_rec: f64,
    pub xi_rec: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_ch: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_mod: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub t_ch_min: f64,
    pub t_ch_max: f64,
    pub n_points: usize,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
    /// Bounds are multiples of the nominal channel transmittance.
    #[serde(default)]
    pub relative: bool,
}

fn default_spacing() -> Spacing {
    Spacing::Linear
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimBlock {
    pub n_symbols: u64,
    pub seed: u64,
}

/// How the nominal operating point is obtained from `[link]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatingPointSource {
    /// Neither `t_ch` nor `v_mod`: optimise `v_mod`.
    Optimize,
    /// Only `t_ch`: solve `v_mod` from the threshold SNR.
    Transmittance(f64),
    /// Only `v_mod`: solve `t_ch` from the threshold SNR.
    Modulation(f64),
    /// Both: use the link as given and pin it with artificial noise.
    Explicit { t_ch: f64, v_mod: f64 },
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serialises")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        self.code()?;
        let probe = LinkParams {
            v_mod: self.link.v_mod.unwrap_or(0.0),
            t_ch: self.link.t_ch.unwrap_or(1.0),
            xi_ch: self.link.xi_ch,
            t_rec: self.link.t_rec,
            xi_rec: self.link.xi_rec,
            xi_art: 0.0,
        };
        probe
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.headroom_factor >= 1.0 && self.headroom_factor.is_finite()) {
            return bad(format!(
                "headroom_factor must be >= 1, got {}",
                self.headroom_factor
            ));
        }
        if let Some(sweep) = &self.sweep {
            if !(sweep.t_ch_min > 0.0 && sweep.t_ch_min <= sweep.t_ch_max && sweep.t_ch_max.is_finite()) {
                return bad(format!(
                    "sweep bounds must satisfy 0 < t_ch_min <= t_ch_max, got [{}, {}]",
                    sweep.t_ch_min, sweep.t_ch_max
                ));
            }
            if sweep.n_points == 0 {
                return bad("sweep.n_points must be >= 1".into());
            }
        }
        if let Some(sim) = &self.sim {
            if sim.n_symbols == 0 {
                return bad("sim.n_symbols must be >= 1".into());
            }
        }
        for name in &self.strategies {
            parse_strategy_name(name)?;
        }
        if !self.baseline_points.is_empty() {
            Strategy::external_baseline(self.baseline_points.clone())
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn code(&self) -> Result<CodeSpec, CliError> {
        let c = &self.code;
        let code = match (&c.preset, c.rate, c.beta) {
            (Some(name), None, None) => CodeSpec::preset(name)
                .ok_or_else(|| CliError::Config(format!("unknown code preset {name:?}")))?,
            (None, Some(rate), Some(beta)) => {
                let label = c.label.clone().unwrap_or_else(|| "custom".into());
                CodeSpec { rate, beta, label }
            }
            (None, None, None) => CodeSpec::presets().remove(0),
            _ => {
                return Err(CliError::Config(
                    "[code] needs either `preset` or both `rate` and `beta`".into(),
                ))
            }
        };
        code.validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(code)
    }

    pub fn operating_point_source(&self) -> OperatingPointSource {
        match (self.link.t_ch, self.link.v_mod) {
            (None, None) => OperatingPointSource::Optimize,
            (Some(t), None) => OperatingPointSource::Transmittance(t),
            (None, Some(v)) => OperatingPointSource::Modulation(v),
            (Some(t_ch), Some(v_mod)) => OperatingPointSource::Explicit { t_ch, v_mod },
        }
    }

    /// Strategies to evaluate: `overrides` if non-empty, else the configured
    /// list, else the three internal strategies plus the baseline when
    /// points are configured.
    pub fn strategies(&self, overrides: &[String]) -> Result<Vec<Strategy>, CliError> {
        let names: Vec<String> = if !overrides.is_empty() {
            overrides.to_vec()
        } else if !self.strategies.is_empty() {
            self.strategies.clone()
        } else {
            let mut names: Vec<String> = ["unmatched", "ideal_rate", "artificial_noise"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            if !self.baseline_points.is_empty() {
                names.push("external_baseline".into());
            }
            names
        };
        names
            .iter()
            .map(|name| match parse_strategy_name(name)? {
                Some(s) => Ok(s),
                None => Strategy::external_baseline(self.baseline_points.clone()).map_err(|_| {
                    CliError::Config("external_baseline requires [[baseline_points]]".into())
                }),
            })
            .collect()
    }
}

/// `Ok(None)` stands for `external_baseline`, which needs data.
fn parse_strategy_name(name: &str) -> Result<Option<Strategy>, CliError> {
    if name == "external_baseline" {
        return Ok(None);
    }
    Strategy::from_name(name)
        .map(Some)
        .ok_or_else(|| CliError::Config(format!("unknown strategy {name:?}")))
}

impl SweepConfig {
    /// Channel transmittance grid; `nominal_t_ch` scales relative bounds.
    pub fn grid(&self, nominal_t_ch: f64) -> Vec<f64> {
        let scale = if self.relative { nominal_t_ch } else { 1.0 };
        let (lo, hi) = (self.t_ch_min * scale, self.t_ch_max * scale);
        let n = self.n_points;
        if n == 1 {
            return vec![lo];
        }
        let frac = |k: usize| k as f64 / (n - 1) as f64;
        let mut grid: Vec<f64> = match self.spacing {
            Spacing::Linear => (0..n).map(|k| lo + (hi - lo) * frac(k)).collect(),
            Spacing::Log => {
                let (a, b) = (lo.ln(), hi.ln());
                (0..n).map(|k| (a + (b - a) * frac(k)).exp()).collect()
            }
        };
        grid[0] = lo;
        grid[n - 1] = hi;
        grid
    }
}
