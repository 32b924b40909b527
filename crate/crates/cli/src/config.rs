//! Run configuration: `key = value` lines grouped in one section per command.
//!
//! ```text
//! seed = 42
//!
//! [cluster]
//! k = 3
//! a0 = 2.0
//!
//! [verify-integrals]
//! gamma = [3, 4, 5, 6]
//! ```
//!
//! Unknown sections and keys are rejected. Every field has a default, and the
//! resolved values are echoed in each report.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub profile: ProfileConfig,
    #[serde(rename = "verify-asymptotics")]
    pub asymptotics: AsymptoticsConfig,
    #[serde(rename = "verify-integrals")]
    pub integrals: IntegralsConfig,
    #[serde(rename = "verify-truncation")]
    pub truncation: TruncationConfig,
    pub cluster: ClusterConfig,
    pub heights: HeightsConfig,
    #[serde(rename = "ansatz-energy")]
    pub ansatz: AnsatzConfig,
    pub residuals: ResidualsConfig,
    #[serde(rename = "ps-check")]
    pub ps: PsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            profile: ProfileConfig::default(),
            asymptotics: AsymptoticsConfig::default(),
            integrals: IntegralsConfig::default(),
            truncation: TruncationConfig::default(),
            cluster: ClusterConfig::default(),
            heights: HeightsConfig::default(),
            ansatz: AnsatzConfig::default(),
            residuals: ResidualsConfig::default(),
            ps: PsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    pub gamma: f64,
    /// Range exponent: the profile is stored on `[0, μ^{δ−1}]`, capped at 1e6.
    pub delta: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig { gamma: 3.0, delta: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsymptoticsConfig {
    pub gamma: Vec<f64>,
    pub delta: f64,
}

impl Default for AsymptoticsConfig {
    fn default() -> Self {
        AsymptoticsConfig { gamma: vec![3.0, 4.0, 5.0, 6.0], delta: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegralsConfig {
    /// Sweep for the 8π identity and the error trends.
    pub gamma: Vec<f64>,
    /// Ball exponent of the sweep; `γμ_γ < r/10` must hold at the smallest γ.
    pub delta0: f64,
    /// γ and δ₀ at which the ratio bands are asserted.
    pub band_gamma: f64,
    pub band_delta0: f64,
    /// Reference value of `∫f'(B̄)`; only changed to exercise the failure path.
    pub fprime_mass_reference: f64,
}

impl Default for IntegralsConfig {
    fn default() -> Self {
        IntegralsConfig {
            gamma: vec![3.0, 4.0, 5.0, 6.0],
            delta0: 0.3,
            band_gamma: 6.0,
            band_delta0: 0.4,
            fprime_mass_reference: 8.0 * PI,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationConfig {
    pub gamma: Vec<f64>,
    pub delta0: f64,
    pub delta1: f64,
    pub l: usize,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig { gamma: vec![4.0, 5.0, 6.0], delta0: 0.4, delta1: 0.1, l: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    pub k: usize,
    pub l: usize,
    pub a0: f64,
    pub restarts: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig { k: 2, l: 2, a0: 1.0, restarts: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeightsConfig {
    pub gamma_bar: Vec<f64>,
    pub k: usize,
    pub l: usize,
    pub a0: f64,
    pub delta0: f64,
    pub delta1: f64,
    /// Step of the finite-difference `∂E⁽ⁱ⁾/∂γᵢ`, taken at the last `gamma_bar`.
    pub fd_step: f64,
}

impl Default for HeightsConfig {
    fn default() -> Self {
        HeightsConfig {
            gamma_bar: vec![8.0, 12.0, 16.0],
            k: 2,
            l: 2,
            a0: 1.0,
            delta0: 0.4,
            delta1: 0.1,
            fd_step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnsatzConfig {
    /// Sweep for the total-energy trend.
    pub gamma_bar: Vec<f64>,
    /// γ̄ of the per-bubble, tail-law and pointwise checks.
    pub band_gamma_bar: f64,
    pub delta0: f64,
    /// δ₀ values of the per-bubble 4π check.
    pub band_delta0: Vec<f64>,
    pub delta1: f64,
    pub k: usize,
    pub l: usize,
    pub a0: f64,
    pub cutoff_radius: f64,
    /// Pointwise fit radius as a fraction of `r`.
    pub sample_fraction: f64,
    /// Shift of every `yᵢ` for the displaced pointwise check.
    pub displacement: f64,
    /// Points per side of the CSV sample grid over `[−1, 1]²`.
    pub grid_n: usize,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        AnsatzConfig {
            gamma_bar: vec![6.0, 8.0, 10.0],
            band_gamma_bar: 8.0,
            delta0: 0.4,
            band_delta0: vec![0.35, 0.45],
            delta1: 0.1,
            k: 2,
            l: 2,
            a0: 1.0,
            cutoff_radius: 0.5,
            sample_fraction: 0.5,
            displacement: 0.1,
            grid_n: 41,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResidualsConfig {
    pub gamma_bar: Vec<f64>,
    pub delta0: f64,
    pub delta1: f64,
    pub k: usize,
    pub l: usize,
    pub a0: f64,
    pub p: f64,
}

impl Default for ResidualsConfig {
    fn default() -> Self {
        ResidualsConfig { gamma_bar: vec![6.0, 8.0, 10.0], delta0: 0.4, delta1: 0.1, k: 2, l: 2, a0: 1.0, p: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsConfig {
    pub gamma: Vec<f64>,
    pub delta0: f64,
    pub p: f64,
}

impl Default for PsConfig {
    fn default() -> Self {
        PsConfig { gamma: vec![4.0, 5.0, 6.0], delta0: 0.4, p: 2.0 }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}
