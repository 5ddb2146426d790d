//! Run configuration: a single JSON file, validated before any simulation.

use serde::{Deserialize, Serialize};
use std::path::Path;

use bragg_core::kick::KickSpec;
use bragg_core::process::ProcessLaw;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub comb: CombSection,
    pub kick: KickSpec,
    pub law: ProcessLaw,
    /// snapshot horizons for `simulate`
    pub horizons: Vec<f64>,
    pub n_traj: usize,
    pub seed: u64,
    /// initial momentum (point mass after the half-integer nudge)
    pub k0: f64,
    /// quantum runs: λ values for the semi-classical comparison
    pub lambdas: Vec<f64>,
    /// quantum runs: evolution time
    pub t_quantum: f64,
    /// quantum runs: realizations per λ
    pub n_realizations: usize,
    /// histogram bin width for the diagonal comparison
    pub bin_width: f64,
    /// share realized kick sequences between the quantum and classical sides
    /// of the semi-classical comparison (variance reduction)
    pub coupled_noise: bool,
    pub outputs: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CombSection {
    pub alpha: f64,
}

impl Default for CombSection {
    fn default() -> Self {
        CombSection { alpha: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
    pub format: OutputFormat,
    /// also emit SVG line plots from the generated tables
    pub plots: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: "out".into(),
            format: OutputFormat::Csv,
            plots: false,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            comb: CombSection::default(),
            kick: KickSpec::default(),
            law: ProcessLaw::BandModel { vartheta: 0.5 },
            horizons: vec![1e3, 3e3, 1e4],
            n_traj: 1000,
            seed: 1,
            k0: 0.0,
            lambdas: vec![0.2, 0.1, 0.05],
            t_quantum: 5.0,
            n_realizations: 1000,
            bin_width: 0.05,
            coupled_noise: false,
            outputs: OutputSection::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text).map_err(|e| {
            format!(
                "{}:{}:{}: {e}",
                path.display(),
                e.line(),
                e.column()
            )
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.comb.alpha <= 0.0 {
            return Err(format!(
                "comb.alpha must be positive, got {}",
                self.comb.alpha
            ));
        }
        if self.n_traj == 0 {
            return Err("n_traj must be at least 1".into());
        }
        if self.horizons.is_empty() || self.horizons.iter().any(|&t| t <= 0.0) {
            return Err("horizons must be positive and non-empty".into());
        }
        if self.bin_width <= 0.0 {
            return Err("bin_width must be positive".into());
        }
        self.law.validate().map_err(|e| e.to_string())?;
        Ok(())
    }

    pub fn max_horizon(&self) -> f64 {
        self.horizons.iter().cloned().fold(0.0, f64::max)
    }
}
