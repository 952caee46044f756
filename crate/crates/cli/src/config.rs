use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EquationName {
    Schrodinger,
    KleinGordon,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelsConfig {
    /// Fit window in `|x|`.
    pub fit_min: f64,
    pub fit_max: f64,
    pub b_cap: f64,
    pub c_cap: f64,
    /// Allowed increase of an exponent under grid refinement.
    pub drift_tol: f64,
    pub refine: bool,
}

impl Default for KernelsConfig {
    fn default() -> Self {
        Self { fit_min: 5.0, fit_max: 30.0, b_cap: 1.2, c_cap: 2.2, drift_tol: 0.05, refine: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveopConfig {
    pub probes: usize,
    pub n_series: usize,
    pub band: f64,
    pub identity_tol: f64,
    pub unitarity_tol: f64,
    pub probe_variation: f64,
}

impl Default for WaveopConfig {
    fn default() -> Self {
        Self { probes: 50, n_series: 60, band: 10.0, identity_tol: 1e-8, unitarity_tol: 3e-3, probe_variation: 0.15 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayConfig {
    pub q: f64,
    pub equation: EquationName,
    pub t_min: f64,
    pub t_max: f64,
    pub times: usize,
    /// Width of the Gaussian initial datum.
    pub width: f64,
    /// Admissible deviation of the fitted exponent from `1/q - 1/2`; defaults per equation.
    pub alpha_band: Option<f64>,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self { q: 4.0, equation: EquationName::Schrodinger, t_min: 1.0, t_max: 100.0, times: 16, width: 1.0, alpha_band: None }
    }
}

impl DecayConfig {
    pub fn band(&self) -> f64 {
        self.alpha_band.unwrap_or(match self.equation {
            EquationName::Schrodinger if self.q == 2.0 => 0.02,
            EquationName::Schrodinger => 0.1,
            EquationName::KleinGordon => 0.15,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LiouvilleConfig {
    pub preset: Option<String>,
    /// Three-column CSV `x, a, b`.
    pub coefficients: Option<PathBuf>,
    pub residual_tol: f64,
    pub c0: f64,
    pub decay: bool,
}

impl Default for LiouvilleConfig {
    fn default() -> Self {
        Self { preset: None, coefficients: None, residual_tol: 1e-4, c0: 1e-6, decay: false }
    }
}

/// Every setting of a run; flags override the TOML file, which overrides the defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `zero`, `poschl-teller`, `well` or a two-column CSV path.
    pub potential: String,
    pub depth: f64,
    pub half_width: f64,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
    pub lambda_max: f64,
    pub lambda_points: usize,
    /// Overrides the low/high energy split `λ0 = ||V||_1`.
    pub cutoff: Option<f64>,
    pub tol: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub jobs: Option<usize>,
    pub kernels: KernelsConfig,
    pub waveop: WaveopConfig,
    pub decay: DecayConfig,
    pub liouville: LiouvilleConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            potential: "poschl-teller".into(),
            depth: 1.0,
            half_width: 1.0,
            grid_min: -40.0,
            grid_max: 40.0,
            grid_points: 4096,
            lambda_max: 8.0,
            lambda_points: 1025,
            cutoff: None,
            tol: 1e-10,
            seed: 0,
            out: PathBuf::from("out"),
            jobs: None,
            kernels: KernelsConfig::default(),
            waveop: WaveopConfig::default(),
            decay: DecayConfig::default(),
            liouville: LiouvilleConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }

    /// The settings that can change results: output location and thread count cleared.
    pub fn normalized(&self) -> Self {
        Self { out: PathBuf::new(), jobs: None, ..self.clone() }
    }

    /// SHA-256 of the canonical JSON form of [`Self::normalized`].
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(&self.normalized()).expect("config serializes");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }
}
