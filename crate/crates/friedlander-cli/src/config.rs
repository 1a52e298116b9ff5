//! Run configuration: defaults, TOML file, then command-line overrides.

use std::path::Path;

use friedlander::cutoff::CutoffSpec;
use friedlander::parametrix::NWindow;
use friedlander::spectral::ModelParams;
use friedlander::verify::Kernel;
use friedlander::Sign;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Worker threads; 0 means one per logical core.
    pub threads: usize,
    pub model: ModelConfig,
    pub airy_table: AiryTableConfig,
    pub poisson: PoissonConfig,
    pub green: GreenConfig,
    pub compare: CompareConfig,
    pub dispersion: DispersionConfig,
    pub envelope: EnvelopeConfig,
    pub caustic: CausticConfig,
    pub strichartz: StrichartzConfig,
    pub gallery: GalleryConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub h: f64,
    pub gamma: f64,
    pub a: f64,
    pub psi1: bool,
    pub psi2: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { h: 0.05, gamma: 0.25, a: 0.25, psi1: true, psi2: true }
    }
}

impl ModelConfig {
    pub fn params(&self) -> Result<ModelParams, CliError> {
        let p = ModelParams::new(self.h, self.gamma, self.a)?;
        Ok(p.with_cutoffs(CutoffSpec { psi1: self.psi1, psi2: self.psi2 }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AiryTableConfig {
    pub kmax: usize,
}

impl Default for AiryTableConfig {
    fn default() -> Self {
        Self { kmax: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoissonConfig {
    /// Index k of the Airy zero the bump is centred on.
    pub center: usize,
    pub width: f64,
    pub nmax: u32,
    pub kmax: usize,
    pub tol: f64,
}

impl Default for PoissonConfig {
    fn default() -> Self {
        Self { center: 2, width: 1.0, nmax: 32, kmax: 60, tol: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PathChoice {
    Spectral,
    Parametrix,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreenConfig {
    pub sign: Sign,
    pub path: PathChoice,
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub window: NWindow,
}

impl Default for GreenConfig {
    fn default() -> Self {
        Self {
            sign: Sign::Plus,
            path: PathChoice::Both,
            t: vec![0.0, 0.5],
            x: vec![0.25],
            y: vec![-0.5, 0.0],
            window: NWindow::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub sign: Sign,
    pub nt: usize,
    pub nx: usize,
    pub ny: usize,
    pub t_max: f64,
    pub window: NWindow,
    pub tol: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self { sign: Sign::Plus, nt: 10, nx: 10, ny: 10, t_max: 1.0, window: NWindow::default(), tol: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionConfig {
    pub kernel: Kernel,
    /// Scan range; unset ends default to h/γ and √γ.
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub per_decade: usize,
    /// Fit range; unset ends default to the scan range.
    pub fit_min: Option<f64>,
    pub fit_max: Option<f64>,
    pub expected_slope: f64,
    pub tol: f64,
    pub dx_over_h: f64,
    pub dy_over_h: f64,
    pub polish: bool,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self {
            kernel: Kernel::Plus,
            t_min: None,
            t_max: None,
            per_decade: 8,
            fit_min: None,
            fit_max: None,
            expected_slope: -0.5,
            tol: 0.07,
            dx_over_h: 1.0,
            dy_over_h: 0.5,
            polish: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvelopeConfig {
    /// Envelope id, e.g. "eq:2hh".
    pub prop: String,
    pub n: i64,
    pub nt: usize,
    pub nx: usize,
    /// Rescaled Y spacing; unset uses min(0.2, 0.5/λ).
    pub dy: Option<f64>,
    /// Also run at h/2 and on the halved grid.
    pub stability: bool,
    /// Per-N term dump (CSV) written here when set.
    pub dump: Option<String>,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self { prop: String::from("eq:2hh"), n: 1, nt: 9, nx: 9, dy: None, stability: false, dump: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CausticConfig {
    pub kernel: Kernel,
    pub n: Vec<i64>,
    /// Unset: 1.25 times the last caustic time.
    pub t_max: Option<f64>,
    pub nt: usize,
    pub dx_over_h: f64,
    pub dy_over_h: f64,
}

impl Default for CausticConfig {
    fn default() -> Self {
        Self { kernel: Kernel::Plus, n: vec![1, 2], t_max: None, nt: 61, dx_over_h: 1.0, dy_over_h: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrichartzConfig {
    pub kernel: Kernel,
    pub q: f64,
    pub t_min: f64,
    /// Unset: √γ.
    pub t_max: Option<f64>,
    pub nt: usize,
    pub dx_over_h: f64,
    pub dy_over_h: f64,
}

impl Default for StrichartzConfig {
    fn default() -> Self {
        Self { kernel: Kernel::Plus, q: 4.0, t_min: 0.0, t_max: None, nt: 33, dx_over_h: 1.0, dy_over_h: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GalleryConfig {
    /// Unset: the model h.
    pub h: Option<f64>,
    pub k_min: usize,
    pub k_max: usize,
    /// PASS threshold on max/min of the Strichartz ratio over k.
    pub max_spread: f64,
}

impl Default for GalleryConfig {
    fn default() -> Self {
        Self { h: None, k_min: 1, k_max: 20, max_spread: 3.0 }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            threads: 0,
            model: ModelConfig::default(),
            airy_table: AiryTableConfig::default(),
            poisson: PoissonConfig::default(),
            green: GreenConfig::default(),
            compare: CompareConfig::default(),
            dispersion: DispersionConfig::default(),
            envelope: EnvelopeConfig::default(),
            caustic: CausticConfig::default(),
            strichartz: StrichartzConfig::default(),
            gallery: GalleryConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }
}

/// Parses `fixed:N`, `lemma`, `lemma:C0:SLACK`, `adaptive` or `adaptive:TOL:CAP`.
pub fn parse_window(s: &str) -> Result<NWindow, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize| -> Result<f64, String> {
        parts.get(i).ok_or_else(|| format!("window `{s}`: missing field"))?.parse::<f64>().map_err(|e| format!("window `{s}`: {e}"))
    };
    match parts[0] {
        "fixed" => Ok(NWindow::Fixed(num(1)? as u32)),
        "lemma" if parts.len() == 1 => Ok(NWindow::Lemma { c0: 3.0, slack: 2 }),
        "lemma" => Ok(NWindow::Lemma { c0: num(1)?, slack: num(2)? as u32 }),
        "adaptive" if parts.len() == 1 => Ok(NWindow::default()),
        "adaptive" => Ok(NWindow::Adaptive { tail_tol: num(1)?, cap: num(2)? as u32 }),
        _ => Err(format!("unknown window `{s}`")),
    }
}
