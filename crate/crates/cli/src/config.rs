use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use orbitlab_core::{OperatorSpec, SeqVec, ZeroPattern};

use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Construct,
    Certify,
    Criterion,
    Probe,
    Findim,
    Spectrum,
    Kernel,
    Jordan,
    Preset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "example-2.2")]
    DirectSumIdentity,
    #[serde(rename = "example-2.4-monomial")]
    MonomialToeplitz,
    #[serde(rename = "example-3.4")]
    EvenZeros,
    #[serde(rename = "example-3.6")]
    PrefixConstruction,
    #[serde(rename = "example-3.8")]
    PrefixDirectSum,
    #[serde(rename = "spectrum-2B-plus-3I")]
    SpectrumSplit,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::DirectSumIdentity,
        Preset::MonomialToeplitz,
        Preset::EvenZeros,
        Preset::PrefixConstruction,
        Preset::PrefixDirectSum,
        Preset::SpectrumSplit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::DirectSumIdentity => "example-2.2",
            Preset::MonomialToeplitz => "example-2.4-monomial",
            Preset::EvenZeros => "example-3.4",
            Preset::PrefixConstruction => "example-3.6",
            Preset::PrefixDirectSum => "example-3.8",
            Preset::SpectrumSplit => "spectrum-2B-plus-3I",
        }
    }
}

/// One experiment, read from a single JSON file.
///
/// Only `command` is required; everything else has a default or is derived
/// from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub operator: Option<OperatorSpec>,
    #[serde(default = "default_lambda")]
    pub lambda: Complex64,
    #[serde(default)]
    pub pattern: Option<ZeroPattern>,
    /// Number of dense-family targets (or criterion samples).
    #[serde(default = "default_targets")]
    pub targets: usize,
    #[serde(default = "default_truncation_dim")]
    pub truncation_dim: usize,
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub preset: Option<Preset>,
    #[serde(default = "default_support_bound")]
    pub support_bound: usize,
    #[serde(default)]
    pub resolution_level: u32,
    /// Orbit start `x` (or the vector to certify).
    #[serde(default)]
    pub vector: Option<SeqVec>,
    /// Adjoint-side vector `y` for kernel pairings.
    #[serde(default)]
    pub functional: Option<SeqVec>,
    /// Jordan chain order `p`.
    #[serde(default = "default_order")]
    pub order: usize,
    /// Criterion times are `n_k = timeStep * k`.
    #[serde(default = "default_time_step")]
    pub time_step: usize,
    /// Power `b` of the shift in the monomial composition example.
    #[serde(default = "default_shift_power")]
    pub shift_power: usize,
    /// Size of randomly generated matrices.
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub net_level: u32,
    #[serde(default = "default_annulus_width")]
    pub annulus_width: f64,
    #[serde(default)]
    pub u: Option<SeqVec>,
    #[serde(default)]
    pub v: Option<SeqVec>,
    #[serde(default = "default_radius")]
    pub u_radius: f64,
    #[serde(default = "default_radius")]
    pub v_radius: f64,
}

fn default_lambda() -> Complex64 {
    Complex64::new(2.0, 0.0)
}
fn default_targets() -> usize {
    20
}
fn default_truncation_dim() -> usize {
    64
}
fn default_support_bound() -> usize {
    6
}
fn default_order() -> usize {
    1
}
fn default_time_step() -> usize {
    2
}
fn default_shift_power() -> usize {
    2
}
fn default_dim() -> usize {
    4
}
fn default_epsilon() -> f64 {
    0.1
}
fn default_annulus_width() -> f64 {
    0.1
}
fn default_radius() -> f64 {
    0.5
}

impl ExperimentConfig {
    /// A config with every field at its default.
    pub fn new(command: Command) -> Self {
        serde_json::from_value(serde_json::json!({ "command": command }))
            .expect("defaults always deserialize")
    }

    pub fn preset(preset: Preset) -> Self {
        ExperimentConfig {
            preset: Some(preset),
            ..ExperimentConfig::new(Command::Preset)
        }
    }

    pub fn from_json(text: &str) -> Result<Self, RunError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn horizon_or(&self, default: usize) -> usize {
        self.horizon.unwrap_or(default)
    }

    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |msg: String| Err(RunError::Config(msg));
        if !(self.lambda.re.is_finite() && self.lambda.im.is_finite()) {
            return bad("lambda must be finite".into());
        }
        let needs_expanding = match self.command {
            Command::Construct | Command::Certify => true,
            Command::Criterion => self.operator.is_none(),
            _ => false,
        };
        if needs_expanding && self.lambda.norm() <= 1.0 {
            return bad(format!(
                "{:?} needs |lambda| > 1, got {}",
                self.command,
                self.lambda.norm()
            ));
        }
        if self.command == Command::Preset && self.preset.is_none() {
            return bad("command preset needs a preset name".into());
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return bad("tol must be positive".into());
            }
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive".into());
        }
        if self.order == 0 {
            return bad("order must be at least 1".into());
        }
        if self.time_step == 0 || self.shift_power == 0 {
            return bad("timeStep and shiftPower must be at least 1".into());
        }
        if self.dim == 0 || self.truncation_dim == 0 {
            return bad("dim and truncationDim must be at least 1".into());
        }
        if let Some(p) = &self.pattern {
            p.validate()?;
        }
        if let Some(op) = &self.operator {
            op.validate()?;
        }
        Ok(())
    }
}
