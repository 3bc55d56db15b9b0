use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use su11_core::jsf::{binomial_lengths, MismatchModel, StageSpec};
use su11_core::metrology::LossSite;
use su11_core::oracles::{Scheme, SchemeParams};
use su11_core::MeasurementSpec;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scheme: Option<Scheme>,
    #[serde(default)]
    pub params: SchemeParams,
    pub loss: Option<LossConfig>,
    /// Replaces the scheme's default readout. Disables the oracle column.
    pub measurement: Option<MeasurementSpec>,
    pub sweep: Option<SweepConfig>,
    pub fringe: Option<FringeConfig>,
    pub jsf: Option<JsfConfig>,
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    pub value: f64,
    pub site: LossSite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    G1,
    G2,
    Alpha,
    T1,
    T2,
    R,
    Transmissivity,
    Weight,
    Delta,
    Epsilon,
    Loss,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            Self::G1 => "g1",
            Self::G2 => "g2",
            Self::Alpha => "alpha",
            Self::T1 => "t1",
            Self::T2 => "t2",
            Self::R => "r",
            Self::Transmissivity => "transmissivity",
            Self::Weight => "weight",
            Self::Delta => "delta",
            Self::Epsilon => "epsilon",
            Self::Loss => "loss",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    /// Uniform random draws from the seeded generator.
    Random,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    #[serde(default)]
    pub spacing: Spacing,
    /// Site used when sweeping `loss` without a `loss` block.
    pub site: Option<LossSite>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FringeConfig {
    pub points: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinomialDesign {
    pub stages: usize,
    pub g1: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterBox {
    pub omega_s: (f64, f64),
    pub omega_i: (f64, f64),
}

fn default_mismatch() -> MismatchModel {
    MismatchModel::Broadband
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsfConfig {
    pub gains: Option<Vec<f64>>,
    pub binomial: Option<BinomialDesign>,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub l_dm: f64,
    pub sigma_p: f64,
    pub points: usize,
    pub half_width: f64,
    #[serde(default = "default_mismatch")]
    pub mismatch: MismatchModel,
    pub filter: Option<FilterBox>,
}

impl JsfConfig {
    pub fn stage_spec(&self) -> Result<StageSpec, CliError> {
        let gains = match (&self.gains, self.binomial) {
            (Some(g), None) => g.clone(),
            (None, Some(b)) => binomial_lengths(b.stages, b.g1)?,
            (None, None) => vec![1.0],
            (Some(_), Some(_)) => return Err(CliError::Invalid("jsf: give either gains or binomial, not both".into())),
        };
        let spec = StageSpec { gains, beta: self.beta, l_dm: self.l_dm, sigma_p: self.sigma_p };
        spec.validate()?;
        Ok(spec)
    }
}

fn check_fraction(name: &str, v: f64) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&v) {
        return Err(CliError::Invalid(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| CliError::Invalid(format!("{origin}:{}:{}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate()?;
        if let Some(l) = self.loss {
            check_fraction("loss", l.value)?;
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Invalid(format!("tolerance must be positive, got {t}")));
            }
        }
        if let Some(s) = self.sweep {
            if s.steps == 0 {
                return Err(CliError::Invalid("sweep needs at least one step".into()));
            }
            if !(s.from.is_finite() && s.to.is_finite()) || s.from == s.to {
                return Err(CliError::Invalid(format!("sweep range [{}, {}] is empty", s.from, s.to)));
            }
            if s.parameter == SweepParameter::Loss {
                check_fraction("loss sweep start", s.from)?;
                check_fraction("loss sweep end", s.to)?;
            }
        }
        if let Some(f) = self.fringe {
            if f.points < 2 {
                return Err(CliError::Invalid("fringe needs at least two points".into()));
            }
        }
        if let Some(j) = &self.jsf {
            j.stage_spec()?;
            if j.points < 2 || !(j.half_width > 0.0 && j.half_width.is_finite()) {
                return Err(CliError::Invalid("jsf grid needs points >= 2 and a positive half_width".into()));
            }
        }
        Ok(())
    }

    pub fn scheme(&self) -> Result<Scheme, CliError> {
        self.scheme.ok_or_else(|| CliError::Invalid("config has no scheme".into()))
    }

    pub fn loss(&self) -> LossConfig {
        self.loss.unwrap_or(LossConfig { value: 0.0, site: LossSite::External })
    }
}
