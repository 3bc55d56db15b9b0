use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gaussian::{GaussianState, QuadratureCoefficient};

/// What is read out at the end of a circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "terms", rename_all = "snake_case")]
pub enum MeasurementSpec {
    /// Linear combination of homodyne photocurrents `Σ w_i X_{m_i}(θ_i)`.
    /// Covers single homodyne, joint `Y1 + λY2` and post-detection current
    /// mixing.
    Quadrature(Vec<QuadratureCoefficient>),
    /// Linear combination of direct-detection photon counts `Σ w_i n_{m_i}`.
    PhotonNumber(Vec<(usize, f64)>),
}

impl MeasurementSpec {
    pub fn homodyne(mode: usize, angle: f64) -> Self {
        Self::Quadrature(vec![QuadratureCoefficient::new(mode, angle, 1.0)])
    }

    /// `n_a - n_b`, the balanced difference current of two detectors.
    pub fn intensity_difference(a: usize, b: usize) -> Self {
        Self::PhotonNumber(vec![(a, 1.0), (b, -1.0)])
    }

    /// Mean and variance of the measured quantity.
    pub fn moments(&self, state: &GaussianState) -> Result<(f64, f64)> {
        match self {
            Self::Quadrature(coeffs) => state.homodyne_moments(coeffs),
            Self::PhotonNumber(weights) => state.photon_number_moments(weights),
        }
    }

    pub fn validate(&self, n_modes: usize) -> Result<()> {
        let modes: Vec<usize> = match self {
            Self::Quadrature(c) => c.iter().map(|q| q.mode).collect(),
            Self::PhotonNumber(w) => w.iter().map(|&(m, _)| m).collect(),
        };
        if modes.is_empty() {
            return invalid("measurement has no terms");
        }
        if let Some(m) = modes.iter().find(|&&m| m >= n_modes) {
            return invalid(format!("measurement mode {m} out of range for {n_modes} modes"));
        }
        Ok(())
    }
}
