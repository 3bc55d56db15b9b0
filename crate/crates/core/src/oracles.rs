//! Closed-form intensities, noises and SNRs for every measurement scheme.
//!
//! Nothing in this module runs a circuit.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gaussian::amplitude_gain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    MziClassical,
    MziSqueezed,
    SuiPort1,
    SuiPort2,
    SuiJoint,
    SuiOptimum,
    PaBs,
    Truncated,
    DualBeamPort,
    DualBeamJoint,
    DualBeamAmplitude,
}

impl Scheme {
    pub const ALL: [Scheme; 11] = [
        Self::MziClassical,
        Self::MziSqueezed,
        Self::SuiPort1,
        Self::SuiPort2,
        Self::SuiJoint,
        Self::SuiOptimum,
        Self::PaBs,
        Self::Truncated,
        Self::DualBeamPort,
        Self::DualBeamJoint,
        Self::DualBeamAmplitude,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::MziClassical => "mzi_classical",
            Self::MziSqueezed => "mzi_squeezed",
            Self::SuiPort1 => "sui_port1",
            Self::SuiPort2 => "sui_port2",
            Self::SuiJoint => "sui_joint",
            Self::SuiOptimum => "sui_optimum",
            Self::PaBs => "pa_bs",
            Self::Truncated => "truncated",
            Self::DualBeamPort => "dual_beam_port",
            Self::DualBeamJoint => "dual_beam_joint",
            Self::DualBeamAmplitude => "dual_beam_amplitude",
        }
    }

    pub fn is_dual_beam(self) -> bool {
        matches!(self, Self::DualBeamPort | Self::DualBeamJoint | Self::DualBeamAmplitude)
    }
}

/// Union of the parameters used by any scheme. Fields a scheme does not use
/// are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeParams {
    /// Gain of the first (or only) amplifier.
    pub g1: f64,
    /// Gain of the second amplifier.
    pub g2: f64,
    /// Seed amplitude `|α|`, taken real.
    pub alpha: f64,
    /// Splitter transmissivities of the Mach-Zehnder.
    pub t1: f64,
    pub t2: f64,
    /// Squeezing parameter of the squeezed-vacuum Mach-Zehnder.
    pub r: f64,
    /// Splitter transmissivity of the PA+BS scheme; `None` selects the
    /// SNR-optimal value.
    pub transmissivity: Option<f64>,
    /// Electronic mixing weight of the truncated scheme (`Ŷ_probe + wŶ_signal`)
    /// or joint weight `λ` of the joint measurements.
    pub weight: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl Default for SchemeParams {
    fn default() -> Self {
        Self {
            g1: 0.75,
            g2: 0.75,
            alpha: 10.0,
            t1: 0.999,
            t2: 0.5,
            r: 2f64.ln(),
            transmissivity: None,
            weight: 1.0,
            delta: 1e-3,
            epsilon: 0.0,
        }
    }
}

impl SchemeParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.g1, self.g2, self.alpha, self.t1, self.t2, self.r, self.weight, self.delta, self.epsilon];
        if finite.iter().any(|v| !v.is_finite()) {
            return invalid("all scheme parameters must be finite");
        }
        for (name, v) in [("g1", self.g1), ("g2", self.g2), ("alpha", self.alpha), ("r", self.r)] {
            if v < 0.0 {
                return invalid(format!("{name} must be >= 0, got {v}"));
            }
        }
        for (name, v) in [("t1", self.t1), ("t2", self.t2), ("transmissivity", self.transmissivity.unwrap_or(0.5))] {
            if !(0.0..=1.0).contains(&v) {
                return invalid(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        Ok(())
    }

    pub fn big_g1(&self) -> f64 {
        amplitude_gain(self.g1)
    }

    pub fn big_g2(&self) -> f64 {
        amplitude_gain(self.g2)
    }

    pub fn pa_bs_transmissivity(&self) -> f64 {
        self.transmissivity.unwrap_or_else(|| {
            let (big, g) = (self.big_g1(), self.g1);
            (big * big + g * g).powi(2) / (8.0 * big * big * g * g + 1.0)
        })
    }
}

/// Phase-sensing photon number: the photons in the field(s) that pick up the
/// phase signal.
pub fn i_ps(scheme: Scheme, p: &SchemeParams) -> f64 {
    let n = p.alpha * p.alpha;
    match scheme {
        Scheme::MziClassical | Scheme::MziSqueezed => (1.0 - p.t1) * n,
        s if s.is_dual_beam() => (p.big_g1().powi(2) + p.g1 * p.g1) * n,
        _ => p.g1 * p.g1 * n,
    }
}

/// An oracle value and whether the closed form is exact for the engine's
/// model or only a limit (strong seed or infinite gain).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    pub exact: bool,
}

impl OracleValue {
    fn exact(value: f64) -> Result<Self> {
        Ok(Self { value, exact: true })
    }

    fn limit(value: f64) -> Result<Self> {
        Ok(Self { value, exact: false })
    }
}

/// Output photon numbers `(I1, I2)` as a function of the fringe phase.
///
/// For the SU(1,1) interferometer only the seeded (stimulated) term is
/// returned. For PA+BS the prefactor is written out as `|α|²(g² + R)`.
pub fn oracle_intensity(scheme: Scheme, p: &SchemeParams, phase: f64) -> Result<(OracleValue, OracleValue)> {
    p.validate()?;
    let n = p.alpha * p.alpha;
    let c = phase.cos();
    match scheme {
        Scheme::MziClassical => {
            let (t1, t2) = (p.t1, p.t2);
            let (r1, r2) = (1.0 - t1, 1.0 - t2);
            let x = 2.0 * (t1 * t2 * r1 * r2).sqrt() * c;
            Ok((OracleValue::exact(n * (t1 * t2 + r1 * r2 - x))?, OracleValue::exact(n * (t1 * r2 + r1 * t2 + x))?))
        }
        Scheme::SuiPort1 | Scheme::SuiPort2 => {
            let (a, b, g1, g2) = (p.big_g1(), p.big_g2(), p.g1, p.g2);
            let x = 2.0 * a * b * g1 * g2 * c;
            Ok((
                OracleValue::limit(n * (a * a * b * b + g1 * g1 * g2 * g2 + x))?,
                OracleValue::limit(n * (a * a * g2 * g2 + b * b * g1 * g1 + x))?,
            ))
        }
        Scheme::PaBs => {
            let t = p.pa_bs_transmissivity();
            let r = 1.0 - t;
            let (a, g) = (p.big_g1(), p.g1);
            let s = 2.0 * a * g * (t * r).sqrt();
            let i2_scale = g * g + r;
            let visibility = if i2_scale > 0.0 { s / i2_scale } else { 0.0 };
            let i1 = n * (t * a * a + r * g * g + s * c);
            let i2 = n * i2_scale * (1.0 - visibility * c);
            Ok((OracleValue::limit(i1)?, OracleValue::limit(i2)?))
        }
        _ => invalid(format!("no intensity formula for scheme {}", scheme.name())),
    }
}

/// PA+BS fringe visibility at port 2.
pub fn pa_bs_visibility(g1: f64, transmissivity: f64) -> f64 {
    let r = 1.0 - transmissivity;
    let a = amplitude_gain(g1);
    let denom = g1 * g1 + r;
    if denom == 0.0 {
        return 0.0;
    }
    2.0 * a * g1 * (transmissivity * r).sqrt() / denom
}

/// SU(1,1) output quadrature variance at fringe phase `phase`.
pub fn sui_noise(g1: f64, g2: f64, phase: f64) -> f64 {
    let (a, b) = (amplitude_gain(g1), amplitude_gain(g2));
    (a * a + g1 * g1) * (b * b + g2 * g2) + 4.0 * a * b * g1 * g2 * phase.cos()
}

/// SU(1,1) dark-fringe variance written as `1 + 2(G1 g2 − G2 g1)²`.
pub fn sui_dark_noise(g1: f64, g2: f64) -> f64 {
    let (a, b) = (amplitude_gain(g1), amplitude_gain(g2));
    1.0 + 2.0 * (a * g2 - b * g1).powi(2)
}

/// Noise of the measured quantity.
///
/// Mach-Zehnder schemes return the intensity-difference variance; SU(1,1)
/// schemes the single-port quadrature variance at `phase`.
pub fn oracle_noise(scheme: Scheme, p: &SchemeParams, phase: f64) -> Result<OracleValue> {
    p.validate()?;
    let n = p.alpha * p.alpha;
    match scheme {
        Scheme::MziClassical => OracleValue::exact(n),
        Scheme::MziSqueezed => OracleValue::limit(n * (-2.0 * p.r).exp()),
        Scheme::SuiPort1 | Scheme::SuiPort2 | Scheme::SuiOptimum | Scheme::DualBeamPort | Scheme::DualBeamAmplitude => {
            OracleValue::exact(sui_noise(p.g1, p.g2, phase))
        }
        _ => invalid(format!("no noise formula for scheme {}", scheme.name())),
    }
}

/// Shot-noise-limited SNR `4 I_ps δ²`.
pub fn snl(i_ps: f64, delta: f64) -> f64 {
    4.0 * i_ps * delta * delta
}

/// Mach-Zehnder SNR `16 T1 T2 R2 I_ps δ²` at arbitrary splitter settings.
pub fn mzi_snr(t1: f64, t2: f64, i_ps: f64, delta: f64) -> f64 {
    16.0 * t1 * t2 * (1.0 - t2) * i_ps * delta * delta
}

/// Closed-form SNR of `scheme` at the dark fringe (or quadrature point for
/// the Mach-Zehnder).
pub fn oracle_snr(scheme: Scheme, p: &SchemeParams) -> Result<OracleValue> {
    p.validate()?;
    let ips = i_ps(scheme, p);
    let d2 = p.delta * p.delta;
    let (a1, g1, a2, g2) = (p.big_g1(), p.g1, p.big_g2(), p.g2);
    let dark = (a1 * a1 + g1 * g1) * (a2 * a2 + g2 * g2) - 4.0 * a1 * a2 * g1 * g2;
    match scheme {
        Scheme::MziClassical => OracleValue::exact(mzi_snr(p.t1, p.t2, ips, p.delta)),
        Scheme::MziSqueezed => {
            let gain = amplitude_gain(p.r.sinh()) + p.r.sinh();
            OracleValue::limit(4.0 * ips * d2 * gain * gain)
        }
        Scheme::SuiPort1 => OracleValue::exact(4.0 * g2 * g2 * ips * d2 / dark),
        Scheme::SuiPort2 => OracleValue::exact(4.0 * a2 * a2 * ips * d2 / dark),
        Scheme::SuiJoint => OracleValue::exact(2.0 * (a1 + g1).powi(2) * ips * d2),
        Scheme::SuiOptimum => OracleValue::limit(2.0 * (a1 + g1).powi(2) * ips * d2),
        Scheme::PaBs => {
            let optimal = p.transmissivity.is_none();
            let v = 4.0 * d2 * ips * (a1 * a1 + g1 * g1);
            if optimal {
                OracleValue::exact(v)
            } else {
                OracleValue::limit(v)
            }
        }
        Scheme::Truncated => OracleValue::exact(2.0 * (a1 + g1).powi(2) * ips * d2),
        Scheme::DualBeamPort => {
            let s = a1 * a1 + g1 * g1;
            OracleValue::exact(4.0 * (a1 * a2 + g1 * g2).powi(2) * ips * d2 / (s * dark))
        }
        Scheme::DualBeamJoint => OracleValue::exact(4.0 * (a1 + g1).powi(2) * ips * d2),
        Scheme::DualBeamAmplitude => {
            let e2 = p.epsilon * p.epsilon;
            OracleValue::limit(2.0 * ips * e2 / (a1 * a1 + g1 * g1))
        }
    }
}

/// Loss oracle.
///
/// `MziSqueezed` returns the intensity-difference noise
/// `|α|²[(1−L)e^{−2r} + L]`; the SU(1,1) port schemes return the SNR after
/// an output loss `L`, with signal power scaled by `1 − L` and noise
/// `(1−L)V + L`.
pub fn oracle_loss(scheme: Scheme, p: &SchemeParams, loss: f64) -> Result<OracleValue> {
    p.validate()?;
    if !(0.0..1.0).contains(&loss) {
        return invalid(format!("loss must lie in [0, 1), got {loss}"));
    }
    match scheme {
        Scheme::MziSqueezed => {
            let sq = (-2.0 * p.r).exp();
            OracleValue::limit(p.alpha * p.alpha * ((1.0 - loss) * sq + loss))
        }
        Scheme::SuiPort1 | Scheme::SuiPort2 => {
            let lossless = oracle_snr(scheme, p)?.value;
            let v = sui_noise(p.g1, p.g2, std::f64::consts::PI);
            OracleValue::exact(lossless * v * (1.0 - loss) / ((1.0 - loss) * v + loss))
        }
        _ => invalid(format!("no loss formula for scheme {}", scheme.name())),
    }
}

/// SNR degradation factor of a squeezed-state interferometer with squeezing
/// `e^{−2r}` under loss `L`.
pub fn squeezed_loss_degradation(r: f64, loss: f64) -> f64 {
    let sq = (-2.0 * r).exp();
    (1.0 - loss) * sq / ((1.0 - loss) * sq + loss)
}

/// Fringe phase of the Mach-Zehnder operating point.
pub const MZI_OPERATING_PHASE: f64 = FRAC_PI_2;
