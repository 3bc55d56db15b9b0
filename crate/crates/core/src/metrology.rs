//! Fringes, small-signal responses, SNRs and entanglement measures.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    preset_mzi, preset_mzi_squeezed, preset_pa_bs, preset_sui, preset_truncated, sui_joint_phase, sui_port1_phase,
    sui_port2_amplitude, sui_port2_phase, Circuit, Element, SuiParams, TruncatedParams, SIGNAL_PHASE_QUADRATURE,
    SMALL_SIGNAL_LIMIT,
};
use crate::error::{invalid, Error, Result};
use crate::gaussian::{amplitude_gain, GaussianState, QuadratureCoefficient};
use crate::measurement::MeasurementSpec;
use crate::oracles::{i_ps, Scheme, SchemeParams, MZI_OPERATING_PHASE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrReport {
    pub scheme: String,
    pub delta: f64,
    /// Squared mean response of the measured quantity.
    pub signal_power: f64,
    /// Variance of the measured quantity at the operating point.
    pub noise_power: f64,
    pub snr: f64,
    pub snr_db: f64,
    /// Phase-sensing photon number.
    pub i_ps: f64,
    /// `snr / (4 i_ps δ²)`, the SNR relative to the shot-noise limit.
    pub snl_ratio: f64,
}

impl SnrReport {
    pub fn new(scheme: impl Into<String>, delta: f64, signal_power: f64, noise_power: f64, i_ps: f64) -> Result<Self> {
        if !(noise_power > 0.0) {
            return Err(Error::Internal(format!("non-positive noise power {noise_power}")));
        }
        let snr = signal_power / noise_power;
        let snl = 4.0 * i_ps * delta * delta;
        Ok(Self {
            scheme: scheme.into(),
            delta,
            signal_power,
            noise_power,
            snr,
            snr_db: 10.0 * snr.log10(),
            i_ps,
            snl_ratio: if snl > 0.0 { snr / snl } else { f64::NAN },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringePoint {
    pub phase: f64,
    pub i1: f64,
    pub i2: f64,
    pub var1: f64,
    pub var2: f64,
}

/// Runs `builder(phase)` on the vacuum for every grid point and records the
/// mean photon numbers of modes 0 and 1 together with the homodyne variances
/// at angles `angles.0` (mode 0) and `angles.1` (mode 1).
pub fn fringe_scan<F>(builder: F, phase_grid: &[f64], angles: (f64, f64)) -> Result<Vec<FringePoint>>
where
    F: Fn(f64) -> Result<Circuit>,
{
    if phase_grid.is_empty() {
        return invalid("fringe scan needs a non-empty phase grid");
    }
    phase_grid
        .iter()
        .map(|&phase| {
            let out = builder(phase)?.run_vacuum()?;
            Ok(FringePoint {
                phase,
                i1: out.mean_photon(0)?,
                i2: out.mean_photon(1)?,
                var1: out.homodyne_moments(&[QuadratureCoefficient::new(0, angles.0, 1.0)])?.1,
                var2: out.homodyne_moments(&[QuadratureCoefficient::new(1, angles.1, 1.0)])?.1,
            })
        })
        .collect()
}

fn check_delta(delta: f64) -> Result<()> {
    if !(0.0..=SMALL_SIGNAL_LIMIT).contains(&delta) {
        return invalid(format!("small signal must lie in [0, {SMALL_SIGNAL_LIMIT}], got {delta}"));
    }
    Ok(())
}

fn measured_mean<F>(builder: &F, measurement: &MeasurementSpec, x: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<Circuit>,
{
    let c = builder(x)?;
    measurement.validate(c.n_modes())?;
    Ok(measurement.moments(&c.run_vacuum()?)?.0)
}

/// First-order mean response of `measurement` to a signal of size `delta`.
///
/// `builder(x)` must produce the circuit carrying signal `x`. The response is
/// estimated from symmetric differences at `±δ/2` and `±δ/4` combined by
/// Richardson extrapolation, which removes the cubic term.
pub fn small_signal_response<F>(builder: F, measurement: &MeasurementSpec, delta: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<Circuit>,
{
    check_delta(delta)?;
    if delta == 0.0 {
        return Ok(0.0);
    }
    let diff = |h: f64| -> Result<f64> {
        Ok(measured_mean(&builder, measurement, h / 2.0)? - measured_mean(&builder, measurement, -h / 2.0)?)
    };
    let coarse = diff(delta)?;
    let fine = diff(delta / 2.0)?;
    Ok((8.0 * fine - coarse) / 3.0)
}

/// Signal power over noise variance at the operating point (`x = 0`).
pub fn snr<F>(scheme: &str, builder: F, measurement: &MeasurementSpec, delta: f64, i_ps: f64) -> Result<SnrReport>
where
    F: Fn(f64) -> Result<Circuit>,
{
    let signal = small_signal_response(&builder, measurement, delta)?;
    let c = builder(0.0)?;
    measurement.validate(c.n_modes())?;
    let (_, noise) = measurement.moments(&c.run_vacuum()?)?;
    SnrReport::new(scheme, delta, signal * signal, noise, i_ps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossSite {
    /// Both arms between the splitting and recombining elements.
    Internal,
    /// Both outputs, in front of the detectors.
    External,
    /// The dark input port of a Mach-Zehnder (the squeezed vacuum, if any).
    Input,
}

/// SNR of `builder(loss, x)` for every loss value in `loss_grid`.
pub fn snr_vs_loss<F>(
    scheme: &str,
    builder: F,
    measurement: &MeasurementSpec,
    delta: f64,
    loss_grid: &[f64],
    i_ps: f64,
) -> Result<Vec<(f64, SnrReport)>>
where
    F: Fn(f64, f64) -> Result<Circuit>,
{
    loss_grid
        .iter()
        .map(|&loss| {
            if !(0.0..=1.0).contains(&loss) {
                return invalid(format!("loss must lie in [0, 1], got {loss}"));
            }
            let report = snr(scheme, |x| builder(loss, x), measurement, delta, i_ps)?;
            Ok((loss, report))
        })
        .collect()
}

/// Builder for an SU(1,1) interferometer carrying phase signal `x`.
pub fn sui_phase_builder(base: SuiParams) -> impl Fn(f64) -> Result<Circuit> {
    move |x| preset_sui(&SuiParams { delta: x, ..base })
}

/// Builder for an SU(1,1) interferometer carrying amplitude signal `x`.
pub fn sui_amplitude_builder(base: SuiParams) -> impl Fn(f64) -> Result<Circuit> {
    move |x| preset_sui(&SuiParams { epsilon: x, ..base })
}

/// SUI phase SNR versus loss at the chosen site.
pub fn sui_snr_vs_loss(
    base: &SuiParams,
    measurement: &MeasurementSpec,
    loss_grid: &[f64],
    site: LossSite,
) -> Result<Vec<(f64, SnrReport)>> {
    let base = *base;
    snr_vs_loss(
        "sui",
        move |loss, x| {
            let mut p = SuiParams { delta: x, ..base };
            match site {
                LossSite::Internal => p.internal_loss = loss,
                LossSite::External => p.external_loss = loss,
                LossSite::Input => return invalid("the SU(1,1) interferometer has no dark input port"),
            }
            preset_sui(&p)
        },
        measurement,
        base.delta,
        loss_grid,
        base.phase_sensing_photons(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceSharing {
    pub snr_phase: f64,
    pub snr_amplitude: f64,
    pub sum: f64,
    pub snr_op: f64,
}

/// Simultaneous phase (port 1, `Ŷ`) and amplitude (port 2, `X̂`) measurement
/// on a single-beam SU(1,1) interferometer at the dark fringe, with the
/// amplitude signal set equal to the phase signal.
pub fn resource_sharing_report(g1: f64, g2: f64, alpha: f64, delta: f64) -> Result<ResourceSharing> {
    let base = SuiParams::dark_fringe(g1, g2, alpha);
    let i_ps = base.phase_sensing_photons();
    let phase = snr("sui_phase", sui_phase_builder(base), &sui_port1_phase(), delta, i_ps)?;
    let amp = snr("sui_amplitude", sui_amplitude_builder(base), &sui_port2_amplitude(), delta, i_ps)?;
    let big = amplitude_gain(g1);
    Ok(ResourceSharing {
        snr_phase: phase.snr,
        snr_amplitude: amp.snr,
        sum: phase.snr + amp.snr,
        snr_op: 4.0 * (big + g1).powi(2) * i_ps * delta * delta,
    })
}

/// Dual-beam interferometer: phase SNR of `Ŷ1` and amplitude SNR of `X̂2`
/// with equal phase and amplitude signals on both arms.
pub fn dual_beam_resource_sharing(g1: f64, g2: f64, alpha: f64, delta: f64) -> Result<ResourceSharing> {
    let base = SuiParams { dual_beam: true, ..SuiParams::dark_fringe(g1, g2, alpha) };
    let i_ps = base.phase_sensing_photons();
    let phase = snr("dual_phase", sui_phase_builder(base), &sui_port1_phase(), delta, i_ps)?;
    let amp = snr("dual_amplitude", sui_amplitude_builder(base), &sui_port2_amplitude(), delta, i_ps)?;
    let big = amplitude_gain(g1);
    Ok(ResourceSharing {
        snr_phase: phase.snr,
        snr_amplitude: amp.snr,
        sum: phase.snr + amp.snr,
        snr_op: 4.0 * (big + g1).powi(2) * i_ps * delta * delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tapping {
    pub t1: f64,
    pub t2: f64,
    pub sum: f64,
}

/// Transfer coefficients of the two SUI outputs relative to the direct
/// measurement SNR `2 (G1+g1)² I_ps δ²`.
pub fn tapping_coefficients(g1: f64, g2: f64, alpha: f64, delta: f64) -> Result<Tapping> {
    let base = SuiParams::dark_fringe(g1, g2, alpha);
    let i_ps = base.phase_sensing_photons();
    let s1 = snr("sui_port1", sui_phase_builder(base), &sui_port1_phase(), delta, i_ps)?.snr;
    let s2 = snr("sui_port2", sui_phase_builder(base), &sui_port2_phase(), delta, i_ps)?.snr;
    let snr_in = 2.0 * (amplitude_gain(g1) + g1).powi(2) * i_ps * delta * delta;
    let (t1, t2) = (s1 / snr_in, s2 / snr_in);
    Ok(Tapping { t1, t2, sum: t1 + t2 })
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0 && k <= 1.0) {
        return invalid(format!("gain ratio k must lie in (0, 1], got {k}"));
    }
    Ok(())
}

fn epr_variances(state: &GaussianState, m1: usize, m2: usize, a: f64, b: f64) -> Result<f64> {
    let vx = state.homodyne_moments(&[QuadratureCoefficient::x(m1).scaled(a), QuadratureCoefficient::x(m2).scaled(-b)])?.1;
    let vy = state.homodyne_moments(&[QuadratureCoefficient::y(m1).scaled(a), QuadratureCoefficient::y(m2).scaled(b)])?.1;
    Ok(vx + vy)
}

/// `[⟨Δ²(X1 − kX2)⟩ + ⟨Δ²(Y1 + kY2)⟩] / (2(1 + k²))`.
pub fn inseparability_direct(state: &GaussianState, m1: usize, m2: usize, k: f64) -> Result<f64> {
    check_k(k)?;
    if m1 == m2 {
        return invalid("inseparability needs two distinct modes");
    }
    Ok(epr_variances(state, m1, m2, 1.0, k)? / (2.0 * (1.0 + k * k)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InseparabilityReport {
    /// Gain ratio probed by the joint measurement.
    pub k: f64,
    pub i_direct: f64,
    /// Single-port estimate, probing `k = g/G` of the analyzer.
    pub i_amp: f64,
    pub i_amp_jm: f64,
    pub lambda_used: f64,
}

/// Measures the inseparability of a two-mode squeezed vacuum (gain
/// `source_g`) by sending it through an analyzer amplifier of gain
/// `analyzer_g` and detecting its outputs after `detection_loss`.
///
/// The analyzer pump is phased so that its port 1 reads `G X1 − g X2` and
/// `G Y1 + g Y2`. The joint quantity combines `X1' − λX2'` and `Y1' + λY2'`,
/// which probes `k = (λG + g)/(G + λg)`. Both estimates are normalised by
/// the same measurement repeated with vacuum inputs.
pub fn inseparability_via_amplifier(
    source_g: f64,
    analyzer_g: f64,
    detection_loss: f64,
    lambda: f64,
) -> Result<InseparabilityReport> {
    if !(0.0..=1.0).contains(&detection_loss) {
        return invalid(format!("detection loss must lie in [0, 1], got {detection_loss}"));
    }
    if detection_loss == 1.0 {
        return invalid("detection loss of 1 leaves nothing to measure");
    }
    let big = amplitude_gain(analyzer_g);
    let denom = big + lambda * analyzer_g;
    if denom.abs() < 1e-12 {
        return invalid(format!("lambda {lambda} cancels the analyzer output (G + λg = 0)"));
    }
    let k = (lambda * big + analyzer_g) / denom;
    check_k(k)?;
    let source = GaussianState::vacuum(2)?.two_mode_squeeze(0, 1, source_g, 0.0)?;
    let analyze = |s: &GaussianState| -> Result<GaussianState> {
        let mut out = s.two_mode_squeeze(0, 1, analyzer_g, std::f64::consts::PI)?;
        out.attenuate_in_place(0, detection_loss)?;
        out.attenuate_in_place(1, detection_loss)?;
        Ok(out)
    };
    let measured = analyze(&source)?;
    let blocked = analyze(&GaussianState::vacuum(2)?)?;
    let single = |s: &GaussianState| -> Result<f64> {
        Ok(s.homodyne_moments(&[QuadratureCoefficient::x(0)])?.1 + s.homodyne_moments(&[QuadratureCoefficient::y(0)])?.1)
    };
    let i_amp = single(&measured)? / single(&blocked)?;
    let i_amp_jm = epr_variances(&measured, 0, 1, 1.0, lambda)? / epr_variances(&blocked, 0, 1, 1.0, lambda)?;
    if analyzer_g > 0.0 && (big / analyzer_g) > 100.0 {
        warn!("analyzer gain {analyzer_g} is far from the high-gain regime; i_amp probes k = {}", analyzer_g / big);
    }
    Ok(InseparabilityReport {
        k,
        i_direct: inseparability_direct(&source, 0, 1, k)?,
        i_amp,
        i_amp_jm,
        lambda_used: lambda,
    })
}

type SignalBuilder = Box<dyn Fn(f64) -> Result<Circuit>>;

/// Circuit family and measurement used by the engine for each scheme.
/// The returned builder takes the signal size.
pub fn scheme_setup(scheme: Scheme, p: &SchemeParams) -> Result<(SignalBuilder, MeasurementSpec)> {
    scheme_setup_with_loss(scheme, p, 0.0, LossSite::External)
}

fn with_losses(mut c: Circuit, index: Option<usize>, modes: &[usize], loss: f64) -> Result<Circuit> {
    if loss == 0.0 {
        return Ok(c);
    }
    for &mode in modes.iter().rev() {
        let e = Element::Loss { mode, loss };
        match index {
            Some(i) => c.insert(i, e)?,
            None => {
                c.push(e)?;
            }
        }
    }
    Ok(c)
}

/// [`scheme_setup`] with a loss `loss` at `site`.
///
/// Mach-Zehnder schemes accept all sites; `Input` attenuates the squeezed
/// vacuum before it enters. SU(1,1) schemes accept `Internal` and
/// `External`. For PA+BS `Internal` sits between amplifier and splitter; for
/// the truncated scheme both sites mean detection loss.
pub fn scheme_setup_with_loss(
    scheme: Scheme,
    p: &SchemeParams,
    loss: f64,
    site: LossSite,
) -> Result<(SignalBuilder, MeasurementSpec)> {
    p.validate()?;
    if !(0.0..=1.0).contains(&loss) {
        return invalid(format!("loss must lie in [0, 1], got {loss}"));
    }
    let q = *p;
    let alpha = Complex64::new(q.alpha, 0.0);
    let mut sui = SuiParams {
        dual_beam: scheme.is_dual_beam(),
        ..SuiParams::dark_fringe(q.g1, q.g2, q.alpha)
    };
    let no_input = || invalid(format!("scheme {} has no input-port loss", scheme.name()));
    Ok(match scheme {
        Scheme::MziClassical | Scheme::MziSqueezed => {
            let squeezed = scheme == Scheme::MziSqueezed;
            // element index of the first splitter
            let bs1 = if squeezed { 3 } else { 1 };
            let (index, modes): (Option<usize>, &'static [usize]) = match site {
                LossSite::Internal => (Some(bs1 + 1), &[0, 1]),
                LossSite::External => (None, &[0, 1]),
                LossSite::Input => (Some(bs1), &[1]),
            };
            (
                Box::new(move |x| {
                    let c = if squeezed {
                        preset_mzi_squeezed(q.t1, q.t2, MZI_OPERATING_PHASE + x, alpha, q.r)?
                    } else {
                        preset_mzi(q.t1, q.t2, MZI_OPERATING_PHASE + x, alpha)?
                    };
                    with_losses(c, index, modes, loss)
                }),
                MeasurementSpec::intensity_difference(0, 1),
            )
        }
        Scheme::SuiPort1
        | Scheme::SuiOptimum
        | Scheme::DualBeamPort
        | Scheme::SuiPort2
        | Scheme::SuiJoint
        | Scheme::DualBeamJoint
        | Scheme::DualBeamAmplitude => {
            match site {
                LossSite::Internal => sui.internal_loss = loss,
                LossSite::External => sui.external_loss = loss,
                LossSite::Input => return no_input(),
            }
            let measurement = match scheme {
                Scheme::SuiPort2 => sui_port2_phase(),
                Scheme::SuiJoint | Scheme::DualBeamJoint => sui_joint_phase(q.weight),
                Scheme::DualBeamAmplitude => sui_port2_amplitude(),
                _ => sui_port1_phase(),
            };
            let builder: SignalBuilder = if scheme == Scheme::DualBeamAmplitude {
                Box::new(sui_amplitude_builder(sui))
            } else {
                Box::new(sui_phase_builder(sui))
            };
            (builder, measurement)
        }
        Scheme::PaBs => {
            let t = q.pa_bs_transmissivity();
            let index = match site {
                LossSite::Internal => Some(2),
                LossSite::External => None,
                LossSite::Input => return no_input(),
            };
            (
                Box::new(move |x| with_losses(preset_pa_bs(q.g1, t, alpha, [0.0, PI + x])?, index, &[0, 1], loss)),
                MeasurementSpec::homodyne(1, SIGNAL_PHASE_QUADRATURE),
            )
        }
        Scheme::Truncated => {
            if site == LossSite::Input {
                return no_input();
            }
            let tp = move |x: f64| TruncatedParams {
                g1: q.g1,
                alpha,
                mix_weight: q.weight,
                delta: x,
                detection_loss: loss,
            };
            let measurement = preset_truncated(&tp(0.0))?.1;
            (Box::new(move |x| Ok(preset_truncated(&tp(x))?.0)), measurement)
        }
    })
}

/// Engine SNR of `scheme`. The signal is `p.epsilon` for the amplitude
/// scheme and `p.delta` otherwise.
pub fn scheme_snr(scheme: Scheme, p: &SchemeParams) -> Result<SnrReport> {
    scheme_snr_with_loss(scheme, p, 0.0, LossSite::External)
}

pub fn scheme_snr_with_loss(scheme: Scheme, p: &SchemeParams, loss: f64, site: LossSite) -> Result<SnrReport> {
    let (builder, measurement) = scheme_setup_with_loss(scheme, p, loss, site)?;
    let signal = if scheme == Scheme::DualBeamAmplitude { p.epsilon } else { p.delta };
    snr(scheme.name(), builder, &measurement, signal, i_ps(scheme, p))
}
