//! Declarative optical networks and preset interferometer topologies.
//!
//! Mode 0 is always the seeded ("signal") mode and mode 1 the conjugate
//! ("idler" or probe) mode. Presets are pure data: building twice with the
//! same parameters yields identical element sequences.

use std::f64::consts::{FRAC_PI_2, PI};

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gaussian::{amplitude_gain, GaussianState, QuadratureCoefficient};
use crate::measurement::MeasurementSpec;

/// Small-signal validity bound for `δ` and `ε`.
pub const SMALL_SIGNAL_LIMIT: f64 = 0.05;

/// Multi-stage presets assume the first-order pair expansion above this gain
/// is no longer accurate.
pub const LOW_GAIN_LIMIT: f64 = 0.3;

/// Homodyne angle of the phase quadrature at the seeded output port.
pub const SIGNAL_PHASE_QUADRATURE: f64 = FRAC_PI_2;

/// Homodyne angle of the phase quadrature at the idler output port. The idler
/// carries the conjugate phase of the seed, so its local oscillator is
/// referenced with the opposite sign; this makes both port signals positive
/// for a positive phase shift.
pub const IDLER_PHASE_QUADRATURE: f64 = -FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Element {
    Squeezer { m1: usize, m2: usize, g: f64, pump_phase: f64 },
    BeamSplitter { m1: usize, m2: usize, transmissivity: f64 },
    PhaseShifter { mode: usize, phi: f64 },
    Loss { mode: usize, loss: f64 },
    Displace { mode: usize, alpha: Complex64 },
}

impl Element {
    pub fn modes(&self) -> Vec<usize> {
        match *self {
            Self::Squeezer { m1, m2, .. } | Self::BeamSplitter { m1, m2, .. } => vec![m1, m2],
            Self::PhaseShifter { mode, .. } | Self::Loss { mode, .. } | Self::Displace { mode, .. } => vec![mode],
        }
    }

    fn validate(&self, n_modes: usize) -> Result<()> {
        let modes = self.modes();
        if let Some(m) = modes.iter().find(|&&m| m >= n_modes) {
            return invalid(format!("element {self:?} uses mode {m} but the circuit has {n_modes} modes"));
        }
        if modes.len() == 2 && modes[0] == modes[1] {
            return invalid(format!("element {self:?} needs two distinct modes"));
        }
        match *self {
            Self::Squeezer { g, pump_phase, .. } => {
                if !(g >= 0.0 && g.is_finite()) || !pump_phase.is_finite() {
                    return invalid(format!("squeezer gain must be finite and >= 0, got {g}"));
                }
            }
            Self::BeamSplitter { transmissivity: t, .. } => check_fraction("transmissivity", t)?,
            Self::Loss { loss, .. } => check_fraction("loss", loss)?,
            Self::PhaseShifter { phi, .. } => {
                if !phi.is_finite() {
                    return invalid("phase must be finite");
                }
            }
            Self::Displace { alpha, .. } => {
                if !(alpha.re.is_finite() && alpha.im.is_finite()) {
                    return invalid("displacement must be finite");
                }
            }
        }
        Ok(())
    }

    fn apply(&self, state: &mut GaussianState) -> Result<()> {
        match *self {
            Self::Squeezer { m1, m2, g, pump_phase } => state.two_mode_squeeze_in_place(m1, m2, g, pump_phase),
            Self::BeamSplitter { m1, m2, transmissivity } => state.beam_split_in_place(m1, m2, transmissivity),
            Self::PhaseShifter { mode, phi } => state.phase_shift_in_place(mode, phi),
            Self::Loss { mode, loss } => state.attenuate_in_place(mode, loss),
            Self::Displace { mode, alpha } => state.displace_in_place(mode, alpha),
        }
    }
}

fn check_fraction(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return invalid(format!("{name} must lie in [0, 1], got {v}"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_modes: usize,
    elements: Vec<Element>,
}

impl Circuit {
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return invalid("a circuit needs at least one mode");
        }
        Ok(Self { n_modes, elements: Vec::new() })
    }

    pub fn from_elements(n_modes: usize, elements: Vec<Element>) -> Result<Self> {
        let mut c = Self::new(n_modes)?;
        for e in elements {
            c.push(e)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, element: Element) -> Result<&mut Self> {
        element.validate(self.n_modes)?;
        self.elements.push(element);
        Ok(self)
    }

    pub fn insert(&mut self, index: usize, element: Element) -> Result<()> {
        element.validate(self.n_modes)?;
        if index > self.elements.len() {
            return invalid(format!("insert position {index} past end of {} elements", self.elements.len()));
        }
        self.elements.insert(index, element);
        Ok(())
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// Applies every element in order to `input`.
    pub fn run(&self, input: &GaussianState) -> Result<GaussianState> {
        if input.n_modes() != self.n_modes {
            return invalid(format!(
                "input state has {} modes but the circuit has {}",
                input.n_modes(),
                self.n_modes
            ));
        }
        let mut state = input.clone();
        for e in &self.elements {
            e.apply(&mut state)?;
        }
        Ok(state)
    }

    /// Runs the circuit on the vacuum.
    pub fn run_vacuum(&self) -> Result<GaussianState> {
        self.run(&GaussianState::vacuum(self.n_modes)?)
    }
}

/// Classical Mach-Zehnder: `Displace -> BS(T1) -> phase on arm 2 -> BS(T2)`.
pub fn preset_mzi(t1: f64, t2: f64, phi: f64, alpha: Complex64) -> Result<Circuit> {
    check_fraction("T1", t1)?;
    check_fraction("T2", t2)?;
    Circuit::from_elements(
        2,
        vec![
            Element::Displace { mode: 0, alpha },
            Element::BeamSplitter { m1: 0, m2: 1, transmissivity: t1 },
            Element::PhaseShifter { mode: 1, phi },
            Element::BeamSplitter { m1: 0, m2: 1, transmissivity: t2 },
        ],
    )
}

/// Mach-Zehnder whose dark input port is fed with a single-mode squeezed
/// vacuum of squeezing `r`.
///
/// The squeezed vacuum is prepared on an ancilla pair (modes 1 and 2) by a
/// two-mode squeezer followed by a balanced splitter; mode 2 is discarded.
/// With this splitter convention its squeezed quadrature is the one the
/// second splitter maps onto the difference current when `phi = π/2`.
pub fn preset_mzi_squeezed(t1: f64, t2: f64, phi: f64, alpha: Complex64, r: f64) -> Result<Circuit> {
    check_fraction("T1", t1)?;
    check_fraction("T2", t2)?;
    if !(r >= 0.0 && r.is_finite()) {
        return invalid(format!("squeezing must be finite and >= 0, got {r}"));
    }
    Circuit::from_elements(
        3,
        vec![
            Element::Squeezer { m1: 1, m2: 2, g: r.sinh(), pump_phase: 0.0 },
            Element::BeamSplitter { m1: 1, m2: 2, transmissivity: 0.5 },
            Element::Displace { mode: 0, alpha },
            Element::BeamSplitter { m1: 0, m2: 1, transmissivity: t1 },
            Element::PhaseShifter { mode: 1, phi },
            Element::BeamSplitter { m1: 0, m2: 1, transmissivity: t2 },
        ],
    )
}

/// Which interferometer arm receives the single-arm phase signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Signal,
    #[default]
    Probe,
}

impl Arm {
    pub fn mode(self) -> usize {
        match self {
            Self::Signal => 0,
            Self::Probe => 1,
        }
    }
}

/// Parameters of the two-amplifier SU(1,1) interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiParams {
    pub g1: f64,
    pub g2: f64,
    pub alpha: Complex64,
    pub phi1: f64,
    pub phi2: f64,
    /// Loss on each arm between the amplifiers.
    pub internal_loss: f64,
    /// Loss on each output after the second amplifier.
    pub external_loss: f64,
    /// Small phase signal.
    pub delta: f64,
    /// Small amplitude signal: the coherent amplitude of the modulated arm(s)
    /// is scaled by `1 + ε`.
    pub epsilon: f64,
    /// Phase (and amplitude) signal applied to both arms instead of one.
    pub dual_beam: bool,
    /// Arm that carries the single-beam signals.
    pub delta_arm: Arm,
}

impl SuiParams {
    /// Lossless interferometer at the dark fringe `φ1 + φ2 = π`.
    pub fn dark_fringe(g1: f64, g2: f64, alpha: f64) -> Self {
        Self {
            g1,
            g2,
            alpha: Complex64::new(alpha, 0.0),
            phi1: 0.0,
            phi2: PI,
            internal_loss: 0.0,
            external_loss: 0.0,
            delta: 0.0,
            epsilon: 0.0,
            dual_beam: false,
            delta_arm: Arm::Probe,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, g) in [("g1", self.g1), ("g2", self.g2)] {
            if !(g >= 0.0 && g.is_finite()) {
                return invalid(format!("{name} must be finite and >= 0, got {g}"));
            }
        }
        check_fraction("internal_loss", self.internal_loss)?;
        check_fraction("external_loss", self.external_loss)?;
        for (name, v) in [("phi1", self.phi1), ("phi2", self.phi2), ("delta", self.delta), ("epsilon", self.epsilon)] {
            if !v.is_finite() {
                return invalid(format!("{name} must be finite"));
            }
        }
        if !(self.alpha.re.is_finite() && self.alpha.im.is_finite()) {
            return invalid("alpha must be finite");
        }
        if self.delta.abs() > SMALL_SIGNAL_LIMIT || self.epsilon.abs() > SMALL_SIGNAL_LIMIT {
            warn!(
                "signal amplitudes delta={} epsilon={} exceed the small-signal range {SMALL_SIGNAL_LIMIT}",
                self.delta, self.epsilon
            );
        }
        Ok(())
    }

    /// Photons in the field(s) that sense the phase: `g1²|α|²` for a single
    /// probe arm, `(G1² + g1²)|α|²` when both arms carry the signal.
    pub fn phase_sensing_photons(&self) -> f64 {
        let n = self.alpha.norm_sqr();
        let g1 = self.g1;
        if self.dual_beam {
            (amplitude_gain(g1).powi(2) + g1 * g1) * n
        } else if self.delta_arm == Arm::Signal {
            amplitude_gain(g1).powi(2) * n
        } else {
            g1 * g1 * n
        }
    }
}

/// SU(1,1) interferometer:
/// `Displace -> PA1 -> internal loss -> arm phases (+δ) -> amplitude signal
/// (ε) -> PA2 -> external loss`.
///
/// Both amplifiers share pump phase 0, so the fringe depends on `φ1 + φ2`.
pub fn preset_sui(p: &SuiParams) -> Result<Circuit> {
    p.validate()?;
    let (signal_phase, probe_phase) = match (p.dual_beam, p.delta_arm) {
        (true, _) => (p.phi1 + p.delta, p.phi2 + p.delta),
        (false, Arm::Probe) => (p.phi1, p.phi2 + p.delta),
        (false, Arm::Signal) => (p.phi1 + p.delta, p.phi2),
    };
    let mut c = Circuit::new(2)?;
    c.push(Element::Displace { mode: 0, alpha: p.alpha })?;
    c.push(Element::Squeezer { m1: 0, m2: 1, g: p.g1, pump_phase: 0.0 })?;
    c.push(Element::Loss { mode: 0, loss: p.internal_loss })?;
    c.push(Element::Loss { mode: 1, loss: p.internal_loss })?;
    c.push(Element::PhaseShifter { mode: 0, phi: signal_phase })?;
    c.push(Element::PhaseShifter { mode: 1, phi: probe_phase })?;
    if p.epsilon != 0.0 {
        // coherent amplitudes of the two arms at this point
        let t = (1.0 - p.internal_loss).sqrt();
        let signal_amp = p.alpha * amplitude_gain(p.g1) * t * Complex64::from_polar(1.0, signal_phase);
        let probe_amp = p.alpha.conj() * p.g1 * t * Complex64::from_polar(1.0, probe_phase);
        let modulated: &[(usize, Complex64)] = match (p.dual_beam, p.delta_arm) {
            (true, _) => &[(0, signal_amp), (1, probe_amp)],
            (false, Arm::Probe) => &[(1, probe_amp)],
            (false, Arm::Signal) => &[(0, signal_amp)],
        };
        for &(mode, amp) in modulated {
            c.push(Element::Displace { mode, alpha: amp * p.epsilon })?;
        }
    }
    c.push(Element::Squeezer { m1: 0, m2: 1, g: p.g2, pump_phase: 0.0 })?;
    c.push(Element::Loss { mode: 0, loss: p.external_loss })?;
    c.push(Element::Loss { mode: 1, loss: p.external_loss })?;
    Ok(c)
}

/// Phase quadrature at output port 1 (`Ŷ1`).
pub fn sui_port1_phase() -> MeasurementSpec {
    MeasurementSpec::homodyne(0, SIGNAL_PHASE_QUADRATURE)
}

/// Phase quadrature at output port 2 (`Ŷ2`).
pub fn sui_port2_phase() -> MeasurementSpec {
    MeasurementSpec::homodyne(1, IDLER_PHASE_QUADRATURE)
}

/// Amplitude quadrature at output port 2 (`X̂2`).
pub fn sui_port2_amplitude() -> MeasurementSpec {
    MeasurementSpec::homodyne(1, 0.0)
}

/// Joint measurement `Ŷ1 + λŶ2`.
pub fn sui_joint_phase(lambda: f64) -> MeasurementSpec {
    MeasurementSpec::Quadrature(vec![
        QuadratureCoefficient::new(0, SIGNAL_PHASE_QUADRATURE, 1.0),
        QuadratureCoefficient::new(1, IDLER_PHASE_QUADRATURE, lambda),
    ])
}

/// Amplifier followed by a beam splitter.
///
/// `Displace -> PA1 -> phases -> BS(T)`. The splitter mixes `a1` with `a2`
/// directly, so with field phases `phases = [φ1, φ2]` the port-2 fringe goes
/// as `cos(φ2 - φ1)`; in the parametric picture where the idler phase is
/// referenced to the pump this is the usual phase-sum dependence. Signal and
/// idler are assumed frequency degenerate.
pub fn preset_pa_bs(g1: f64, transmissivity: f64, alpha: Complex64, phases: [f64; 2]) -> Result<Circuit> {
    check_fraction("transmissivity", transmissivity)?;
    Circuit::from_elements(
        2,
        vec![
            Element::Displace { mode: 0, alpha },
            Element::Squeezer { m1: 0, m2: 1, g: g1, pump_phase: 0.0 },
            Element::PhaseShifter { mode: 0, phi: phases[0] },
            Element::PhaseShifter { mode: 1, phi: phases[1] },
            Element::BeamSplitter { m1: 0, m2: 1, transmissivity },
        ],
    )
}

/// Splitter transmissivity giving unit fringe visibility at port 2.
pub fn pa_bs_unit_visibility_transmissivity(g1: f64) -> f64 {
    let big = amplitude_gain(g1);
    big * big / (big * big + g1 * g1)
}

/// Splitter transmissivity that maximises the port-2 phase SNR.
pub fn pa_bs_optimal_transmissivity(g1: f64) -> f64 {
    let big = amplitude_gain(g1);
    let s = big * big + g1 * g1;
    s * s / (8.0 * big * big * g1 * g1 + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedParams {
    pub g1: f64,
    pub alpha: Complex64,
    /// Electronic weight of the seeded-arm photocurrent relative to the
    /// probe-arm photocurrent.
    pub mix_weight: f64,
    pub delta: f64,
    /// Loss in front of each homodyne detector.
    pub detection_loss: f64,
}

/// Truncated interferometer: a single amplifier, two homodyne detectors and
/// a post-detection current mixer. The mixer lives in the returned
/// measurement, `Ŷ_probe + w Ŷ_signal`.
pub fn preset_truncated(p: &TruncatedParams) -> Result<(Circuit, MeasurementSpec)> {
    check_fraction("detection_loss", p.detection_loss)?;
    if !p.mix_weight.is_finite() {
        return invalid("mix_weight must be finite");
    }
    let c = Circuit::from_elements(
        2,
        vec![
            Element::Displace { mode: 0, alpha: p.alpha },
            Element::Squeezer { m1: 0, m2: 1, g: p.g1, pump_phase: 0.0 },
            Element::PhaseShifter { mode: 1, phi: p.delta },
            Element::Loss { mode: 0, loss: p.detection_loss },
            Element::Loss { mode: 1, loss: p.detection_loss },
        ],
    )?;
    // After one amplifier the probe carries conj(α), so the phase quadrature
    // of both arms is Y for real α; Y1 and Y2 are anti-correlated and a
    // positive weight cancels noise.
    let mut terms = vec![QuadratureCoefficient::new(1, SIGNAL_PHASE_QUADRATURE, 1.0)];
    if p.mix_weight != 0.0 {
        terms.push(QuadratureCoefficient::new(0, SIGNAL_PHASE_QUADRATURE, p.mix_weight));
    }
    Ok((c, MeasurementSpec::Quadrature(terms)))
}

/// Mixing weight that reproduces the action of a second, high-gain amplifier.
pub const TRUNCATED_SUI_EQUIVALENT_WEIGHT: f64 = 1.0;

/// Mixing weight that minimises the phase-estimation noise of the truncated
/// scheme, `2 G g / (G² + g²)`.
pub fn truncated_optimal_weight(g1: f64) -> f64 {
    let big = amplitude_gain(g1);
    2.0 * big * g1 / (big * big + g1 * g1)
}

/// Chain of low-gain amplifiers separated by phase gaps that add `theta` to
/// the signal/idler pair (half on each mode).
pub fn preset_multistage(stage_gains: &[f64], theta: f64) -> Result<Circuit> {
    if stage_gains.is_empty() {
        return invalid("multi-stage interferometer needs at least one stage");
    }
    if let Some(g) = stage_gains.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
        return invalid(format!("stage gains must be finite and >= 0, got {g}"));
    }
    if stage_gains.iter().any(|&g| g > LOW_GAIN_LIMIT) {
        warn!("stage gain above {LOW_GAIN_LIMIT}: the first-order pair picture is no longer accurate");
    }
    let mut c = Circuit::new(2)?;
    for (k, &g) in stage_gains.iter().enumerate() {
        if k > 0 {
            c.push(Element::PhaseShifter { mode: 0, phi: theta / 2.0 })?;
            c.push(Element::PhaseShifter { mode: 1, phi: theta / 2.0 })?;
        }
        c.push(Element::Squeezer { m1: 0, m2: 1, g, pump_phase: 0.0 })?;
    }
    Ok(c)
}
