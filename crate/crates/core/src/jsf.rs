//! Joint spectral functions of photon pairs from single- and multi-stage
//! parametric sources with dispersive phase gaps.
//!
//! Frequencies are offsets from degeneracy in units chosen by the caller;
//! with the default normalisation the pump bandwidth is 1.

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::LOW_GAIN_LIMIT;
use crate::error::{invalid, Result};

const NORM_TOL: f64 = 1e-9;

/// Complex amplitude `F(Ωs, Ωi)` on a uniform rectangular grid. Rows index
/// `omega_s`, columns `omega_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct JsfGrid {
    omega_s: Vec<f64>,
    omega_i: Vec<f64>,
    amp: DMatrix<Complex64>,
}

/// `n` equally spaced points on `[-half_width, half_width]`.
pub fn uniform_axis(n: usize, half_width: f64) -> Result<Vec<f64>> {
    if n < 2 || !(half_width > 0.0 && half_width.is_finite()) {
        return invalid(format!("axis needs n >= 2 and a positive width, got n={n}, half_width={half_width}"));
    }
    let step = 2.0 * half_width / (n - 1) as f64;
    Ok((0..n).map(|k| -half_width + k as f64 * step).collect())
}

fn check_axis(name: &str, axis: &[f64]) -> Result<f64> {
    if axis.len() < 2 {
        return invalid(format!("{name} axis needs at least two points"));
    }
    let step = axis[1] - axis[0];
    if !(step > 0.0 && step.is_finite()) {
        return invalid(format!("{name} axis must be increasing"));
    }
    for w in axis.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-9 * step.max(1.0) {
            return invalid(format!("{name} axis must be uniformly spaced"));
        }
    }
    Ok(step)
}

impl JsfGrid {
    /// Samples `f` on the grid without normalising.
    pub fn from_fn<F>(omega_s: Vec<f64>, omega_i: Vec<f64>, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64,
    {
        check_axis("omega_s", &omega_s)?;
        check_axis("omega_i", &omega_i)?;
        let amp = DMatrix::from_fn(omega_s.len(), omega_i.len(), |r, c| f(omega_s[r], omega_i[c]));
        Ok(Self { omega_s, omega_i, amp })
    }

    pub fn omega_s(&self) -> &[f64] {
        &self.omega_s
    }

    pub fn omega_i(&self) -> &[f64] {
        &self.omega_i
    }

    pub fn amp(&self) -> &DMatrix<Complex64> {
        &self.amp
    }

    pub fn d_omega_s(&self) -> f64 {
        self.omega_s[1] - self.omega_s[0]
    }

    pub fn d_omega_i(&self) -> f64 {
        self.omega_i[1] - self.omega_i[0]
    }

    /// `Σ |F|² dΩs dΩi`.
    pub fn norm(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.d_omega_s() * self.d_omega_i()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() < NORM_TOL
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return invalid("cannot normalise a vanishing joint spectral function");
        }
        self.amp /= Complex64::new(n.sqrt(), 0.0);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// `|F|²` matrix.
    pub fn intensity(&self) -> DMatrix<f64> {
        self.amp.map(|a| a.norm_sqr())
    }
}

/// Phase-matching model of a single amplifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MismatchModel {
    /// Phase-matching bandwidth far wider than the pump: `sinc ≡ 1`.
    Broadband,
    /// `Δk = k_s Ωs + k_i Ωi` over a medium of length `length`.
    Linear { k_s: f64, k_i: f64, length: f64 },
}

impl MismatchModel {
    fn validate(&self) -> Result<()> {
        if let Self::Linear { k_s, k_i, length } = *self {
            if !(k_s.is_finite() && k_i.is_finite() && length > 0.0 && length.is_finite()) {
                return invalid("linear mismatch needs finite coefficients and a positive length");
            }
        }
        Ok(())
    }

    fn phase_matching(&self, ws: f64, wi: f64) -> f64 {
        match *self {
            Self::Broadband => 1.0,
            Self::Linear { k_s, k_i, length } => sinc((k_s * ws + k_i * wi) * length / 2.0),
        }
    }
}

/// `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn check_sigma(sigma_p: f64) -> Result<()> {
    if !(sigma_p > 0.0 && sigma_p.is_finite()) {
        return invalid(format!("pump bandwidth must be positive, got {sigma_p}"));
    }
    Ok(())
}

fn single_amplitude(ws: f64, wi: f64, sigma_p: f64, model: &MismatchModel) -> Complex64 {
    let sum = ws + wi;
    Complex64::new((-sum * sum / (2.0 * sigma_p * sigma_p)).exp() * model.phase_matching(ws, wi), 0.0)
}

/// Unnormalised single-stage amplitude `exp(−(Ωs+Ωi)²/2σp²)·sinc(ΔkL/2)`.
pub fn jsf_single_raw(omega_s: &[f64], omega_i: &[f64], sigma_p: f64, model: &MismatchModel) -> Result<JsfGrid> {
    check_sigma(sigma_p)?;
    model.validate()?;
    JsfGrid::from_fn(omega_s.to_vec(), omega_i.to_vec(), |ws, wi| single_amplitude(ws, wi, sigma_p, model))
}

/// Normalised single-stage joint spectral function.
pub fn jsf_single(omega_s: &[f64], omega_i: &[f64], sigma_p: f64, model: &MismatchModel) -> Result<JsfGrid> {
    jsf_single_raw(omega_s, omega_i, sigma_p, model)?.normalized()
}

/// `g_T = Σ_k g_k e^{i(N−k)θ}` for stages `k = 1..N`.
pub fn stage_gain_total(theta: f64, gains: &[f64]) -> Complex64 {
    let n = gains.len();
    gains
        .iter()
        .enumerate()
        .map(|(k, &g)| Complex64::from_polar(g, (n - 1 - k) as f64 * theta))
        .sum()
}

/// Dispersive phase `β (Ωs − Ωi)² L_DM` of a gap between stages.
pub fn dispersion_phase(omega_s: f64, omega_i: f64, beta: f64, l_dm: f64) -> f64 {
    let d = omega_s - omega_i;
    beta * d * d * l_dm
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    /// Amplitude gain of every stage (proportional to its medium length in
    /// the low-gain regime).
    pub gains: Vec<f64>,
    /// Second-order dispersion coefficient of the gaps.
    pub beta: f64,
    /// Length of each dispersive gap.
    pub l_dm: f64,
    /// Pump bandwidth.
    pub sigma_p: f64,
}

impl StageSpec {
    pub fn n_stages(&self) -> usize {
        self.gains.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.gains.is_empty() {
            return invalid("stage spec needs at least one stage");
        }
        if let Some(g) = self.gains.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
            return invalid(format!("stage gains must be finite and >= 0, got {g}"));
        }
        if self.gains.iter().all(|&g| g == 0.0) {
            return invalid("at least one stage gain must be positive");
        }
        if !(self.beta.is_finite() && self.l_dm >= 0.0 && self.l_dm.is_finite()) {
            return invalid("dispersion coefficient must be finite and gap length >= 0");
        }
        check_sigma(self.sigma_p)?;
        if self.gains.iter().any(|&g| g > LOW_GAIN_LIMIT) {
            warn!("stage gain above {LOW_GAIN_LIMIT}: the first-order pair picture is no longer accurate");
        }
        Ok(())
    }

    /// Sum of the stage gains, the value of `|g_T|` at `θ = 0`.
    pub fn reference_gain(&self) -> f64 {
        self.gains.iter().sum()
    }
}

/// Unnormalised multi-stage amplitude: the single-stage function times
/// `g_T(θ(Ωs, Ωi)) / Σ g_k`.
pub fn jsf_multistage_raw(omega_s: &[f64], omega_i: &[f64], spec: &StageSpec, model: &MismatchModel) -> Result<JsfGrid> {
    spec.validate()?;
    model.validate()?;
    let g_ref = spec.reference_gain();
    JsfGrid::from_fn(omega_s.to_vec(), omega_i.to_vec(), |ws, wi| {
        let theta = dispersion_phase(ws, wi, spec.beta, spec.l_dm);
        single_amplitude(ws, wi, spec.sigma_p, model) * stage_gain_total(theta, &spec.gains) / g_ref
    })
}

/// Normalised multi-stage joint spectral function.
pub fn jsf_multistage(omega_s: &[f64], omega_i: &[f64], spec: &StageSpec, model: &MismatchModel) -> Result<JsfGrid> {
    jsf_multistage_raw(omega_s, omega_i, spec, model)?.normalized()
}

/// Stage lengths `L_k = L1 (N−1)! / ((k−1)! (N−k)!)`.
pub fn binomial_lengths(n: usize, l1: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return invalid("binomial design needs at least one stage");
    }
    if !(l1 > 0.0 && l1.is_finite()) {
        return invalid(format!("first stage length must be positive, got {l1}"));
    }
    let mut out = Vec::with_capacity(n);
    let mut c = 1.0;
    for k in 0..n {
        out.push(l1 * c);
        c = c * (n - 1 - k) as f64 / (k + 1) as f64;
    }
    Ok(out)
}

/// `I(Ωs) = Σ_i |F(Ωs, Ωi)|² dΩi`.
pub fn marginal_intensity(jsf: &JsfGrid) -> Result<Vec<f64>> {
    if jsf.amp.is_empty() {
        return invalid("empty joint spectral function");
    }
    let di = jsf.d_omega_i();
    Ok(jsf.amp.row_iter().map(|row| row.iter().map(|a| a.norm_sqr()).sum::<f64>() * di).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtReport {
    /// `K = 1 / Σ λ_k⁴` with `Σ λ_k² = 1`.
    pub schmidt_number: f64,
    /// Mode weights `λ_k²` in descending order.
    pub weights: Vec<f64>,
}

/// Schmidt decomposition of a normalised joint spectral function.
pub fn schmidt_analysis(jsf: &JsfGrid) -> Result<SchmidtReport> {
    if !jsf.is_normalized() {
        return invalid(format!("Schmidt analysis needs a normalised function, norm is {}", jsf.norm()));
    }
    let scale = Complex64::new((jsf.d_omega_s() * jsf.d_omega_i()).sqrt(), 0.0);
    let m = jsf.amp.map(|a| a * scale);
    let sv = m.singular_values();
    let mut weights: Vec<f64> = sv.iter().map(|s| s * s).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    weights.sort_by(|a, b| b.total_cmp(a));
    let purity: f64 = weights.iter().map(|w| w * w).sum();
    Ok(SchmidtReport { schmidt_number: 1.0 / purity, weights })
}

/// Zeroes the amplitude outside `[s_lo, s_hi] × [i_lo, i_hi]` and
/// renormalises.
pub fn filter_box(jsf: &JsfGrid, s_bounds: (f64, f64), i_bounds: (f64, f64)) -> Result<JsfGrid> {
    let inside = |axis: &[f64], (lo, hi): (f64, f64), name: &str| -> Result<Vec<bool>> {
        if !(lo < hi) {
            return invalid(format!("{name} filter bounds must satisfy lo < hi, got ({lo}, {hi})"));
        }
        let (first, last) = (axis[0], axis[axis.len() - 1]);
        let slack = 1e-9 * (last - first);
        if lo < first - slack || hi > last + slack {
            return invalid(format!("{name} filter bounds ({lo}, {hi}) leave the grid [{first}, {last}]"));
        }
        Ok(axis.iter().map(|&w| w >= lo - slack && w <= hi + slack).collect())
    };
    let rows = inside(&jsf.omega_s, s_bounds, "omega_s")?;
    let cols = inside(&jsf.omega_i, i_bounds, "omega_i")?;
    if !rows.iter().any(|&b| b) || !cols.iter().any(|&b| b) {
        return invalid("filter box contains no grid points");
    }
    let mut out = jsf.clone();
    for r in 0..out.amp.nrows() {
        for c in 0..out.amp.ncols() {
            if !(rows[r] && cols[c]) {
                out.amp[(r, c)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    out.normalized()
}
