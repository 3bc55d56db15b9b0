//! Multimode Gaussian states in the quadrature picture.
//!
//! Quadratures are `X = a + a†` and `Y = i(a† - a)`, so the vacuum has unit
//! variance in every quadrature. The phase-space vector is ordered
//! `(X_1, Y_1, ..., X_N, Y_N)`. Every unitary element acts as `x -> S x`
//! on the quadrature vector, so means map as `S mean` and covariances as
//! `S cov Sᵀ`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// One term `weight * X_mode(angle)` of a linear quadrature measurement,
/// where `X(θ) = a e^{-iθ} + a† e^{iθ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureCoefficient {
    pub mode: usize,
    pub angle: f64,
    pub weight: f64,
}

impl QuadratureCoefficient {
    pub fn new(mode: usize, angle: f64, weight: f64) -> Self {
        Self { mode, angle, weight }
    }

    /// `X` quadrature with unit weight.
    pub fn x(mode: usize) -> Self {
        Self::new(mode, 0.0, 1.0)
    }

    /// `Y` quadrature with unit weight.
    pub fn y(mode: usize) -> Self {
        Self::new(mode, std::f64::consts::FRAC_PI_2, 1.0)
    }

    pub fn scaled(self, weight: f64) -> Self {
        Self { weight: self.weight * weight, ..self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n_modes: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

/// Tolerance used when validating user-supplied covariance matrices.
const SYMMETRY_TOL: f64 = 1e-12;

/// Amplitude gain `G = sqrt(1 + g²)` paired with a parametric gain `g`.
pub fn amplitude_gain(g: f64) -> f64 {
    (1.0 + g * g).sqrt()
}

impl GaussianState {
    /// Vacuum on `n_modes` modes: zero mean, identity covariance.
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return invalid("a state needs at least one mode");
        }
        let dim = 2 * n_modes;
        Ok(Self {
            n_modes,
            mean: DVector::zeros(dim),
            cov: DMatrix::identity(dim, dim),
        })
    }

    /// Builds a state from raw moments. The covariance must be square,
    /// symmetric, and satisfy the uncertainty principle.
    pub fn from_moments(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || dim % 2 != 0 {
            return invalid(format!("mean vector length {dim} is not a positive even number"));
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return invalid(format!(
                "covariance is {}x{}, expected {dim}x{dim}",
                cov.nrows(),
                cov.ncols()
            ));
        }
        let asym = (&cov - cov.transpose()).amax();
        if asym > SYMMETRY_TOL {
            return invalid(format!("covariance asymmetry {asym:e} exceeds {SYMMETRY_TOL:e}"));
        }
        let state = Self { n_modes: dim / 2, mean, cov };
        let nu = state.min_symplectic_eigenvalue();
        if nu < 1.0 - state.uncertainty_tolerance() {
            return invalid(format!("covariance violates the uncertainty principle (min symplectic eigenvalue {nu})"));
        }
        Ok(state)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            return invalid(format!("mode {mode} out of range for {} modes", self.n_modes));
        }
        Ok(())
    }

    fn check_pair(&self, m1: usize, m2: usize) -> Result<()> {
        self.check_mode(m1)?;
        self.check_mode(m2)?;
        if m1 == m2 {
            return invalid(format!("two-mode element needs distinct modes, got {m1} twice"));
        }
        Ok(())
    }

    /// Displaces `mode` by the complex amplitude `alpha`.
    pub fn displace(&self, mode: usize, alpha: Complex64) -> Result<Self> {
        let mut out = self.clone();
        out.displace_in_place(mode, alpha)?;
        Ok(out)
    }

    /// In-place form of [`displace`](Self::displace).
    pub fn displace_in_place(&mut self, mode: usize, alpha: Complex64) -> Result<()> {
        self.check_mode(mode)?;
        self.mean[2 * mode] += 2.0 * alpha.re;
        self.mean[2 * mode + 1] += 2.0 * alpha.im;
        Ok(())
    }

    /// Two-mode parametric amplifier `a1 -> G a1 + g e^{iφ} a2†`,
    /// `a2 -> G a2 + g e^{iφ} a1†` with `G = sqrt(1 + g²)`.
    pub fn two_mode_squeeze(&self, m1: usize, m2: usize, g: f64, pump_phase: f64) -> Result<Self> {
        let mut out = self.clone();
        out.two_mode_squeeze_in_place(m1, m2, g, pump_phase)?;
        Ok(out)
    }

    pub fn two_mode_squeeze_in_place(&mut self, m1: usize, m2: usize, g: f64, pump_phase: f64) -> Result<()> {
        self.check_pair(m1, m2)?;
        if !(g >= 0.0) || !g.is_finite() {
            return invalid(format!("parametric gain must be finite and >= 0, got {g}"));
        }
        let s = two_mode_squeezer_matrix(self.n_modes, m1, m2, g, pump_phase);
        self.apply_symplectic(&s);
        Ok(())
    }

    /// Rotates the quadrature plane of `mode` by `phi` (`a -> a e^{iφ}`).
    pub fn phase_shift(&self, mode: usize, phi: f64) -> Result<Self> {
        let mut out = self.clone();
        out.phase_shift_in_place(mode, phi)?;
        Ok(out)
    }

    pub fn phase_shift_in_place(&mut self, mode: usize, phi: f64) -> Result<()> {
        self.check_mode(mode)?;
        if !phi.is_finite() {
            return invalid("phase must be finite");
        }
        let s = phase_shifter_matrix(self.n_modes, mode, phi);
        self.apply_symplectic(&s);
        Ok(())
    }

    /// Beam splitter `a1 -> √T a1 + √R a2`, `a2 -> √T a2 - √R a1`.
    pub fn beam_split(&self, m1: usize, m2: usize, transmissivity: f64) -> Result<Self> {
        let mut out = self.clone();
        out.beam_split_in_place(m1, m2, transmissivity)?;
        Ok(out)
    }

    pub fn beam_split_in_place(&mut self, m1: usize, m2: usize, transmissivity: f64) -> Result<()> {
        self.check_pair(m1, m2)?;
        check_unit_interval("transmissivity", transmissivity)?;
        let s = beam_splitter_matrix(self.n_modes, m1, m2, transmissivity);
        self.apply_symplectic(&s);
        Ok(())
    }

    /// Pure-loss channel: a beam splitter of transmissivity `1 - loss`
    /// whose other input is vacuum.
    pub fn attenuate(&self, mode: usize, loss: f64) -> Result<Self> {
        let mut out = self.clone();
        out.attenuate_in_place(mode, loss)?;
        Ok(out)
    }

    pub fn attenuate_in_place(&mut self, mode: usize, loss: f64) -> Result<()> {
        self.check_mode(mode)?;
        check_unit_interval("loss", loss)?;
        let t = (1.0 - loss).sqrt();
        let dim = 2 * self.n_modes;
        for q in [2 * mode, 2 * mode + 1] {
            self.mean[q] *= t;
            for j in 0..dim {
                self.cov[(q, j)] *= t;
                self.cov[(j, q)] *= t;
            }
            self.cov[(q, q)] += loss;
        }
        self.symmetrize();
        Ok(())
    }

    /// Applies `x -> S x`.
    pub fn apply_symplectic(&mut self, s: &DMatrix<f64>) {
        self.mean = s * &self.mean;
        self.cov = s * &self.cov * s.transpose();
        self.symmetrize();
    }

    fn symmetrize(&mut self) {
        let t = self.cov.transpose();
        self.cov = (&self.cov + t) * 0.5;
    }

    /// Linear functional `c` with `c·x = Σ w_i X_{m_i}(θ_i)`.
    pub fn measurement_vector(&self, coeffs: &[QuadratureCoefficient]) -> Result<DVector<f64>> {
        if coeffs.is_empty() {
            return invalid("measurement needs at least one quadrature coefficient");
        }
        let mut c = DVector::zeros(2 * self.n_modes);
        for q in coeffs {
            self.check_mode(q.mode)?;
            c[2 * q.mode] += q.weight * q.angle.cos();
            c[2 * q.mode + 1] += q.weight * q.angle.sin();
        }
        Ok(c)
    }

    /// Mean and variance of `Σ w_i X_{m_i}(θ_i)`.
    pub fn homodyne_moments(&self, coeffs: &[QuadratureCoefficient]) -> Result<(f64, f64)> {
        let c = self.measurement_vector(coeffs)?;
        let mean = c.dot(&self.mean);
        let var = (c.transpose() * &self.cov * &c)[(0, 0)];
        Ok((mean, var))
    }

    /// Mean photon number `<a†a>` of one mode, spontaneous part included.
    pub fn mean_photon(&self, mode: usize) -> Result<f64> {
        self.check_mode(mode)?;
        let (x, y) = (2 * mode, 2 * mode + 1);
        Ok((self.mean[x].powi(2) + self.mean[y].powi(2) + self.cov[(x, x)] + self.cov[(y, y)] - 2.0) / 4.0)
    }

    /// Photon number carried by the coherent (mean-field) part of one mode,
    /// `|<a>|²`. This is the seeded term that survives the strong-seed limit.
    pub fn coherent_photons(&self, mode: usize) -> Result<f64> {
        self.check_mode(mode)?;
        Ok((self.mean[2 * mode].powi(2) + self.mean[2 * mode + 1].powi(2)) / 4.0)
    }

    /// Covariance `Cov(n_j, n_k)` of photon numbers of two modes.
    ///
    /// Uses the Wigner symbols `n = |β|² - 1/2` and `n² = |β|⁴ - |β|²`
    /// together with Isserlis' theorem for quadratic forms of a Gaussian.
    pub fn photon_covariance(&self, j: usize, k: usize) -> Result<f64> {
        self.check_mode(j)?;
        self.check_mode(k)?;
        let bj = [2 * j, 2 * j + 1];
        let bk = [2 * k, 2 * k + 1];
        // 2 tr(A V B V) + 4 μᵀ A V B μ with A, B = block projectors / 4.
        let mut trace = 0.0;
        for &p in &bj {
            for &q in &bk {
                trace += self.cov[(p, q)] * self.cov[(q, p)];
            }
        }
        let mut cross = 0.0;
        for &p in &bj {
            for &q in &bk {
                cross += self.mean[p] * self.cov[(p, q)] * self.mean[q];
            }
        }
        let mut value = 2.0 * trace / 16.0 + 4.0 * cross / 16.0;
        if j == k {
            value -= 0.25;
        }
        Ok(value)
    }

    /// Mean and variance of the weighted photon-number combination
    /// `Σ w_i n_{m_i}` (for example a balanced difference current).
    pub fn photon_number_moments(&self, weights: &[(usize, f64)]) -> Result<(f64, f64)> {
        if weights.is_empty() {
            return invalid("photon-number measurement needs at least one mode");
        }
        let mut mean = 0.0;
        let mut var = 0.0;
        for &(j, wj) in weights {
            mean += wj * self.mean_photon(j)?;
            for &(k, wk) in weights {
                var += wj * wk * self.photon_covariance(j, k)?;
            }
        }
        Ok((mean, var))
    }

    /// Total mean photon number over all modes.
    pub fn total_photons(&self) -> f64 {
        (0..self.n_modes).map(|m| self.mean_photon(m).unwrap_or(0.0)).sum()
    }

    /// Symplectic eigenvalues in ascending order; all are >= 1 for a
    /// physical state in vacuum-variance-one units.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        // V = L Lᵀ, and Lᵀ Ω L shares its spectrum with V^½ Ω V^½
        let l = match Cholesky::new(self.cov.clone()) {
            Some(c) => c.l(),
            None => return vec![0.0; self.n_modes],
        };
        let k = l.transpose() * symplectic_form(self.n_modes) * &l;
        let kkt = &k * k.transpose();
        let mut nu: Vec<f64> = SymmetricEigen::new(kkt).eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect();
        nu.sort_by(|a, b| a.total_cmp(b));
        // eigenvalues of KKᵀ come in degenerate pairs
        nu.into_iter().step_by(2).collect()
    }

    pub fn min_symplectic_eigenvalue(&self) -> f64 {
        self.symplectic_eigenvalues().first().copied().unwrap_or(f64::NAN)
    }

    /// Whether `cov + iΩ ⪰ 0` within `1e-9`.
    pub fn satisfies_uncertainty(&self) -> bool {
        self.min_symplectic_eigenvalue() >= 1.0 - self.uncertainty_tolerance()
    }

    /// Roundoff floor for the symplectic eigenvalues, which grows with the
    /// square of the largest covariance entry.
    pub fn uncertainty_tolerance(&self) -> f64 {
        1e-9 + 1e-14 * self.cov.amax().powi(2)
    }

    /// Reduced state of a subset of modes, in the given order.
    pub fn reduced(&self, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() {
            return invalid("reduced state needs at least one mode");
        }
        let mut idx = Vec::with_capacity(2 * modes.len());
        for &m in modes {
            self.check_mode(m)?;
            idx.push(2 * m);
            idx.push(2 * m + 1);
        }
        let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i]));
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.cov[(idx[r], idx[c])]);
        Ok(Self { n_modes: modes.len(), mean, cov })
    }
}

fn check_unit_interval(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {value}")));
    }
    Ok(())
}

/// `Ω = ⊕ [[0, 1], [-1, 0]]`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for m in 0..n_modes {
        omega[(2 * m, 2 * m + 1)] = 1.0;
        omega[(2 * m + 1, 2 * m)] = -1.0;
    }
    omega
}

pub fn two_mode_squeezer_matrix(n_modes: usize, m1: usize, m2: usize, g: f64, pump_phase: f64) -> DMatrix<f64> {
    let big = amplitude_gain(g);
    let (c, s) = (g * pump_phase.cos(), g * pump_phase.sin());
    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for (a, b) in [(m1, m2), (m2, m1)] {
        let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
        m[(xa, xa)] = big;
        m[(ya, ya)] = big;
        // X_a' = G X_a + g(cos φ X_b + sin φ Y_b)
        m[(xa, xb)] = c;
        m[(xa, yb)] = s;
        // Y_a' = G Y_a + g(sin φ X_b - cos φ Y_b)
        m[(ya, xb)] = s;
        m[(ya, yb)] = -c;
    }
    m
}

pub fn phase_shifter_matrix(n_modes: usize, mode: usize, phi: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    let (x, y) = (2 * mode, 2 * mode + 1);
    let (c, s) = (phi.cos(), phi.sin());
    m[(x, x)] = c;
    m[(x, y)] = -s;
    m[(y, x)] = s;
    m[(y, y)] = c;
    m
}

pub fn beam_splitter_matrix(n_modes: usize, m1: usize, m2: usize, transmissivity: f64) -> DMatrix<f64> {
    let t = transmissivity.sqrt();
    let r = (1.0 - transmissivity).sqrt();
    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for q in 0..2 {
        let (i, j) = (2 * m1 + q, 2 * m2 + q);
        m[(i, i)] = t;
        m[(i, j)] = r;
        m[(j, j)] = t;
        m[(j, i)] = -r;
    }
    m
}
