//! Brute-force number-basis simulator used as an independent oracle.
//!
//! States are dense amplitude vectors over `|n_1, ..., n_M>` with
//! `n_i <= cutoff`. Elements are applied as `exp(K)|ψ>` for the
//! anti-Hermitian generator `K` of each unitary, using a sub-stepped Taylor
//! series. Nothing here touches the covariance engine.

#![allow(dead_code)]

use num_complex::Complex64;

pub struct FockState {
    modes: usize,
    cutoff: usize,
    amp: Vec<Complex64>,
}

type Term = (Complex64, Vec<(usize, bool)>);

impl FockState {
    pub fn vacuum(modes: usize, cutoff: usize) -> Self {
        let dim = (cutoff + 1).pow(modes as u32);
        let mut amp = vec![Complex64::new(0.0, 0.0); dim];
        amp[0] = Complex64::new(1.0, 0.0);
        Self { modes, cutoff, amp }
    }

    fn stride(&self, mode: usize) -> usize {
        (self.cutoff + 1).pow(mode as u32)
    }

    fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % (self.cutoff + 1)
    }

    /// Applies `a_mode` (or `a_mode†` when `dagger`) to `v`.
    fn ladder(&self, v: &[Complex64], mode: usize, dagger: bool) -> Vec<Complex64> {
        let stride = self.stride(mode);
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (i, &x) in v.iter().enumerate() {
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            let n = self.occupation(i, mode);
            if dagger {
                if n < self.cutoff {
                    out[i + stride] += x * ((n + 1) as f64).sqrt();
                }
            } else if n > 0 {
                out[i - stride] += x * (n as f64).sqrt();
            }
        }
        out
    }

    /// `K v` for `K = Σ c_t Π ops_t` (operators applied right to left).
    fn generator(&self, terms: &[Term], v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (c, ops) in terms {
            let mut w = v.to_vec();
            for &(mode, dagger) in ops.iter().rev() {
                w = self.ladder(&w, mode, dagger);
            }
            for (o, x) in out.iter_mut().zip(w) {
                *o += c * x;
            }
        }
        out
    }

    fn evolve(&mut self, terms: &[Term], scale: f64) {
        let steps = ((scale * (self.cutoff as f64 + 1.0)) / 0.25).ceil().max(1.0) as usize;
        let sub: Vec<Term> = terms
            .iter()
            .map(|(c, ops)| (c / steps as f64, ops.clone()))
            .collect();
        for _ in 0..steps {
            let mut term = self.amp.clone();
            let mut acc = self.amp.clone();
            for order in 1..60 {
                term = self.generator(&sub, &term);
                let inv = 1.0 / order as f64;
                let mut norm = 0.0;
                for (a, t) in acc.iter_mut().zip(term.iter_mut()) {
                    *t *= inv;
                    *a += *t;
                    norm += t.norm_sqr();
                }
                if norm < 1e-34 {
                    break;
                }
            }
            self.amp = acc;
        }
    }

    pub fn displace(&mut self, mode: usize, alpha: Complex64) {
        let terms = vec![(alpha, vec![(mode, true)]), (-alpha.conj(), vec![(mode, false)])];
        self.evolve(&terms, alpha.norm());
    }

    /// `a1 -> G a1 + g e^{iφ} a2†`.
    pub fn two_mode_squeeze(&mut self, m1: usize, m2: usize, g: f64, phase: f64) {
        let r = g.asinh();
        let e = Complex64::from_polar(r, phase);
        let terms = vec![
            (e, vec![(m1, true), (m2, true)]),
            (-e.conj(), vec![(m1, false), (m2, false)]),
        ];
        self.evolve(&terms, r * 2.0);
    }

    /// `a1 -> √T a1 + √R a2`, `a2 -> √T a2 - √R a1`.
    pub fn beam_split(&mut self, m1: usize, m2: usize, transmissivity: f64) {
        let theta = transmissivity.sqrt().acos();
        let one = Complex64::new(theta, 0.0);
        let terms = vec![(one, vec![(m1, true), (m2, false)]), (-one, vec![(m2, true), (m1, false)])];
        self.evolve(&terms, theta);
    }

    /// `a -> a e^{iφ}`.
    pub fn phase_shift(&mut self, mode: usize, phi: f64) {
        for i in 0..self.amp.len() {
            let n = self.occupation(i, mode) as f64;
            self.amp[i] *= Complex64::from_polar(1.0, n * phi);
        }
    }

    /// Loss modelled as a splitter onto a fresh vacuum `ancilla` mode.
    pub fn attenuate(&mut self, mode: usize, ancilla: usize, loss: f64) {
        self.beam_split(mode, ancilla, 1.0 - loss);
    }

    fn quadrature(&self, index: usize) -> Vec<Complex64> {
        let mode = index / 2;
        let a = self.ladder(&self.amp, mode, false);
        let ad = self.ladder(&self.amp, mode, true);
        let i = Complex64::new(0.0, 1.0);
        if index % 2 == 0 {
            a.iter().zip(&ad).map(|(x, y)| x + y).collect()
        } else {
            a.iter().zip(&ad).map(|(x, y)| i * (y - x)).collect()
        }
    }

    /// Mean quadrature vector and symmetrised covariance over `modes`.
    pub fn moments(&self, modes: &[usize]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let q: Vec<Vec<Complex64>> = idx.iter().map(|&i| self.quadrature(i)).collect();
        let inner = |u: &[Complex64], v: &[Complex64]| -> Complex64 { u.iter().zip(v).map(|(a, b)| a.conj() * b).sum() };
        let mean: Vec<f64> = q.iter().map(|qv| inner(&self.amp, qv).re).collect();
        let cov = (0..idx.len())
            .map(|r| (0..idx.len()).map(|c| inner(&q[r], &q[c]).re - mean[r] * mean[c]).collect())
            .collect();
        (mean, cov)
    }

    pub fn mean_photon(&self, mode: usize) -> f64 {
        self.amp
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * self.occupation(i, mode) as f64)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }
}
