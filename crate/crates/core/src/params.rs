//! Physical parameters of the rotating-frame Hamiltonian and its bath.

use crate::error::{Error, Result};
use crate::prelude::*;
use alloc::format;

/// H = −Δ n + (α/2) n² + Σ_q α_q n^q + f (a + a†), damping γ, N thermal photons.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub delta: f64,
    pub alpha: f64,
    /// `(q, α_q)` for q ≥ 3.
    pub alpha_q: Vec<(u32, f64)>,
    pub drive: f64,
    pub gamma: f64,
    pub n_thermal: f64,
}

impl ModelParams {
    pub fn new(delta: f64, alpha: f64, drive: f64) -> Self {
        Self { delta, alpha, alpha_q: Vec::new(), drive, gamma: 0.0, n_thermal: 0.0 }
    }

    pub fn with_alpha3(mut self, a3: f64) -> Self {
        self.set_alpha_q(3, a3);
        self
    }

    pub fn with_damping(mut self, gamma: f64, n_thermal: f64) -> Self {
        self.gamma = gamma;
        self.n_thermal = n_thermal;
        self
    }

    /// Sets f to `ratio · f_crit` for the current Δ, α.
    pub fn with_drive_ratio(mut self, ratio: f64) -> Self {
        self.drive = ratio * self.f_crit();
        self
    }

    pub fn set_alpha_q(&mut self, q: u32, value: f64) {
        assert!(q >= 3, "α_q is defined for q ≥ 3");
        match self.alpha_q.iter_mut().find(|(k, _)| *k == q) {
            Some(e) => e.1 = value,
            None => {
                self.alpha_q.push((q, value));
                self.alpha_q.sort_by_key(|e| e.0);
            }
        }
    }

    pub fn alpha3(&self) -> f64 {
        self.alpha_q.iter().find(|e| e.0 == 3).map_or(0.0, |e| e.1)
    }

    pub fn has_high_order(&self) -> bool {
        self.alpha_q.iter().any(|e| e.1 != 0.0)
    }

    /// Copy with every α_q set to zero.
    pub fn pure_kerr(&self) -> Self {
        let mut p = self.clone();
        p.alpha_q.clear();
        p
    }

    /// Q = γ(N + 1/2).
    pub fn noise_q(&self) -> f64 {
        self.gamma * (self.n_thermal + 0.5)
    }

    pub fn f_crit(&self) -> f64 {
        (4.0 * self.delta.powi(3) / (27.0 * self.alpha)).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.delta, self.alpha, self.drive, self.gamma, self.n_thermal]
            .iter()
            .chain(self.alpha_q.iter().map(|e| &e.1))
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParams(format!("non-finite entry in {self:?}")));
        }
        // α = 0 is the linear oscillator; negative Kerr is not modelled
        if self.alpha < 0.0 {
            return Err(Error::InvalidParams(format!("alpha must be ≥ 0, got {}", self.alpha)));
        }
        if self.gamma < 0.0 || self.n_thermal < 0.0 || self.drive < 0.0 {
            return Err(Error::InvalidParams("gamma, n_thermal and drive must be ≥ 0".into()));
        }
        if self.alpha_q.iter().any(|e| e.0 < 3) {
            return Err(Error::InvalidParams("alpha_q orders must be ≥ 3".into()));
        }
        Ok(())
    }

    /// V(n) = Σ α_q n^q.
    pub fn v(&self, n: f64) -> f64 {
        self.alpha_q.iter().map(|&(q, a)| a * n.powi(q as i32)).sum()
    }

    pub fn dv(&self, n: f64) -> f64 {
        self.alpha_q.iter().map(|&(q, a)| a * q as f64 * n.powi(q as i32 - 1)).sum()
    }

    pub fn d2v(&self, n: f64) -> f64 {
        self.alpha_q.iter().map(|&(q, a)| a * (q * (q - 1)) as f64 * n.powi(q as i32 - 2)).sum()
    }

    /// Diagonal (drive-free) energy E(n) = −Δn + αn²/2 + V(n).
    pub fn energy(&self, n: f64) -> f64 {
        -self.delta * n + 0.5 * self.alpha * n * n + self.v(n)
    }

    pub fn energy_d1(&self, n: f64) -> f64 {
        -self.delta + self.alpha * n + self.dv(n)
    }

    pub fn energy_d2(&self, n: f64) -> f64 {
        self.alpha + self.d2v(n)
    }

    /// Divided difference (E(u) − E(v))/(u − v), evaluated without cancellation.
    pub fn energy_divdiff(&self, u: f64, v: f64) -> f64 {
        let mut s = -self.delta + 0.5 * self.alpha * (u + v);
        for &(q, a) in &self.alpha_q {
            let mut acc = 0.0;
            for j in 0..q as i32 {
                acc += u.powi(j) * v.powi(q as i32 - 1 - j);
            }
            s += a * acc;
        }
        s
    }

    /// Default truncation ceil(4Δ/α), at least 2 (40 for the linear oscillator).
    pub fn default_n_max(&self) -> usize {
        if self.alpha == 0.0 {
            return 40;
        }
        ((4.0 * self.delta / self.alpha).ceil() as usize).max(2)
    }

    /// Nearest integer m₀ to 2Δ/α, ties to even.
    pub fn resonance_index(&self) -> i64 {
        let x = 2.0 * self.delta / self.alpha;
        let r = x.round();
        if (x - x.trunc()).abs() == 0.5 {
            let lo = x.floor();
            return if (lo as i64) % 2 == 0 { lo as i64 } else { lo as i64 + 1 };
        }
        r as i64
    }

    /// δΔ = Δ − m₀α/2.
    pub fn detuning_offset(&self) -> f64 {
        self.delta - self.resonance_index() as f64 * self.alpha / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_crit_example() {
        let p = ModelParams::new(3.0, 1.0, 1.0);
        assert!((p.f_crit() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn noise_intensity_exact() {
        let p = ModelParams::new(3.0, 1.0, 1.0).with_damping(0.02, 3.0);
        assert_eq!(p.noise_q(), 0.02 * 3.5);
    }

    #[test]
    fn energy_polynomial() {
        let p = ModelParams::new(1.0, 2.0, 0.0).with_alpha3(0.1);
        assert!((p.energy(2.0) - 2.8).abs() < 1e-14);
        let h = 1e-6;
        let fd = (p.energy(1.3 + h) - p.energy(1.3 - h)) / (2.0 * h);
        assert!((fd - p.energy_d1(1.3)).abs() < 1e-8);
        let dd = (p.energy(2.5) - p.energy(0.7)) / (2.5 - 0.7);
        assert!((p.energy_divdiff(2.5, 0.7) - dd).abs() < 1e-13);
        assert!((p.energy_divdiff(1.3, 1.3) - p.energy_d1(1.3)).abs() < 1e-13);
    }

    #[test]
    fn resonance_index_ties_to_even() {
        assert_eq!(ModelParams::new(2.25, 1.0, 0.1).resonance_index(), 4);
        assert_eq!(ModelParams::new(2.75, 1.0, 0.1).resonance_index(), 6);
        assert_eq!(ModelParams::new(6.01, 1.0, 0.1).resonance_index(), 12);
        assert!((ModelParams::new(6.01, 1.0, 0.1).detuning_offset() - 0.01).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(ModelParams::new(1.0, -1.0, 0.1).validate().is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.1).with_damping(-1.0, 0.0).validate().is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.1).validate().is_ok());
        assert!(ModelParams::new(1.0, 0.0, 0.1).validate().is_ok());
    }
}
