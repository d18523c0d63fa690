//! Master equation in the region basis |n, r⟩ with quasiclassical matrix
//! elements.
//!
//! State vector: populations ρ^{rr}_n of every Bohr–Sommerfeld level, then
//! (Re, Im) of ρ^{13}_n for each region-1/region-3 pair. Matrix elements
//! ⟨i|a|j⟩ inside one region are Fourier harmonics of the classical orbit,
//! a(t) = Σ_k a_k e^{−ikΩt}, with k fixed by ε_i − ε_j = −kΩ.
//!
//! Cross-region elements vanish except at the separatrix: a harmonic that
//! would carry a level past ε_sep lands on the nearest level(s) of the
//! region(s) on the other side, split between regions 1 and 3 by their
//! periods. Without this junction region 2 would be disconnected.

use crate::classical::{ClassicalOrbit, PhasePortrait, Region, SymbolOrdering};
use crate::error::{Error, Result};
use crate::numerics::linalg::DenseLu;
use crate::params::ModelParams;
use crate::prelude::*;
use crate::tunneling::{quasienergy_mismatch, tunneling_amplitude};
use crate::C64;
use alloc::format;

#[derive(Debug, Clone)]
pub struct ReducedConfig {
    /// prefactor c in t = cΔ e^{−S}
    pub t_prefactor: f64,
    /// δΔ entering the pair mismatch
    pub delta_offset: f64,
    /// region-3 levels are kept up to this quasienergy (default
    /// ε₁ + ½(ε₁ − ε₂))
    pub eps3_max: Option<f64>,
    pub tunneling: bool,
}

impl ReducedConfig {
    pub fn new(t_prefactor: f64, delta_offset: f64) -> Self {
        Self { t_prefactor, delta_offset, eps3_max: None, tunneling: true }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ReducedLevel {
    pub region: Region,
    pub n: usize,
    pub eps: f64,
    pub period: f64,
    pub mean_photons: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ReducedPair {
    pub level1: usize,
    pub level3: usize,
    pub eps: f64,
    pub t: f64,
    /// ε_{n1} − ε_{n3}
    pub delta_eps: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ReducedDiagnostics {
    /// region-1 levels without a region-3 partner within half a spacing
    pub unpaired: usize,
    /// transitions redirected across the separatrix
    pub junction_transitions: usize,
    /// largest harmonic order used
    pub k_max: usize,
}

#[derive(Debug, Clone)]
pub struct ReducedGenerator {
    pub params: ModelParams,
    pub levels: Vec<ReducedLevel>,
    pub pairs: Vec<ReducedPair>,
    /// amplitudes[i·L + j] = ⟨i|a|j⟩ (zero across regions)
    pub amplitudes: Vec<f64>,
    /// rates[i·L + j]: transition rate j → i (i ≠ j)
    pub rates: Vec<f64>,
    /// total out-rate of each level
    pub out: Vec<f64>,
    /// transfer[p·P + q]: feed of coherence q into coherence p
    pub transfer: Vec<f64>,
    pub diagnostics: ReducedDiagnostics,
}

fn sign_dn(region: Region) -> f64 {
    // dε/dn: region-1 levels count down from the maximum ε₁
    match region {
        Region::One => -1.0,
        _ => 1.0,
    }
}

pub fn build_reduced_generator(params: &ModelParams, cfg: &ReducedConfig) -> Result<ReducedGenerator> {
    params.validate()?;
    let portrait = PhasePortrait::new(params, SymbolOrdering::Symmetric)?;
    let s = *portrait.sep()?;
    let eps3_max = cfg.eps3_max.unwrap_or(s.eps_1 + 0.5 * (s.eps_1 - s.eps_2));
    let mut levels = Vec::new();
    let mut orbits: Vec<ClassicalOrbit> = Vec::new();
    for region in [Region::One, Region::Two, Region::Three] {
        let bs = portrait.bohr_sommerfeld_levels(region, Some(eps3_max))?;
        for (n, eps) in bs {
            let o = portrait.trace_orbit(region, eps)?;
            levels.push(ReducedLevel { region, n, eps, period: o.period, mean_photons: o.mean_photons() });
            orbits.push(o);
        }
    }
    let l = levels.len();
    let index_of = |region: Region, n: i64| -> Option<usize> {
        if n < 0 {
            return None;
        }
        levels.iter().position(|v| v.region == region && v.n == n as usize)
    };
    let nearest = |region: Region, eps: f64| -> Option<usize> {
        levels
            .iter()
            .enumerate()
            .filter(|(_, v)| v.region == region)
            .min_by(|a, b| (a.1.eps - eps).abs().total_cmp(&(b.1.eps - eps).abs()))
            .map(|(i, _)| i)
    };

    // in-region amplitudes ⟨i|a|j⟩, symmetrized over the two orbits
    let mut amp = vec![0.0; l * l];
    let mut diag = ReducedDiagnostics::default();
    for i in 0..l {
        for j in 0..l {
            if levels[i].region != levels[j].region {
                continue;
            }
            let sg = sign_dn(levels[i].region);
            let k = (-sg * (levels[i].n as f64 - levels[j].n as f64)) as i32;
            let c = 0.5 * (orbits[i].harmonic(k) + orbits[j].harmonic(k));
            amp[i * l + j] = c.re;
        }
    }
    let (g, nth) = (params.gamma, params.n_thermal);
    let mut rates = vec![0.0; l * l];
    for i in 0..l {
        for j in 0..l {
            if i != j && levels[i].region == levels[j].region {
                rates[i * l + j] = g * (nth + 1.0) * amp[i * l + j].powi(2) + g * nth * amp[j * l + i].powi(2);
            }
        }
    }
    // junction: harmonics of a boundary level that leave its region
    // through the separatrix
    for j in 0..l {
        let lv = levels[j];
        let omega = 2.0 * PI / lv.period;
        let sg = sign_dn(lv.region);
        for &(k, c) in &orbits[j].fourier {
            diag.k_max = diag.k_max.max(k.unsigned_abs() as usize);
            let w = c.norm_sqr();
            for (channel, dir) in [(g * (nth + 1.0), -1.0), (g * nth, 1.0)] {
                if channel == 0.0 || k == 0 {
                    continue;
                }
                // ε' = ε_j ∓ kΩ
                let de = dir * k as f64 * omega;
                let n_target = lv.n as f64 + de / (sg * omega);
                if index_of(lv.region, n_target.round() as i64).is_some() {
                    continue;
                }
                let e_t = lv.eps + de;
                let crosses = match lv.region {
                    Region::Two => e_t > s.eps_sep,
                    _ => e_t < s.eps_sep,
                };
                if !crosses {
                    continue;
                }
                let targets: Vec<(usize, f64)> = match lv.region {
                    Region::Two => {
                        let i3 = nearest(Region::Three, e_t);
                        let i1 = if e_t < s.eps_1 { nearest(Region::One, e_t) } else { None };
                        match (i1, i3) {
                            (Some(a), Some(b)) => {
                                let (t1, t3) = (levels[a].period, levels[b].period);
                                vec![(a, t1 / (t1 + t3)), (b, t3 / (t1 + t3))]
                            }
                            (None, Some(b)) => vec![(b, 1.0)],
                            (Some(a), None) => vec![(a, 1.0)],
                            (None, None) => vec![],
                        }
                    }
                    _ => {
                        if e_t > s.eps_2 {
                            nearest(Region::Two, e_t).map(|a| vec![(a, 1.0)]).unwrap_or_default()
                        } else {
                            vec![]
                        }
                    }
                };
                for (i, share) in targets {
                    rates[i * l + j] += channel * w * share;
                    diag.junction_transitions += 1;
                }
            }
        }
    }
    let out: Vec<f64> = (0..l).map(|j| (0..l).filter(|&i| i != j).map(|i| rates[i * l + j]).sum()).collect();

    // pairs by nearest quasienergy
    let mut pairs = Vec::new();
    for i1 in 0..l {
        if levels[i1].region != Region::One {
            continue;
        }
        let half = 0.5 * 2.0 * PI / levels[i1].period;
        let Some(i3) = nearest(Region::Three, levels[i1].eps) else {
            diag.unpaired += 1;
            continue;
        };
        if (levels[i3].eps - levels[i1].eps).abs() > half {
            diag.unpaired += 1;
            continue;
        }
        let eps = 0.5 * (levels[i1].eps + levels[i3].eps);
        let (t, delta_eps) = if cfg.tunneling && eps > s.eps_sep && eps < s.eps_1 {
            (
                tunneling_amplitude(&portrait, eps, cfg.t_prefactor)?.value,
                quasienergy_mismatch(&portrait, eps, cfg.delta_offset)?,
            )
        } else {
            (0.0, levels[i1].eps - levels[i3].eps)
        };
        pairs.push(ReducedPair { level1: i1, level3: i3, eps, t, delta_eps });
    }
    let np = pairs.len();
    let mut transfer = vec![0.0; np * np];
    for (p, a) in pairs.iter().enumerate() {
        for (q, b) in pairs.iter().enumerate() {
            let (i1, i3, j1, j3) = (a.level1, a.level3, b.level1, b.level3);
            transfer[p * np + q] =
                g * (nth + 1.0) * amp[i1 * l + j1] * amp[i3 * l + j3] + g * nth * amp[j1 * l + i1] * amp[j3 * l + i3];
        }
    }
    Ok(ReducedGenerator { params: params.clone(), levels, pairs, amplitudes: amp, rates, out, transfer, diagnostics: diag })
}

impl ReducedGenerator {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn dim(&self) -> usize {
        self.levels.len() + 2 * self.pairs.len()
    }

    /// Decay rate of coherence p: half the summed out-rates of its levels.
    pub fn coherence_decay(&self, p: usize) -> f64 {
        let pr = &self.pairs[p];
        0.5 * (self.out[pr.level1] + self.out[pr.level3])
    }

    /// Dense real generator M with dx/dt = M x, row-major.
    pub fn matrix(&self) -> Vec<f64> {
        let (l, np, d) = (self.n_levels(), self.pairs.len(), self.dim());
        let mut m = vec![0.0; d * d];
        for i in 0..l {
            for j in 0..l {
                m[i * d + j] = if i == j { -self.out[j] } else { self.rates[i * l + j] };
            }
        }
        for (p, pr) in self.pairs.iter().enumerate() {
            let (xr, yr) = (l + 2 * p, l + 2 * p + 1);
            // populations: dρ¹¹ = it(ρ¹³ − ρ³¹) = −2t·Im ρ¹³
            m[pr.level1 * d + yr] += -2.0 * pr.t;
            m[pr.level3 * d + yr] += 2.0 * pr.t;
            // dρ¹³ = −iδε ρ¹³ + it(ρ¹¹ − ρ³³) − Γρ¹³ + Σ T ρ¹³'
            let gam = self.coherence_decay(p);
            m[xr * d + yr] += pr.delta_eps;
            m[yr * d + xr] += -pr.delta_eps;
            m[xr * d + xr] += -gam;
            m[yr * d + yr] += -gam;
            m[yr * d + pr.level1] += pr.t;
            m[yr * d + pr.level3] += -pr.t;
            for q in 0..np {
                let tr = self.transfer[p * np + q];
                m[xr * d + l + 2 * q] += tr;
                m[yr * d + l + 2 * q + 1] += tr;
            }
        }
        m
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let m = self.matrix();
        (0..d).map(|i| (0..d).map(|j| m[i * d + j] * x[j]).sum()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct ReducedState {
    pub populations: Vec<f64>,
    pub coherences: Vec<C64>,
    /// max |M x| of the solution
    pub residual: f64,
}

impl ReducedState {
    pub fn occupations(&self, g: &ReducedGenerator) -> (f64, f64, f64) {
        let mut p = [0.0; 3];
        for (lv, &x) in g.levels.iter().zip(&self.populations) {
            p[lv.region.number() as usize - 1] += x;
        }
        (p[0], p[1], p[2])
    }

    /// Net probability current from region 1 into region 3 through each pair.
    pub fn pair_currents(&self, g: &ReducedGenerator) -> Vec<f64> {
        g.pairs.iter().zip(&self.coherences).map(|(p, c)| 2.0 * p.t * c.im).collect()
    }
}

fn solve_normalized(d: usize, mut m: Vec<f64>, pop: usize, pin_row: usize) -> Result<Vec<f64>> {
    for j in 0..d {
        m[pin_row * d + j] = if j < pop { 1.0 } else { 0.0 };
    }
    let lu = DenseLu::factor(d, m)?;
    let mut b = vec![0.0; d];
    b[pin_row] = 1.0;
    Ok(lu.solve(&b))
}

fn most_populated_row(g: &ReducedGenerator) -> usize {
    // replace the balance equation of the level nearest the attractor of
    // region 2, which is never empty
    (0..g.n_levels()).filter(|&i| g.levels[i].region == Region::Two).min_by_key(|&i| g.levels[i].n).unwrap_or(0)
}

pub fn reduced_steady_state(g: &ReducedGenerator) -> Result<ReducedState> {
    if !(g.params.gamma > 0.0) {
        return Err(Error::InvalidParams("reduced steady state needs gamma > 0".into()));
    }
    let (l, d) = (g.n_levels(), g.dim());
    let m = g.matrix();
    let x = solve_normalized(d, m.clone(), l, most_populated_row(g))?;
    let residual = (0..d)
        .map(|i| (0..d).map(|j| m[i * d + j] * x[j]).sum::<f64>().abs())
        .fold(0.0, f64::max);
    let coherences = (0..g.pairs.len()).map(|p| C64::new(x[l + 2 * p], x[l + 2 * p + 1])).collect();
    if x[..l].iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver(format!("reduced steady state not finite (residual {residual:e})")));
    }
    Ok(ReducedState { populations: x[..l].to_vec(), coherences, residual })
}

/// Stationary state with every coherence eliminated: the equation of motion of ρ¹³ at
/// ∂_t = 0 is solved for the coherences as a linear function of the
/// populations, and the resulting population-only generator is solved.
pub fn eliminated_steady_state(g: &ReducedGenerator) -> Result<ReducedState> {
    if !(g.params.gamma > 0.0) {
        return Err(Error::InvalidParams("reduced steady state needs gamma > 0".into()));
    }
    let (l, d) = (g.n_levels(), g.dim());
    let nc = d - l;
    let m = g.matrix();
    let mut eff: Vec<f64> = (0..l * l).map(|k| m[(k / l) * d + k % l]).collect();
    let mut coh_of_pop = vec![0.0; nc * l];
    if nc > 0 {
        let cblock: Vec<f64> = (0..nc * nc).map(|k| m[(l + k / nc) * d + l + k % nc]).collect();
        let lu = DenseLu::factor(nc, cblock)?;
        // X = −C⁻¹B, column by column (only paired levels feed coherences)
        for j in 0..l {
            let b: Vec<f64> = (0..nc).map(|r| -m[(l + r) * d + j]).collect();
            if b.iter().all(|&v| v == 0.0) {
                continue;
            }
            let x = lu.solve(&b);
            for r in 0..nc {
                coh_of_pop[r * l + j] = x[r];
            }
        }
        for i in 0..l {
            for j in 0..l {
                eff[i * l + j] += (0..nc).map(|r| m[i * d + l + r] * coh_of_pop[r * l + j]).sum::<f64>();
            }
        }
    }
    let x = solve_normalized(l, eff.clone(), l, most_populated_row(g))?;
    let residual = (0..l).map(|i| (0..l).map(|j| eff[i * l + j] * x[j]).sum::<f64>().abs()).fold(0.0, f64::max);
    let coh: Vec<f64> = (0..nc).map(|r| (0..l).map(|j| coh_of_pop[r * l + j] * x[j]).sum()).collect();
    let coherences = (0..g.pairs.len()).map(|p| C64::new(coh[2 * p], coh[2 * p + 1])).collect();
    Ok(ReducedState { populations: x, coherences, residual })
}

/// Stationary state with each coherence slaved to its own pair only,
/// ρ¹³ = t(ρ¹¹ − ρ³³)/(δε − iγ̃/2), γ̃ = 2(Γ − T_pp): the Lorentzian pair
/// rate of the quasienergy description. Transfer between different pairs
/// is dropped.
pub fn isolated_pair_steady_state(g: &ReducedGenerator) -> Result<ReducedState> {
    if !(g.params.gamma > 0.0) {
        return Err(Error::InvalidParams("reduced steady state needs gamma > 0".into()));
    }
    let l = g.n_levels();
    let np = g.pairs.len();
    let mut m = vec![0.0; l * l];
    for i in 0..l {
        for j in 0..l {
            m[i * l + j] = if i == j { -g.out[j] } else { g.rates[i * l + j] };
        }
    }
    let gt: Vec<f64> = (0..np).map(|p| 2.0 * (g.coherence_decay(p) - g.transfer[p * np + p])).collect();
    for (p, pr) in g.pairs.iter().enumerate() {
        let w = crate::tunneling::lorentzian_rate(gt[p], pr.t, pr.delta_eps);
        let (a, b) = (pr.level1, pr.level3);
        m[a * l + a] -= w;
        m[a * l + b] += w;
        m[b * l + b] -= w;
        m[b * l + a] += w;
    }
    let x = solve_normalized(l, m.clone(), l, most_populated_row(g))?;
    let residual = (0..l).map(|i| (0..l).map(|j| m[i * l + j] * x[j]).sum::<f64>().abs()).fold(0.0, f64::max);
    let coherences = g
        .pairs
        .iter()
        .enumerate()
        .map(|(p, pr)| C64::new(pr.t * (x[pr.level1] - x[pr.level3]), 0.0) / C64::new(pr.delta_eps, -0.5 * gt[p]))
        .collect();
    Ok(ReducedState { populations: x, coherences, residual })
}
