//! Stationary quasienergy Fokker–Planck equation with tunneling.
//!
//! With the flux F_r = Q D_r ∂P_r/∂ε − γ K_r P_r (K_r = orientation ×
//! orbit action, D_r = ∮|∂H/∂a|² dt, both from [`crate::classical`]) the
//! stationary problem is ∂_ε F_r = ∓ sources, zero-flux at the outer ends,
//! and F₂(ε_sep) = F₁(ε_sep) + F₃(ε_sep) with P continuous at the
//! separatrix. Densities are per unit phase-space area, normalized by
//! Σ_r ∫ P_r dA_r / 2π = 1 (dA_r = T_r dε).
//!
//! Branches of the closed form, above the separatrix:
//! - (ε_sep, ε_crit]: regions 1 and 3 equilibrated, combined coefficient
//!   (K₁ + K₃)/(D₁ + D₃);
//! - (ε_crit, ε_res]: constant flux F₁ = −J, F₃ = +J;
//! - above ε_res: zero flux.
//!
//! The resonant pair transfers 2πw(P₁ − P₃) per unit time at ε_res, where
//! w is its Lorentzian pair rate and 2π/T is the level spacing it occupies.

use crate::classical::{PhasePortrait, Region, SymbolOrdering};
use crate::error::{Error, Result};
use crate::numerics::linalg::BandMatrix;
use crate::numerics::quad::cumulative_quadratic;
use crate::params::ModelParams;
use crate::prelude::*;
use crate::tunneling::{lambda_profile, TunnelProfile};
use alloc::format;

/// Orbit coefficients at one quasienergy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coef {
    pub drift: f64,
    pub diffusion: f64,
    pub action: f64,
}

pub trait Coefficients {
    fn coefficients(&self, region: Region, eps: f64) -> Result<Coef>;
}

impl Coefficients for PhasePortrait {
    fn coefficients(&self, region: Region, eps: f64) -> Result<Coef> {
        let s = *self.sep()?;
        let nudge = 1e-11 * (s.eps_1 - s.eps_2);
        let (lo, hi) = self.window(region)?;
        let e = eps.max(lo + nudge).min(hi - nudge);
        let av = self.averages(region, e)?;
        Ok(Coef { drift: av.drift, diffusion: av.diffusion, action: av.action })
    }
}

impl<F: Fn(Region, f64) -> Coef> Coefficients for F {
    fn coefficients(&self, region: Region, eps: f64) -> Result<Coef> {
        Ok(self(region, eps))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub eps: f64,
    /// Lorentzian pair rate w = γ̃t²/(δε² + γ̃²/4)
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TunnelMode {
    /// strong-tunneling branch and the resonant pair
    Full,
    /// strong-tunneling branch only
    NoResonance,
    /// t ≡ 0
    Classical,
}

#[derive(Debug, Clone)]
pub struct FpeSetup {
    pub gamma: f64,
    /// Q = γ(N + ½)
    pub noise: f64,
    pub eps_2: f64,
    pub eps_sep: f64,
    pub eps_1: f64,
    pub eps_crit: f64,
    pub resonance: Option<Resonance>,
    /// region-3 reflective boundary; found from `cutoff` when `None`
    pub eps3_cut: Option<f64>,
    /// P below this fraction of P(ε_sep) (zero-flux solution) ends region 3
    pub cutoff: f64,
}

impl FpeSetup {
    pub fn from_profile(params: &ModelParams, portrait: &PhasePortrait, profile: &TunnelProfile, mode: TunnelMode) -> Result<Self> {
        let s = *portrait.sep()?;
        let (eps_crit, resonance) = match mode {
            TunnelMode::Classical => (s.eps_sep, None),
            TunnelMode::NoResonance => (profile.eps_crit, None),
            TunnelMode::Full => (
                profile.eps_crit,
                profile.resonance.filter(|r| r.eps > profile.eps_crit && r.eps < s.eps_1).map(|r| Resonance { eps: r.eps, rate: r.rate }),
            ),
        };
        Ok(Self {
            gamma: params.gamma,
            noise: params.noise_q(),
            eps_2: s.eps_2,
            eps_sep: s.eps_sep,
            eps_1: s.eps_1,
            eps_crit: eps_crit.clamp(s.eps_sep, s.eps_1),
            resonance,
            eps3_cut: None,
            cutoff: 1e-16,
        })
    }
}

/// Node placement: `n_log` points log-spaced in the normalized distance
/// u ∈ [u_min, 1e-2] from the separatrix, `n_lin` uniform points beyond.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub n_log: usize,
    pub n_lin: usize,
    pub u_min: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n_log: 60, n_lin: 400, u_min: 1e-9 }
    }
}

impl GridSpec {
    fn unit_nodes(&self) -> Vec<f64> {
        let mut u = vec![0.0];
        let (l0, l1) = (self.u_min.ln(), 1e-2f64.ln());
        for k in 0..self.n_log {
            u.push((l0 + (l1 - l0) * k as f64 / self.n_log as f64).exp());
        }
        for k in 0..=self.n_lin {
            u.push(1e-2 + (1.0 - 1e-2) * k as f64 / self.n_lin as f64);
        }
        u
    }
}

#[derive(Debug, Clone)]
pub struct RegionDensity {
    pub region: Region,
    /// ascending quasienergies
    pub eps: Vec<f64>,
    pub density: Vec<f64>,
    pub action: Vec<f64>,
}

impl RegionDensity {
    /// ∫ P |dA| / 2π.
    pub fn probability(&self) -> f64 {
        let c = cumulative_quadratic(&self.action, &self.density);
        c.last().map_or(0.0, |v| v.abs()) / (2.0 * PI)
    }

    /// Density at `eps`, log-linear interpolation; `None` outside the grid.
    pub fn at(&self, eps: f64) -> Option<f64> {
        let x = &self.eps;
        if eps < x[0] || eps > *x.last()? {
            return None;
        }
        let k = x.partition_point(|&v| v < eps).clamp(1, x.len() - 1);
        let (a, b) = (self.density[k - 1], self.density[k]);
        let w = if x[k] > x[k - 1] { (eps - x[k - 1]) / (x[k] - x[k - 1]) } else { 0.0 };
        if a > 0.0 && b > 0.0 {
            Some((a.ln() * (1.0 - w) + b.ln() * w).exp())
        } else {
            Some(a * (1.0 - w) + b * w)
        }
    }
}

#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    /// regions 1, 2, 3 in that order
    pub regions: [RegionDensity; 3],
    pub flow_j: f64,
    pub eps_sep: f64,
    pub eps_crit: f64,
    pub eps_res: Option<f64>,
    pub eps3_cut: f64,
    pub occupations: (f64, f64, f64),
    /// |negative mass| removed by clipping
    pub clipped: f64,
    /// conservation residual of the discrete separatrix balance (BVP only)
    pub flux_residual: f64,
}

impl StationaryDistribution {
    pub fn region(&self, r: Region) -> &RegionDensity {
        &self.regions[r.number() as usize - 1]
    }

    /// max over the nodes of `other` of |P_other − P_self| / max P_self.
    pub fn sup_mismatch(&self, other: &StationaryDistribution) -> f64 {
        let pmax = self.regions.iter().flat_map(|r| r.density.iter()).fold(0.0f64, |a, &b| a.max(b));
        let mut worst = 0.0f64;
        for (mine, theirs) in self.regions.iter().zip(&other.regions) {
            for (&e, &p) in theirs.eps.iter().zip(&theirs.density) {
                if let Some(q) = mine.at(e) {
                    worst = worst.max((p - q).abs() / pmax);
                }
            }
        }
        worst
    }
}

pub fn occupations_from_distribution(dist: &StationaryDistribution) -> (f64, f64, f64) {
    let p: Vec<f64> = dist.regions.iter().map(|r| r.probability()).collect();
    (p[0], p[1], p[2])
}

struct Tables {
    /// region 2, ascending, last node at ε_sep
    r2: Vec<(f64, Coef)>,
    /// shared nodes on [ε_sep, ε₁] for regions 1 and 3
    shared: Vec<(f64, Coef, Coef)>,
    /// region 3 above ε₁
    ext: Vec<(f64, Coef)>,
    i_crit: usize,
    i_res: Option<usize>,
}

fn insert_node(nodes: &mut Vec<f64>, e: f64, tol: f64) -> usize {
    let last = nodes.len() - 1;
    if e <= nodes[0] + tol {
        return 0;
    }
    if e >= nodes[last] - tol {
        return last;
    }
    let k = nodes.partition_point(|&v| v < e);
    for j in [k - 1, k] {
        if (nodes[j] - e).abs() <= tol && j != 0 && j != last {
            nodes[j] = e;
            return j;
        }
    }
    nodes.insert(k, e);
    k
}

/// Coefficients with ε kept strictly inside the region's window.
fn coef_at<C: Coefficients>(setup: &FpeSetup, coeffs: &C, region: Region, eps: f64) -> Result<Coef> {
    let d = 1e-11 * (setup.eps_1 - setup.eps_2);
    let e = match region {
        Region::One => eps.clamp(setup.eps_sep + d, setup.eps_1 - d),
        Region::Two => eps.clamp(setup.eps_2 + d, setup.eps_sep - d),
        Region::Three => eps.max(setup.eps_sep + d),
    };
    coeffs.coefficients(region, e)
}

/// Zero-flux exponent rate a = γK/(QD).
fn rate(setup: &FpeSetup, c: &Coef) -> f64 {
    setup.gamma * c.drift / (setup.noise * c.diffusion)
}

fn build_tables<C: Coefficients>(setup: &FpeSetup, coeffs: &C, grid: &GridSpec) -> Result<Tables> {
    let w1 = setup.eps_1 - setup.eps_sep;
    let w2 = setup.eps_sep - setup.eps_2;
    let u = grid.unit_nodes();
    let mut r2 = Vec::with_capacity(u.len());
    for &x in u.iter().rev() {
        let e = if x >= 1.0 { setup.eps_2 } else { setup.eps_sep - w2 * x };
        r2.push((e, coef_at(setup, coeffs, Region::Two, e)?));
    }
    let mut nodes: Vec<f64> = u.iter().map(|&x| setup.eps_sep + w1 * x).collect();
    *nodes.last_mut().unwrap() = setup.eps_1;
    let tol = 1e-3 * w1 / grid.n_lin as f64;
    let mut i_crit = insert_node(&mut nodes, setup.eps_crit, tol);
    let mut i_res = None;
    if let Some(r) = setup.resonance {
        let len = nodes.len();
        let k = insert_node(&mut nodes, r.eps, tol);
        if nodes.len() > len && k <= i_crit {
            i_crit += 1;
        }
        if k > i_crit {
            i_res = Some(k);
        }
    }
    let mut shared = Vec::with_capacity(nodes.len());
    for &e in &nodes {
        shared.push((e, coef_at(setup, coeffs, Region::One, e)?, coef_at(setup, coeffs, Region::Three, e)?));
    }
    // region 3 beyond ε₁ until the zero-flux density has dropped by `cutoff`
    let mut ext = Vec::new();
    let h = w1 / grid.n_lin as f64;
    let cap = setup.eps_1 + 50.0 * (setup.eps_1 - setup.eps_2);
    let target = setup.eps3_cut;
    let drop = -setup.cutoff.ln();
    let xs: Vec<f64> = shared.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = shared.iter().map(|s| rate(setup, &s.2)).collect();
    let mut phi = *cumulative_quadratic(&xs, &ys).last().unwrap();
    let (mut e_prev, mut a_prev) = (setup.eps_1, *ys.last().unwrap());
    loop {
        let e = e_prev + h;
        let done = match target {
            Some(c) => e >= c,
            None => -phi >= drop,
        };
        if done || e > cap {
            if let Some(c) = target {
                if c > e_prev {
                    ext.push((c, coef_at(setup, coeffs, Region::Three, c)?));
                }
            }
            break;
        }
        let c = coef_at(setup, coeffs, Region::Three, e)?;
        let a = rate(setup, &c);
        phi += 0.5 * h * (a + a_prev);
        ext.push((e, c));
        e_prev = e;
        a_prev = a;
    }
    Ok(Tables { r2, shared, ext, i_crit, i_res })
}

fn finish(
    setup: &FpeSetup,
    mut regions: [RegionDensity; 3],
    mut j: f64,
    eps3_cut: f64,
    flux_residual: f64,
) -> Result<StationaryDistribution> {
    let mut clipped = 0.0;
    for r in regions.iter_mut() {
        if r.density.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver(format!("non-finite density in region {}", r.region.number())));
        }
        let neg: Vec<f64> = r.density.iter().map(|&v| v.min(0.0)).collect();
        let m = cumulative_quadratic(&r.action, &neg).last().map_or(0.0, |v| v.abs()) / (2.0 * PI);
        clipped += m;
        for v in r.density.iter_mut() {
            *v = v.max(0.0);
        }
    }
    let z: f64 = regions.iter().map(|r| r.probability()).sum();
    if clipped > 1e-9 * z {
        return Err(Error::Solver(format!("negative probability mass {clipped:e}")));
    }
    for r in regions.iter_mut() {
        for v in r.density.iter_mut() {
            *v /= z;
        }
    }
    j /= z;
    let mut dist = StationaryDistribution {
        regions,
        flow_j: j,
        eps_sep: setup.eps_sep,
        eps_crit: setup.eps_crit,
        eps_res: setup.resonance.map(|r| r.eps),
        eps3_cut,
        occupations: (0.0, 0.0, 0.0),
        clipped: clipped / z,
        flux_residual,
    };
    dist.occupations = occupations_from_distribution(&dist);
    Ok(dist)
}

/// Closed-form piecewise stationary solution.
pub fn stationary_solution<C: Coefficients>(setup: &FpeSetup, coeffs: &C, grid: &GridSpec) -> Result<StationaryDistribution> {
    let t = build_tables(setup, coeffs, grid)?;
    let (ic, ires) = (t.i_crit, t.i_res);
    // region 2 from the separatrix downwards
    let x2: Vec<f64> = t.r2.iter().map(|v| v.0).collect();
    let a2: Vec<f64> = t.r2.iter().map(|v| rate(setup, &v.1)).collect();
    let phi2 = cumulative_quadratic(&x2, &a2);
    let top2 = *phi2.last().unwrap();
    let p2: Vec<f64> = phi2.iter().map(|&f| (f - top2).exp()).collect();

    let xs: Vec<f64> = t.shared.iter().map(|v| v.0).collect();
    let n = xs.len();
    let comb: Vec<f64> = t
        .shared
        .iter()
        .map(|(_, c1, c3)| setup.gamma * (c1.drift + c3.drift) / (setup.noise * (c1.diffusion + c3.diffusion)))
        .collect();
    let phic = cumulative_quadratic(&xs[..=ic], &comb[..=ic]);
    let mut p1 = vec![0.0; n];
    let mut p3 = vec![0.0; n];
    for i in 0..=ic {
        p1[i] = phic[i].exp();
        p3[i] = p1[i];
    }
    let pc = p1[ic];
    let a1: Vec<f64> = t.shared.iter().map(|v| rate(setup, &v.1)).collect();
    let a3: Vec<f64> = t.shared.iter().map(|v| rate(setup, &v.2)).collect();
    let phi1 = cumulative_quadratic(&xs[ic..], &a1[ic..]);
    let phi3 = cumulative_quadratic(&xs[ic..], &a3[ic..]);
    if phi1.iter().chain(&phi3).any(|f| f.abs() > 650.0) {
        return Err(Error::Solver("zero-flux exponent exceeds the floating-point range".into()));
    }
    let mut j = 0.0;
    if let Some(ir) = ires {
        let w = setup.resonance.unwrap().rate;
        let g_of = |phi: &[f64], c: &dyn Fn(usize) -> Coef| -> Vec<f64> {
            let y: Vec<f64> = (ic..=ir).map(|i| (-phi[i - ic]).exp() / (setup.noise * c(i).diffusion)).collect();
            cumulative_quadratic(&xs[ic..=ir], &y)
        };
        let g1 = g_of(&phi1, &|i| t.shared[i].1);
        let g3 = g_of(&phi3, &|i| t.shared[i].2);
        let k = ir - ic;
        let (e1, e3) = (phi1[k].exp(), phi3[k].exp());
        let tw = 2.0 * PI * w;
        j = tw * pc * (e1 - e3) / (1.0 + tw * (e1 * g1[k] + e3 * g3[k]));
        for i in ic..=ir {
            p1[i] = phi1[i - ic].exp() * (pc - j * g1[i - ic]);
            p3[i] = phi3[i - ic].exp() * (pc + j * g3[i - ic]);
        }
        for i in ir + 1..n {
            p1[i] = p1[ir] * (phi1[i - ic] - phi1[k]).exp();
            p3[i] = p3[ir] * (phi3[i - ic] - phi3[k]).exp();
        }
    } else {
        for i in ic..n {
            p1[i] = pc * phi1[i - ic].exp();
            p3[i] = pc * phi3[i - ic].exp();
        }
    }
    // region 3 continues above ε₁ with zero flux
    let mut x3 = xs.clone();
    let mut y3 = a3.clone();
    let mut c3: Vec<Coef> = t.shared.iter().map(|v| v.2).collect();
    for (e, c) in &t.ext {
        x3.push(*e);
        y3.push(rate(setup, c));
        c3.push(*c);
    }
    let phi3x = cumulative_quadratic(&x3[n - 1..], &y3[n - 1..]);
    let mut p3x = p3.clone();
    for k in 1..phi3x.len() {
        p3x.push(p3[n - 1] * phi3x[k].exp());
    }
    let eps3_cut = *x3.last().unwrap();
    let regions = [
        RegionDensity { region: Region::One, eps: xs.clone(), density: p1, action: t.shared.iter().map(|v| v.1.action).collect() },
        RegionDensity { region: Region::Two, eps: x2, density: p2, action: t.r2.iter().map(|v| v.1.action).collect() },
        RegionDensity { region: Region::Three, eps: x3, density: p3x, action: c3.iter().map(|c| c.action).collect() },
    ];
    finish(setup, regions, j, eps3_cut, 0.0)
}

/// B(z) = z/(eᶻ − 1).
fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-12 {
        1.0 - 0.5 * z
    } else {
        z / z.exp_m1()
    }
}

/// Independent finite-volume solve of the same problem: Scharfetter–Gummel
/// fluxes with coefficients at cell midpoints on the nodes of `grid`, the
/// strong-tunneling branch as a single shared unknown per node, the
/// resonant pair as a point exchange, one banded LU.
pub fn bvp_cross_check<C: Coefficients>(setup: &FpeSetup, coeffs: &C, grid: &GridSpec) -> Result<StationaryDistribution> {
    let t = build_tables(setup, coeffs, grid)?;
    let (ic, ires) = (t.i_crit, t.i_res);
    let n2 = t.r2.len() - 1; // region-2 nodes below the separatrix
    let ns = t.shared.len();
    // unknown indices
    let sep = n2;
    let mut idx1 = vec![0usize; ns];
    let mut idx3 = vec![0usize; ns];
    let mut next = sep + 1;
    idx1[0] = sep;
    idx3[0] = sep;
    for k in 1..ns {
        if k <= ic {
            idx1[k] = next;
            idx3[k] = next;
            next += 1;
        } else {
            idx1[k] = next;
            idx3[k] = next + 1;
            next += 2;
        }
    }
    let mut idx_ext = Vec::with_capacity(t.ext.len());
    for _ in &t.ext {
        idx_ext.push(next);
        next += 1;
    }
    let dim = next;
    let mut m = BandMatrix::<f64>::zeros(dim, 3, 3);
    let mid = |region: Region, a: f64, b: f64| coef_at(setup, coeffs, region, 0.5 * (a + b));
    // adds the flux of one cell between unknowns iu (lower) and iv (upper)
    // flux F = cv·P_v + cu·P_u enters row iu with +, row iv with −
    let cell = |m: &mut BandMatrix<f64>, iu: usize, iv: usize, h: f64, c: Coef| {
        let a = rate(setup, &c);
        let g = setup.noise * c.diffusion / h;
        let (cu, cv) = (-g * bernoulli(-a * h), g * bernoulli(a * h));
        m.add(iu, iv, cv);
        m.add(iu, iu, cu);
        m.add(iv, iv, -cv);
        m.add(iv, iu, -cu);
    };
    for k in 0..n2 {
        let (e0, e1) = (t.r2[k].0, t.r2[k + 1].0);
        let c = mid(Region::Two, e0, e1)?;
        cell(&mut m, k, k + 1, e1 - e0, c);
    }
    for k in 0..ns - 1 {
        let (e0, e1) = (t.shared[k].0, t.shared[k + 1].0);
        cell(&mut m, idx1[k], idx1[k + 1], e1 - e0, mid(Region::One, e0, e1)?);
        cell(&mut m, idx3[k], idx3[k + 1], e1 - e0, mid(Region::Three, e0, e1)?);
    }
    let mut prev = (t.shared[ns - 1].0, idx3[ns - 1]);
    for (k, (e, _)) in t.ext.iter().enumerate() {
        cell(&mut m, prev.1, idx_ext[k], e - prev.0, mid(Region::Three, prev.0, *e)?);
        prev = (*e, idx_ext[k]);
    }
    if let Some(ir) = ires {
        let tw = 2.0 * PI * setup.resonance.unwrap().rate;
        let (i1, i3) = (idx1[ir], idx3[ir]);
        m.add(i1, i1, -tw);
        m.add(i1, i3, tw);
        m.add(i3, i1, tw);
        m.add(i3, i3, -tw);
    }
    // the separatrix balance is implied by the others; pin P(ε_sep) = 1
    let balance: Vec<f64> = (0..dim).map(|j| if m.in_band(sep, j) { m.get(sep, j) } else { 0.0 }).collect();
    m.clear_row(sep);
    m.set(sep, sep, 1.0);
    let mut b = vec![0.0; dim];
    b[sep] = 1.0;
    let lu = m.factor()?;
    let x = lu.solve(&b);
    let scale: f64 = balance.iter().zip(&x).map(|(a, v)| (a * v).abs()).fold(0.0, f64::max);
    let flux_residual = balance.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>().abs() / scale.max(1e-300);
    if flux_residual > 1e-6 {
        return Err(Error::Solver(format!("separatrix flux imbalance {flux_residual:e}: refine the grid")));
    }
    let xs: Vec<f64> = t.shared.iter().map(|v| v.0).collect();
    let mut x3 = xs.clone();
    let mut p3: Vec<f64> = idx3.iter().map(|&i| x[i]).collect();
    let mut act3: Vec<f64> = t.shared.iter().map(|v| v.2.action).collect();
    for (k, (e, c)) in t.ext.iter().enumerate() {
        x3.push(*e);
        p3.push(x[idx_ext[k]]);
        act3.push(c.action);
    }
    let j = match ires {
        Some(ir) => 2.0 * PI * setup.resonance.unwrap().rate * (x[idx1[ir]] - x[idx3[ir]]),
        None => 0.0,
    };
    let eps3_cut = *x3.last().unwrap();
    let regions = [
        RegionDensity {
            region: Region::One,
            eps: xs,
            density: idx1.iter().map(|&i| x[i]).collect(),
            action: t.shared.iter().map(|v| v.1.action).collect(),
        },
        RegionDensity {
            region: Region::Two,
            eps: t.r2.iter().map(|v| v.0).collect(),
            density: x[..=sep].to_vec(),
            action: t.r2.iter().map(|v| v.1.action).collect(),
        },
        RegionDensity { region: Region::Three, eps: x3, density: p3, action: act3 },
    ];
    finish(setup, regions, j, eps3_cut, flux_residual)
}

/// One parameter point of the quasienergy description.
#[derive(Debug, Clone)]
pub struct FpePoint {
    pub delta: f64,
    pub eps_crit: f64,
    pub eps_res: Option<f64>,
    pub flow_j: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub distribution: StationaryDistribution,
}

/// Portrait, tunneling profile and closed-form solution at `params`.
pub fn solve_point(
    params: &ModelParams,
    t_prefactor: f64,
    delta_offset: f64,
    mode: TunnelMode,
    grid: &GridSpec,
) -> Result<FpePoint> {
    if !(params.gamma > 0.0) {
        return Err(Error::InvalidParams("quasienergy diffusion needs gamma > 0".into()));
    }
    let portrait = PhasePortrait::new(params, SymbolOrdering::Symmetric)?;
    let profile = lambda_profile(&portrait, delta_offset, t_prefactor, 16)?;
    let setup = FpeSetup::from_profile(params, &portrait, &profile, mode)?;
    let d = stationary_solution(&setup, &portrait, grid)?;
    Ok(FpePoint {
        delta: params.delta,
        eps_crit: d.eps_crit,
        eps_res: d.eps_res,
        flow_j: d.flow_j,
        p1: d.occupations.0,
        p2: d.occupations.1,
        p3: d.occupations.2,
        distribution: d,
    })
}
