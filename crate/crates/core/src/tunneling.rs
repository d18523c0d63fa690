//! Tunneling between the region-1 and region-3 orbits of equal
//! quasienergy: WKB action, amplitude, pair mismatch δε₁₃(ε), coherence
//! damping, the tunneling rate λ_T(ε) and the critical / resonant
//! quasienergies.
//!
//! The barrier is the stretch of the positive real axis between the two
//! orbits, where cos φ = A(I) exceeds one; there the action is
//! S = ∫ acosh A(I) dI. In the variable s = |a|√(2α/Δ) and for the pure
//! Kerr symbol this is the familiar (Δ/α)∫ acosh(...) s ds form.

use crate::classical::{PhasePortrait, Region};
use crate::error::{Error, Result};
use crate::numerics::{quad, roots};
use crate::params::ModelParams;
use crate::prelude::*;
use alloc::format;

/// acosh(1 + u) without cancellation for small u.
fn acosh1p(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    (u + (u * (u + 2.0)).sqrt()).ln_1p()
}

/// Radii x₁ < x₂ on the positive real axis bounding the barrier at `eps`
/// (the right crossings of the region-1 and region-3 orbits).
pub fn branch_points(portrait: &PhasePortrait, eps: f64) -> Result<(f64, f64)> {
    let s = *portrait.sep()?;
    if !(eps > s.eps_sep && eps < s.eps_1) {
        return Err(Error::NoBarrier(eps));
    }
    let h = &portrait.hamiltonian;
    let fx = |x: f64| h.on_axis(x) - eps;
    // positive-axis roots: one on each side of the saddle
    let tol = 1e-15 * (1.0 + s.x_sep);
    let lo = s.x_1.max(0.0);
    let mut roots_found = Vec::new();
    let n = 400;
    let top = s.x_sep * 2.0 + 2.0;
    let (a3, b3) = roots::expand_bracket(fx, s.x_sep, 0.05 * (1.0 + s.x_sep), 200)?;
    let hi = b3.max(top);
    for (a, b) in roots::scan_brackets(fx, 1e-12, hi, n) {
        roots_found.push(roots::brent(fx, a, b, tol)?);
    }
    let q1 = roots::brent(fx, lo, s.x_sep, tol)?;
    let q2 = roots::brent(fx, a3, b3, tol)?;
    // any other root between q1 and q2 would split the barrier
    if roots_found.iter().any(|&r| r > q1 * (1.0 + 1e-9) && r < q2 * (1.0 - 1e-9)) {
        roots_found.sort_by(f64::total_cmp);
        return Err(Error::Topology(roots_found));
    }
    Ok((q1, q2))
}

/// S_tunn(ε) = ∫ acosh A(I) dI across the barrier.
pub fn tunneling_action(portrait: &PhasePortrait, eps: f64) -> Result<f64> {
    let (q1, q2) = branch_points(portrait, eps)?;
    let h = &portrait.hamiltonian;
    let f = h.params.drive;
    // A − 1 = (ε − H(x)) / (2 f x) on the positive axis
    let integrand = |x: f64| acosh1p((eps - h.on_axis(x)) / (2.0 * f * x)) * 2.0 * x;
    // x = q1 + (q2 − q1)(1 − cos θ)/2 absorbs the √ endpoint behaviour
    let half = 0.5 * (q2 - q1);
    let g = |th: f64| integrand(q1 + half * (1.0 - th.cos())) * half * th.sin();
    let r = quad::integrate(g, 0.0, PI, 0.0, 1e-12)?;
    Ok(r.value)
}

/// The barrier integrand of the pure Kerr model written in the scaled
/// variable s: [αε/Δ² + s²/2 − s⁴/8] / (s√(2αf²/Δ³)).
pub fn scaled_acosh_argument(params: &ModelParams, eps: f64, s: f64) -> f64 {
    let (d, a, f) = (params.delta, params.alpha, params.drive);
    (a * eps / (d * d) + s * s / 2.0 - s.powi(4) / 8.0) / (s * (2.0 * a * f * f / d.powi(3)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitude {
    pub value: f64,
    pub action: f64,
    /// exp(−S) underflowed to zero
    pub underflow: bool,
}

/// t(ε) = c·Δ·exp(−S_tunn(ε)).
pub fn tunneling_amplitude(portrait: &PhasePortrait, eps: f64, prefactor: f64) -> Result<Amplitude> {
    let action = tunneling_action(portrait, eps)?;
    let value = prefactor * portrait.params().delta * (-action).exp();
    Ok(Amplitude { value, action, underflow: value == 0.0 && prefactor != 0.0 })
}

/// Single global prefactor matching `half_gaps` (ε, min_gap/2) in the
/// least-squares sense on a log scale.
pub fn calibrate_prefactor(portrait: &PhasePortrait, half_gaps: &[(f64, f64)]) -> Result<f64> {
    if half_gaps.is_empty() {
        return Err(Error::InvalidParams("no anticrossings to calibrate against".into()));
    }
    let mut acc = 0.0;
    for &(eps, half) in half_gaps {
        let t1 = tunneling_amplitude(portrait, eps, 1.0)?;
        acc += half.ln() - (portrait.params().delta.ln() - t1.action);
    }
    Ok((acc / half_gaps.len() as f64).exp())
}

/// Pair mismatch ε_{n1} − ε_{n3} in the continuous limit:
/// δΔ·(n̄₃ − n̄₁) + V̄₁ − V̄₃, from orbit averages at `eps`.
pub fn quasienergy_mismatch(portrait: &PhasePortrait, eps: f64, delta_offset: f64) -> Result<f64> {
    let s = *portrait.sep()?;
    if !(eps > s.eps_sep && eps < s.eps_1) {
        return Err(Error::OutsideWindow { region: 1, eps, lo: s.eps_sep, hi: s.eps_1 });
    }
    let one = portrait.averages(Region::One, eps)?;
    let three = portrait.averages(Region::Three, eps)?;
    Ok(delta_offset * (three.mean_intensity - one.mean_intensity) + one.mean_v - three.mean_v)
}

/// `params` moved to Δ = m₀α/2 + δΔ at fixed f/f_crit.
fn at_offset(params: &ModelParams, m0: i64, offset: f64) -> ModelParams {
    let ratio = params.drive / params.f_crit();
    let mut p = params.clone();
    p.delta = m0 as f64 * p.alpha / 2.0 + offset;
    p.with_drive_ratio(ratio)
}

/// Mismatch at region-1 Bohr–Sommerfeld level `n` for Δ = m₀α/2 + δΔ;
/// `None` when the level does not exist there.
fn level_mismatch(params: &ModelParams, m0: i64, offset: f64, n: usize) -> Result<Option<f64>> {
    let p = at_offset(params, m0, offset);
    let por = PhasePortrait::new(&p, crate::classical::SymbolOrdering::Symmetric)?;
    let levels = por.bohr_sommerfeld_levels(Region::One, None)?;
    match levels.iter().find(|l| l.0 == n) {
        Some(&(_, e)) => Ok(Some(quasienergy_mismatch(&por, e, offset)?)),
        None => Ok(None),
    }
}

/// Offsets δΔ ∈ [lo, hi] (Δ = m₀α/2 + δΔ, m₀ and f/f_crit taken from
/// `params`) at which
/// region-1 level n and its region-3 partner are degenerate according to
/// the continuous mismatch. One (n, δΔ) per root, sorted by δΔ.
pub fn degenerate_offsets(params: &ModelParams, lo: f64, hi: f64, n_scan: usize) -> Result<Vec<(usize, f64)>> {
    let m0 = params.resonance_index();
    let xs: Vec<f64> = (0..=n_scan).map(|k| lo + (hi - lo) * k as f64 / n_scan as f64).collect();
    let mut table: Vec<Vec<(usize, f64)>> = Vec::with_capacity(xs.len());
    for &x in &xs {
        let p = at_offset(params, m0, x);
        let por = PhasePortrait::new(&p, crate::classical::SymbolOrdering::Symmetric)?;
        let mut row = Vec::new();
        for (n, e) in por.bohr_sommerfeld_levels(Region::One, None)? {
            row.push((n, quasienergy_mismatch(&por, e, x)?));
        }
        table.push(row);
    }
    let mut out = Vec::new();
    for k in 0..n_scan {
        for &(n, f0) in &table[k] {
            let Some(&(_, f1)) = table[k + 1].iter().find(|l| l.0 == n) else { continue };
            if f0 == 0.0 || f0.signum() == f1.signum() {
                continue;
            }
            let g = |x: f64| level_mismatch(params, m0, x, n).ok().flatten().unwrap_or(f64::NAN);
            let root = roots::brent(g, xs[k], xs[k + 1], 1e-12 * (1.0 + xs[k].abs()))?;
            out.push((n, root));
        }
    }
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(out)
}

/// Dephasing rates of the 1–3 coherence at `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceDamping {
    /// with neighbouring coherences slaved (continuous branch)
    pub gamma13: f64,
    /// isolated pair: only the diagonal (k = 0) overlap survives
    pub gamma13_tilde: f64,
    pub period1: f64,
    pub period3: f64,
}

/// γ₁₃ = γ(2N + 1)(⟨|a|²⟩₁ + ⟨|a|²⟩₃ − 2 Re Σ_j a¹_j a³_j*), harmonics
/// matched by level offset j (k = −orientation·j in each region's
/// time-domain series); γ̃₁₃ keeps only j = 0. Both ⟨a†a⟩ and ⟨aa†⟩ take
/// their symmetric-order value ⟨|a|²⟩, which keeps γ₁₃ ≥ 0 (Cauchy–Schwarz)
/// right up to the separatrix.
pub fn coherence_damping(portrait: &PhasePortrait, eps: f64) -> Result<CoherenceDamping> {
    let p = portrait.params();
    let o1 = portrait.trace_orbit(Region::One, eps)?;
    let o3 = portrait.trace_orbit(Region::Three, eps)?;
    let jmax = o1
        .fourier
        .iter()
        .chain(o3.fourier.iter())
        .map(|c| c.0.unsigned_abs() as i32)
        .max()
        .unwrap_or(0);
    let (s1, s3) = (Region::One.orientation() as i32, Region::Three.orientation() as i32);
    let mut overlap = 0.0;
    for j in -jmax..=jmax {
        let a1 = o1.harmonic(-s1 * j);
        let a3 = o3.harmonic(-s3 * j);
        overlap += (a1 * a3.conj()).re;
    }
    let a10 = o1.harmonic(0);
    let a30 = o3.harmonic(0);
    let diag = (a10 * a30.conj()).re;
    let (i1, i3) = (o1.mean_intensity, o3.mean_intensity);
    let (g, nth) = (p.gamma, p.n_thermal);
    let rate = |ov: f64| g * (2.0 * nth + 1.0) * (i1 + i3 - 2.0 * ov);
    let gamma13 = rate(overlap);
    let gamma13_tilde = rate(diag);
    if !(gamma13 >= 0.0) || !(gamma13_tilde >= 0.0) {
        return Err(Error::Solver(format!("negative coherence damping at eps={eps}")));
    }
    Ok(CoherenceDamping { gamma13, gamma13_tilde, period1: o1.period, period3: o3.period })
}

/// λ_T = γ t² / (δε² + γ²/4).
pub fn lorentzian_rate(gamma: f64, t: f64, delta_eps: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    gamma * t * t / (delta_eps * delta_eps + 0.25 * gamma * gamma)
}

/// The single resonant pair above ε_crit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonantPair {
    /// region-1 Bohr–Sommerfeld level nearest the mismatch root
    pub eps: f64,
    /// root of δε₁₃(ε) = 0
    pub eps_root: f64,
    pub level: usize,
    pub delta_eps: f64,
    pub t: f64,
    pub gamma_tilde: f64,
    /// pair transfer rate γ̃t²/(δε² + γ̃²/4)
    pub rate: f64,
    /// region-1 period at the pair
    pub period: f64,
}

#[derive(Debug, Clone)]
pub struct TunnelProfile {
    pub eps_sep: f64,
    pub eps_1: f64,
    pub eps_grid: Vec<f64>,
    pub t_of_eps: Vec<f64>,
    pub delta_eps13: Vec<f64>,
    pub gamma13: Vec<f64>,
    pub lambda_t: Vec<f64>,
    pub eps_crit: f64,
    /// no root of δε₁₃ = ±t: the whole window tunnels strongly
    pub eps_crit_at_top: bool,
    pub resonance: Option<ResonantPair>,
    pub t_prefactor: f64,
    pub delta_offset: f64,
}

impl TunnelProfile {
    pub fn eps_res(&self) -> Option<f64> {
        self.resonance.map(|r| r.eps)
    }

    /// λ_T at `eps` (continuous part), linear interpolation on the grid;
    /// zero above ε_crit.
    pub fn lambda_at(&self, eps: f64) -> f64 {
        if eps >= self.eps_crit || eps <= self.eps_sep {
            return 0.0;
        }
        let g = &self.eps_grid;
        let k = g.partition_point(|&x| x < eps);
        if k == 0 {
            return self.lambda_t[0];
        }
        if k >= g.len() {
            return *self.lambda_t.last().unwrap();
        }
        let w = (eps - g[k - 1]) / (g[k] - g[k - 1]);
        self.lambda_t[k - 1] * (1.0 - w) + self.lambda_t[k] * w
    }
}

/// Quasienergy grid on (ε_sep, ε₁) clustered quadratically at ε_sep.
pub fn window_grid(portrait: &PhasePortrait, n: usize) -> Result<Vec<f64>> {
    let s = *portrait.sep()?;
    let w = s.eps_1 - s.eps_sep;
    let (u0, u1) = (1e-5, 1.0 - 1e-6);
    Ok((0..n)
        .map(|k| {
            let v = k as f64 / (n - 1) as f64;
            s.eps_sep + w * (u0 + (u1 - u0) * v * v)
        })
        .collect())
}

/// ε_crit (minimal root of δε₁₃ = ±t above ε_sep) and the root of
/// δε₁₃ = 0 above it, if any. Returns (ε_crit, at_top, root).
pub fn critical_quasienergy(
    portrait: &PhasePortrait,
    delta_offset: f64,
    prefactor: f64,
) -> Result<(f64, bool, Option<f64>)> {
    let s = *portrait.sep()?;
    let grid = window_grid(portrait, 241)?;
    let mism = |e: f64| quasienergy_mismatch(portrait, e, delta_offset);
    let amp = |e: f64| tunneling_amplitude(portrait, e, prefactor).map(|a| a.value);
    let d: Vec<f64> = grid.iter().map(|&e| mism(e)).collect::<Result<_>>()?;
    let t: Vec<f64> = grid.iter().map(|&e| amp(e)).collect::<Result<_>>()?;
    let xtol = 1e-12 * (s.eps_1 - s.eps_sep);
    let mut crit = None;
    for k in 1..grid.len() {
        let h0 = d[k - 1].abs() - t[k - 1];
        let h1 = d[k].abs() - t[k];
        if h0 < 0.0 && h1 >= 0.0 {
            let sgn = if d[k] >= 0.0 { 1.0 } else { -1.0 };
            let f = |e: f64| sgn * mism(e).unwrap_or(f64::NAN) - amp(e).unwrap_or(f64::NAN);
            crit = Some(roots::brent(f, grid[k - 1], grid[k], xtol)?);
            break;
        }
        if k == 1 && h0 >= 0.0 {
            // mismatch already exceeds t at the first grid point
            crit = Some(grid[0]);
            break;
        }
    }
    let (eps_crit, at_top) = match crit {
        Some(e) => (e, false),
        None => (s.eps_1, true),
    };
    let mut root = None;
    if !at_top {
        for k in 1..grid.len() {
            if grid[k] <= eps_crit {
                continue;
            }
            if d[k - 1] == 0.0 && grid[k - 1] > eps_crit {
                root = Some(grid[k - 1]);
                break;
            }
            if (d[k - 1] > 0.0) != (d[k] > 0.0) && d[k] != 0.0 {
                let a = grid[k - 1].max(eps_crit);
                if (mism(a)? > 0.0) != (d[k] > 0.0) {
                    root = Some(roots::brent(|e| mism(e).unwrap_or(f64::NAN), a, grid[k], xtol)?);
                    break;
                }
            }
        }
    }
    Ok((eps_crit, at_top, root))
}

/// Full λ_T profile on `n_grid` points of the window.
pub fn lambda_profile(portrait: &PhasePortrait, delta_offset: f64, prefactor: f64, n_grid: usize) -> Result<TunnelProfile> {
    let s = *portrait.sep()?;
    let (eps_crit, at_top, root) = critical_quasienergy(portrait, delta_offset, prefactor)?;
    let grid = window_grid(portrait, n_grid)?;
    let mut prof = TunnelProfile {
        eps_sep: s.eps_sep,
        eps_1: s.eps_1,
        eps_grid: grid.clone(),
        t_of_eps: Vec::with_capacity(n_grid),
        delta_eps13: Vec::with_capacity(n_grid),
        gamma13: Vec::with_capacity(n_grid),
        lambda_t: Vec::with_capacity(n_grid),
        eps_crit,
        eps_crit_at_top: at_top,
        resonance: None,
        t_prefactor: prefactor,
        delta_offset,
    };
    for &e in &grid {
        let t = tunneling_amplitude(portrait, e, prefactor)?.value;
        let d = quasienergy_mismatch(portrait, e, delta_offset)?;
        let g = coherence_damping(portrait, e)?.gamma13;
        prof.t_of_eps.push(t);
        prof.delta_eps13.push(d);
        prof.gamma13.push(g);
        prof.lambda_t.push(if e < eps_crit { lorentzian_rate(g, t, d) } else { 0.0 });
    }
    if let Some(r) = root {
        prof.resonance = resonant_pair(portrait, delta_offset, prefactor, r, eps_crit)?;
    }
    Ok(prof)
}

/// The region-1 Bohr–Sommerfeld pair nearest the mismatch root.
fn resonant_pair(
    portrait: &PhasePortrait,
    delta_offset: f64,
    prefactor: f64,
    root: f64,
    eps_crit: f64,
) -> Result<Option<ResonantPair>> {
    let levels = portrait.bohr_sommerfeld_levels(Region::One, None)?;
    let best = levels
        .iter()
        .filter(|l| l.1 > eps_crit)
        .map(|&(n, e)| Ok((n, e, quasienergy_mismatch(portrait, e, delta_offset)?)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min_by(|a, b| a.2.abs().total_cmp(&b.2.abs()));
    let Some((level, eps, delta_eps)) = best else { return Ok(None) };
    let t = tunneling_amplitude(portrait, eps, prefactor)?.value;
    let damp = coherence_damping(portrait, eps)?;
    Ok(Some(ResonantPair {
        eps,
        eps_root: root,
        level,
        delta_eps,
        t,
        gamma_tilde: damp.gamma13_tilde,
        rate: lorentzian_rate(damp.gamma13_tilde, t, delta_eps),
        period: damp.period1,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::SymbolOrdering;

    fn portrait(p: &ModelParams) -> PhasePortrait {
        PhasePortrait::new(p, SymbolOrdering::Symmetric).unwrap()
    }

    #[test]
    fn acosh_small_argument() {
        for u in [1e-14, 1e-8, 1e-3, 0.5, 10.0] {
            let x: f64 = 1.0 + u;
            let exact = if u < 1e-6 { (2.0 * u).sqrt() * (1.0 - u / 12.0) } else { x.acosh() };
            assert!((acosh1p(u) - exact).abs() <= 1e-12 * exact, "{u}");
        }
    }

    #[test]
    fn matches_scaled_variable_form() {
        // normal-ordered pure Kerr symbol is exactly the scaled form
        let p = ModelParams::new(6.0, 1.0, 0.0).with_drive_ratio(0.2);
        let por = PhasePortrait::new(&p, SymbolOrdering::Normal).unwrap();
        let s = *por.sep().unwrap();
        let (d, a) = (p.delta, p.alpha);
        for u in [0.05, 0.3, 0.7] {
            let eps = s.eps_sep + u * (s.eps_1 - s.eps_sep);
            // independent oracle: bisection for A(s) = 1 and midpoint rule
            // in θ with q = q1 + (q2 − q1)(1 − cos θ)/2
            let arg = |x: f64| scaled_acosh_argument(&p, eps, x) - 1.0;
            let bisect = |mut lo: f64, mut hi: f64| {
                for _ in 0..200 {
                    let m = 0.5 * (lo + hi);
                    if (arg(m) > 0.0) == (arg(lo) > 0.0) {
                        lo = m
                    } else {
                        hi = m
                    }
                }
                0.5 * (lo + hi)
            };
            let ss = s.x_sep * (2.0 * a / d).sqrt();
            let q1 = bisect(s.x_1 * (2.0 * a / d).sqrt(), ss);
            let q2 = bisect(ss, 4.0 * ss);
            let n = 20000;
            let mut acc = 0.0;
            for k in 0..n {
                let th = PI * (k as f64 + 0.5) / n as f64;
                let x = q1 + 0.5 * (q2 - q1) * (1.0 - th.cos());
                let aa = scaled_acosh_argument(&p, eps, x).max(1.0);
                acc += aa.acosh() * x * 0.5 * (q2 - q1) * th.sin();
            }
            let oracle = d / a * acc * PI / n as f64;
            let ours = tunneling_action(&por, eps).unwrap();
            assert!((ours - oracle).abs() < 1e-6 * oracle, "{ours} {oracle}");
        }
    }

    #[test]
    fn action_vanishes_at_separatrix_and_increases() {
        let p = ModelParams::new(8.0, 1.0, 0.0).with_drive_ratio(0.1);
        let por = portrait(&p);
        let s = *por.sep().unwrap();
        let w = s.eps_1 - s.eps_sep;
        // quadratic-saddle oracle: S ≈ π δε / λ, λ = ½√(H_xx |H_yy|)
        let h = &por.hamiltonian;
        let dx = 1e-4 * s.x_sep;
        let hxx = (h.on_axis(s.x_sep + dx) - 2.0 * h.on_axis(s.x_sep) + h.on_axis(s.x_sep - dx)) / (dx * dx);
        let hyy = 2.0 * h.g1(s.x_sep * s.x_sep);
        let lambda = 0.5 * (hxx * hyy.abs()).sqrt();
        let de = 1e-6 * w;
        let s_near = tunneling_action(&por, s.eps_sep + de).unwrap();
        assert!((s_near / (PI * de / lambda) - 1.0).abs() < 1e-3, "{s_near} {}", PI * de / lambda);
        let (a, b) = branch_points(&por, s.eps_sep + 1e-8 * w).unwrap();
        assert!(b - a < 1e-3 * s.x_sep);
        let mut prev = 0.0;
        for k in 1..200 {
            let e = s.eps_sep + w * (k as f64 / 200.0);
            let v = tunneling_action(&por, e).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn action_scales_with_delta_over_alpha() {
        // fixed f/f_crit and ε·α/Δ²: S ∝ Δ/α (normal ordering, pure Kerr)
        let mk = |d: f64| ModelParams::new(d, 1.0, 0.0).with_drive_ratio(0.2);
        let (p1, p2) = (mk(5.0), mk(10.0));
        let (a1, a2) = (
            PhasePortrait::new(&p1, SymbolOrdering::Normal).unwrap(),
            PhasePortrait::new(&p2, SymbolOrdering::Normal).unwrap(),
        );
        let s1 = *a1.sep().unwrap();
        let e1 = s1.eps_sep + 0.4 * (s1.eps_1 - s1.eps_sep);
        let e2 = e1 * 4.0;
        let r = tunneling_action(&a2, e2).unwrap() / tunneling_action(&a1, e1).unwrap();
        assert!((r - 2.0).abs() < 1e-8, "{r}");
    }

    #[test]
    fn mismatch_trivial_and_sign_flip() {
        let p = ModelParams::new(6.0, 1.0, 0.0).with_drive_ratio(0.2);
        let por = portrait(&p);
        let s = *por.sep().unwrap();
        let e = s.eps_sep + 0.5 * (s.eps_1 - s.eps_sep);
        assert_eq!(quasienergy_mismatch(&por, e, 0.0).unwrap(), 0.0);
        let p3 = p.clone().with_alpha3(1e-4);
        let por3 = portrait(&p3);
        let one = por3.averages(Region::One, e).unwrap();
        let three = por3.averages(Region::Three, e).unwrap();
        let root = (three.mean_v - one.mean_v) / (three.mean_intensity - one.mean_intensity);
        assert!(root > 0.0);
        let lo = quasienergy_mismatch(&por3, e, root * 0.9).unwrap();
        let hi = quasienergy_mismatch(&por3, e, root * 1.1).unwrap();
        assert!(lo < 0.0 && hi > 0.0, "{lo} {hi}");
        assert!(quasienergy_mismatch(&por3, e, root).unwrap().abs() < 1e-12);
    }

    #[test]
    fn lorentzian_limits() {
        let t = 1e-3;
        assert!((lorentzian_rate(0.01, t, 0.0) - 4.0 * t * t / 0.01).abs() < 1e-18);
        assert_eq!(lorentzian_rate(0.01, 0.0, 0.3), 0.0);
        // δε ≫ γ: linear in γ; δε ≪ γ: ∝ 1/γ
        let r1 = lorentzian_rate(1e-6, t, 1.0);
        let r2 = lorentzian_rate(2e-6, t, 1.0);
        assert!((r2 / r1 - 2.0).abs() < 1e-9);
        let r3 = lorentzian_rate(1.0, t, 1e-6);
        let r4 = lorentzian_rate(2.0, t, 1e-6);
        assert!((r3 / r4 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn damping_positive_and_diagonal_part_larger() {
        let p = ModelParams::new(6.0, 1.0, 0.0).with_drive_ratio(0.2).with_damping(0.01, 0.1);
        let por = portrait(&p);
        let s = *por.sep().unwrap();
        for u in [0.1, 0.5, 0.9] {
            let e = s.eps_sep + u * (s.eps_1 - s.eps_sep);
            let d = coherence_damping(&por, e).unwrap();
            assert!(d.gamma13 > 0.0 && d.gamma13_tilde > 0.0);
            // harmonics overlap only reduces dephasing relative to the j=0 term
            assert!(d.gamma13_tilde >= d.gamma13 * 0.5, "{d:?}");
        }
    }

    #[test]
    fn pure_kerr_on_resonance_whole_window_tunnels() {
        let p = ModelParams::new(6.0, 1.0, 0.0).with_drive_ratio(0.2);
        let (c, top, r) = critical_quasienergy(&portrait(&p), 0.0, 1.0).unwrap();
        assert!(top && r.is_none());
        assert_eq!(c, portrait(&p).eps_1().unwrap());
    }

    #[test]
    fn larger_detuning_offset_lowers_eps_crit() {
        let p = ModelParams::new(6.0, 1.0, 0.0).with_drive_ratio(0.2);
        let por = portrait(&p);
        let mut prev = f64::INFINITY;
        for dd in [1e-4, 1e-3, 1e-2, 1e-1] {
            let (c, _, _) = critical_quasienergy(&por, dd, 1.0).unwrap();
            assert!(c < prev, "{dd} {c}");
            prev = c;
        }
    }
}
