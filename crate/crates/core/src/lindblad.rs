//! Stationary state of the full master equation and the region
//! occupations extracted from it.
//!
//! L[ρ] = 0 is solved directly: the vectorized generator is banded
//! (half width d + 1), one diagonal equation is replaced by the pin
//! ρ_kk = 1, the banded LU is solved and refined once, and the result is
//! scaled to unit trace.

use crate::classical::RegionLabel;
use crate::error::{Error, Result};
use crate::fock::{build_lindblad_superoperator, unvectorize, FockMatrix, Liouvillian};
use crate::params::ModelParams;
use crate::prelude::*;
use crate::spectrum::QuasienergySpectrum;
use crate::C64;
use alloc::format;
use alloc::string::String;

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub n_max: usize,
    pub rho: FockMatrix,
    /// max |L[ρ]| after normalization
    pub residual: f64,
    pub mean_intensity: f64,
    /// ρ + 1e-8·I admits a Cholesky factorization
    pub positive: bool,
    /// diagonal index held fixed during the solve
    pub pinned: usize,
    pub cond_estimate: f64,
}

fn solve_pinned(l: &Liouvillian, k: usize) -> Result<(Vec<C64>, f64)> {
    let mut band = l.to_band();
    let d = l.dim;
    let row = k * d + k;
    band.clear_row(row);
    band.set(row, row, C64::new(1.0, 0.0));
    let lu = band.factor()?;
    let mut b = vec![C64::new(0.0, 0.0); l.size()];
    b[row] = C64::new(1.0, 0.0);
    let mut x = lu.solve(&b);
    // one step of iterative refinement against the pinned system
    let mut r = l.apply(&x);
    r[row] = x[row];
    for (ri, bi) in r.iter_mut().zip(&b) {
        *ri = *bi - *ri;
    }
    let dx = lu.solve(&r);
    for (xi, di) in x.iter_mut().zip(&dx) {
        *xi += *di;
    }
    Ok((x, lu.cond_estimate))
}

pub fn steady_state(params: &ModelParams, n_max: usize) -> Result<SteadyState> {
    if !(params.gamma > 0.0) {
        return Err(Error::InvalidParams("steady state needs gamma > 0".into()));
    }
    let l = build_lindblad_superoperator(params, n_max)?;
    steady_state_of(&l)
}

/// Steady state of a prebuilt generator.
pub fn steady_state_of(l: &Liouvillian) -> Result<SteadyState> {
    let d = l.dim;
    let (mut x, mut cond) = solve_pinned(l, 0)?;
    let mut pinned = 0;
    // a tiny vacuum population makes the ρ₀₀ pin ill conditioned
    let diag = |x: &[C64], j: usize| x[j * d + j].re;
    let (jmax, dmax) = (0..d).map(|j| (j, diag(&x, j))).fold((0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
    if !(diag(&x, 0) > 1e-3 * dmax) {
        let (y, c) = solve_pinned(l, jmax)?;
        x = y;
        cond = c;
        pinned = jmax;
    }
    finish(l, x, pinned, cond)
}

fn finish(l: &Liouvillian, mut x: Vec<C64>, pinned: usize, cond: f64) -> Result<SteadyState> {
    let d = l.dim;
    let tr: C64 = (0..d).map(|j| x[j * d + j]).sum();
    if !(tr.norm() > 0.0) || !tr.re.is_finite() {
        return Err(Error::Solver(format!("steady state has trace {tr}")));
    }
    for v in x.iter_mut() {
        *v /= tr;
    }
    // hermitize
    for m in 0..d {
        for n in m..d {
            let a = x[m * d + n];
            let b = x[n * d + m];
            let h = (a + b.conj()) * 0.5;
            x[m * d + n] = h;
            x[n * d + m] = h.conj();
        }
    }
    let residual = l.apply(&x).iter().map(|c| c.norm()).fold(0.0, f64::max);
    let rho = unvectorize(d, &x);
    let mean_intensity = (0..d).map(|j| j as f64 * x[j * d + j].re).sum();
    let positive = cholesky_ok(&rho, 1e-8);
    Ok(SteadyState { n_max: d - 1, rho, residual, mean_intensity, positive, pinned, cond_estimate: cond })
}

/// Whether ρ + shift·I is positive definite (complex Cholesky).
pub fn cholesky_ok(rho: &FockMatrix, shift: f64) -> bool {
    let n = rho.dim;
    let mut l = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut s = rho.get(j, j).re + shift;
        for k in 0..j {
            s -= l[j * n + k].norm_sqr();
        }
        if !(s > 0.0) {
            return false;
        }
        let ljj = s.sqrt();
        l[j * n + j] = C64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut z = rho.get(i, j);
            for k in 0..j {
                z -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = z / ljj;
        }
    }
    true
}

#[derive(Debug, Clone, Default)]
pub struct Occupations {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    /// probability carried by hybridized states split between 1 and 3
    pub split_probability: f64,
    /// probability in states within half a level spacing of ε_sep or ε₁
    pub boundary_probability: f64,
    pub warnings: Vec<String>,
}

/// Share below which a 1/3 state counts as localized.
pub const HYBRID_THRESHOLD: f64 = 0.1;

/// P_r = Σ_{v labeled r} ⟨v|ρ|v⟩ (3′ counted into P₃); hybridized 1/3
/// states are split by their region-1 weight.
pub fn region_occupations(rho: &FockMatrix, spectrum: &QuasienergySpectrum) -> Result<Occupations> {
    let d = spectrum.dim();
    if rho.dim != d {
        return Err(Error::InvalidParams(format!("rho dim {} vs spectrum dim {d}", rho.dim)));
    }
    let mut o = Occupations::default();
    for (i, lev) in spectrum.levels.iter().enumerate() {
        let v = spectrum.vector(i);
        // ⟨v|ρ|v⟩ for real v
        let mut pop = 0.0;
        for m in 0..d {
            if v[m] == 0.0 {
                continue;
            }
            let mut s = 0.0;
            for n in 0..d {
                s += rho.get(m, n).re * v[n];
            }
            pop += v[m] * s;
        }
        let Some(label) = lev.label else {
            return Err(Error::NotBistable);
        };
        if lev.near_boundary {
            o.boundary_probability += pop;
        }
        match label {
            RegionLabel::Two => o.p2 += pop,
            RegionLabel::ThreePrime => o.p3 += pop,
            RegionLabel::One | RegionLabel::Three => {
                let w = lev.weight1;
                if w > HYBRID_THRESHOLD && w < 1.0 - HYBRID_THRESHOLD {
                    o.p1 += w * pop;
                    o.p3 += (1.0 - w) * pop;
                    o.split_probability += pop;
                } else if label == RegionLabel::One {
                    o.p1 += pop;
                } else {
                    o.p3 += pop;
                }
            }
        }
    }
    if o.boundary_probability > 0.05 {
        o.warnings.push(format!("{:.3} of the probability sits in boundary-band states", o.boundary_probability));
    }
    if o.split_probability > 0.01 {
        o.warnings.push(format!("{:.3} of the probability split between regions 1 and 3", o.split_probability));
    }
    Ok(o)
}

/// One point of a Δ sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub delta: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub mean_intensity: f64,
    pub residual: f64,
    pub warnings: Vec<String>,
}

/// Steady state and occupations at one parameter point.
pub fn sweep_point(params: &ModelParams, n_max: usize) -> Result<SweepPoint> {
    let ss = steady_state(params, n_max)?;
    let spec = crate::spectrum::diagonalize(params, n_max)?;
    let occ = region_occupations(&ss.rho, &spec)?;
    let mut warnings = occ.warnings;
    if !ss.positive {
        warnings.push("steady state not positive semidefinite to 1e-8".into());
    }
    Ok(SweepPoint {
        delta: params.delta,
        p1: occ.p1,
        p2: occ.p2,
        p3: occ.p3,
        mean_intensity: ss.mean_intensity,
        residual: ss.residual,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::diagonalize;

    #[test]
    fn thermal_state_at_zero_drive() {
        let p = ModelParams::new(3.0, 1.0, 0.0).with_damping(0.1, 3.0);
        let ss = steady_state(&p, 150).unwrap();
        assert!((ss.mean_intensity - 3.0).abs() < 1e-8, "{}", ss.mean_intensity);
        assert!(ss.positive);
        assert!(ss.residual < 1e-10);
        // geometric distribution
        for n in 0..10 {
            let pn = 0.25 * 0.75f64.powi(n as i32);
            assert!((ss.rho.get(n, n).re - pn).abs() < 1e-10);
        }
    }

    #[test]
    fn linear_oscillator_displaced_thermal() {
        let (delta, f, g, nth) = (0.7, 0.3, 0.4, 0.5);
        let p = ModelParams::new(delta, 0.0, f).with_damping(g, nth);
        let ss = steady_state(&p, 60).unwrap();
        // ⟨a⟩ = −f/(−Δ − iγ/2) from the linear Heisenberg equation
        let a_exact = -C64::new(f, 0.0) / C64::new(-delta, -0.5 * g);
        let mut a_mean = C64::new(0.0, 0.0);
        for n in 1..ss.rho.dim {
            a_mean += ss.rho.get(n, n - 1) * (n as f64).sqrt();
        }
        assert!((a_mean - a_exact).norm() < 1e-6, "{a_mean} {a_exact}");
        assert!((ss.mean_intensity - (a_exact.norm_sqr() + nth)).abs() < 1e-6);
    }

    #[test]
    fn trace_hermiticity_positivity() {
        let p = ModelParams::new(4.0, 1.0, 0.0).with_drive_ratio(0.4).with_damping(0.05, 0.2).with_alpha3(1e-3);
        let ss = steady_state(&p, 24).unwrap();
        assert!((ss.rho.trace() - C64::new(1.0, 0.0)).norm() < 1e-10);
        assert!(ss.rho.hermiticity_defect() < 1e-14);
        assert!(ss.positive);
        assert!(ss.residual < 1e-9, "{}", ss.residual);
    }

    #[test]
    fn pin_choice_does_not_matter() {
        let p = ModelParams::new(4.0, 1.0, 0.0).with_drive_ratio(0.4).with_damping(0.05, 0.2);
        let l = build_lindblad_superoperator(&p, 24).unwrap();
        let a = solve_pinned(&l, 0).unwrap();
        let b = solve_pinned(&l, 7).unwrap();
        let ra = finish(&l, a.0, 0, a.1).unwrap();
        let rb = finish(&l, b.0, 7, b.1).unwrap();
        let mut dist = 0.0;
        for m in 0..25 {
            for n in 0..25 {
                dist += (ra.rho.get(m, n) - rb.rho.get(m, n)).norm();
            }
        }
        assert!(dist < 1e-8, "{dist}");
    }

    #[test]
    fn damping_reduces_intensity_linear_case() {
        let mut prev = f64::INFINITY;
        for g in [0.1, 0.4, 1.6, 6.4] {
            let p = ModelParams::new(0.5, 0.0, 0.3).with_damping(g, 0.0);
            let n = steady_state(&p, 30).unwrap().mean_intensity;
            let exact = 0.09 / (0.25 + 0.25 * g * g);
            assert!((n - exact).abs() < 1e-8);
            assert!(n < prev);
            prev = n;
        }
    }

    #[test]
    fn eigenstate_projector_occupation() {
        let p = ModelParams::new(4.25, 1.0, 0.0).with_drive_ratio(0.3);
        let spec = diagonalize(&p, 30).unwrap();
        let i = spec.levels.iter().position(|l| l.label == Some(RegionLabel::Two)).unwrap();
        let v = spec.vector(i);
        let mut rho = FockMatrix::zeros(31);
        for m in 0..31 {
            for n in 0..31 {
                rho.set(m, n, C64::new(v[m] * v[n], 0.0));
            }
        }
        let o = region_occupations(&rho, &spec).unwrap();
        assert!((o.p2 - 1.0).abs() < 1e-12 && o.p1.abs() < 1e-12);
    }

    #[test]
    fn occupations_sum_to_one() {
        let p = ModelParams::new(4.0, 1.0, 0.0).with_drive_ratio(0.3).with_damping(0.01, 0.5);
        let pt = sweep_point(&p, 30).unwrap();
        assert!((pt.p1 + pt.p2 + pt.p3 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn requires_damping() {
        assert!(steady_state(&ModelParams::new(1.0, 1.0, 0.1), 10).is_err());
    }
}
