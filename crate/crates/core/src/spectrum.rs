//! Quasienergy spectrum: diagonalization, region labels, anticrossing
//! tracking versus Δ and the first-order anticrossing shift.

use crate::classical::{PhasePortrait, Region, RegionLabel, SymbolOrdering};
use crate::error::{Error, Result};
use crate::fock::hamiltonian_tridiagonal;
use crate::numerics::eigen::tridiagonal_eigen;
use crate::params::ModelParams;
use crate::prelude::*;
use alloc::format;
use alloc::string::String;

#[derive(Debug, Clone, Copy)]
pub struct Level {
    pub eps: f64,
    pub mean_photon: f64,
    pub label: Option<RegionLabel>,
    /// Share of the state attributed to region 1 when it sits in the
    /// region-1/region-3 window (interpolated between the classical photon
    /// numbers of both orbits); 0 or 1 elsewhere.
    pub weight1: f64,
    /// Within half a level spacing of ε_sep or ε₁.
    pub near_boundary: bool,
}

#[derive(Debug, Clone)]
pub struct QuasienergySpectrum {
    pub params: ModelParams,
    pub n_max: usize,
    pub levels: Vec<Level>,
    /// `vectors[i * dim + n]`: Fock component n of eigenstate i (real).
    pub vectors: Vec<f64>,
    /// Index pairs (i, i+1) closer than 1e-12 relative.
    pub degenerate: Vec<(usize, usize)>,
}

impl QuasienergySpectrum {
    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.vectors[i * d..(i + 1) * d]
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.eps).collect()
    }
}

/// Eigenvalues and vectors without labels.
pub fn eigensystem(params: &ModelParams, n_max: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (d, o) = hamiltonian_tridiagonal(params, n_max)?;
    let e = tridiagonal_eigen(&d, &o)?;
    Ok((e.values, e.vectors))
}

fn photon_number(v: &[f64]) -> f64 {
    v.iter().enumerate().map(|(n, c)| n as f64 * c * c).sum()
}

pub fn diagonalize(params: &ModelParams, n_max: usize) -> Result<QuasienergySpectrum> {
    let (values, vectors) = eigensystem(params, n_max)?;
    let dim = n_max + 1;
    let portrait = if params.drive > 0.0 { PhasePortrait::new(params, SymbolOrdering::Symmetric).ok() } else { None };
    let portrait = portrait.filter(|p| p.separatrix.is_some());
    let mut levels = Vec::with_capacity(dim);
    for (i, &eps) in values.iter().enumerate() {
        let n = photon_number(&vectors[i * dim..(i + 1) * dim]);
        levels.push(Level { eps, mean_photon: n, label: None, weight1: 0.0, near_boundary: false });
    }
    if let Some(p) = &portrait {
        label_levels(p, &mut levels)?;
    } else if params.drive == 0.0 {
        // undriven: the ring |a|² = Δ/α separates inner and outer states
        let ring = params.delta / params.alpha;
        let e_top = params.energy(0.0);
        for l in &mut levels {
            let label = if l.eps > e_top {
                RegionLabel::ThreePrime
            } else if l.mean_photon < ring {
                RegionLabel::One
            } else {
                RegionLabel::Three
            };
            l.label = Some(label);
            l.weight1 = if label == RegionLabel::One { 1.0 } else { 0.0 };
        }
    }
    let degenerate = values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| (w[1] - w[0]).abs() <= 1e-12 * w[0].abs().max(1.0))
        .map(|(i, _)| (i, i + 1))
        .collect();
    Ok(QuasienergySpectrum { params: params.clone(), n_max, levels, vectors, degenerate })
}

fn label_levels(p: &PhasePortrait, levels: &mut [Level]) -> Result<()> {
    let s = *p.sep()?;
    let scale = s.eps_1 - s.eps_2;
    let n = levels.len();
    for i in 0..n {
        let eps = levels[i].eps;
        let spacing = {
            let lo = if i > 0 { eps - levels[i - 1].eps } else { f64::INFINITY };
            let hi = if i + 1 < n { levels[i + 1].eps - eps } else { f64::INFINITY };
            lo.min(hi)
        };
        let band = 0.5 * spacing.min(scale);
        levels[i].near_boundary = (eps - s.eps_sep).abs() < band || (eps - s.eps_1).abs() < band;
        let mean_n = levels[i].mean_photon;
        let label = p.classify(eps, mean_n)?;
        levels[i].label = Some(label);
        levels[i].weight1 = match label {
            RegionLabel::One | RegionLabel::Three => {
                let e = eps.max(s.eps_sep + 1e-9 * scale).min(s.eps_1 - 1e-12 * scale);
                let n1 = p.averages(Region::One, e)?.mean_photons();
                let n3 = p.averages(Region::Three, e)?.mean_photons();
                ((n3 - mean_n) / (n3 - n1)).clamp(0.0, 1.0)
            }
            _ => 0.0,
        };
    }
    Ok(())
}

/// Isolation below which an anticrossing counts as a two-level event.
pub const TWO_LEVEL_ISOLATION: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct Anticrossing {
    /// eigen-indices of the two levels at the refined minimum
    pub level_pair: (usize, usize),
    pub delta_at_min: f64,
    pub min_gap: f64,
    pub mean_quasienergy: f64,
    pub predicted_shift: Option<f64>,
    /// min_gap over the distance from the pair's mean to the nearest third
    /// level; well below 1 for a two-level avoided crossing.
    pub isolation: f64,
    /// grid index of the sampled minimum
    pub grid_index: usize,
}

/// One row of the tracked-gap table.
#[derive(Debug, Clone, Copy)]
pub struct GapSample {
    pub delta: f64,
    pub pair: (usize, usize),
    pub gap: f64,
    pub mean_eps: f64,
}

#[derive(Debug, Clone, Default)]
pub struct AnticrossingScan {
    pub anticrossings: Vec<Anticrossing>,
    pub samples: Vec<GapSample>,
    pub warnings: Vec<String>,
}

/// Greedy maximal-overlap assignment: `perm[i]` is the index at the next
/// grid point that continues level `i`.
pub fn track_permutation(dim: usize, prev: &[f64], next: &[f64]) -> Vec<usize> {
    let mut cand: Vec<(f64, usize, usize)> = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        let vi = &prev[i * dim..(i + 1) * dim];
        for j in 0..dim {
            let vj = &next[j * dim..(j + 1) * dim];
            let ov: f64 = vi.iter().zip(vj).map(|(a, b)| a * b).sum::<f64>().abs();
            if ov > 0.05 {
                cand.push((ov, i, j));
            }
        }
    }
    cand.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut perm = vec![usize::MAX; dim];
    let mut used = vec![false; dim];
    for (_, i, j) in cand {
        if perm[i] == usize::MAX && !used[j] {
            perm[i] = j;
            used[j] = true;
        }
    }
    // leftovers keep energy order
    let mut free = (0..dim).filter(|j| !used[*j]);
    for p in perm.iter_mut() {
        if *p == usize::MAX {
            *p = free.next().unwrap();
        }
    }
    perm
}

/// Scans anticrossings between region-1 and region-3 levels along a Δ grid.
/// `params_at(Δ)` builds the model at any Δ (so refinement can evaluate
/// between grid points); `deltas` must be increasing.
pub fn scan_anticrossings<F: Fn(f64) -> ModelParams>(
    params_at: F,
    deltas: &[f64],
    n_max: usize,
) -> Result<AnticrossingScan> {
    let spectra: Vec<QuasienergySpectrum> =
        deltas.iter().map(|&d| diagonalize(&params_at(d), n_max)).collect::<Result<_>>()?;
    scan_from_spectra(params_at, &spectra)
}

/// Same as [`scan_anticrossings`] on precomputed (labeled) spectra.
pub fn scan_from_spectra<F: Fn(f64) -> ModelParams>(
    params_at: F,
    spectra: &[QuasienergySpectrum],
) -> Result<AnticrossingScan> {
    let ng = spectra.len();
    let mut out = AnticrossingScan::default();
    if ng < 3 {
        return Err(Error::InvalidParams("anticrossing scan needs at least 3 grid points".into()));
    }
    let dim = spectra[0].dim();
    let n_max = spectra[0].n_max;
    // track[t][j] = eigen index of track t at grid point j
    let mut track = vec![vec![0usize; ng]; dim];
    for (t, row) in track.iter_mut().enumerate() {
        row[0] = t;
    }
    for j in 1..ng {
        let perm = track_permutation(dim, &spectra[j - 1].vectors, &spectra[j].vectors);
        for row in track.iter_mut() {
            row[j] = perm[row[j - 1]];
        }
    }
    let delta_of = |j: usize| spectra[j].params.delta;
    let label = |j: usize, i: usize| spectra[j].levels[i].label;
    let is13 = |a: Option<RegionLabel>, b: Option<RegionLabel>| {
        matches!((a, b), (Some(RegionLabel::One), Some(RegionLabel::Three)) | (Some(RegionLabel::Three), Some(RegionLabel::One)))
    };
    let mut seen: Vec<(usize, usize, usize)> = Vec::new();
    for j in 1..ng - 1 {
        // energy-adjacent pairs at grid point j
        for i in 0..dim - 1 {
            let (ia, ib) = (i, i + 1);
            let ta = track.iter().position(|r| r[j] == ia).unwrap();
            let tb = track.iter().position(|r| r[j] == ib).unwrap();
            let gap = |k: usize| (spectra[k].levels[track[ta][k]].eps - spectra[k].levels[track[tb][k]].eps).abs();
            let (g0, g1, g2) = (gap(j - 1), gap(j), gap(j + 1));
            if !(g1 < g0 && g1 <= g2) {
                continue;
            }
            let labels_ok = [j.saturating_sub(2), j, (j + 2).min(ng - 1)]
                .iter()
                .any(|&k| is13(label(k, track[ta][k]), label(k, track[tb][k])));
            if !labels_ok {
                continue;
            }
            let key = (ta.min(tb), ta.max(tb), j);
            if seen.contains(&key) {
                continue;
            }
            seen.push(key);
            for k in [j - 1, j, j + 1] {
                let (ea, eb) = (spectra[k].levels[track[ta][k]].eps, spectra[k].levels[track[tb][k]].eps);
                out.samples.push(GapSample {
                    delta: delta_of(k),
                    pair: (track[ta][k], track[tb][k]),
                    gap: (ea - eb).abs(),
                    mean_eps: 0.5 * (ea + eb),
                });
            }
            let vecs = (spectra[j].vector(ia).to_vec(), spectra[j].vector(ib).to_vec());
            let ac = refine_minimum(&params_at, n_max, [delta_of(j - 1), delta_of(j), delta_of(j + 1)], [g0, g1, g2], &vecs)?;
            out.anticrossings.push(Anticrossing { grid_index: j, ..ac });
        }
    }
    // edge minima: gap still decreasing at either end for a 1–3 adjacent pair
    for (j, nb) in [(0usize, 1usize), (ng - 1, ng - 2)] {
        for i in 0..dim - 1 {
            let (a, b) = (&spectra[j].levels[i], &spectra[j].levels[i + 1]);
            let ta = track.iter().position(|r| r[j] == i).unwrap();
            let tb = track.iter().position(|r| r[j] == i + 1).unwrap();
            let ge = (a.eps - b.eps).abs();
            let gn = (spectra[nb].levels[track[ta][nb]].eps - spectra[nb].levels[track[tb][nb]].eps).abs();
            if is13(a.label, b.label) && ge < gn && ge < 1e-2 * (spectra[j].params.alpha) {
                out.warnings.push(format!("gap minimum of levels ({i},{}) at grid edge Δ={}", i + 1, delta_of(j)));
            }
        }
    }
    out.anticrossings.sort_by(|a, b| a.delta_at_min.total_cmp(&b.delta_at_min));
    Ok(out)
}

/// Successive parabolic interpolation of gap² around a sampled minimum.
fn refine_minimum<F: Fn(f64) -> ModelParams>(
    params_at: &F,
    n_max: usize,
    xs: [f64; 3],
    gs: [f64; 3],
    vecs: &(Vec<f64>, Vec<f64>),
) -> Result<Anticrossing> {
    let dim = n_max + 1;
    let h = 0.5 * (xs[2] - xs[0]);
    let tol = h * h / 8.0;
    let mut pts: Vec<(f64, f64)> = xs.iter().zip(gs.iter()).map(|(&x, &g)| (x, g * g)).collect();
    // identify the pair at an arbitrary Δ by overlap with the grid vectors
    let eval = |x: f64| -> Result<(f64, (usize, usize), f64, f64)> {
        let (vals, v) = eigensystem(&params_at(x), n_max)?;
        let pick = |target: &[f64]| -> usize {
            (0..dim)
                .max_by(|&a, &b| {
                    let oa: f64 = target.iter().zip(&v[a * dim..(a + 1) * dim]).map(|(p, q)| p * q).sum::<f64>().abs();
                    let ob: f64 = target.iter().zip(&v[b * dim..(b + 1) * dim]).map(|(p, q)| p * q).sum::<f64>().abs();
                    oa.total_cmp(&ob)
                })
                .unwrap()
        };
        // the two grid vectors span the pair subspace; project both
        let mut ia = pick(&vecs.0);
        let mut ib = pick(&vecs.1);
        if ia == ib {
            // fully mixed: take the neighbour closest in energy
            ib = if ia + 1 < dim && (ia == 0 || (vals[ia + 1] - vals[ia]).abs() < (vals[ia] - vals[ia - 1]).abs()) {
                ia + 1
            } else {
                ia - 1
            };
        }
        if ia > ib {
            core::mem::swap(&mut ia, &mut ib);
        }
        let mid = 0.5 * (vals[ia] + vals[ib]);
        let third = vals
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != ia && *k != ib)
            .map(|(_, e)| (e - mid).abs())
            .fold(f64::INFINITY, f64::min);
        let gap = (vals[ia] - vals[ib]).abs();
        Ok((gap, (ia, ib), mid, gap / third))
    };
    let (g_mid, pair_mid, e_mid, iso) = eval(xs[1])?;
    let mut best = (xs[1], g_mid, pair_mid, e_mid, iso);
    for _ in 0..12 {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (x0, y0) = pts[0];
        let (x1, y1) = pts[1];
        let (x2, y2) = pts[2];
        let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
        if den == 0.0 {
            break;
        }
        let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
        let xv = (x1 - 0.5 * num / den).clamp(x0, x2);
        let (g, pair, e, iso) = eval(xv)?;
        let step = (xv - best.0).abs();
        if g < best.1 {
            best = (xv, g, pair, e, iso);
        }
        // keep the three lowest points
        pts.push((xv, g * g));
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        pts.truncate(3);
        if step < tol {
            break;
        }
    }
    Ok(Anticrossing {
        level_pair: best.2,
        delta_at_min: best.0,
        min_gap: best.1,
        mean_quasienergy: best.3,
        predicted_shift: None,
        isolation: best.4,
        grid_index: 0,
    })
}

/// Hybridized level pairs of a spectrum: energy-adjacent states inside the
/// region-1/region-3 window whose photon-number matrix in their span is
/// rotated by 45° ± 10° from the eigenbasis and whose recovered localized
/// states differ in photon number by at least half the classical n̄₃ − n̄₁
/// (rejects neighbours taken from two different hybridized pairs).
pub fn resonant_pairs(params: &ModelParams, n_max: usize) -> Result<Vec<(usize, usize, f64)>> {
    let p = PhasePortrait::new(params, SymbolOrdering::Symmetric)?;
    let s = *p.sep()?;
    let (vals, v) = eigensystem(params, n_max)?;
    let dim = n_max + 1;
    let mut out = Vec::new();
    for i in 0..dim - 1 {
        let e = 0.5 * (vals[i] + vals[i + 1]);
        if e <= s.eps_sep || e >= s.eps_1 {
            continue;
        }
        let angle = mixing_angle(&v[i * dim..(i + 1) * dim], &v[(i + 1) * dim..(i + 2) * dim]);
        if (angle - 45.0).abs() > 10.0 {
            continue;
        }
        let contrast = localization_contrast(&v[i * dim..(i + 1) * dim], &v[(i + 1) * dim..(i + 2) * dim]);
        let n1 = p.averages(Region::One, e)?.mean_photons();
        let n3 = p.averages(Region::Three, e)?.mean_photons();
        if contrast >= 0.5 * (n3 - n1) {
            out.push((i, i + 1, e));
        }
    }
    Ok(out)
}

/// Rotation (degrees, in [0, 45]) between two eigenvectors and the basis
/// that diagonalizes n̂ in their span.
pub fn mixing_angle(va: &[f64], vb: &[f64]) -> f64 {
    let nm = |x: &[f64], y: &[f64]| -> f64 { x.iter().zip(y).enumerate().map(|(n, (p, q))| n as f64 * p * q).sum() };
    let (naa, nbb, nab) = (nm(va, va), nm(vb, vb), nm(va, vb));
    let th = 0.5 * (2.0 * nab.abs()).atan2((naa - nbb).abs());
    th.to_degrees()
}

/// Photon-number split of the n̂-diagonal basis in the span of two states
/// (n₃ − n₁ of the recovered localized pair).
pub fn localization_contrast(va: &[f64], vb: &[f64]) -> f64 {
    let nm = |x: &[f64], y: &[f64]| -> f64 { x.iter().zip(y).enumerate().map(|(n, (p, q))| n as f64 * p * q).sum() };
    let (naa, nbb, nab) = (nm(va, va), nm(vb, vb), nm(va, vb));
    ((naa - nbb).powi(2) + 4.0 * nab * nab).sqrt()
}

/// First-order anticrossing shift δΔ_n = (V₃₃ − V₁₁)/(n₃₃ − n₁₁) from the
/// symmetric/antisymmetric combinations of a hybridized pair of the pure
/// Kerr model at Δ₀; V̂ is taken from `params.alpha_q`.
pub fn predict_shift(params: &ModelParams, n_max: usize, pair: (usize, usize)) -> Result<f64> {
    let (_, v) = eigensystem(&params.pure_kerr(), n_max)?;
    let dim = n_max + 1;
    let va = &v[pair.0 * dim..(pair.0 + 1) * dim];
    let vb = &v[pair.1 * dim..(pair.1 + 1) * dim];
    let angle = mixing_angle(va, vb);
    if (angle - 45.0).abs() > 10.0 {
        return Err(Error::InvalidParams(format!("pair {pair:?} mixing angle {angle:.1}° too far from 45°")));
    }
    let nab: f64 = va.iter().zip(vb).enumerate().map(|(n, (p, q))| n as f64 * p * q).sum();
    let sgn = if nab >= 0.0 { 1.0 } else { -1.0 };
    let r = core::f64::consts::FRAC_1_SQRT_2;
    let plus: Vec<f64> = va.iter().zip(vb).map(|(a, b)| r * (a + sgn * b)).collect();
    let minus: Vec<f64> = va.iter().zip(vb).map(|(a, b)| r * (a - sgn * b)).collect();
    let expect = |c: &[f64], f: &dyn Fn(f64) -> f64| -> f64 { c.iter().enumerate().map(|(n, x)| f(n as f64) * x * x).sum() };
    // `plus` carries the larger photon number (region 3)
    let n3 = expect(&plus, &|n| n);
    let n1 = expect(&minus, &|n| n);
    let v3 = expect(&plus, &|n| params.v(n));
    let v1 = expect(&minus, &|n| params.v(n));
    Ok((v3 - v1) / (n3 - n1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undriven_eigenvalues_exact() {
        let p = ModelParams::new(5.0, 1.0, 0.0).with_alpha3(1e-3);
        let s = diagonalize(&p, 30).unwrap();
        for (n, l) in s.levels.iter().enumerate() {
            assert!(s.levels.iter().any(|x| (x.eps - p.energy(n as f64)).abs() < 1e-12));
            assert!(l.mean_photon >= 0.0);
        }
    }

    #[test]
    fn undriven_kerr_degeneracy_flagged() {
        // 2Δ/α = 10: levels n and 10 − n coincide
        let p = ModelParams::new(5.0, 1.0, 0.0);
        let s = diagonalize(&p, 30).unwrap();
        for n in 0..5 {
            assert_eq!(p.energy(n as f64), p.energy((10 - n) as f64));
        }
        assert_eq!(s.degenerate.len(), 5);
    }

    #[test]
    fn labels_consistent_with_windows() {
        // off resonance (2Δ/α = 16.5) so states are localized
        let p = ModelParams::new(8.25, 1.0, 0.0).with_drive_ratio(0.3);
        let s = diagonalize(&p, 40).unwrap();
        let por = PhasePortrait::new(&p, SymbolOrdering::Symmetric).unwrap();
        let sx = *por.sep().unwrap();
        let mut counts = [0usize; 4];
        for l in &s.levels {
            match l.label.unwrap() {
                RegionLabel::Two => {
                    assert!(l.eps <= sx.eps_sep);
                    counts[1] += 1;
                }
                RegionLabel::One | RegionLabel::Three => assert!(l.eps > sx.eps_sep && l.eps < sx.eps_1),
                RegionLabel::ThreePrime => assert!(l.eps >= sx.eps_1),
            }
            if l.label == Some(RegionLabel::One) {
                counts[0] += 1;
            }
        }
        assert!(counts[0] >= 2 && counts[1] >= 2);
        // Bohr–Sommerfeld count in region 1 agrees within one level
        let bs = por.bohr_sommerfeld_levels(Region::One, None).unwrap();
        assert!((bs.len() as i64 - counts[0] as i64).abs() <= 1, "{} vs {}", bs.len(), counts[0]);
    }

    #[test]
    fn synthetic_avoided_crossing_recovered() {
        // 3-level toy embedded through the tracking/refinement path:
        // H = [[x, t, 0], [t, −x, 0], [0, 0, 5]] has gap 2√(x² + t²).
        let t = 0.0137;
        let xs: Vec<f64> = (0..21).map(|k| -0.1 + 0.01 * k as f64 + 0.0031).collect();
        let eig = |x: f64| {
            let e = crate::numerics::eigen::tridiagonal_eigen(&[x, -x, 5.0], &[t, 0.0]).unwrap();
            (e.values, e.vectors)
        };
        let mut best: (f64, f64) = (0.0, f64::INFINITY);
        let mut prev = eig(xs[0]).1;
        for &x in &xs[1..] {
            let (vals, v) = eig(x);
            let _ = track_permutation(3, &prev, &v);
            prev = v;
            let g = vals[1] - vals[0];
            if g < best.1 {
                best = (x, g);
            }
        }
        // parabolic vertex of gap² from the three samples around the minimum
        let h = 0.01;
        let g2 = |x: f64| {
            let (v, _) = eig(x);
            (v[1] - v[0]).powi(2)
        };
        let (y0, y1, y2) = (g2(best.0 - h), g2(best.0), g2(best.0 + h));
        let xv = best.0 - 0.5 * h * (y2 - y0) / (y2 - 2.0 * y1 + y0);
        let (v, _) = eig(xv);
        assert!((v[1] - v[0] - 2.0 * t).abs() < 1e-6);
    }

    #[test]
    fn pure_kerr_anticrossings_at_integer() {
        let ratio = 0.1;
        let mk = |d: f64| ModelParams::new(d, 1.0, 0.0).with_drive_ratio(ratio);
        let deltas: Vec<f64> = (0..41).map(|k| 4.45 + 0.1 * 0.5 * k as f64 / 2.0).collect();
        let scan = scan_anticrossings(mk, &deltas, 30).unwrap();
        assert!(!scan.anticrossings.is_empty());
        for ac in scan.anticrossings.iter().filter(|a| a.isolation < TWO_LEVEL_ISOLATION) {
            let m = 2.0 * ac.delta_at_min;
            assert!((m - m.round()).abs() < 1e-3, "{ac:?}");
        }
    }

    #[test]
    fn shift_zero_without_high_order_and_linear_in_alpha3() {
        let p0 = ModelParams::new(6.0, 1.0, 0.0).with_drive_ratio(0.4);
        let pairs = resonant_pairs(&p0, 40).unwrap();
        assert!(!pairs.is_empty());
        let (a, b, _) = pairs[0];
        assert_eq!(predict_shift(&p0, 40, (a, b)).unwrap(), 0.0);
        for w in pairs.windows(2) {
            assert!(w[0].1 < w[1].0, "pairs overlap: {pairs:?}");
        }
        let s1 = predict_shift(&p0.clone().with_alpha3(1e-5), 40, (a, b)).unwrap();
        let s2 = predict_shift(&p0.clone().with_alpha3(2e-5), 40, (a, b)).unwrap();
        assert!(s1 > 0.0);
        assert!((s2 / s1 - 2.0).abs() < 1e-10);
    }

    #[test]
    fn unhybridized_pair_rejected() {
        let p = ModelParams::new(6.25, 1.0, 0.0).with_drive_ratio(0.4).with_alpha3(1e-4);
        let s = diagonalize(&p, 40).unwrap();
        let i = s.levels.iter().position(|l| l.label == Some(RegionLabel::One)).unwrap();
        assert!(predict_shift(&p, 40, (i, i + 1)).is_err());
    }
}
