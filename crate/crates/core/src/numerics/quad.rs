//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};
use crate::prelude::*;
use alloc::format;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// (Kronrod value, |Kronrod − Gauss|, Kronrod estimate of ∫|f|)
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut ka = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let (f1, f2) = (f(c - dx), f(c + dx));
        let s = f1 + f2;
        k += WGK[j] * s;
        ka += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs(), ka * h.abs())
}

/// Integrates `f` over `[a, b]` to `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<QuadResult> {
    integrate_with_breaks(f, &[a, b], abs_tol, rel_tol)
}

/// Like [`integrate`] but starts from the partition given by `points`
/// (sorted, at least two entries); useful for interior near-singularities.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    const MAX_INTERVALS: usize = 4000;
    // (a, b, value, error, ∫|f|)
    let mut segs: Vec<(f64, f64, f64, f64, f64)> = Vec::with_capacity(64);
    for w in points.windows(2) {
        if w[1] > w[0] {
            let (v, e, r) = gk15(&mut f, w[0], w[1]);
            segs.push((w[0], w[1], v, e, r));
        }
    }
    loop {
        let (total, err, resabs) = segs.iter().fold((0.0, 0.0, 0.0), |(s, e, r), x| (s + x.2, e + x.3, r + x.4));
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{}, {}]", points[0], points[points.len() - 1])));
        }
        let tol = abs_tol.max(rel_tol * total.abs());
        if err <= tol {
            return Ok(QuadResult { value: total, error: err, intervals: segs.len() });
        }
        if segs.len() >= MAX_INTERVALS {
            // accept roundoff-limited results
            if err <= (1e3 * tol).max(1e-9 * resabs) {
                return Ok(QuadResult { value: total, error: err, intervals: segs.len() });
            }
            return Err(Error::Quadrature(format!("no convergence: error {err:e} vs tolerance {tol:e}")));
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, s)| if s.3 > best.1 { (i, s.3) } else { best });
        let (a, b, _, _, _) = segs[idx];
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            // interval exhausted at machine resolution; accept what we have
            return Ok(QuadResult { value: total, error: err, intervals: segs.len() });
        }
        let (v1, e1, r1) = gk15(&mut f, a, m);
        let (v2, e2, r2) = gk15(&mut f, m, b);
        segs[idx] = (a, m, v1, e1, r1);
        segs.push((m, b, v2, e2, r2));
    }
}

/// Cumulative trapezoid integral of samples `y` on nodes `x`, starting at 0.
pub fn cumulative_trapezoid(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..x.len() {
        acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
        out.push(acc);
    }
    out
}

/// Cumulative integral through local quadratics: each interval is
/// integrated with the parabola through it and one neighbour, averaged
/// over both neighbours where two exist. Exact for quadratics on any grid.
pub fn cumulative_quadratic(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 3 {
        return cumulative_trapezoid(x, y);
    }
    // ∫_{x[i]}^{x[i+1]} of the parabola through nodes (a, b, c)
    let piece = |i: usize, nodes: [usize; 3]| -> f64 {
        let [a, b, c] = nodes;
        let x1 = x[i + 1];
        // shift the origin to keep the cubic primitive well conditioned
        let sh = |v: f64| v - x[i];
        let (xa, xb, xc) = (sh(x[a]), sh(x[b]), sh(x[c]));
        let (t0, t1) = (0.0, x1 - x[i]);
        let l = |p: f64, q: f64, r: f64| {
            let prim = |t: f64| t * t * t / 3.0 - 0.5 * (q + r) * t * t + q * r * t;
            (prim(t1) - prim(t0)) / ((p - q) * (p - r))
        };
        y[a] * l(xa, xb, xc) + y[b] * l(xb, xa, xc) + y[c] * l(xc, xa, xb)
    };
    let mut out = Vec::with_capacity(n);
    out.push(0.0);
    let mut acc = 0.0;
    for i in 0..n - 1 {
        let left = (i >= 1).then(|| piece(i, [i - 1, i, i + 1]));
        let right = (i + 2 < n).then(|| piece(i, [i, i + 1, i + 2]));
        acc += match (left, right) {
            (Some(a), Some(b)) => 0.5 * (a + b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]),
        };
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-14, 1e-14).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 1e-10).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn log_peak_with_break() {
        // ∫_{-1}^{1} ln|x| dx = -2
        let r = integrate_with_breaks(|x: f64| x.abs().ln(), &[-1.0, 0.0, 1.0], 1e-10, 1e-10).unwrap();
        assert!((r.value + 2.0).abs() < 1e-8);
    }

    #[test]
    fn cumulative_linear_exact() {
        let x: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let c = cumulative_trapezoid(&x, &y);
        assert!((c[10] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cumulative_quadratic_exact_on_uneven_grid() {
        let x = [0.0, 0.1, 0.35, 0.4, 0.9, 1.0, 1.7];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v * v - v + 2.0).collect();
        let c = cumulative_quadratic(&x, &y);
        for (xi, ci) in x.iter().zip(&c) {
            let exact = xi * xi * xi - 0.5 * xi * xi + 2.0 * xi;
            assert!((ci - exact).abs() < 1e-13, "{xi}: {ci} vs {exact}");
        }
    }

    #[test]
    fn cumulative_quadratic_converges_fast() {
        let err = |n: usize| {
            let x: Vec<f64> = (0..=n).map(|i| (i as f64 / n as f64).powi(2) * 3.0).collect();
            let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
            (cumulative_quadratic(&x, &y)[n] - (1.0 - 3.0f64.cos())).abs()
        };
        assert!(err(40) / err(80) > 7.0, "{} {}", err(40), err(80));
    }
}
