//! Peak finding on sampled curves, straight-line fits and rank correlation.

use crate::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    /// vertex of the parabola through the sample and its neighbours
    pub x: f64,
    pub y: f64,
    /// height above the higher of the two bases (lowest points between the
    /// peak and the nearest higher sample, or the ends)
    pub prominence: f64,
}

/// Interior local maxima whose prominence is at least `min_prominence`.
/// Flat tops report their left-most sample.
pub fn find_peaks(x: &[f64], y: &[f64], min_prominence: f64) -> Vec<Peak> {
    let n = y.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if y[i] > y[i - 1] {
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[i] {
                let p = prominence(y, i, j);
                if p >= min_prominence {
                    out.push(Peak { index: i, x: refine(x, y, i, j), y: y[i], prominence: p });
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

fn prominence(y: &[f64], lo: usize, hi: usize) -> f64 {
    let h = y[lo];
    let mut left = h;
    for k in (0..lo).rev() {
        if y[k] > h {
            break;
        }
        left = left.min(y[k]);
    }
    let mut right = h;
    for &v in &y[hi + 1..] {
        if v > h {
            break;
        }
        right = right.min(v);
    }
    h - left.max(right)
}

fn refine(x: &[f64], y: &[f64], lo: usize, hi: usize) -> f64 {
    if lo != hi {
        return 0.5 * (x[lo] + x[hi]);
    }
    let (x0, x1, x2) = (x[lo - 1], x[lo], x[lo + 1]);
    let (y0, y1, y2) = (y[lo - 1], y[lo], y[lo + 1]);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let c = (d12 - d01) / (x2 - x0);
    if c >= 0.0 {
        return x1;
    }
    // vertex of y0 + d01 (x − x0) + c (x − x0)(x − x1)
    let v = 0.5 * (x0 + x1) - d01 / (2.0 * c);
    v.clamp(x0, x2)
}

/// Interior local minima (indices), flat bottoms by their left-most sample.
pub fn local_minima(y: &[f64]) -> Vec<usize> {
    let neg: Vec<f64> = y.iter().map(|v| -v).collect();
    let x: Vec<f64> = (0..y.len()).map(|k| k as f64).collect();
    find_peaks(&x, &neg, 0.0).into_iter().map(|p| p.index).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares y ≈ slope·x + intercept. R² = 1 when y is
/// constant and fitted exactly.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Some(LinearFit { slope, intercept, r2 })
}

/// Ranks from 1, ties sharing their average rank.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (Pearson correlation of the ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}
