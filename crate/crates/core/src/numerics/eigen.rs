//! Real symmetric tridiagonal eigenproblem (implicit QL with Wilkinson shifts).

use crate::error::{Error, Result};
use crate::prelude::*;
use alloc::string::ToString;

/// Eigen-decomposition of a symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    pub n: usize,
    /// ascending
    pub values: Vec<f64>,
    /// `vectors[i * n + k]` is component `k` of eigenvector `i`.
    pub vectors: Vec<f64>,
}

impl TridiagEigen {
    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.n..(i + 1) * self.n]
    }
}

/// `diag` has length n, `off` has length n-1 (`off[i]` couples i and i+1).
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<TridiagEigen> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::InvalidParams("tridiagonal dimensions".to_string()));
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::Solver("tridiagonal QL did not converge".to_string()));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = v.split_at_mut((i + 1) * n);
                    let vi = &mut lo[i * n..];
                    let vi1 = &mut hi[..n];
                    for k in 0..n {
                        let hk = vi1[k];
                        vi1[k] = s * vi[k] + c * hk;
                        vi[k] = c * vi[k] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * n);
    for &i in &order {
        values.push(d[i]);
        vectors.extend_from_slice(&v[i * n..(i + 1) * n]);
    }
    Ok(TridiagEigen { n, values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_laplacian_spectrum() {
        let n = 12;
        let r = tridiagonal_eigen(&vec![2.0; n], &vec![-1.0; n - 1]).unwrap();
        for (j, &lam) in r.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((j + 1) as f64 * PI / (n + 1) as f64).cos();
            assert!((lam - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenpairs_satisfy_equation() {
        let d: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin() * 5.0).collect();
        let o: Vec<f64> = (0..29).map(|i| 1.0 + (i as f64).sqrt()).collect();
        let r = tridiagonal_eigen(&d, &o).unwrap();
        for i in 0..30 {
            let v = r.vector(i);
            let mut norm = 0.0;
            for k in 0..30 {
                let mut hv = d[k] * v[k];
                if k > 0 {
                    hv += o[k - 1] * v[k - 1];
                }
                if k < 29 {
                    hv += o[k] * v[k + 1];
                }
                assert!((hv - r.values[i] * v[k]).abs() < 1e-10);
                norm += v[k] * v[k];
            }
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }
}
