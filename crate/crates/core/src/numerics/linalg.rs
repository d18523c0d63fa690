//! LU factorizations (banded and dense) with partial pivoting, generic over
//! real and complex scalars.

use crate::error::{Error, Result};
use crate::prelude::*;
use crate::C64;
use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

pub trait Scalar:
    Copy
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + core::fmt::Debug
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Square band matrix with `kl` sub- and `ku` super-diagonals, with room
/// for the fill-in produced by row interchanges.
#[derive(Debug, Clone)]
pub struct BandMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    w: usize,
    data: Vec<T>,
}

impl<T: Scalar> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let w = 2 * kl + ku + 1;
        Self { n, kl, ku, w, data: vec![T::zero(); n * w] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.w + (j + self.kl - i)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            T::zero()
        }
    }

    /// Panics outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(self.in_band(i, j), "({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(self.in_band(i, j), "({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// Zeroes row `i` inside the band.
    pub fn clear_row(&mut self, i: usize) {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        for j in lo..=hi {
            let k = self.idx(i, j);
            self.data[k] = T::zero();
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut s = T::zero();
            for (j, xj) in x.iter().enumerate().take(hi + 1).skip(lo) {
                s += self.data[self.idx(i, j)] * *xj;
            }
            *yi = s;
        }
        y
    }

    pub fn factor(mut self) -> Result<BandLu<T>> {
        let n = self.n;
        let span = self.kl + self.ku;
        let mut piv = vec![0usize; n];
        let mut umax = 0.0f64;
        let mut umin = f64::INFINITY;
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].modulus();
            for i in k + 1..=last {
                let m = self.data[self.idx(i, k)].modulus();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular(f64::INFINITY));
            }
            umax = umax.max(best);
            umin = umin.min(best);
            piv[k] = p;
            let jmax = (k + span).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l == T::zero() {
                    continue;
                }
                for j in k + 1..=jmax {
                    let kj = self.data[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.data[ij] -= l * kj;
                }
            }
        }
        Ok(BandLu { m: self, piv, cond_estimate: umax / umin })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu<T> {
    m: BandMatrix<T>,
    piv: Vec<usize>,
    /// Ratio of largest to smallest pivot modulus; a cheap conditioning hint.
    pub cond_estimate: f64,
}

impl<T: Scalar> BandLu<T> {
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let m = &self.m;
        let n = m.n;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for i in k + 1..=(k + m.kl).min(n - 1) {
                x[i] -= m.data[m.idx(i, k)] * xk;
            }
        }
        let span = m.kl + m.ku;
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..=(i + span).min(n - 1) {
                s -= m.data[m.idx(i, j)] * x[j];
            }
            x[i] = s / m.data[m.idx(i, i)];
        }
        x
    }
}

/// Dense row-major LU with partial pivoting.
#[derive(Debug, Clone)]
pub struct DenseLu<T> {
    n: usize,
    a: Vec<T>,
    piv: Vec<usize>,
    pub cond_estimate: f64,
}

impl<T: Scalar> DenseLu<T> {
    pub fn factor(n: usize, mut a: Vec<T>) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut piv = vec![0; n];
        let mut umax = 0.0f64;
        let mut umin = f64::INFINITY;
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].modulus();
            for i in k + 1..n {
                let m = a[i * n + k].modulus();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular(f64::INFINITY));
            }
            umax = umax.max(best);
            umin = umin.min(best);
            piv[k] = p;
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                let l = a[i * n + k] / pivot;
                a[i * n + k] = l;
                if l == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    let kj = a[k * n + j];
                    a[i * n + j] -= l * kj;
                }
            }
        }
        Ok(Self { n, a, piv, cond_estimate: umax / umin })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x = b.to_vec();
        // whole rows were swapped during factorization: permute first
        for k in 0..n {
            x.swap(k, self.piv[k]);
        }
        for k in 0..n {
            let xk = x[k];
            for i in k + 1..n {
                x[i] -= self.a[i * n + k] * xk;
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.a[i * n + j] * x[j];
            }
            x[i] = s / self.a[i * n + i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_mul(n: usize, a: &[f64], x: &[f64]) -> Vec<f64> {
        (0..n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect()
    }

    #[test]
    fn band_matches_dense_with_pivoting() {
        let n = 40;
        let (kl, ku) = (3, 2);
        let mut bm = BandMatrix::<f64>::zeros(n, kl, ku);
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // weak diagonal forces row interchanges
                let v = ((i * 7 + j * 13) as f64 * 0.61).sin() + if i == j { 0.01 } else { 0.0 };
                bm.set(i, j, v);
                dense[i * n + j] = v;
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let b = dense_mul(n, &dense, &x);
        assert_eq!(bm.mul_vec(&x), b);
        let sol = bm.factor().unwrap().solve(&b);
        let sol_d = DenseLu::factor(n, dense).unwrap().solve(&b);
        for i in 0..n {
            assert!((sol[i] - x[i]).abs() < 1e-8, "{i}: {} vs {}", sol[i], x[i]);
            assert!((sol_d[i] - x[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn complex_band_solve() {
        let n = 25;
        let mut bm = BandMatrix::<C64>::zeros(n, 1, 1);
        for i in 0..n {
            bm.set(i, i, C64::new(0.1, 1.0 + i as f64));
            if i > 0 {
                bm.set(i, i - 1, C64::new(2.0, -0.5));
            }
            if i + 1 < n {
                bm.set(i, i + 1, C64::new(-1.0, 0.3));
            }
        }
        let x: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0)).collect();
        let b = bm.mul_vec(&x);
        let s = bm.factor().unwrap().solve(&b);
        for i in 0..n {
            assert!((s[i] - x[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn singular_detected() {
        let r = DenseLu::<f64>::factor(2, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(r.is_err());
    }
}
