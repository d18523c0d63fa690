//! Truncated Fock-space operators, the Hamiltonian and the Lindblad generator.

use crate::error::{Error, Result};
use crate::numerics::linalg::BandMatrix;
use crate::params::ModelParams;
use crate::prelude::*;
use crate::C64;

/// Dense complex matrix indexed by Fock occupation (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct FockMatrix {
    pub dim: usize,
    pub entries: Vec<C64>,
}

impl FockMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    out.entries[i * d + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ‖A − A†‖ / ‖A‖ (0 for the zero matrix).
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.frobenius();
        if n == 0.0 {
            return 0.0;
        }
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += (self.get(i, j) - self.get(j, i).conj()).norm_sqr();
            }
        }
        s.sqrt() / n
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }
}

pub fn annihilation(n_max: usize) -> FockMatrix {
    let mut a = FockMatrix::zeros(n_max + 1);
    for n in 1..=n_max {
        a.set(n - 1, n, C64::new((n as f64).sqrt(), 0.0));
    }
    a
}

pub fn number(n_max: usize) -> FockMatrix {
    let mut m = FockMatrix::zeros(n_max + 1);
    for n in 0..=n_max {
        m.set(n, n, C64::new(n as f64, 0.0));
    }
    m
}

/// Fails when the high-amplitude intensity Δ/α does not fit in half the space.
pub fn check_truncation(params: &ModelParams, n_max: usize) -> Result<()> {
    params.validate()?;
    if n_max < 1 {
        return Err(Error::Truncation { n_max, suggested: params.default_n_max() });
    }
    if params.alpha > 0.0 && params.delta / params.alpha > n_max as f64 / 2.0 {
        return Err(Error::Truncation { n_max, suggested: params.default_n_max() });
    }
    Ok(())
}

/// The Hamiltonian is real symmetric tridiagonal: returns (diagonal, off-diagonal).
pub fn hamiltonian_tridiagonal(params: &ModelParams, n_max: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    check_truncation(params, n_max)?;
    let diag = (0..=n_max).map(|n| params.energy(n as f64)).collect();
    let off = (1..=n_max).map(|n| params.drive * (n as f64).sqrt()).collect();
    Ok((diag, off))
}

pub fn build_hamiltonian(params: &ModelParams, n_max: usize) -> Result<FockMatrix> {
    let (d, o) = hamiltonian_tridiagonal(params, n_max)?;
    let mut h = FockMatrix::zeros(n_max + 1);
    for (n, &e) in d.iter().enumerate() {
        h.set(n, n, C64::new(e, 0.0));
    }
    for (n, &v) in o.iter().enumerate() {
        h.set(n, n + 1, C64::new(v, 0.0));
        h.set(n + 1, n, C64::new(v, 0.0));
    }
    Ok(h)
}

/// Sparse generator acting on row-major vectorized ρ (index m·d + n ↔ ρ_mn).
///
/// Dissipator in the symmetric form
/// γ(N+1)(aρa† − ½{a†a, ρ}) + γN(a†ρa − ½{aa†, ρ}), which stays trace
/// preserving and completely positive after truncation.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub dim: usize,
    rows: Vec<Vec<(usize, C64)>>,
}

pub fn build_lindblad_superoperator(params: &ModelParams, n_max: usize) -> Result<Liouvillian> {
    let (e, off) = hamiltonian_tridiagonal(params, n_max)?;
    let d = n_max + 1;
    let g_down = params.gamma * (params.n_thermal + 1.0);
    let g_up = params.gamma * params.n_thermal;
    let i = C64::new(0.0, 1.0);
    // off-diagonal of H between j and j+1
    let hop = |j: usize| off[j];
    // truncated aa† is diag(j+1) except 0 at the top
    let aad = |j: usize| if j < n_max { (j + 1) as f64 } else { 0.0 };
    let mut rows = Vec::with_capacity(d * d);
    for m in 0..d {
        for n in 0..d {
            let mut r: Vec<(usize, C64)> = Vec::with_capacity(9);
            let diss = -0.5 * g_down * (m + n) as f64 - 0.5 * g_up * (aad(m) + aad(n));
            r.push((m * d + n, i * (e[n] - e[m]) + diss));
            // i(ρH)_mn
            if n > 0 {
                r.push((m * d + n - 1, i * hop(n - 1)));
            }
            if n + 1 < d {
                r.push((m * d + n + 1, i * hop(n)));
            }
            // −i(Hρ)_mn
            if m > 0 {
                r.push(((m - 1) * d + n, -i * hop(m - 1)));
            }
            if m + 1 < d {
                r.push(((m + 1) * d + n, -i * hop(m)));
            }
            if m + 1 < d && n + 1 < d && g_down != 0.0 {
                let c = g_down * (((m + 1) * (n + 1)) as f64).sqrt();
                r.push(((m + 1) * d + n + 1, C64::new(c, 0.0)));
            }
            if m > 0 && n > 0 && g_up != 0.0 {
                let c = g_up * ((m * n) as f64).sqrt();
                r.push(((m - 1) * d + n - 1, C64::new(c, 0.0)));
            }
            r.sort_by_key(|x| x.0);
            rows.push(r);
        }
    }
    Ok(Liouvillian { dim: d, rows })
}

impl Liouvillian {
    pub fn size(&self) -> usize {
        self.dim * self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn row(&self, k: usize) -> &[(usize, C64)] {
        &self.rows[k]
    }

    pub fn apply(&self, rho: &[C64]) -> Vec<C64> {
        self.rows.iter().map(|r| r.iter().map(|&(j, c)| c * rho[j]).sum()).collect()
    }

    /// Half bandwidth of the vectorized operator.
    pub fn bandwidth(&self) -> usize {
        self.dim + 1
    }

    pub fn to_band(&self) -> BandMatrix<C64> {
        let b = self.bandwidth();
        let mut m = BandMatrix::zeros(self.size(), b, b);
        for (k, r) in self.rows.iter().enumerate() {
            for &(j, c) in r {
                m.set(k, j, c);
            }
        }
        m
    }
}

pub fn vectorize(rho: &FockMatrix) -> Vec<C64> {
    rho.entries.clone()
}

pub fn unvectorize(dim: usize, v: &[C64]) -> FockMatrix {
    FockMatrix { dim, entries: v.to_vec() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    /// Independent dense evaluation of the generator by matrix products.
    fn dense_generator(p: &ModelParams, n_max: usize, rho: &FockMatrix) -> FockMatrix {
        let h = build_hamiltonian(p, n_max).unwrap();
        let a = annihilation(n_max);
        let ad = a.adjoint();
        let n = ad.matmul(&a);
        let aad = a.matmul(&ad);
        let gd = p.gamma * (p.n_thermal + 1.0);
        let gu = p.gamma * p.n_thermal;
        let rh = rho.matmul(&h);
        let hr = h.matmul(rho);
        let ara = a.matmul(rho).matmul(&ad);
        let ada = ad.matmul(rho).matmul(&a);
        let nr = n.matmul(rho);
        let rn = rho.matmul(&n);
        let ar = aad.matmul(rho);
        let ra = rho.matmul(&aad);
        let mut out = FockMatrix::zeros(rho.dim);
        for k in 0..out.entries.len() {
            out.entries[k] = C64::new(0.0, 1.0) * (rh.entries[k] - hr.entries[k])
                + gd * (ara.entries[k] - 0.5 * (nr.entries[k] + rn.entries[k]))
                + gu * (ada.entries[k] - 0.5 * (ar.entries[k] + ra.entries[k]));
        }
        out
    }

    #[test]
    fn hamiltonian_examples() {
        let h = build_hamiltonian(&ModelParams::new(1.0, 2.0, 0.0), 2).unwrap();
        assert_eq!(h.get(0, 0), c(0.0));
        assert_eq!(h.get(1, 1), c(0.0));
        assert_eq!(h.get(2, 2), c(2.0));
        let h = build_hamiltonian(&ModelParams::new(1.0, 2.0, 0.5), 1).unwrap();
        assert_eq!(h.get(0, 1), c(0.5));
        assert_eq!(h.get(1, 0), c(0.5));
        let h = build_hamiltonian(&ModelParams::new(1.0, 2.0, 0.0).with_alpha3(0.1), 2).unwrap();
        assert!((h.get(2, 2).re - 2.8).abs() < 1e-14);
    }

    #[test]
    fn truncation_rejected_with_suggestion() {
        let err = build_hamiltonian(&ModelParams::new(10.0, 1.0, 0.1), 15).unwrap_err();
        assert_eq!(err, Error::Truncation { n_max: 15, suggested: 40 });
    }

    #[test]
    fn annihilation_structure() {
        let a = annihilation(5);
        for i in 0..6 {
            for j in 0..6 {
                let expected = if j == i + 1 { (j as f64).sqrt() } else { 0.0 };
                assert_eq!(a.get(i, j), c(expected));
            }
        }
    }

    #[test]
    fn sparse_matches_dense_products() {
        let p = ModelParams::new(2.0, 1.0, 0.7).with_alpha3(0.01).with_damping(0.3, 1.5);
        let n_max = 6;
        let l = build_lindblad_superoperator(&p, n_max).unwrap();
        let d = n_max + 1;
        let mut rho = FockMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                rho.set(i, j, C64::new((i as f64 + 0.3 * j as f64).sin(), (i as f64 * j as f64).cos() - 0.5));
            }
        }
        let fast = l.apply(&vectorize(&rho));
        let slow = dense_generator(&p, n_max, &rho);
        for k in 0..fast.len() {
            assert!((fast[k] - slow.entries[k]).norm() < 1e-12);
        }
        assert!(l.nnz() < 9 * d * d);
    }

    #[test]
    fn maximally_mixed_trace_zero() {
        let p = ModelParams::new(3.0, 1.0, 1.0).with_damping(0.5, 2.0);
        let l = build_lindblad_superoperator(&p, 8).unwrap();
        let d = 9;
        let mut rho = FockMatrix::zeros(d);
        for i in 0..d {
            rho.set(i, i, c(1.0 / d as f64));
        }
        let out = unvectorize(d, &l.apply(&vectorize(&rho)));
        assert!(out.trace().norm() < 1e-12);
    }

    #[test]
    fn unitary_limit_is_commutator() {
        let p = ModelParams::new(3.0, 1.0, 1.0);
        let l = build_lindblad_superoperator(&p, 7).unwrap();
        let h = build_hamiltonian(&p, 7).unwrap();
        let mut rho = FockMatrix::zeros(8);
        rho.set(1, 3, C64::new(0.2, 0.1));
        rho.set(3, 1, C64::new(0.2, -0.1));
        rho.set(2, 2, c(0.7));
        let out = unvectorize(8, &l.apply(&vectorize(&rho)));
        let rh = rho.matmul(&h);
        let hr = h.matmul(&rho);
        for k in 0..64 {
            let expect = C64::new(0.0, 1.0) * (rh.entries[k] - hr.entries[k]);
            assert!((out.entries[k] - expect).norm() < 1e-12);
        }
        // i[ρ,H] maps Hermitian ρ to a Hermitian matrix
        assert!(out.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn thermal_fixed_point() {
        let p = ModelParams::new(3.0, 1.0, 0.0).with_damping(1.0, 3.0);
        let n_max = 120;
        let l = build_lindblad_superoperator(&p, n_max).unwrap();
        let d = n_max + 1;
        let mut rho = FockMatrix::zeros(d);
        let r = 0.75f64;
        for n in 0..d {
            rho.set(n, n, c((1.0 - r) * r.powi(n as i32)));
        }
        let res = l.apply(&vectorize(&rho));
        let norm = res.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm < 1e-10, "{norm}");
    }

    proptest! {
        #[test]
        fn hamiltonian_hermitian(delta in 0.5f64..20.0, f in 0.0f64..5.0, a3 in -1e-3f64..1e-3) {
            let p = ModelParams::new(delta, 1.0, f).with_alpha3(a3);
            let n_max = p.default_n_max();
            let h = build_hamiltonian(&p, n_max).unwrap();
            prop_assert!(h.hermiticity_defect() < 1e-12);
        }

        #[test]
        fn trace_preserved_on_random_hermitian(seed in proptest::collection::vec(-1.0f64..1.0, 2 * 36),
                                                gamma in 0.0f64..2.0, nth in 0.0f64..4.0, f in 0.0f64..3.0) {
            let p = ModelParams::new(2.0, 1.0, f).with_damping(gamma, nth);
            let l = build_lindblad_superoperator(&p, 5).unwrap();
            let d = 6;
            let mut rho = FockMatrix::zeros(d);
            for i in 0..d {
                for j in 0..d {
                    let z = C64::new(seed[i * d + j], seed[36 + i * d + j]);
                    rho.entries[i * d + j] += z;
                    rho.entries[j * d + i] += z.conj();
                }
            }
            let out = unvectorize(d, &l.apply(&vectorize(&rho)));
            prop_assert!(out.trace().norm() < 1e-12 * (1.0 + rho.frobenius()));
            prop_assert!(out.hermiticity_defect() < 1e-12);
        }
    }
}
