//! Dormand–Prince 5(4) with Hairer's continuous extension.

use crate::error::{Error, Result};
use alloc::format;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with the data for its quartic interpolant.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub h: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut y = [0.0; N];
        for i in 0..N {
            let r = &self.r;
            y[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        y
    }

    pub fn start(&self) -> [f64; N] {
        self.r[0]
    }

    pub fn end(&self) -> [f64; N] {
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = self.r[0][i] + self.r[1][i];
        }
        y
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-13 }
    }
}

/// Adaptive integrator. The callback receives each accepted step and
/// returns `false` to stop.
pub struct DormandPrince<const N: usize, F> {
    rhs: F,
    tol: Tolerance,
    pub max_steps: usize,
}

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += c * k[i];
        }
    }
    out
}

impl<const N: usize, F: FnMut(f64, &[f64; N]) -> [f64; N]> DormandPrince<N, F> {
    pub fn new(rhs: F, tol: Tolerance) -> Self {
        Self { rhs, tol, max_steps: 2_000_000 }
    }

    pub fn run<C: FnMut(&Step<N>) -> bool>(&mut self, t0: f64, y0: [f64; N], h0: f64, mut on_step: C) -> Result<()> {
        let mut t = t0;
        let mut y = y0;
        let mut h = h0;
        let mut k1 = (self.rhs)(t, &y);
        for _ in 0..self.max_steps {
            let f = &mut self.rhs;
            let k2 = f(t + C2 * h, &axpy(&y, &[(h * A21, &k1)]));
            let k3 = f(t + C3 * h, &axpy(&y, &[(h * A31, &k1), (h * A32, &k2)]));
            let k4 = f(t + C4 * h, &axpy(&y, &[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]));
            let k5 = f(t + C5 * h, &axpy(&y, &[(h * A51, &k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)]));
            let k6 = f(
                t + h,
                &axpy(&y, &[(h * A61, &k1), (h * A62, &k2), (h * A63, &k3), (h * A64, &k4), (h * A65, &k5)]),
            );
            let y1 = axpy(&y, &[(h * A71, &k1), (h * A73, &k3), (h * A74, &k4), (h * A75, &k5), (h * A76, &k6)]);
            let k7 = f(t + h, &y1);
            let mut err = 0.0f64;
            for i in 0..N {
                let ei = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(y1[i].abs());
                err = err.max((ei / sc).abs());
            }
            if !err.is_finite() {
                return Err(Error::Integration(format!("non-finite error estimate at t={t}")));
            }
            if err <= 1.0 {
                let mut r = [[0.0; N]; 5];
                for i in 0..N {
                    let dy = y1[i] - y[i];
                    r[0][i] = y[i];
                    r[1][i] = dy;
                    r[2][i] = h * k1[i] - dy;
                    r[3][i] = dy - h * k7[i] - r[2][i];
                    r[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                }
                let step = Step { t0: t, h, r };
                t += h;
                y = y1;
                k1 = k7;
                if !on_step(&step) {
                    return Ok(());
                }
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        }
        Err(Error::Integration(format!("step budget exhausted at t={t}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prelude::Vec;

    #[test]
    fn harmonic_oscillator_dense_output() {
        let mut steps = Vec::new();
        let mut dp = DormandPrince::new(|_t, y: &[f64; 2]| [y[1], -y[0]], Tolerance::default());
        dp.run(0.0, [1.0, 0.0], 0.01, |s| {
            steps.push(*s);
            s.t1() < 10.0
        })
        .unwrap();
        for s in &steps {
            for j in 0..4 {
                let t = s.t0 + s.h * j as f64 / 4.0;
                let y = s.eval(t);
                assert!((y[0] - t.cos()).abs() < 1e-9, "t={t}");
                assert!((y[1] + t.sin()).abs() < 1e-9);
            }
        }
    }
}
