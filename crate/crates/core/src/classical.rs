//! Classical phase portrait of H(a, a*): stationary points, separatrix,
//! constant-quasienergy orbits, contour-integral coefficients and
//! Bohr–Sommerfeld levels.
//!
//! Orbits are parametrized by intensity I = |a|². On an orbit of
//! quasienergy ε, cos φ = A(I) = (ε − G(I)) / (2f√I), and every radial
//! integral below is taken over I ∈ [I_lo, I_hi] with the substitution
//! I = I_lo + (I_hi − I_lo)(1 − cos θ)/2 to tame the turning points.

use crate::error::{Error, Result};
use crate::numerics::ode::{DormandPrince, Step, Tolerance};
use crate::numerics::{quad, roots};
use crate::params::ModelParams;
use crate::prelude::*;
use crate::C64;
use alloc::format;

/// Operator ordering used to build the c-number symbol of H.
///
/// `Symmetric` evaluates the diagonal energy at I − 1/2 (the Weyl-type
/// shift that makes Bohr–Sommerfeld levels exact at zero drive);
/// `Normal` uses I directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolOrdering {
    Symmetric,
    Normal,
}

impl SymbolOrdering {
    pub fn shift(self) -> f64 {
        match self {
            SymbolOrdering::Symmetric => 0.5,
            SymbolOrdering::Normal => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    One,
    Two,
    Three,
}

impl Region {
    pub fn number(self) -> u8 {
        match self {
            Region::One => 1,
            Region::Two => 2,
            Region::Three => 3,
        }
    }

    /// +1 when orbits circulate counterclockwise in the (Re a, Im a) plane.
    pub fn orientation(self) -> f64 {
        match self {
            Region::One => 1.0,
            Region::Two | Region::Three => -1.0,
        }
    }
}

/// H(a, a*) = G(|a|²) + f(a + a*), G(I) = E(I − shift).
#[derive(Debug, Clone)]
pub struct ClassicalHamiltonian {
    pub params: ModelParams,
    pub ordering: SymbolOrdering,
}

impl ClassicalHamiltonian {
    pub fn new(params: ModelParams, ordering: SymbolOrdering) -> Self {
        Self { params, ordering }
    }

    pub fn shift(&self) -> f64 {
        self.ordering.shift()
    }

    pub fn g(&self, i: f64) -> f64 {
        self.params.energy(i - self.shift())
    }

    pub fn g1(&self, i: f64) -> f64 {
        self.params.energy_d1(i - self.shift())
    }

    pub fn g2(&self, i: f64) -> f64 {
        self.params.energy_d2(i - self.shift())
    }

    pub fn value(&self, a: C64) -> f64 {
        self.g(a.norm_sqr()) + 2.0 * self.params.drive * a.re
    }

    pub fn on_axis(&self, x: f64) -> f64 {
        self.g(x * x) + 2.0 * self.params.drive * x
    }

    /// ∂H/∂a* = G'(|a|²) a + f.
    pub fn grad_conj(&self, a: C64) -> C64 {
        a * self.g1(a.norm_sqr()) + self.params.drive
    }

    /// Hamiltonian flow ȧ = −i ∂H/∂a*.
    pub fn velocity(&self, a: C64) -> C64 {
        C64::new(0.0, -1.0) * self.grad_conj(a)
    }

    /// V evaluated at the photon number that corresponds to intensity I.
    pub fn v_at(&self, i: f64) -> f64 {
        self.params.v(i - self.shift())
    }

    fn axis_slope(&self, x: f64) -> f64 {
        x * self.g1(x * x) + self.params.drive
    }

    fn hessian(&self, x: f64) -> (f64, f64) {
        let i = x * x;
        let hyy = 2.0 * self.g1(i);
        (hyy + 4.0 * i * self.g2(i), hyy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable1,
    Stable2,
    Saddle,
}

#[derive(Debug, Clone, Copy)]
pub struct StationaryPoint {
    pub a: C64,
    pub eps: f64,
    pub stability: Stability,
    /// small-oscillation frequency (0 for the saddle)
    pub frequency: f64,
}

/// Separatrix data of a bistable portrait; the real-axis ordering is
/// x₂ < x₁ < x_s for f > 0.
#[derive(Debug, Clone, Copy)]
pub struct Separatrix {
    pub eps_sep: f64,
    pub eps_1: f64,
    pub eps_2: f64,
    pub x_sep: f64,
    pub x_1: f64,
    pub x_2: f64,
}

#[derive(Debug, Clone)]
pub struct PhasePortrait {
    pub hamiltonian: ClassicalHamiltonian,
    pub stationary_points: Vec<StationaryPoint>,
    pub separatrix: Option<Separatrix>,
}

/// Stationary points with the symmetric symbol.
pub fn find_stationary_points(params: &ModelParams) -> Result<PhasePortrait> {
    PhasePortrait::new(params, SymbolOrdering::Symmetric)
}

impl PhasePortrait {
    pub fn new(params: &ModelParams, ordering: SymbolOrdering) -> Result<Self> {
        params.validate()?;
        if params.drive == 0.0 {
            return Err(Error::DegenerateDrive);
        }
        let h = ClassicalHamiltonian::new(params.clone(), ordering);
        let i_max = 4.0 * params.delta.abs() / params.alpha + 4.0 + 2.0 * (params.drive / params.alpha).powf(2.0 / 3.0);
        let x_max = i_max.sqrt();
        let brackets = roots::scan_brackets(|x| h.axis_slope(x), -x_max, x_max, 8000);
        let mut pts = Vec::new();
        for (lo, hi) in brackets {
            let x = roots::brent(|x| h.axis_slope(x), lo, hi, 1e-15)?;
            if pts.iter().any(|p: &StationaryPoint| (p.a.re - x).abs() < 1e-12) {
                continue;
            }
            let (hxx, hyy) = h.hessian(x);
            let det = hxx * hyy;
            let stability = if det < 0.0 {
                Stability::Saddle
            } else if hyy < 0.0 {
                Stability::Stable1
            } else {
                Stability::Stable2
            };
            // ȧ = −i∂H/∂a*: small oscillations at ω = ½√(H_xx H_yy)
            let frequency = if det > 0.0 { 0.5 * det.sqrt() } else { 0.0 };
            pts.push(StationaryPoint { a: C64::new(x, 0.0), eps: h.on_axis(x), stability, frequency });
        }
        pts.sort_by(|a, b| a.a.re.total_cmp(&b.a.re));
        let saddles: Vec<_> = pts.iter().filter(|p| p.stability == Stability::Saddle).collect();
        let separatrix = if pts.len() == 3 && saddles.len() == 1 {
            let s = saddles[0];
            let ext: Vec<_> = pts.iter().filter(|p| p.stability != Stability::Saddle).collect();
            let (p1, p2) = if ext[0].eps > ext[1].eps { (ext[0], ext[1]) } else { (ext[1], ext[0]) };
            if p1.eps > s.eps && p2.eps < s.eps && p2.a.re < p1.a.re && p1.a.re < s.a.re {
                Some(Separatrix {
                    eps_sep: s.eps,
                    eps_1: p1.eps,
                    eps_2: p2.eps,
                    x_sep: s.a.re,
                    x_1: p1.a.re,
                    x_2: p2.a.re,
                })
            } else {
                None
            }
        } else {
            None
        };
        // relabel extrema by quasienergy relative to the saddle
        if let Some(sx) = separatrix {
            for p in &mut pts {
                if p.stability != Stability::Saddle {
                    p.stability = if p.eps > sx.eps_sep { Stability::Stable1 } else { Stability::Stable2 };
                }
            }
        }
        Ok(Self { hamiltonian: h, stationary_points: pts, separatrix })
    }

    pub fn params(&self) -> &ModelParams {
        &self.hamiltonian.params
    }

    pub fn sep(&self) -> Result<&Separatrix> {
        self.separatrix.as_ref().ok_or(Error::NotBistable)
    }

    pub fn eps_sep(&self) -> Result<f64> {
        Ok(self.sep()?.eps_sep)
    }

    pub fn eps_1(&self) -> Result<f64> {
        Ok(self.sep()?.eps_1)
    }

    pub fn eps_2(&self) -> Result<f64> {
        Ok(self.sep()?.eps_2)
    }

    pub fn point(&self, s: Stability) -> Option<&StationaryPoint> {
        self.stationary_points.iter().find(|p| p.stability == s)
    }

    /// Natural quasienergy scale ε₁ − ε₂.
    pub fn scale(&self) -> Result<f64> {
        let s = self.sep()?;
        Ok(s.eps_1 - s.eps_2)
    }

    pub fn window(&self, region: Region) -> Result<(f64, f64)> {
        let s = self.sep()?;
        Ok(match region {
            Region::One => (s.eps_sep, s.eps_1),
            Region::Two => (s.eps_2, s.eps_sep),
            Region::Three => (s.eps_sep, f64::INFINITY),
        })
    }

    /// Real-axis crossings and radial extent of the region-`r` orbit at `eps`.
    pub fn geometry(&self, region: Region, eps: f64) -> Result<OrbitGeometry> {
        let s = *self.sep()?;
        let (lo, hi) = self.window(region)?;
        if !(eps > lo && eps < hi) {
            return Err(Error::OutsideWindow { region: region.number(), eps, lo, hi });
        }
        let h = &self.hamiltonian;
        let fx = |x: f64| h.on_axis(x) - eps;
        let tol = 1e-15 * (1.0 + s.x_2.abs());
        let outer_left = || -> Result<f64> {
            let (a, b) = roots::expand_bracket(fx, s.x_2, -0.1 * (1.0 + s.x_2.abs()), 200)?;
            roots::brent(fx, a, b, tol)
        };
        let (xl, xr) = match region {
            Region::Two => (outer_left()?, roots::brent(fx, s.x_2, s.x_1, tol)?),
            Region::One => (roots::brent(fx, s.x_2, s.x_1, tol)?, roots::brent(fx, s.x_1, s.x_sep, tol)?),
            Region::Three => {
                let (a, b) = roots::expand_bracket(fx, s.x_sep, 0.1 * (1.0 + s.x_sep.abs()), 200)?;
                (outer_left()?, roots::brent(fx, a, b, tol)?)
            }
        };
        let (il, ir) = (xl * xl, xr * xr);
        Ok(OrbitGeometry {
            region,
            eps,
            x_left: xl,
            x_right: xr,
            i_lo: il.min(ir),
            i_hi: il.max(ir),
            encircles_origin: xl < 0.0 && xr > 0.0,
            hi_on_positive_axis: ir >= il,
            i_saddle: s.x_sep * s.x_sep,
        })
    }

    /// Time averages and contour integrals by radial quadrature.
    pub fn averages(&self, region: Region, eps: f64) -> Result<OrbitAverages> {
        self.radial_integrals(region, eps, &[0, 1, 2, 3, 4])
    }

    /// Orbit area (unsigned) as a function of ε.
    pub fn action(&self, region: Region, eps: f64) -> Result<f64> {
        Ok(self.radial_integrals(region, eps, &[4])?.action)
    }

    fn radial_integrals(&self, region: Region, eps: f64, which: &[usize]) -> Result<OrbitAverages> {
        let g = self.geometry(region, eps)?;
        let sx = *self.sep()?;
        let h = &self.hamiltonian;
        let f = h.params.drive;
        let (il, ih) = (g.i_lo, g.i_hi);
        let span = ih - il;
        let sh = h.shift();
        let (sig_lo, sig_hi) = g.turning_signs();
        let theta_of = |i: f64| (1.0 - 2.0 * (i - il) / span).clamp(-1.0, 1.0).acos();
        let mut breaks = vec![0.0];
        if g.i_saddle > il && g.i_saddle < ih {
            breaks.push(theta_of(g.i_saddle));
        }
        breaks.push(PI);
        // H(σ√I) − ε = (I − I_e)·b_e(I) for a turning point I_e on the σ side
        let b = |i: f64, ie: f64, sig: f64| {
            h.params.energy_divdiff(i - sh, ie - sh) + 2.0 * f * sig / (i.sqrt() + ie.sqrt())
        };
        // integrand pieces in θ; dI/(2f√I·√(1−A²)) = dθ/√Φ with the turning
        // point zeros of 1 − A² divided out analytically
        let eval = |th: f64| -> [f64; 5] {
            let (sn, cs) = (0.5 * th).sin_cos();
            let (d_lo, d_hi) = (span * sn * sn, span * cs * cs);
            let i = if d_lo <= d_hi { il + d_lo } else { ih - d_hi };
            let sq = i.sqrt();
            let phi = if sig_lo != sig_hi {
                b(i, il, sig_lo) * b(i, ih, sig_hi)
            } else {
                let c = if d_lo <= d_hi { b(i, il, sig_lo) / (-d_hi) } else { b(i, ih, sig_hi) / d_lo };
                // H(x) − ε = (x − x_s)[(x + x_s)E[x², x_s²] + 2f] + (ε_sep − ε)
                // on the positive axis, exact near the saddle
                let other = if sig_lo < 0.0 {
                    let xs = sx.x_sep;
                    let br = (sq + xs) * h.params.energy_divdiff(i - sh, xs * xs - sh) + 2.0 * f;
                    (i - xs * xs) / (sq + xs) * br + (sx.eps_sep - eps)
                } else {
                    // both turning points on the positive axis: the
                    // remaining factor is the negative-axis branch
                    h.g(i) - 2.0 * f * sq - eps
                };
                c * other
            };
            let w = if phi > 0.0 { 1.0 / phi.sqrt() } else { 0.0 };
            let a = if sq > 0.0 { ((eps - h.g(i)) / (2.0 * f * sq)).clamp(-1.0, 1.0) } else { 0.0 };
            let g1 = h.g1(i);
            let hab = g1 * g1 * i + 2.0 * f * g1 * sq * a + f * f;
            let meas = if g.hi_on_positive_axis { 2.0 * a.acos() } else { 2.0 * PI - 2.0 * a.acos() };
            let jac = 0.5 * span * th.sin();
            [2.0 * w, 2.0 * i * w, 2.0 * h.v_at(i) * w, 2.0 * hab * w, meas * jac]
        };
        let mut out = [f64::NAN; 5];
        for &k in which {
            let o = &mut out[k];
            // the area of a tiny orbit is limited by roundoff in acos A
            // and D of a tiny orbit (∝ its area) likewise
            let abs_tol = match k {
                4 => 1e-14 * (1.0 + ih),
                3 => 1e-14 * f * f * (1.0 + ih),
                _ => 1e-300,
            };
            let r = quad::integrate_with_breaks(|th| eval(th)[k], &breaks, abs_tol, 1e-11)?;
            *o = r.value;
        }
        let period = out[0];
        let mut area = out[4];
        if g.encircles_origin {
            area += 2.0 * PI * il;
        }
        Ok(OrbitAverages {
            region,
            eps,
            period,
            action: area,
            drift: region.orientation() * area,
            diffusion: out[3],
            mean_intensity: out[1] / period,
            mean_v: out[2] / period,
            shift: h.shift(),
        })
    }

    /// Integrates the Hamiltonian flow over one period from the right
    /// real-axis crossing and samples it uniformly in time.
    pub fn trace_orbit(&self, region: Region, eps: f64) -> Result<ClassicalOrbit> {
        let s = *self.sep()?;
        let scale = s.eps_1 - s.eps_2;
        if (eps - s.eps_sep).abs() < 1e-6 * s.eps_sep.abs().max(scale) {
            return Err(Error::NearSeparatrix(eps));
        }
        let g = self.geometry(region, eps)?;
        let h = &self.hamiltonian;
        let rhs = |_t: f64, y: &[f64; 2]| {
            let v = h.velocity(C64::new(y[0], y[1]));
            [v.re, v.im]
        };
        let omega_est = self
            .stationary_points
            .iter()
            .map(|p| p.frequency)
            .fold(0.0f64, f64::max)
            .max(1e-12);
        let t_limit = 1e4 * 2.0 * PI / omega_est;
        let mut steps: Vec<Step<2>> = Vec::with_capacity(512);
        let mut crossings = 0;
        let mut period = f64::NAN;
        let mut dp = DormandPrince::new(rhs, Tolerance { rtol: 1e-13, atol: 1e-13 * (1.0 + g.i_hi.sqrt()) });
        let h0 = 1e-3 * 2.0 * PI / omega_est;
        dp.run(0.0, [g.x_right, 0.0], h0, |st| {
            steps.push(*st);
            let y0 = st.start()[1];
            let y1 = st.end()[1];
            if st.t0 > 0.0 && y0 != 0.0 && (y0 > 0.0) != (y1 > 0.0) || (y1 == 0.0 && st.t0 > 0.0) {
                crossings += 1;
                if crossings == 2 {
                    let t = roots::brent(|t| st.eval(t)[1], st.t0, st.t1(), 1e-15 * st.t1()).unwrap_or(st.t1());
                    period = t;
                    return false;
                }
            }
            st.t1() < t_limit
        })?;
        if !period.is_finite() {
            return Err(Error::Integration(format!("orbit at eps={eps} did not close")));
        }
        // sample count from the harmonic content: double until the tail is negligible
        let mut n = 256usize;
        loop {
            let samples = sample_uniform(&steps, period, n);
            let fourier = fourier_coefficients(&samples);
            let max = fourier.iter().map(|c| c.1.norm()).fold(0.0, f64::max);
            let k_top = fourier.iter().map(|c| c.0.unsigned_abs() as usize).max().unwrap_or(0);
            if k_top < n / 4 || n >= 1 << 15 {
                let close = (samples[0] - sample_at(&steps, period)).norm();
                let rmax = samples.iter().map(|a| a.norm()).fold(0.0, f64::max);
                if close > 1e-8 * rmax.max(1e-12) {
                    return Err(Error::Integration(format!("orbit closure error {close:e}")));
                }
                let mean_intensity = samples.iter().map(|a| a.norm_sqr()).sum::<f64>() / n as f64;
                let mean_v = samples.iter().map(|a| h.v_at(a.norm_sqr())).sum::<f64>() / n as f64;
                let _ = max;
                return Ok(ClassicalOrbit {
                    region,
                    eps,
                    samples,
                    period,
                    action_area: g_area_contour(h, &sample_uniform(&steps, period, n), period).abs(),
                    mean_intensity,
                    mean_v,
                    fourier,
                    shift: h.shift(),
                });
            }
            n *= 2;
        }
    }

    /// Bohr–Sommerfeld levels: area/(2π) = n + 1/2. Region 3 is cut at `eps_max`.
    pub fn bohr_sommerfeld_levels(&self, region: Region, eps_max: Option<f64>) -> Result<Vec<(usize, f64)>> {
        let s = *self.sep()?;
        let scale = s.eps_1 - s.eps_2;
        let gap = 1e-12 * scale.max(s.eps_sep.abs());
        let (lo, hi) = match region {
            Region::Three => (s.eps_sep + gap, eps_max.unwrap_or(s.eps_1 + scale)),
            _ => {
                let (a, b) = self.window(region)?;
                (a + gap, b - gap)
            }
        };
        if hi <= lo {
            return Ok(Vec::new());
        }
        // the area vanishes at a stable point; evaluating tiny orbits there
        // is roundoff-limited, so use the limit directly
        let stable_end = match region {
            Region::One => Some(s.eps_1),
            Region::Two => Some(s.eps_2),
            Region::Three => None,
        };
        let act = |e: f64| -> Result<f64> {
            match stable_end {
                Some(se) if (e - se).abs() < 1e-9 * scale => Ok(0.0),
                _ => self.action(region, e),
            }
        };
        let (a_lo, a_hi) = (act(lo)?, act(hi)?);
        let (amin, amax) = (a_lo.min(a_hi), a_lo.max(a_hi));
        let n_first = ((amin / (2.0 * PI) - 0.5).ceil().max(0.0)) as usize;
        let mut out = Vec::new();
        let mut n = n_first;
        loop {
            let target = 2.0 * PI * (n as f64 + 0.5);
            if target > amax {
                break;
            }
            if target >= amin {
                let e = roots::brent(|e| act(e).unwrap_or(f64::NAN) - target, lo, hi, 1e-13 * scale)?;
                out.push((n, e));
            }
            n += 1;
        }
        out.sort_by(|a, b| a.1.total_cmp(&b.1));
        Ok(out)
    }

    /// Region label for a state with quasienergy `eps` and photon number
    /// `mean_n`: the region whose orbit-averaged photon number is nearest.
    pub fn classify(&self, eps: f64, mean_n: f64) -> Result<RegionLabel> {
        let s = *self.sep()?;
        if eps <= s.eps_sep {
            return Ok(RegionLabel::Two);
        }
        if eps >= s.eps_1 {
            return Ok(RegionLabel::ThreePrime);
        }
        let scale = s.eps_1 - s.eps_2;
        let e = eps.max(s.eps_sep + 1e-9 * scale).min(s.eps_1 - 1e-12 * scale);
        let n1 = self.averages(Region::One, e)?.mean_photons();
        let n3 = self.averages(Region::Three, e)?.mean_photons();
        Ok(if (mean_n - n1).abs() <= (mean_n - n3).abs() { RegionLabel::One } else { RegionLabel::Three })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionLabel {
    One,
    Two,
    Three,
    ThreePrime,
}

impl RegionLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::One => "1",
            RegionLabel::Two => "2",
            RegionLabel::Three => "3",
            RegionLabel::ThreePrime => "3'",
        }
    }

    /// 3' counts as region 3.
    pub fn region(self) -> Region {
        match self {
            RegionLabel::One => Region::One,
            RegionLabel::Two => Region::Two,
            RegionLabel::Three | RegionLabel::ThreePrime => Region::Three,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OrbitGeometry {
    pub region: Region,
    pub eps: f64,
    pub x_left: f64,
    pub x_right: f64,
    pub i_lo: f64,
    pub i_hi: f64,
    pub encircles_origin: bool,
    pub hi_on_positive_axis: bool,
    pub i_saddle: f64,
}

impl OrbitGeometry {
    /// Signs of the real-axis coordinate at I_lo and I_hi.
    pub fn turning_signs(&self) -> (f64, f64) {
        let (xl, xr) = (self.x_left, self.x_right);
        let (lo, hi) = if self.hi_on_positive_axis { (xl, xr) } else { (xr, xl) };
        (if lo < 0.0 { -1.0 } else { 1.0 }, if hi < 0.0 { -1.0 } else { 1.0 })
    }
}

/// Quadrature-based orbit data.
///
/// `drift` is the flow-oriented contour integral K = ∮ I dφ, and
/// `diffusion` is D = ∮ |∂H/∂a|² dt > 0; the quasienergy probability
/// flux reads γK P − Q D ∂P/∂ε.
#[derive(Debug, Clone, Copy)]
pub struct OrbitAverages {
    pub region: Region,
    pub eps: f64,
    pub period: f64,
    pub action: f64,
    pub drift: f64,
    pub diffusion: f64,
    pub mean_intensity: f64,
    pub mean_v: f64,
    pub shift: f64,
}

impl OrbitAverages {
    /// ⟨a†a⟩ counterpart of the mean intensity.
    pub fn mean_photons(&self) -> f64 {
        self.mean_intensity - self.shift
    }
}

#[derive(Debug, Clone)]
pub struct ClassicalOrbit {
    pub region: Region,
    pub eps: f64,
    /// a(t_k), t_k = k·T/N, starting on the positive-x side of the real axis
    pub samples: Vec<C64>,
    pub period: f64,
    pub action_area: f64,
    pub mean_intensity: f64,
    pub mean_v: f64,
    /// a(t) = Σ_k a_k e^{−ikΩt}
    pub fourier: Vec<(i32, C64)>,
    pub shift: f64,
}

impl ClassicalOrbit {
    pub fn mean_photons(&self) -> f64 {
        self.mean_intensity - self.shift
    }

    pub fn harmonic(&self, k: i32) -> C64 {
        self.fourier.iter().find(|c| c.0 == k).map_or(C64::new(0.0, 0.0), |c| c.1)
    }

    /// Polygon area of the samples in canonical coordinates
    /// (q, p) = √2(Re a, Im a), orientation-signed, Richardson
    /// extrapolated over the sub-polygons with every 2nd and 4th vertex;
    /// the polygon error of a smooth closed curve is even in the spacing.
    pub fn shoelace_area(&self) -> f64 {
        let n = self.samples.len();
        let poly = |stride: usize| {
            let mut s = 0.0;
            let mut j = 0;
            while j < n {
                let a = self.samples[j];
                let b = self.samples[(j + stride) % n];
                s += a.re * b.im - b.re * a.im;
                j += stride;
            }
            s
        };
        if n % 4 != 0 {
            return poly(1);
        }
        let (a1, a2, a4) = (poly(1), poly(2), poly(4));
        let r1 = (4.0 * a1 - a2) / 3.0;
        let r2 = (4.0 * a2 - a4) / 3.0;
        (16.0 * r1 - r2) / 15.0
    }
}

fn sample_at(steps: &[Step<2>], t: f64) -> C64 {
    let idx = steps.partition_point(|s| s.t1() < t).min(steps.len() - 1);
    let y = steps[idx].eval(t);
    C64::new(y[0], y[1])
}

fn sample_uniform(steps: &[Step<2>], period: f64, n: usize) -> Vec<C64> {
    (0..n).map(|k| sample_at(steps, period * k as f64 / n as f64)).collect()
}

/// (i/2)∮(a da* − a* da) with exact velocities; trapezoid on a periodic
/// integrand is spectrally accurate.
fn g_area_contour(h: &ClassicalHamiltonian, samples: &[C64], period: f64) -> f64 {
    let dt = period / samples.len() as f64;
    let i = C64::new(0.0, 1.0);
    let s: C64 = samples
        .iter()
        .map(|&a| {
            let v = h.velocity(a);
            a * v.conj() - a.conj() * v
        })
        .sum();
    (0.5 * i * s * dt).re
}

fn fourier_coefficients(samples: &[C64]) -> Vec<(i32, C64)> {
    let n = samples.len();
    let coef = |k: i32| -> C64 {
        let w = 2.0 * PI * k as f64 / n as f64;
        samples
            .iter()
            .enumerate()
            .map(|(j, &a)| a * C64::from_polar(1.0, w * j as f64))
            .sum::<C64>()
            / n as f64
    };
    let mut out = vec![(0, coef(0))];
    let mut max = out[0].1.norm();
    let kmax = (n / 2) as i32 - 1;
    for sign in [1, -1] {
        let mut quiet = 0;
        let mut k = 1;
        while k <= kmax {
            let c = coef(sign * k);
            max = max.max(c.norm());
            out.push((sign * k, c));
            if c.norm() < 1e-12 * max {
                quiet += 1;
                if quiet >= 4 {
                    break;
                }
            } else {
                quiet = 0;
            }
            k += 1;
        }
    }
    out.retain(|c| c.1.norm() >= 1e-10 * max);
    out.sort_by_key(|c| c.0);
    out
}

/// Contour coefficients of a traced orbit: (T, K, D), with K flow-oriented
/// and D = ∮|∂H/∂a|² dt.
pub fn coefficients(h: &ClassicalHamiltonian, orbit: &ClassicalOrbit) -> Result<(f64, f64, f64)> {
    let n = orbit.samples.len();
    let dt = orbit.period / n as f64;
    let i = C64::new(0.0, 1.0);
    let mut k = C64::new(0.0, 0.0);
    let mut d = C64::new(0.0, 0.0);
    for &a in &orbit.samples {
        let v = h.velocity(a);
        k += 0.5 * i * (a * v.conj() - a.conj() * v) * dt;
        // ∂H/∂a = conj(∂H/∂a*); (i/2)(H_a da − H_a* da*) = |H_a|² dt along the flow
        let ha = h.grad_conj(a).conj();
        d += 0.5 * i * (ha * v - ha.conj() * v.conj()) * dt;
    }
    for (name, z) in [("K", k), ("D", d)] {
        if z.im.abs() > 1e-8 * z.re.abs().max(1e-300) {
            return Err(Error::Quadrature(format!("{name} has imaginary residue {:e}", z.im)));
        }
    }
    Ok((orbit.period, k.re, d.re))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn portrait(delta: f64, ratio: f64) -> PhasePortrait {
        PhasePortrait::new(&ModelParams::new(delta, 1.0, 0.0).with_drive_ratio(ratio), SymbolOrdering::Symmetric)
            .unwrap()
    }

    #[test]
    fn cubic_root_counts() {
        // naive symbol: −3a + a³ + f = 0
        let p = PhasePortrait::new(&ModelParams::new(3.0, 1.0, 1.2), SymbolOrdering::Normal).unwrap();
        assert_eq!(p.stationary_points.len(), 3);
        assert!(p.separatrix.is_some());
        let disc = |f: f64| -4.0 * (-3.0f64).powi(3) - 27.0 * f * f;
        assert!(disc(1.2) > 0.0);
        let p = PhasePortrait::new(&ModelParams::new(3.0, 1.0, 2.5), SymbolOrdering::Normal).unwrap();
        assert_eq!(p.stationary_points.len(), 1);
        assert!(disc(2.5) < 0.0);
        for pt in &p.stationary_points {
            let x = pt.a.re;
            assert!((x * x * x - 3.0 * x + 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_drive_rejected() {
        assert_eq!(find_stationary_points(&ModelParams::new(3.0, 1.0, 0.0)).unwrap_err(), Error::DegenerateDrive);
    }

    #[test]
    fn quasienergy_ordering() {
        let p = portrait(6.0, 0.4);
        let s = p.sep().unwrap();
        assert!(s.eps_2 < s.eps_sep && s.eps_sep < s.eps_1);
        assert!(s.x_2 < s.x_1 && s.x_1 < s.x_sep);
        assert_eq!(p.point(Stability::Stable1).unwrap().a.re, s.x_1);
    }

    #[test]
    fn period_near_stable_point_matches_hessian() {
        let p = portrait(6.0, 0.4);
        let s = *p.sep().unwrap();
        let eps = s.eps_2 + 1e-3 * (s.eps_sep - s.eps_2);
        let w2 = p.point(Stability::Stable2).unwrap().frequency;
        let t = p.averages(Region::Two, eps).unwrap().period;
        assert!((t * w2 / (2.0 * PI) - 1.0).abs() < 0.01, "{t} vs {}", 2.0 * PI / w2);
        let orbit = p.trace_orbit(Region::Two, eps).unwrap();
        assert!((orbit.period / t - 1.0).abs() < 1e-7);
    }

    #[test]
    fn traced_orbit_matches_quadrature() {
        let p = portrait(6.0, 0.4);
        let s = *p.sep().unwrap();
        for (r, e) in [
            (Region::One, 0.5 * (s.eps_sep + s.eps_1)),
            (Region::Two, 0.5 * (s.eps_sep + s.eps_2)),
            (Region::Three, s.eps_1 + 2.0),
            (Region::Three, 0.7 * s.eps_sep + 0.3 * s.eps_1),
            // small region-1 orbit entirely on the positive side
            (Region::One, 0.02 * s.eps_sep + 0.98 * s.eps_1),
        ] {
            if r == Region::One && e > 0.9 * s.eps_1 {
                assert!(!p.geometry(r, e).unwrap().encircles_origin);
            }
            let q = p.averages(r, e).unwrap();
            let o = p.trace_orbit(r, e).unwrap();
            let (t, k, d) = coefficients(&p.hamiltonian, &o).unwrap();
            assert!((t / q.period - 1.0).abs() < 1e-7, "{r:?} T {t} {}", q.period);
            assert!((k / q.drift - 1.0).abs() < 1e-7, "{r:?} K {k} {}", q.drift);
            assert!((d / q.diffusion - 1.0).abs() < 1e-7, "{r:?} D {d} {}", q.diffusion);
            assert!((o.mean_intensity / q.mean_intensity - 1.0).abs() < 1e-7);
            assert!((o.action_area / q.action - 1.0).abs() < 1e-8);
            // energy conservation along the samples
            for a in &o.samples {
                assert!((p.hamiltonian.value(*a) - e).abs() < 1e-8 * e.abs().max(1.0));
            }
            // Parseval
            let pars: f64 = o.fourier.iter().map(|c| c.1.norm_sqr()).sum();
            assert!((pars - o.mean_intensity).abs() < 1e-6);
            // time-reversal symmetry makes the coefficients real
            for c in &o.fourier {
                assert!(c.1.im.abs() < 1e-6, "{r:?} k={} {}", c.0, c.1);
            }
            // shoelace vs contour
            assert!((o.shoelace_area().abs() / o.action_area - 1.0).abs() < 1e-8, "{}", o.shoelace_area().abs() / o.action_area - 1.0);
        }
    }

    #[test]
    fn period_equals_action_derivative() {
        let p = portrait(8.0, 0.3);
        let s = *p.sep().unwrap();
        for (r, e) in [(Region::One, 0.6 * s.eps_sep + 0.4 * s.eps_1), (Region::Two, 0.5 * (s.eps_2 + s.eps_sep))] {
            let h = 1e-4 * (s.eps_1 - s.eps_2);
            let da = (p.action(r, e + h).unwrap() - p.action(r, e - h).unwrap()) / (2.0 * h);
            let t = p.averages(r, e).unwrap().period;
            assert!((da.abs() / t - 1.0).abs() < 1e-4, "{r:?} {da} {t}");
        }
    }

    #[test]
    fn period_diverges_at_separatrix() {
        let p = portrait(6.0, 0.4);
        let s = *p.sep().unwrap();
        let sc = s.eps_1 - s.eps_2;
        for r in [Region::One, Region::Two, Region::Three] {
            let sign = if r == Region::Two { -1.0 } else { 1.0 };
            let t1 = p.averages(r, s.eps_sep + sign * 1e-4 * sc).unwrap().period;
            let t2 = p.averages(r, s.eps_sep + sign * 1e-8 * sc).unwrap().period;
            assert!(t2 > 1.5 * t1, "{r:?}: {t1} {t2}");
        }
    }

    #[test]
    fn symmetric_symbol_gives_exact_zero_drive_levels() {
        // tiny drive: region-3 levels approach E(n) with integer n
        let p = portrait(5.0, 0.01);
        let s = *p.sep().unwrap();
        let lv = p.bohr_sommerfeld_levels(Region::Three, Some(s.eps_1 + 20.0)).unwrap();
        assert!(lv.len() > 3);
        for (n, e) in lv {
            let exact = p.params().energy(n as f64);
            assert!((e - exact).abs() < 0.05, "n={n}: {e} vs {exact}");
        }
    }

    #[test]
    fn level_spacing_follows_period() {
        let p = portrait(10.0, 0.3);
        let lv = p.bohr_sommerfeld_levels(Region::Two, None).unwrap();
        assert!(lv.len() > 4);
        for w in lv.windows(2).take(4) {
            let t = p.averages(Region::Two, w[0].1).unwrap().period;
            let spacing = w[1].1 - w[0].1;
            assert!((spacing * t / (2.0 * PI) - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn damping_drift_sign() {
        // dissipative flow ȧ = −i∂H/∂a* − (γ/2)a changes ε at rate −γ·(−K)/T = γK/T averaged
        let p = portrait(6.0, 0.4);
        let s = *p.sep().unwrap();
        let h = &p.hamiltonian;
        for (r, e) in [(Region::One, 0.5 * (s.eps_sep + s.eps_1)), (Region::Two, 0.5 * (s.eps_2 + s.eps_sep))] {
            let av = p.averages(r, e).unwrap();
            let o = p.trace_orbit(r, e).unwrap();
            // dε/dt = 2 Re(H_a ȧ) = −(γ/2)·2Re(H_a a) for the damping part
            let g = 1.0;
            let rate: f64 = o
                .samples
                .iter()
                .map(|&a| {
                    let ha = h.grad_conj(a).conj();
                    -g * (ha * a).re
                })
                .sum::<f64>()
                / o.samples.len() as f64;
            assert!((rate - g * av.drift / av.period).abs() < 1e-8 * rate.abs().max(1.0), "{r:?}");
            // damping pushes region 1 up toward ε₁ and region 2 down toward ε₂
            assert_eq!(rate > 0.0, r == Region::One);
        }
    }

    #[test]
    fn orbit_rejected_near_separatrix() {
        let p = portrait(6.0, 0.4);
        let s = *p.sep().unwrap();
        assert!(matches!(p.trace_orbit(Region::One, s.eps_sep * (1.0 - 1e-9)), Err(Error::NearSeparatrix(_)) | Err(Error::OutsideWindow { .. })));
    }
}
