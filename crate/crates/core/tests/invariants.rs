//! Cross-module invariants on random parameter points.

use kerr_core::classical::{PhasePortrait, Region, SymbolOrdering};
use kerr_core::fpe::{solve_point, GridSpec, TunnelMode};
use kerr_core::reduced::{build_reduced_generator, reduced_steady_state, ReducedConfig};
use kerr_core::spectrum::diagonalize;
use kerr_core::tunneling::tunneling_amplitude;
use kerr_core::{lindblad, ModelParams};
use proptest::prelude::*;

fn params(m: f64, r: f64, a3: f64) -> ModelParams {
    ModelParams::new(0.5 * m, 1.0, 0.0).with_drive_ratio(r).with_alpha3(a3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // the drive is off-diagonal, so the trace is Σ E(n)
    #[test]
    fn spectrum_trace_is_drive_independent(m in 4.0f64..16.0, r in 0.05f64..0.95, a3 in -1e-3f64..1e-3) {
        let p = params(m, r, a3);
        let n_max = 30;
        let s = diagonalize(&p, n_max).unwrap();
        let tr: f64 = s.levels.iter().map(|l| l.eps).sum();
        let diag: f64 = (0..=n_max).map(|n| p.energy(n as f64)).sum();
        prop_assert!((tr - diag).abs() <= 1e-9 * diag.abs().max(1.0));
        prop_assert!(s.levels.windows(2).all(|w| w[0].eps <= w[1].eps));
    }

    #[test]
    fn portrait_ordering(m in 6.0f64..20.0, r in 0.05f64..0.95) {
        let por = PhasePortrait::new(&params(m, r, 0.0), SymbolOrdering::Symmetric).unwrap();
        let s = por.separatrix.unwrap();
        prop_assert!(s.eps_2 < s.eps_sep && s.eps_sep < s.eps_1);
        prop_assert!(s.x_2 < s.x_1 && s.x_1 < s.x_sep);
        let a1 = por.action(Region::One, 0.5 * (s.eps_sep + s.eps_1)).unwrap();
        prop_assert!(a1 > 0.0);
    }

    // tunneling weakens away from the separatrix
    #[test]
    fn amplitude_decreases_toward_eps1(m in 8.0f64..16.0, r in 0.1f64..0.6) {
        let por = PhasePortrait::new(&params(m, r, 0.0), SymbolOrdering::Symmetric).unwrap();
        let s = por.separatrix.unwrap();
        let e = |u: f64| s.eps_sep + u * (s.eps_1 - s.eps_sep);
        let t: Vec<f64> = [0.2, 0.4, 0.6, 0.8].iter().map(|&u| tunneling_amplitude(&por, e(u), 0.1).unwrap().value).collect();
        prop_assert!(t.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0), "{:?}", t);
    }

    #[test]
    fn fpe_occupations_normalized(m in 10.0f64..16.0, r in 0.2f64..0.6, n in 0.5f64..3.0, a3 in 0.0f64..5e-5) {
        let p = params(m, r, a3).with_damping(1e-3, n);
        for mode in [TunnelMode::Full, TunnelMode::Classical] {
            let s = solve_point(&p, 0.1, p.detuning_offset(), mode, &GridSpec::default()).unwrap();
            prop_assert!((s.p1 + s.p2 + s.p3 - 1.0).abs() < 1e-9);
            prop_assert!([s.p1, s.p2, s.p3].iter().all(|&x| (0.0..=1.0).contains(&x)));
            prop_assert!(s.flow_j >= 0.0);
        }
    }
}

#[test]
fn tiers_normalized_at_one_point() {
    let p = params(12.2, 0.4, 1e-5).with_damping(1e-3, 1.0);
    let q = lindblad::sweep_point(&p, 40).unwrap();
    assert!((q.p1 + q.p2 + q.p3 - 1.0).abs() < 1e-8);
    let g = build_reduced_generator(&p, &ReducedConfig::new(0.1, p.detuning_offset())).unwrap();
    let (a, b, c) = reduced_steady_state(&g).unwrap().occupations(&g);
    assert!((a + b + c - 1.0).abs() < 1e-8);
    assert!(b > 0.5, "high-amplitude state dominates above the resonance window: {b}");
}

#[test]
fn thermal_state_without_drive() {
    let p = ModelParams::new(4.0, 1.0, 0.0).with_damping(0.05, 1.5);
    let s = lindblad::steady_state(&p, 40).unwrap();
    assert!((s.mean_intensity - 1.5).abs() < 1e-6);
}
