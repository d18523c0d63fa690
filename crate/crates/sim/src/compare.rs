//! Tier comparison on a shared grid: per-point P₂ deviation and peak shifts.

use std::collections::BTreeMap;

use kerr_core::peaks::find_peaks;

use crate::config::Tier;
use crate::table::{Cell, Table};
use crate::Error;

/// Deviations are flagged inside the band where the semiclassical tiers are
/// expected to hold: m = 2Δ/α ≥ 12 and γ/Δ ≤ 10⁻³.
pub const BAND_MIN_M: f64 = 12.0;
pub const BAND_MAX_GAMMA_OVER_DELTA: f64 = 1e-3;
pub const DEVIATION_BOUND: f64 = 0.25;
/// minimum P₂ prominence for a resonance peak
pub const PEAK_PROMINENCE: f64 = 0.02;

const KEY: [&str; 5] = ["m", "alpha3", "gamma", "drive_ratio", "n_thermal"];

#[derive(Debug, Clone)]
pub struct Comparison {
    pub points: Table,
    pub peaks: Table,
    pub max_in_band: f64,
    pub exceeded: usize,
}

pub fn in_band(m: f64, gamma: f64) -> bool {
    m >= BAND_MIN_M && gamma / (0.5 * m) <= BAND_MAX_GAMMA_OVER_DELTA
}

fn coords(t: &Table) -> Result<Vec<Vec<f64>>, Error> {
    KEY.iter()
        .map(|k| t.floats(k).ok_or_else(|| Error::Compare(format!("missing column '{k}'"))))
        .collect()
}

/// Compares `p2_<other>` of `a` with the reference `p2_<reference>` of `b`
/// (the two may be the same table). The grids must agree exactly.
pub fn compare_tiers(a: &Table, b: &Table, other: Tier, reference: Tier, grid_step: Option<f64>) -> Result<Comparison, Error> {
    let (ca, cb) = (coords(a)?, coords(b)?);
    if ca[0].len() != cb[0].len() {
        return Err(Error::Compare(format!("grids differ in size ({} vs {})", ca[0].len(), cb[0].len())));
    }
    for (k, (u, v)) in KEY.iter().zip(ca.iter().zip(&cb)) {
        if let Some(i) = u.iter().zip(v).position(|(x, y)| x.to_bits() != y.to_bits()) {
            return Err(Error::Compare(format!("grids differ in '{k}' at row {i}")));
        }
    }
    let col = |t: &Table, tier: Tier| {
        let name = format!("p2_{}", tier.name());
        t.floats(&name).ok_or_else(|| Error::Compare(format!("missing column '{name}'")))
    };
    let (pa, pb) = (col(a, other)?, col(b, reference)?);
    let (oa, rb) = (format!("p2_{}", other.name()), format!("p2_{}", reference.name()));
    let mut points = Table::new(&["m", "alpha3", "gamma", "drive_ratio", "n_thermal", &oa, &rb, "rel_dev", "in_band", "flag"]);
    points
        .meta("reference", reference.name())
        .meta("other", other.name())
        .meta("deviation_bound", DEVIATION_BOUND)
        .meta("band", format!("m >= {BAND_MIN_M} and gamma/delta <= {BAND_MAX_GAMMA_OVER_DELTA}"));
    let mut max_in_band = 0.0f64;
    let mut exceeded = 0;
    for i in 0..pa.len() {
        let (m, g) = (ca[0][i], ca[2][i]);
        let band = in_band(m, g);
        let dev = (pa[i] - pb[i]).abs() / pb[i].abs();
        let flag = if !dev.is_finite() {
            "missing"
        } else if !band {
            "outside_band"
        } else if dev > DEVIATION_BOUND {
            "exceeds"
        } else {
            "ok"
        };
        if band && dev.is_finite() {
            max_in_band = max_in_band.max(dev);
            exceeded += (dev > DEVIATION_BOUND) as usize;
        }
        let mut row: Vec<Cell> = (0..5).map(|k| ca[k][i].into()).collect();
        row.extend([pa[i].into(), pb[i].into(), dev.into(), Cell::Int(band as i64), flag.into()]);
        points.push(row);
    }

    // peaks per curve (rows sharing all non-m coordinates)
    let mut curves: BTreeMap<[u64; 4], Vec<usize>> = BTreeMap::new();
    for i in 0..pa.len() {
        curves.entry([1, 2, 3, 4].map(|k| ca[k][i].to_bits())).or_default().push(i);
    }
    let mut peaks = Table::new(&["alpha3", "gamma", "drive_ratio", "n_thermal", "m_reference", "m_other", "shift", "grid_step", "within_step"]);
    peaks.meta("reference", reference.name()).meta("other", other.name()).meta("min_prominence", PEAK_PROMINENCE);
    let mut order: Vec<_> = curves.into_values().collect();
    order.sort_by_key(|v| v[0]);
    for mut idx in order {
        idx.sort_by(|&x, &y| ca[0][x].total_cmp(&ca[0][y]));
        let m: Vec<f64> = idx.iter().map(|&i| ca[0][i]).collect();
        let ya: Vec<f64> = idx.iter().map(|&i| pa[i]).collect();
        let yb: Vec<f64> = idx.iter().map(|&i| pb[i]).collect();
        if ya.iter().chain(&yb).any(|v| !v.is_finite()) {
            continue;
        }
        let step = grid_step.unwrap_or_else(|| m.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max));
        let fa = find_peaks(&m, &ya, PEAK_PROMINENCE);
        for pr in find_peaks(&m, &yb, PEAK_PROMINENCE) {
            let near = fa.iter().min_by(|x, y| (x.x - pr.x).abs().total_cmp(&(y.x - pr.x).abs()));
            let mut row: Vec<Cell> = (1..5).map(|k| ca[k][idx[0]].into()).collect();
            row.push(pr.x.into());
            match near {
                Some(q) => {
                    let shift = q.x - pr.x;
                    row.extend([q.x.into(), shift.into(), step.into(), Cell::Int((shift.abs() <= step) as i64)]);
                }
                None => row.extend([Cell::Missing, Cell::Missing, step.into(), Cell::Int(0)]),
            }
            peaks.push(row);
        }
    }
    Ok(Comparison { points, peaks, max_in_band, exceeded })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(ms: &[f64], p2: impl Fn(f64) -> f64) -> Table {
        let mut t = Table::new(&["m", "alpha3", "gamma", "drive_ratio", "n_thermal", "p2_quantum", "p2_fpe"]);
        for &m in ms {
            t.push(vec![m.into(), 0.0.into(), 1e-3.into(), 0.4.into(), 1.0.into(), p2(m).into(), (1.1 * p2(m)).into()]);
        }
        t
    }

    fn grid() -> Vec<f64> {
        (0..41).map(|k| 11.0 + 0.05 * k as f64).collect()
    }

    fn bump(m: f64) -> f64 {
        0.3 + 0.5 / (1.0 + ((m - 12.0) / 0.1).powi(2))
    }

    #[test]
    fn identical_tier_has_zero_deviation() {
        let t = summary(&grid(), bump);
        let c = compare_tiers(&t, &t, Tier::Quantum, Tier::Quantum, Some(0.05)).unwrap();
        assert_eq!(c.max_in_band, 0.0);
        assert_eq!(c.exceeded, 0);
        let shifts = c.peaks.floats("shift").unwrap();
        assert_eq!(shifts, vec![0.0]);
    }

    #[test]
    fn scaled_tier_deviates_by_its_factor() {
        let t = summary(&grid(), bump);
        let c = compare_tiers(&t, &t, Tier::Fpe, Tier::Quantum, None).unwrap();
        assert!((c.max_in_band - 0.1).abs() < 1e-12);
        let flags = c.points.rows.iter().filter(|r| r[9] == Cell::Text("outside_band".into())).count();
        assert_eq!(flags, 20, "m < 12 lies outside the band");
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = summary(&grid(), bump);
        let mut g = grid();
        g[3] += 1e-9;
        let b = summary(&g, bump);
        assert!(matches!(compare_tiers(&a, &b, Tier::Fpe, Tier::Quantum, None), Err(Error::Compare(_))));
        let c = summary(&grid()[..10], bump);
        assert!(compare_tiers(&a, &c, Tier::Fpe, Tier::Quantum, None).is_err());
    }
}
