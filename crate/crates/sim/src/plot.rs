//! Minimal SVG line charts of table columns, one polyline per curve.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::table::Table;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// `y` against `x`, curves split by the values of `group` columns.
/// Returns `None` when a column is missing or nothing finite remains.
pub fn line_chart(table: &Table, x: &str, y: &str, group: &[&str], title: &str) -> Option<String> {
    let xs = table.floats(x)?;
    let ys = table.floats(y)?;
    let keys: Vec<Vec<f64>> = group.iter().map(|g| table.floats(g)).collect::<Option<_>>()?;
    let mut curves: BTreeMap<Vec<u64>, Vec<(f64, f64)>> = BTreeMap::new();
    for i in 0..xs.len() {
        if xs[i].is_finite() && ys[i].is_finite() {
            curves.entry(keys.iter().map(|k| k[i].to_bits()).collect()).or_default().push((xs[i], ys[i]));
        }
    }
    let all: Vec<(f64, f64)> = curves.values().flatten().copied().collect();
    if all.is_empty() {
        return None;
    }
    let (x0, x1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (y0, y1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let sx = |v: f64| PAD + (W - 2.0 * PAD) * if x1 > x0 { (v - x0) / (x1 - x0) } else { 0.5 };
    let sy = |v: f64| H - PAD - (H - 2.0 * PAD) * if y1 > y0 { (v - y0) / (y1 - y0) } else { 0.5 };
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#, W - 2.0 * PAD, H - 2.0 * PAD).unwrap();
    writeln!(s, r#"<text x="{}" y="25" text-anchor="middle">{title}</text>"#, W / 2.0).unwrap();
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x}</text>"#, W / 2.0, H - 12.0).unwrap();
    writeln!(s, r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">{y}</text>"#, H / 2.0, H / 2.0).unwrap();
    for (v, px, py, anchor) in [(x0, sx(x0), H - PAD + 16.0, "start"), (x1, sx(x1), H - PAD + 16.0, "end")] {
        writeln!(s, r#"<text x="{px:.1}" y="{py:.1}" text-anchor="{anchor}">{v:.4}</text>"#).unwrap();
    }
    for (v, py) in [(y0, sy(y0)), (y1, sy(y1))] {
        writeln!(s, r#"<text x="{:.1}" y="{py:.1}" text-anchor="end">{v:.3}</text>"#, PAD - 4.0).unwrap();
    }
    for (k, pts) in curves.values_mut().enumerate() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let path: Vec<String> = pts.iter().map(|&(a, b)| format!("{:.2},{:.2}", sx(a), sy(b))).collect();
        writeln!(s, r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#, COLORS[k % COLORS.len()], path.join(" ")).unwrap();
    }
    s.push_str("</svg>\n");
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_polyline_per_curve() {
        let mut t = Table::new(&["m", "g", "p2"]);
        for g in [1.0, 2.0] {
            for k in 0..5 {
                t.push(vec![(k as f64).into(), g.into(), (g * k as f64).into()]);
            }
        }
        let s = line_chart(&t, "m", "p2", &["g"], "demo").unwrap();
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(line_chart(&t, "m", "nope", &[], "x").is_none());
    }
}
