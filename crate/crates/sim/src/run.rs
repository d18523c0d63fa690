//! Experiment execution: parallel evaluation, deterministic tables, manifest.
//!
//! Points are evaluated on a rayon pool and collected in grid order; only the
//! calling thread touches the filesystem. A point that errors (or panics) is
//! recorded as a failure and leaves blank cells in its own rows only.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use kerr_core::classical::{PhasePortrait, Region, SymbolOrdering};
use kerr_core::fpe::{self, GridSpec, TunnelMode};
use kerr_core::reduced::{build_reduced_generator, reduced_steady_state, ReducedConfig};
use kerr_core::spectrum::{diagonalize, scan_from_spectra, QuasienergySpectrum};
use kerr_core::tunneling::lambda_profile;
use kerr_core::lindblad;
use rayon::prelude::*;

use crate::compare::compare_tiers;
use crate::config::{ExperimentConfig, Kind, Point, Tier};
use crate::manifest::{sha256_hex, Failure, FileEntry, Manifest, Status};
use crate::table::{Cell, Table};
use crate::Error;

pub const CORE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tables and failures of one run, before anything is written.
#[derive(Debug, Clone)]
pub struct Computed {
    /// file stem → table, in write order
    pub tables: Vec<(String, Table)>,
    pub failures: Vec<Failure>,
    pub points: usize,
}

impl Computed {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub computed: Computed,
}

/// Hash of the configuration with the execution-only fields normalized, so
/// worker count and output location do not change the outputs.
pub fn config_digest(cfg: &ExperimentConfig) -> String {
    let mut c = cfg.clone();
    c.workers = None;
    c.output_dir = PathBuf::from("out");
    sha256_hex(c.to_toml().as_bytes())
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, Error> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn guarded<T>(f: impl FnOnce() -> Result<T, kerr_core::Error>) -> Result<T, String> {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => Ok(v),
        Ok(Err(e)) => Err(e.to_string()),
        Err(p) => Err(format!(
            "panic: {}",
            p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_default()
        )),
    }
}

const POINT_COLUMNS: [&str; 7] = ["point", "m", "delta", "alpha3", "gamma", "drive_ratio", "n_thermal"];

fn point_cells(i: usize, p: &Point) -> Vec<Cell> {
    vec![i.into(), p.m.into(), (p.m * p.alpha / 2.0).into(), p.alpha3.into(), p.gamma.into(), p.drive_ratio.into(), p.n_thermal.into()]
}

fn table_with(extra: &[&str]) -> Table {
    let mut c: Vec<&str> = POINT_COLUMNS.to_vec();
    c.extend_from_slice(extra);
    Table::new(&c)
}

fn missing(n: usize) -> Vec<Cell> {
    vec![Cell::Missing; n]
}

#[derive(Debug, Clone)]
struct QuantumRow {
    n_max: usize,
    p: (f64, f64, f64),
    mean_n: f64,
    residual: f64,
    warnings: String,
}

#[derive(Debug, Clone)]
struct FpeRow {
    p: (f64, f64, f64),
    eps_crit: f64,
    eps_res: Option<f64>,
    flow_j: f64,
}

#[derive(Debug, Clone, Default)]
struct SweepRow {
    quantum: Option<Result<QuantumRow, String>>,
    reduced: Option<Result<(f64, f64, f64), String>>,
    fpe: Option<Result<FpeRow, String>>,
}

fn eval_sweep(cfg: &ExperimentConfig, p: &Point) -> SweepRow {
    let params = p.params();
    let has = |t: Tier| cfg.tiers.contains(&t);
    let c = cfg.numerics.t_prefactor;
    let mut row = SweepRow::default();
    if has(Tier::Quantum) {
        let n_max = cfg.n_max.resolve(&params);
        row.quantum = Some(guarded(|| {
            let s = lindblad::sweep_point(&params, n_max)?;
            Ok(QuantumRow { n_max, p: (s.p1, s.p2, s.p3), mean_n: s.mean_intensity, residual: s.residual, warnings: s.warnings.join("; ") })
        }));
    }
    if has(Tier::Reduced) {
        row.reduced = Some(guarded(|| {
            let g = build_reduced_generator(&params, &ReducedConfig::new(c, params.detuning_offset()))?;
            Ok(reduced_steady_state(&g)?.occupations(&g))
        }));
    }
    if has(Tier::Fpe) {
        let grid = GridSpec { n_lin: cfg.numerics.fpe_nodes, ..GridSpec::default() };
        row.fpe = Some(guarded(|| {
            let s = fpe::solve_point(&params, c, params.detuning_offset(), TunnelMode::Full, &grid)?;
            Ok(FpeRow { p: (s.p1, s.p2, s.p3), eps_crit: s.eps_crit, eps_res: s.eps_res, flow_j: s.flow_j })
        }));
    }
    row
}

fn status_cell<T>(r: &Result<T, String>) -> Cell {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => format!("error: {e}").into(),
    }
}

fn sweep_tables(cfg: &ExperimentConfig, points: &[Point], rows: &[SweepRow], out: &mut Computed) {
    let fail = |out: &mut Computed, i: usize, p: &Point, stage: &str, e: &str| {
        out.failures.push(Failure { point: i, m: p.m, stage: stage.into(), error: e.into() });
    };
    let mut tq = table_with(&["n_max", "p1", "p2", "p3", "mean_n", "residual", "status", "warnings"]);
    let mut tr = table_with(&["p1", "p2", "p3", "status"]);
    let mut tf = table_with(&["p1", "p2", "p3", "eps_crit", "eps_res", "flow_j", "status"]);
    let summary_cols: Vec<String> = cfg.tiers.iter().map(|t| format!("p2_{}", t.name())).collect();
    let sc: Vec<&str> = summary_cols.iter().map(String::as_str).collect();
    let mut ts = table_with(&sc);
    for (i, (p, r)) in points.iter().zip(rows).enumerate() {
        let base = point_cells(i, p);
        let mut srow = base.clone();
        for t in &cfg.tiers {
            let p2 = match t {
                Tier::Quantum => r.quantum.as_ref().and_then(|q| q.as_ref().ok()).map(|q| q.p.1),
                Tier::Reduced => r.reduced.as_ref().and_then(|q| q.as_ref().ok()).map(|q| q.1),
                Tier::Fpe => r.fpe.as_ref().and_then(|q| q.as_ref().ok()).map(|q| q.p.1),
            };
            srow.push(p2.into());
        }
        ts.push(srow);
        if let Some(q) = &r.quantum {
            let mut row = base.clone();
            match q {
                Ok(q) => row.extend([q.n_max.into(), q.p.0.into(), q.p.1.into(), q.p.2.into(), q.mean_n.into(), q.residual.into()]),
                Err(e) => {
                    fail(out, i, p, "quantum", e);
                    row.push(cfg.n_max.resolve(&p.params()).into());
                    row.extend(missing(5));
                }
            }
            row.push(status_cell(q));
            row.push(q.as_ref().map(|q| q.warnings.clone()).unwrap_or_default().into());
            tq.push(row);
        }
        if let Some(q) = &r.reduced {
            let mut row = base.clone();
            match q {
                Ok(o) => row.extend([o.0.into(), o.1.into(), o.2.into()]),
                Err(e) => {
                    fail(out, i, p, "reduced", e);
                    row.extend(missing(3));
                }
            }
            row.push(status_cell(q));
            tr.push(row);
        }
        if let Some(q) = &r.fpe {
            let mut row = base.clone();
            match q {
                Ok(f) => row.extend([f.p.0.into(), f.p.1.into(), f.p.2.into(), f.eps_crit.into(), f.eps_res.into(), f.flow_j.into()]),
                Err(e) => {
                    fail(out, i, p, "fpe", e);
                    row.extend(missing(6));
                }
            }
            row.push(status_cell(q));
            tf.push(row);
        }
    }
    for (t, table) in [(Tier::Quantum, tq), (Tier::Reduced, tr), (Tier::Fpe, tf)] {
        if cfg.tiers.contains(&t) {
            out.tables.push((t.name().to_string(), table));
        }
    }
    out.tables.push(("summary".into(), ts));
}

/// Points grouped into curves (equal non-m coordinates), each sorted by m.
fn curves(points: &[Point]) -> Vec<Vec<usize>> {
    let mut map: BTreeMap<[u64; 4], Vec<usize>> = BTreeMap::new();
    let mut order = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let k = p.curve_key();
        if !map.contains_key(&k) {
            order.push(k);
        }
        map.entry(k).or_default().push(i);
    }
    order
        .into_iter()
        .map(|k| {
            let mut v = map.remove(&k).unwrap();
            v.sort_by(|&a, &b| points[a].m.total_cmp(&points[b].m));
            v
        })
        .collect()
}

fn spectrum_tables(cfg: &ExperimentConfig, points: &[Point], pool: &rayon::ThreadPool, out: &mut Computed) {
    let mut tl = Table::new(&["curve", "point", "m", "delta", "index", "eps", "mean_n", "label", "weight1"]);
    let mut ta = Table::new(&[
        "curve", "alpha3", "gamma", "drive_ratio", "m_at_min", "delta_at_min", "level_lo", "level_hi", "min_gap", "mean_eps", "predicted_shift",
        "isolation",
    ]);
    let mut tg = Table::new(&["curve", "m", "delta", "level_lo", "level_hi", "gap", "mean_eps"]);
    for (ci, idx) in curves(points).into_iter().enumerate() {
        let p0 = points[idx[0]];
        let n_max = idx.iter().map(|&i| cfg.n_max.resolve(&points[i].params())).max().unwrap_or(2);
        let spectra: Vec<Result<QuasienergySpectrum, String>> =
            pool.install(|| idx.par_iter().map(|&i| guarded(|| diagonalize(&points[i].params(), n_max))).collect());
        let mut ok = true;
        for (&i, s) in idx.iter().zip(&spectra) {
            match s {
                Ok(s) => {
                    for (k, l) in s.levels.iter().enumerate() {
                        tl.push(vec![
                            ci.into(),
                            i.into(),
                            points[i].m.into(),
                            s.params.delta.into(),
                            k.into(),
                            l.eps.into(),
                            l.mean_photon.into(),
                            l.label.map_or(Cell::Missing, |x| x.as_str().into()),
                            l.weight1.into(),
                        ]);
                    }
                }
                Err(e) => {
                    ok = false;
                    out.failures.push(Failure { point: i, m: points[i].m, stage: "spectrum".into(), error: e.clone() });
                }
            }
        }
        if !ok || idx.len() < 3 {
            continue;
        }
        let spectra: Vec<QuasienergySpectrum> = spectra.into_iter().map(Result::unwrap).collect();
        let at = |delta: f64| Point { m: 2.0 * delta / p0.alpha, ..p0 }.params();
        match guarded(|| scan_from_spectra(at, &spectra)) {
            Ok(scan) => {
                for a in &scan.anticrossings {
                    ta.push(vec![
                        ci.into(),
                        p0.alpha3.into(),
                        p0.gamma.into(),
                        p0.drive_ratio.into(),
                        (2.0 * a.delta_at_min / p0.alpha).into(),
                        a.delta_at_min.into(),
                        a.level_pair.0.into(),
                        a.level_pair.1.into(),
                        a.min_gap.into(),
                        a.mean_quasienergy.into(),
                        a.predicted_shift.into(),
                        a.isolation.into(),
                    ]);
                }
                for g in &scan.samples {
                    tg.push(vec![
                        ci.into(),
                        (2.0 * g.delta / p0.alpha).into(),
                        g.delta.into(),
                        g.pair.0.into(),
                        g.pair.1.into(),
                        g.gap.into(),
                        g.mean_eps.into(),
                    ]);
                }
            }
            Err(e) => out.failures.push(Failure { point: idx[0], m: p0.m, stage: "anticrossings".into(), error: e }),
        }
    }
    out.tables.push(("levels".into(), tl));
    out.tables.push(("anticrossings".into(), ta));
    out.tables.push(("gaps".into(), tg));
}

fn profile_tables(cfg: &ExperimentConfig, points: &[Point], pool: &rayon::ThreadPool, out: &mut Computed) {
    let c = cfg.numerics.t_prefactor;
    let n_grid = cfg.numerics.fpe_nodes.clamp(16, 400);
    let profiles: Vec<_> = pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                let params = p.params();
                guarded(|| {
                    let portrait = PhasePortrait::new(&params, SymbolOrdering::Symmetric)?;
                    lambda_profile(&portrait, params.detuning_offset(), c, n_grid)
                })
            })
            .collect()
    });
    let mut tp = table_with(&["eps", "t", "delta_eps13", "gamma13", "lambda_t"]);
    let mut ts = table_with(&["eps_sep", "eps_1", "eps_crit", "crit_at_top", "eps_res", "eps_root", "res_level", "res_rate", "status"]);
    for (i, (p, r)) in points.iter().zip(&profiles).enumerate() {
        let base = point_cells(i, p);
        let mut srow = base.clone();
        match r {
            Ok(pr) => {
                for k in 0..pr.eps_grid.len() {
                    let mut row = base.clone();
                    row.extend([pr.eps_grid[k].into(), pr.t_of_eps[k].into(), pr.delta_eps13[k].into(), pr.gamma13[k].into(), pr.lambda_t[k].into()]);
                    tp.push(row);
                }
                let res = pr.resonance;
                srow.extend([
                    pr.eps_sep.into(),
                    pr.eps_1.into(),
                    pr.eps_crit.into(),
                    Cell::Int(pr.eps_crit_at_top as i64),
                    res.map(|r| r.eps).into(),
                    res.map(|r| r.eps_root).into(),
                    res.map_or(Cell::Missing, |r| r.level.into()),
                    res.map(|r| r.rate).into(),
                ]);
            }
            Err(e) => {
                out.failures.push(Failure { point: i, m: p.m, stage: "profile".into(), error: e.clone() });
                srow.extend(missing(8));
            }
        }
        srow.push(status_cell(r));
        ts.push(srow);
    }
    out.tables.push(("profile".into(), tp));
    out.tables.push(("profile_summary".into(), ts));
}

const MODES: [(TunnelMode, &str); 3] = [(TunnelMode::Full, "full"), (TunnelMode::NoResonance, "no_resonance"), (TunnelMode::Classical, "classical")];

fn distribution_tables(cfg: &ExperimentConfig, points: &[Point], pool: &rayon::ThreadPool, out: &mut Computed) {
    let c = cfg.numerics.t_prefactor;
    let grid = GridSpec { n_lin: cfg.numerics.fpe_nodes, ..GridSpec::default() };
    let jobs: Vec<(usize, usize)> = (0..points.len()).flat_map(|i| (0..MODES.len()).map(move |k| (i, k))).collect();
    let results: Vec<_> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, k)| {
                let params = points[i].params();
                guarded(|| fpe::solve_point(&params, c, params.detuning_offset(), MODES[k].0, &grid))
            })
            .collect()
    });
    let mut td = table_with(&["mode", "region", "eps", "density"]);
    let mut ts = table_with(&["mode", "p1", "p2", "p3", "eps_crit", "eps_res", "flow_j", "clipped", "status"]);
    for (&(i, k), r) in jobs.iter().zip(&results) {
        let p = &points[i];
        let mode = MODES[k].1;
        let mut srow = point_cells(i, p);
        srow.push(mode.into());
        match r {
            Ok(s) => {
                for reg in [Region::One, Region::Two, Region::Three] {
                    let d = s.distribution.region(reg);
                    for (e, v) in d.eps.iter().zip(&d.density) {
                        let mut row = point_cells(i, p);
                        row.extend([mode.into(), Cell::Int(reg.number() as i64), (*e).into(), (*v).into()]);
                        td.push(row);
                    }
                }
                srow.extend([
                    s.p1.into(),
                    s.p2.into(),
                    s.p3.into(),
                    s.eps_crit.into(),
                    s.eps_res.into(),
                    s.flow_j.into(),
                    s.distribution.clipped.into(),
                ]);
            }
            Err(e) => {
                out.failures.push(Failure { point: i, m: p.m, stage: format!("fpe:{mode}"), error: e.clone() });
                srow.extend(missing(7));
            }
        }
        srow.push(status_cell(r));
        ts.push(srow);
    }
    out.tables.push(("distribution".into(), td));
    out.tables.push(("distribution_summary".into(), ts));
}

/// Evaluates the experiment in memory.
pub fn compute(cfg: &ExperimentConfig, workers: usize) -> Result<Computed, Error> {
    cfg.validate()?;
    let points = cfg.points();
    let pool = pool(workers)?;
    let mut out = Computed { tables: Vec::new(), failures: Vec::new(), points: points.len() };
    match cfg.kind {
        Kind::Sweep => {
            let rows: Vec<SweepRow> = pool.install(|| points.par_iter().map(|p| eval_sweep(cfg, p)).collect());
            sweep_tables(cfg, &points, &rows, &mut out);
            if cfg.tiers.len() >= 2 {
                let summary = out.table("summary").cloned().expect("summary table");
                let reference = cfg.tiers[0];
                for &t in &cfg.tiers[1..] {
                    let cmp = compare_tiers(&summary, &summary, t, reference, cfg.model.m.step())?;
                    out.tables.push((format!("compare_{}_{}", t.name(), reference.name()), cmp.points));
                    out.tables.push((format!("peaks_{}_{}", t.name(), reference.name()), cmp.peaks));
                }
            }
            if cfg.numerics.with_spectrum {
                spectrum_tables(cfg, &points, &pool, &mut out);
            }
        }
        Kind::Spectrum => spectrum_tables(cfg, &points, &pool, &mut out),
        Kind::Profile => profile_tables(cfg, &points, &pool, &mut out),
        Kind::Distribution => distribution_tables(cfg, &points, &pool, &mut out),
    }
    out.failures.sort_by(|a, b| a.point.cmp(&b.point).then_with(|| a.stage.cmp(&b.stage)));
    let digest = config_digest(cfg);
    for (name, t) in out.tables.iter_mut() {
        let mut meta = vec![
            ("experiment".to_string(), cfg.name.clone()),
            ("table".to_string(), name.clone()),
            ("kind".to_string(), format!("{:?}", cfg.kind).to_lowercase()),
            ("units".to_string(), "frequencies and quasienergies in units of alpha; m = 2*delta/alpha".to_string()),
            ("n_max".to_string(), cfg.n_max.label()),
            ("t_prefactor".to_string(), cfg.numerics.t_prefactor.to_string()),
            ("core_version".to_string(), CORE_VERSION.to_string()),
            ("config_sha256".to_string(), digest.clone()),
        ];
        meta.append(&mut t.meta);
        t.meta = meta;
    }
    Ok(out)
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    std::fs::write(path, bytes).map_err(|e| Error::Io(path.to_path_buf(), e))
}

/// Runs the experiment and writes `<output_dir>/<name>/`: the resolved
/// config, one CSV per table and `manifest.toml` (written last).
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<RunOutput, Error> {
    let computed = compute(cfg, workers)?;
    let dir = cfg.output_dir.join(&cfg.name);
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io(dir.clone(), e))?;
    let mut files = Vec::new();
    let mut emit = |name: String, bytes: Vec<u8>| -> Result<(), Error> {
        write(&dir.join(&name), &bytes)?;
        files.push(FileEntry { path: name, sha256: sha256_hex(&bytes), bytes: bytes.len() });
        Ok(())
    };
    let mut resolved = cfg.clone();
    resolved.workers = None;
    emit("config.toml".into(), resolved.to_toml().into_bytes())?;
    for (name, t) in &computed.tables {
        emit(format!("{name}.csv"), t.render().into_bytes())?;
    }
    let failed_points = {
        let mut v: Vec<usize> = computed.failures.iter().map(|f| f.point).collect();
        v.dedup();
        v.len()
    };
    let manifest = Manifest {
        experiment: cfg.name.clone(),
        kind: format!("{:?}", cfg.kind).to_lowercase(),
        status: Status::from_counts(failed_points, computed.points),
        core_version: CORE_VERSION.into(),
        config_sha256: config_digest(cfg),
        points: computed.points,
        flags: cfg.flags.clone(),
        files,
        failures: computed.failures.clone(),
    };
    write(&dir.join("manifest.toml"), manifest.render().as_bytes())?;
    Ok(RunOutput { dir, manifest, computed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dir: &Path, tiers: &str) -> ExperimentConfig {
        let text = format!(
            r#"
name = "t"
tiers = [{tiers}]
n_max = 30
output_dir = "{}"

[model]
m = {{ start = 11.8, stop = 12.2, num = 5 }}
gamma = 1e-2
drive_ratio = 0.4
n_thermal = 1.0
"#,
            dir.display()
        );
        ExperimentConfig::from_toml(&text).unwrap()
    }

    #[test]
    fn reruns_are_byte_identical_and_worker_independent() {
        let d = tempfile::tempdir().unwrap();
        let c = cfg(d.path(), "\"quantum\", \"fpe\"");
        let a = run_experiment(&c, 1).unwrap();
        let first: Vec<Vec<u8>> = a.manifest.files.iter().map(|f| std::fs::read(a.dir.join(&f.path)).unwrap()).collect();
        let man1 = std::fs::read(a.dir.join("manifest.toml")).unwrap();
        let b = run_experiment(&c, 2).unwrap();
        let second: Vec<Vec<u8>> = b.manifest.files.iter().map(|f| std::fs::read(b.dir.join(&f.path)).unwrap()).collect();
        assert_eq!(first, second);
        assert_eq!(man1, std::fs::read(b.dir.join("manifest.toml")).unwrap());
        assert_eq!(a.manifest.status, Status::Success);
        let q = Table::parse(std::str::from_utf8(&first[1]).unwrap()).unwrap();
        assert_eq!(q.get_meta("table"), Some("quantum"));
        assert_eq!(q.rows.len(), 5);
    }

    #[test]
    fn failing_point_is_isolated() {
        let d = tempfile::tempdir().unwrap();
        let mut c = cfg(d.path(), "\"quantum\", \"fpe\"");
        // both tiers reject γ = 0; the γ > 0 curve must be untouched
        c.model.gamma = crate::config::Grid::List(vec![1e-2, 0.0]);
        let out = run_experiment(&c, 2).unwrap();
        assert_eq!(out.manifest.status, Status::Partial);
        assert_eq!(out.manifest.failures.len(), 10);
        assert!(out.manifest.failures.iter().all(|f| f.point >= 5), "{:?}", out.manifest.failures);
        for tier in ["fpe", "quantum"] {
            let p2 = out.computed.table(tier).unwrap().floats("p2").unwrap();
            assert!(p2[..5].iter().all(|v| v.is_finite()) && p2[5..].iter().all(|v| v.is_nan()));
        }
        let alone = run_experiment(&cfg(d.path(), "\"quantum\", \"fpe\""), 1).unwrap();
        let a = alone.computed.table("summary").unwrap();
        let b = out.computed.table("summary").unwrap();
        assert_eq!(a.rows[..], b.rows[..5]);
    }

    #[test]
    fn curves_group_and_sort() {
        let mk = |m: f64, g: f64| Point { m, alpha: 1.0, alpha3: 0.0, gamma: g, drive_ratio: 0.3, n_thermal: 0.0 };
        let pts = [mk(2.0, 1.0), mk(1.0, 1.0), mk(1.0, 2.0)];
        assert_eq!(curves(&pts), vec![vec![1, 0], vec![2]]);
    }
}
