use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kerr_core::classical::PhasePortrait;
use kerr_core::classical::SymbolOrdering;
use kerr_core::fpe::{self, GridSpec, TunnelMode};
use kerr_core::reduced::{build_reduced_generator, reduced_steady_state, ReducedConfig};
use kerr_core::{lindblad, spectrum, tunneling, ModelParams};
use kerr_sim::compare::compare_tiers;
use kerr_sim::config::{ExperimentConfig, NMax, Point, Tier};
use kerr_sim::table::{Cell, Table};
use kerr_sim::{default_workers, plot, presets, run};

/// Driven Kerr oscillator: spectra, steady states and quasienergy diffusion.
/// Frequencies are in units of α.
#[derive(Parser)]
#[command(name = "kerr", version)]
struct Cli {
    /// worker threads (default: KERR_WORKERS, else all CPUs)
    #[arg(long, global = true, env = "KERR_WORKERS")]
    workers: Option<usize>,
    /// output directory (overrides the config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Fock truncation: integer or 'auto'
    #[arg(long, global = true)]
    nmax: Option<String>,
    /// comma-separated tiers: quantum, reduced, fpe
    #[arg(long, global = true)]
    tiers: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct PointArgs {
    /// m = 2Δ/α
    #[arg(long, conflicts_with = "delta", required_unless_present = "delta")]
    m: Option<f64>,
    /// Δ/α
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    alpha3: f64,
    /// f/f_crit
    #[arg(long, default_value_t = 0.4)]
    drive_ratio: f64,
    #[arg(long, default_value_t = 1e-3)]
    gamma: f64,
    /// thermal occupation N
    #[arg(long, default_value_t = 0.0)]
    nth: f64,
    /// c in t = cΔe^{−S}
    #[arg(long, default_value_t = 0.1)]
    prefactor: f64,
}

impl PointArgs {
    fn point(&self) -> Point {
        let m = self.m.unwrap_or_else(|| 2.0 * self.delta.unwrap_or(0.0));
        Point { m, alpha: 1.0, alpha3: self.alpha3, gamma: self.gamma, drive_ratio: self.drive_ratio, n_thermal: self.nth }
    }

    fn params(&self) -> Result<ModelParams> {
        let p = self.point().params();
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Full,
    NoResonance,
    Classical,
}

#[derive(Subcommand)]
enum Cmd {
    /// quasienergy levels with region labels
    Spectrum(PointArgs),
    /// stationary points and separatrix of the classical portrait
    Classical(PointArgs),
    /// tunneling profile t(ε), δε₁₃, γ₁₃, λ_T and ε_crit
    Tunneling(PointArgs),
    /// Lindblad steady state and region occupations
    Steady(PointArgs),
    /// reduced master equation occupations
    Reduced(PointArgs),
    /// quasienergy Fokker–Planck occupations and distribution
    Fpe {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_enum, default_value = "full")]
        mode: Mode,
        /// print the density on its grid
        #[arg(long)]
        density: bool,
    },
    /// run an experiment config
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// also write an SVG of P₂ per tier
        #[arg(long)]
        svg: bool,
    },
    /// compare P₂ of two tiers on summary tables (one or two files)
    Compare {
        summary: PathBuf,
        reference_summary: Option<PathBuf>,
        #[arg(long, default_value = "fpe")]
        other: String,
        #[arg(long, default_value = "quantum")]
        reference: String,
    },
    /// run a built-in preset
    Preset {
        #[arg(value_parser = presets::NAMES)]
        name: String,
        /// print the preset config instead of running it
        #[arg(long)]
        print: bool,
        #[arg(long)]
        svg: bool,
    },
}

fn nmax(cli: &Cli) -> Result<NMax> {
    Ok(match &cli.nmax {
        Some(s) => NMax::parse(s)?,
        None => NMax::default(),
    })
}

fn print_table(t: &Table) {
    print!("{}", t.render());
}

fn run_config(cli: &Cli, mut cfg: ExperimentConfig, svg: bool) -> Result<ExitCode> {
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    if let Some(n) = &cli.nmax {
        cfg.n_max = NMax::parse(n)?;
    }
    if let Some(t) = &cli.tiers {
        cfg.tiers = Tier::parse_list(t)?;
    }
    cfg.validate()?;
    let workers = default_workers(cli.workers.or(cfg.workers));
    let out = run::run_experiment(&cfg, workers)?;
    if svg {
        if let Some(summary) = out.computed.table("summary") {
            for t in &cfg.tiers {
                let col = format!("p2_{}", t.name());
                if let Some(s) = plot::line_chart(summary, "m", &col, &["alpha3", "gamma", "drive_ratio", "n_thermal"], &col) {
                    let path = out.dir.join(format!("{col}.svg"));
                    std::fs::write(&path, s).with_context(|| path.display().to_string())?;
                }
            }
        }
    }
    eprintln!(
        "{}: {} points, {} failures, status {:?} -> {}",
        cfg.name,
        out.manifest.points,
        out.manifest.failures.len(),
        out.manifest.status,
        out.dir.display()
    );
    for f in &out.manifest.failures {
        eprintln!("  point {} (m = {}) {}: {}", f.point, f.m, f.stage, f.error);
    }
    Ok(ExitCode::from(out.manifest.status.exit_code() as u8))
}

fn real() -> Result<ExitCode> {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Spectrum(a) => {
            let p = a.params()?;
            let s = spectrum::diagonalize(&p, nmax(&cli)?.resolve(&p))?;
            let mut t = Table::new(&["index", "eps", "mean_n", "label", "weight1", "near_boundary"]);
            t.meta("delta", p.delta).meta("n_max", s.n_max);
            for (i, l) in s.levels.iter().enumerate() {
                t.push(vec![
                    i.into(),
                    l.eps.into(),
                    l.mean_photon.into(),
                    l.label.map_or(Cell::Missing, |x| x.as_str().into()),
                    l.weight1.into(),
                    Cell::Int(l.near_boundary as i64),
                ]);
            }
            print_table(&t);
        }
        Cmd::Classical(a) => {
            let p = a.params()?;
            let por = PhasePortrait::new(&p, SymbolOrdering::Symmetric)?;
            let mut t = Table::new(&["kind", "re_a", "im_a", "eps", "frequency"]);
            t.meta("delta", p.delta).meta("f_crit", p.f_crit()).meta("drive", p.drive);
            if let Some(s) = por.separatrix {
                t.meta("eps_sep", s.eps_sep).meta("eps_1", s.eps_1).meta("eps_2", s.eps_2);
            }
            for sp in &por.stationary_points {
                t.push(vec![format!("{:?}", sp.stability).to_lowercase().into(), sp.a.re.into(), sp.a.im.into(), sp.eps.into(), sp.frequency.into()]);
            }
            print_table(&t);
        }
        Cmd::Tunneling(a) => {
            let p = a.params()?;
            let por = PhasePortrait::new(&p, SymbolOrdering::Symmetric)?;
            let pr = tunneling::lambda_profile(&por, p.detuning_offset(), a.prefactor, 60)?;
            let mut t = Table::new(&["eps", "t", "delta_eps13", "gamma13", "lambda_t"]);
            t.meta("eps_sep", pr.eps_sep).meta("eps_1", pr.eps_1).meta("eps_crit", pr.eps_crit).meta("crit_at_top", pr.eps_crit_at_top);
            match pr.resonance {
                Some(r) => t.meta("eps_res", r.eps).meta("res_level", r.level).meta("res_rate", r.rate),
                None => t.meta("eps_res", "none"),
            };
            for k in 0..pr.eps_grid.len() {
                t.push(vec![pr.eps_grid[k].into(), pr.t_of_eps[k].into(), pr.delta_eps13[k].into(), pr.gamma13[k].into(), pr.lambda_t[k].into()]);
            }
            print_table(&t);
        }
        Cmd::Steady(a) => {
            let p = a.params()?;
            let n = nmax(&cli)?.resolve(&p);
            let s = lindblad::sweep_point(&p, n)?;
            let mut t = Table::new(&["delta", "n_max", "p1", "p2", "p3", "mean_n", "residual"]);
            t.push(vec![s.delta.into(), n.into(), s.p1.into(), s.p2.into(), s.p3.into(), s.mean_intensity.into(), s.residual.into()]);
            for w in &s.warnings {
                t.meta("warning", w);
            }
            print_table(&t);
        }
        Cmd::Reduced(a) => {
            let p = a.params()?;
            let g = build_reduced_generator(&p, &ReducedConfig::new(a.prefactor, p.detuning_offset()))?;
            let (p1, p2, p3) = reduced_steady_state(&g)?.occupations(&g);
            let mut t = Table::new(&["delta", "levels", "pairs", "p1", "p2", "p3"]);
            t.push(vec![p.delta.into(), g.n_levels().into(), g.pairs.len().into(), p1.into(), p2.into(), p3.into()]);
            print_table(&t);
        }
        Cmd::Fpe { point, mode, density } => {
            let p = point.params()?;
            let mode = match mode {
                Mode::Full => TunnelMode::Full,
                Mode::NoResonance => TunnelMode::NoResonance,
                Mode::Classical => TunnelMode::Classical,
            };
            let s = fpe::solve_point(&p, point.prefactor, p.detuning_offset(), mode, &GridSpec::default())?;
            let mut t = if *density { Table::new(&["region", "eps", "density"]) } else { Table::new(&["delta", "p1", "p2", "p3", "eps_crit", "eps_res", "flow_j"]) };
            if *density {
                t.meta("p2", s.p2).meta("flow_j", s.flow_j);
                for r in &s.distribution.regions {
                    for (e, d) in r.eps.iter().zip(&r.density) {
                        t.push(vec![Cell::Int(r.region.number() as i64), (*e).into(), (*d).into()]);
                    }
                }
            } else {
                t.push(vec![s.delta.into(), s.p1.into(), s.p2.into(), s.p3.into(), s.eps_crit.into(), s.eps_res.into(), s.flow_j.into()]);
            }
            print_table(&t);
        }
        Cmd::Sweep { config, svg } => {
            let cfg = ExperimentConfig::load(config)?;
            return run_config(&cli, cfg, *svg);
        }
        Cmd::Compare { summary, reference_summary, other, reference } => {
            let read = |p: &PathBuf| -> Result<Table> {
                let text = std::fs::read_to_string(p).with_context(|| p.display().to_string())?;
                Ok(Table::parse(&text)?)
            };
            let a = read(summary)?;
            let b = match reference_summary {
                Some(p) => read(p)?,
                None => a.clone(),
            };
            let c = compare_tiers(&a, &b, Tier::parse(other)?, Tier::parse(reference)?, None)?;
            print_table(&c.points);
            println!();
            print_table(&c.peaks);
            if c.exceeded > 0 {
                eprintln!("{} in-band points exceed the deviation bound (max {:.3})", c.exceeded, c.max_in_band);
            }
        }
        Cmd::Preset { name, print, svg } => {
            let cfg = presets::preset(name)?;
            if *print {
                print!("{}", cfg.to_toml());
                return Ok(ExitCode::SUCCESS);
            }
            return run_config(&cli, cfg, *svg);
        }
    }
    if cli.workers == Some(0) {
        bail!("--workers must be at least 1");
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match real() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
