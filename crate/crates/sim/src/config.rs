//! Experiment configuration (TOML). Frequencies are in units of α.

use std::path::{Path, PathBuf};

use kerr_core::ModelParams;
use serde::{Deserialize, Serialize};

use crate::Error;

/// A scalar, an explicit list, or an arithmetic grid with `num` points
/// including both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Scalar(f64),
    List(Vec<f64>),
    Range { start: f64, stop: f64, num: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Scalar(v) => vec![*v],
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, num } => match *num {
                0 => vec![],
                1 => vec![*start],
                n => (0..n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
            },
        }
    }

    /// Grid spacing when uniform.
    pub fn step(&self) -> Option<f64> {
        match self {
            Grid::Range { start, stop, num } if *num > 1 => Some((stop - start) / (*num - 1) as f64),
            _ => None,
        }
    }
}

impl From<f64> for Grid {
    fn from(v: f64) -> Self {
        Grid::Scalar(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Quantum,
    Reduced,
    Fpe,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::Quantum, Tier::Reduced, Tier::Fpe];

    pub fn name(self) -> &'static str {
        match self {
            Tier::Quantum => "quantum",
            Tier::Reduced => "reduced",
            Tier::Fpe => "fpe",
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "quantum" | "lindblad" => Ok(Tier::Quantum),
            "reduced" => Ok(Tier::Reduced),
            "fpe" => Ok(Tier::Fpe),
            other => Err(Error::Config(format!("unknown tier '{other}' (quantum, reduced, fpe)"))),
        }
    }

    pub fn parse_list(s: &str) -> Result<Vec<Self>, Error> {
        let mut v: Vec<Tier> = s.split(',').filter(|t| !t.trim().is_empty()).map(Tier::parse).collect::<Result<_, _>>()?;
        v.sort();
        v.dedup();
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NMax {
    Fixed(usize),
    Auto(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl Default for NMax {
    fn default() -> Self {
        NMax::Auto(AutoTag::Auto)
    }
}

impl NMax {
    pub fn parse(s: &str) -> Result<Self, Error> {
        if s == "auto" {
            return Ok(NMax::default());
        }
        s.parse().map(NMax::Fixed).map_err(|_| Error::Config(format!("--nmax expects an integer or 'auto', got '{s}'")))
    }

    /// ⌈4Δ/α⌉ plus room for the thermal tail.
    pub fn resolve(&self, p: &ModelParams) -> usize {
        match *self {
            NMax::Fixed(n) => n,
            NMax::Auto(_) => p.default_n_max() + (8.0 * p.n_thermal).ceil() as usize,
        }
    }

    pub fn label(&self) -> String {
        match self {
            NMax::Fixed(n) => n.to_string(),
            NMax::Auto(_) => "auto".into(),
        }
    }
}

/// What an experiment computes at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// region occupations from the selected tiers
    #[default]
    Sweep,
    /// quasienergy levels and region-1/3 anticrossings along m
    Spectrum,
    /// t(ε), δε₁₃(ε), γ₁₃(ε), λ_T(ε), ε_crit, ε_res
    Profile,
    /// quasienergy distributions with and without tunneling
    Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelGrid {
    /// m = 2Δ/α
    pub m: Grid,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "zero_grid")]
    pub alpha3: Grid,
    pub gamma: Grid,
    pub drive_ratio: Grid,
    #[serde(default = "zero_grid")]
    pub n_thermal: Grid,
}

fn one() -> f64 {
    1.0
}

fn zero_grid() -> Grid {
    Grid::Scalar(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// c in t = cΔe^{−S}
    #[serde(default = "default_prefactor")]
    pub t_prefactor: f64,
    #[serde(default = "default_fpe_nodes")]
    pub fpe_nodes: usize,
    /// sweeps also write the spectrum/anticrossing tables on the same m grid
    #[serde(default)]
    pub with_spectrum: bool,
}

fn default_prefactor() -> f64 {
    0.1
}

fn default_fpe_nodes() -> usize {
    400
}

impl Default for Numerics {
    fn default() -> Self {
        Self { t_prefactor: default_prefactor(), fpe_nodes: default_fpe_nodes(), with_spectrum: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub kind: Kind,
    #[serde(default = "default_tiers")]
    pub tiers: Vec<Tier>,
    #[serde(default)]
    pub n_max: NMax,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub workers: Option<usize>,
    pub model: ModelGrid,
    #[serde(default)]
    pub numerics: Numerics,
    /// notes copied into the manifest (e.g. reading choices of a preset)
    #[serde(default)]
    pub flags: Vec<String>,
}

fn default_tiers() -> Vec<Tier> {
    vec![Tier::Quantum]
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// One parameter point, in units of α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub m: f64,
    pub alpha: f64,
    pub alpha3: f64,
    pub gamma: f64,
    pub drive_ratio: f64,
    pub n_thermal: f64,
}

impl Point {
    pub fn params(&self) -> ModelParams {
        let a = self.alpha;
        ModelParams::new(self.m * a / 2.0, a, 0.0)
            .with_drive_ratio(self.drive_ratio)
            .with_damping(self.gamma * a, self.n_thermal)
            .with_alpha3(self.alpha3 * a)
    }

    /// the non-m coordinates, identifying one curve of a sweep
    pub fn curve_key(&self) -> [u64; 4] {
        [self.alpha3.to_bits(), self.gamma.to_bits(), self.drive_ratio.to_bits(), self.n_thermal.to_bits()]
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(path.to_path_buf(), e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: String| Err(Error::Config(m));
        if self.kind == Kind::Sweep && self.tiers.is_empty() {
            return bad("select at least one tier".into());
        }
        let g = &self.model;
        if !(g.alpha > 0.0) {
            return bad(format!("alpha must be positive, got {}", g.alpha));
        }
        for (name, grid) in [("m", &g.m), ("alpha3", &g.alpha3), ("gamma", &g.gamma), ("drive_ratio", &g.drive_ratio), ("n_thermal", &g.n_thermal)] {
            let v = grid.values();
            if v.is_empty() {
                return bad(format!("grid '{name}' is empty"));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return bad(format!("grid '{name}' has non-finite values"));
            }
        }
        if g.m.values().iter().any(|&m| m <= 0.0) {
            return bad("m = 2Δ/α must be positive".into());
        }
        if g.gamma.values().iter().any(|&x| x < 0.0) || g.n_thermal.values().iter().any(|&x| x < 0.0) {
            return bad("gamma and n_thermal must be non-negative".into());
        }
        if g.drive_ratio.values().iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return bad("drive_ratio = f/f_crit must lie in (0, 1)".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        Ok(())
    }

    /// Grid points, m varying fastest.
    pub fn points(&self) -> Vec<Point> {
        let g = &self.model;
        let mut out = Vec::new();
        for &alpha3 in &g.alpha3.values() {
            for &gamma in &g.gamma.values() {
                for &drive_ratio in &g.drive_ratio.values() {
                    for &n_thermal in &g.n_thermal.values() {
                        for &m in &g.m.values() {
                            out.push(Point { m, alpha: g.alpha, alpha3, gamma, drive_ratio, n_thermal });
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "demo"
tiers = ["quantum", "fpe"]
n_max = 40

[model]
m = { start = 11.5, stop = 12.5, num = 5 }
alpha3 = [0.0, 1e-5]
gamma = 1e-3
drive_ratio = 0.4
"#;

    #[test]
    fn parses_grids_and_defaults() {
        let c = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(c.model.m.values(), vec![11.5, 11.75, 12.0, 12.25, 12.5]);
        assert_eq!(c.model.m.step(), Some(0.25));
        assert_eq!(c.n_max, NMax::Fixed(40));
        assert_eq!(c.kind, Kind::Sweep);
        assert_eq!(c.points().len(), 10);
        assert_eq!(c.points()[5].alpha3, 1e-5);
        let p = c.points()[2].params();
        assert_eq!(p.delta, 6.0);
        assert!((p.drive / p.f_crit() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn round_trips() {
        let c = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("[\"quantum\", \"fpe\"]", "[]")).is_err());
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("num = 5", "num = 0")).is_err());
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("drive_ratio = 0.4", "drive_ratio = 1.5")).is_err());
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("gamma", "gama")).is_err());
        assert!(Tier::parse_list("quantum,bogus").is_err());
        assert_eq!(Tier::parse_list("fpe,quantum,fpe").unwrap(), vec![Tier::Quantum, Tier::Fpe]);
        assert_eq!(NMax::parse("auto").unwrap(), NMax::default());
        assert!(NMax::parse("x").is_err());
    }
}
