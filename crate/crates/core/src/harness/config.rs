//! Experiment configuration.
//!
//! Configs are TOML documents. Complex parameters are two-element arrays
//! `[re, im]`. Example:
//!
//! ```toml
//! [map]
//! kind = "blaschke"
//! mu = [0.32892, 0.04140]
//! rho = [0.32892, 0.04140]
//!
//! [dictionary]
//! nbar = 5
//!
//! [sampling]
//! mode = "grid"        # grid | lattice | trajectory | file
//! nodes = 100
//!
//! [analysis]
//! eigenvalues = 11
//! cutoff = 1e-10
//!
//! [output]
//! dir = "out"
//! formats = ["json", "csv", "svg"]
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{BlaschkeParams, MapSpec, PhasePoint, TorusMapParams};
use crate::edmd::{Summation, DEFAULT_CUTOFF};
use crate::error::{EdmdError, Result};
use crate::sampling::DEFAULT_BURN_IN;

/// Seed used for trajectory starts when none is configured.
pub const DEFAULT_SEED: u64 = 2019;
/// Dictionary sizes `N` swept by `converge` unless configured.
pub const DEFAULT_SWEEP: [usize; 6] = [11, 15, 21, 27, 33, 41];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    BernoulliCheck,
    Spectrum,
    Converge,
    Timeseries,
    Catmap,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::BernoulliCheck => "bernoulli-check",
            Experiment::Spectrum => "spectrum",
            Experiment::Converge => "converge",
            Experiment::Timeseries => "timeseries",
            Experiment::Catmap => "catmap",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapConfig {
    Bernoulli,
    Blaschke { mu: [f64; 2], rho: [f64; 2] },
    Catmap { mu: [f64; 2] },
}

fn complex(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

impl MapConfig {
    pub fn to_map(&self) -> Result<MapSpec> {
        let wrap = |e: EdmdError| EdmdError::Config(format!("map: {e}"));
        Ok(match self {
            MapConfig::Bernoulli => MapSpec::bernoulli(),
            MapConfig::Blaschke { mu, rho } => {
                MapSpec::Blaschke(BlaschkeParams::new(complex(*mu), complex(*rho)).map_err(wrap)?)
            }
            MapConfig::Catmap { mu } => MapSpec::Torus(TorusMapParams::new(complex(*mu)).map_err(wrap)?),
        })
    }

    fn reference_map() -> Self {
        let mu = Complex64::from_polar(0.33, PI / 25.0);
        MapConfig::Blaschke {
            mu: [mu.re, mu.im],
            rho: [mu.re, mu.im],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionaryConfig {
    /// Modes `|k| ≤ nbar` (per coordinate on the torus).
    pub nbar: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    Grid,
    Lattice,
    Trajectory,
    File,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub mode: SamplingMode,
    /// `M` for grids and trajectories; nodes per side for lattices.
    #[serde(default)]
    pub nodes: usize,
    /// Second lattice dimension; defaults to `nodes`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes2: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Explicit start angle(s) for trajectories, overriding the seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    /// Angle-sequence file for `mode = "file"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

impl SamplingConfig {
    pub fn start_point(&self) -> Option<PhasePoint> {
        self.start.as_ref().map(|s| match s.as_slice() {
            [a] => PhasePoint::Circle(*a),
            [a, b, ..] => PhasePoint::Torus([*a, *b]),
            [] => PhasePoint::Circle(0.0),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Number `p` of oracle eigenvalues to compare.
    #[serde(default = "default_eigenvalues")]
    pub eigenvalues: usize,
    /// Relative singular-value cutoff for pseudoinverses.
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
    #[serde(default)]
    pub summation: Summation,
    /// Dictionary sizes `N` (odd) for convergence sweeps.
    #[serde(default = "default_sweep")]
    pub n_list: Vec<usize>,
    /// Eigenvalues moving more than this between `N` and `N + 4` are flagged.
    #[serde(default = "default_stability_tol")]
    pub stability_tol: f64,
}

fn default_eigenvalues() -> usize {
    11
}
fn default_cutoff() -> f64 {
    DEFAULT_CUTOFF
}
fn default_sweep() -> Vec<usize> {
    DEFAULT_SWEEP.to_vec()
}
fn default_stability_tol() -> f64 {
    1e-2
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            eigenvalues: default_eigenvalues(),
            cutoff: default_cutoff(),
            summation: Summation::Ordered,
            n_list: default_sweep(),
            stability_tol: default_stability_tol(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv, Format::Svg]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            formats: default_formats(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map: MapConfig,
    pub dictionary: DictionaryConfig,
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Command-line overrides applied on top of a config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub nbar: Option<usize>,
    pub nodes: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
}

impl ExperimentConfig {
    /// Built-in configuration reproducing the reference setup of each
    /// experiment.
    pub fn default_for(experiment: Experiment) -> Self {
        let grid = |nodes| SamplingConfig {
            mode: SamplingMode::Grid,
            nodes,
            nodes2: None,
            seed: None,
            start: None,
            burn_in: DEFAULT_BURN_IN,
            file: None,
        };
        let (map, nbar, sampling, eigenvalues) = match experiment {
            Experiment::BernoulliCheck => (MapConfig::Bernoulli, 5, grid(100), 11),
            Experiment::Spectrum => (MapConfig::reference_map(), 5, grid(100), 11),
            Experiment::Converge => (MapConfig::reference_map(), 5, grid(1000), 11),
            Experiment::Timeseries => (
                MapConfig::reference_map(),
                5,
                SamplingConfig {
                    mode: SamplingMode::Trajectory,
                    seed: Some(DEFAULT_SEED),
                    ..grid(50_000)
                },
                11,
            ),
            Experiment::Catmap => (
                MapConfig::Catmap { mu: [-0.6, -0.55] },
                5,
                SamplingConfig {
                    mode: SamplingMode::Lattice,
                    ..grid(201)
                },
                7,
            ),
        };
        ExperimentConfig {
            map,
            dictionary: DictionaryConfig { nbar },
            sampling,
            analysis: AnalysisConfig {
                eigenvalues,
                ..AnalysisConfig::default()
            },
            output: OutputConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| EdmdError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| EdmdError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            EdmdError::Config(msg) => EdmdError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(n) = o.nbar {
            self.dictionary.nbar = n;
        }
        if let Some(m) = o.nodes {
            self.sampling.nodes = m;
        }
        if let Some(s) = o.seed {
            self.sampling.seed = Some(s);
        }
        if let Some(d) = &o.out_dir {
            self.output.dir = d.clone();
        }
        if let Some(f) = &o.formats {
            self.output.formats = f.clone();
        }
    }

    /// Range and consistency checks with field-level messages.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(EdmdError::Config(msg));
        self.map.to_map()?;
        let dim = match self.map {
            MapConfig::Catmap { .. } => 2,
            _ => 1,
        };
        let s = &self.sampling;
        match s.mode {
            SamplingMode::Grid | SamplingMode::Trajectory if s.nodes == 0 => {
                return fail("sampling.nodes: must be at least 1".into())
            }
            SamplingMode::Lattice if s.nodes == 0 || s.nodes2 == Some(0) => {
                return fail("sampling.nodes: lattice sizes must be at least 1".into())
            }
            SamplingMode::Grid if dim != 1 => return fail("sampling.mode: grid sampling needs a circle map".into()),
            SamplingMode::Lattice if dim != 2 => {
                return fail("sampling.mode: lattice sampling needs a torus map".into())
            }
            SamplingMode::Trajectory if s.seed.is_none() && s.start.is_none() => {
                return fail("sampling: trajectory mode requires `seed` or `start`".into())
            }
            SamplingMode::File if s.file.is_none() => return fail("sampling.file: required for file mode".into()),
            SamplingMode::File if dim != 1 => return fail("sampling.mode: file sampling needs a circle map".into()),
            _ => {}
        }
        if let Some(start) = &s.start {
            if start.len() != dim {
                return fail(format!(
                    "sampling.start: expected {dim} angle(s), got {}",
                    start.len()
                ));
            }
            if start.iter().any(|a| !a.is_finite()) {
                return fail("sampling.start: angles must be finite".into());
            }
        }
        let a = &self.analysis;
        if a.eigenvalues == 0 {
            return fail("analysis.eigenvalues: must be at least 1".into());
        }
        if !(a.cutoff > 0.0 && a.cutoff < 1.0) {
            return fail(format!("analysis.cutoff: must lie in (0, 1), got {}", a.cutoff));
        }
        if a.stability_tol.is_nan() || a.stability_tol <= 0.0 {
            return fail("analysis.stability_tol: must be positive".into());
        }
        if let Some(bad) = a.n_list.iter().find(|&&n| n % 2 == 0) {
            return fail(format!("analysis.n_list: dictionary sizes must be odd (N = 2N̄+1), got {bad}"));
        }
        if self.output.formats.is_empty() {
            return fail("output.formats: at least one format required".into());
        }
        Ok(())
    }

    pub fn map_spec(&self) -> Result<MapSpec> {
        self.map.to_map()
    }
}
