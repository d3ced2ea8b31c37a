//! Experiment configuration: one JSON file plus command-line overrides.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toral_nodal_core::curve::CurveSpec;
use toral_nodal_core::lattice::LatticeCircle;
use toral_nodal_core::wavefield::{CoefficientModel, DEFAULT_ARC_FRACTION};

use crate::error::{CliError, Result};

/// Version tag carried by every config, header line and exported file.
pub const SCHEMA: &str = "toral-nodal/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Lattice,
    Nodal,
    Schur,
    Sweep,
    Exceptions,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Lattice => "lattice",
            Command::Nodal => "nodal",
            Command::Schur => "schur",
            Command::Sweep => "sweep",
            Command::Exceptions => "exceptions",
        }
    }
}

/// `{"range": [lo, hi]}` (half-open, `lo <= n < hi`) or `{"list": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum NSpec {
    Range([u64; 2]),
    List(Vec<u64>),
}

impl Default for NSpec {
    fn default() -> Self {
        NSpec::List(vec![1105])
    }
}

impl NSpec {
    pub fn values(&self) -> Vec<u64> {
        match self {
            NSpec::Range([lo, hi]) => (*lo..*hi).collect(),
            NSpec::List(v) => v.clone(),
        }
    }

    /// `"1..100"` (half-open), `"1..=100"` or `"1105,4225"`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |_| CliError::Config(format!("cannot parse n spec {s:?}"));
        if let Some((lo, hi)) = s.split_once("..") {
            let (hi, inclusive) = match hi.strip_prefix('=') {
                Some(h) => (h, 1),
                None => (hi, 0),
            };
            let hi: u64 = hi.trim().parse().map_err(bad)?;
            return Ok(NSpec::Range([lo.trim().parse().map_err(bad)?, hi + inclusive]));
        }
        s.split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse().map_err(bad))
            .collect::<Result<_>>()
            .map(NSpec::List)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveConfig {
    CircularArc {
        center: [f64; 2],
        radius: f64,
        start: f64,
        end: f64,
    },
    EllipseArc {
        center: [f64; 2],
        a: f64,
        b: f64,
        start: f64,
        end: f64,
    },
    Cubic {
        x: [f64; 4],
        y: [f64; 4],
        t0: f64,
        t1: f64,
    },
}

impl Default for CurveConfig {
    fn default() -> Self {
        CurveConfig::CircularArc {
            center: [0.0, 0.0],
            radius: 1.0,
            start: 0.2,
            end: 1.3,
        }
    }
}

impl CurveConfig {
    pub fn spec(&self) -> CurveSpec {
        match *self {
            CurveConfig::CircularArc { center, radius, start, end } => CurveSpec::CircularArc { center, radius, start, end },
            CurveConfig::EllipseArc { center, a, b, start, end } => CurveSpec::EllipseArc { center, a, b, start, end },
            CurveConfig::Cubic { x, y, t0, t1 } => CurveSpec::Cubic { x, y, t0, t1 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    #[default]
    Gaussian,
    Uniform,
    /// `index` picks `μ` among the circle's points, modulo `#E`.
    SinglePair { index: usize, phase: f64 },
    ArcLocalized {
        center_angle: f64,
        #[serde(default = "default_fraction")]
        fraction: f64,
    },
}

fn default_fraction() -> f64 {
    DEFAULT_ARC_FRACTION
}

impl ModelConfig {
    pub fn model(&self, circle: &LatticeCircle, seed: u64) -> CoefficientModel {
        match *self {
            ModelConfig::Gaussian => CoefficientModel::GaussianRandom { seed },
            ModelConfig::Uniform => CoefficientModel::UniformRandom { seed },
            ModelConfig::SinglePair { index, phase } => CoefficientModel::SinglePair {
                mu: circle.points()[index % circle.count().max(1)],
                phase,
            },
            ModelConfig::ArcLocalized { center_angle, fraction } => {
                CoefficientModel::ArcLocalized { center_angle, fraction, seed }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicConfig {
    pub p: i64,
    pub q: i64,
    pub c: f64,
    pub n: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExceptionsConfig {
    pub geodesics: Vec<GeodesicConfig>,
    pub beta: f64,
    pub convergents: usize,
    pub v0: [f64; 2],
    pub witnesses: usize,
    pub theta0: Vec<f64>,
    pub max_degree: u32,
    pub prime_bound: u32,
}

impl Default for ExceptionsConfig {
    fn default() -> Self {
        Self {
            geodesics: vec![
                GeodesicConfig { p: 1, q: 0, c: 0.0, n: 1 },
                GeodesicConfig { p: 3, q: 4, c: 0.0, n: 2 },
                GeodesicConfig { p: 2, q: -5, c: 0.7, n: 3 },
            ],
            beta: std::f64::consts::SQRT_2,
            convergents: 12,
            v0: [0.3, -1.1],
            witnesses: 8,
            theta0: vec![FRAC_PI_2, (1.0 / 3f64.sqrt()).acos(), 0.4321],
            max_degree: 200,
            prime_bound: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub command: Option<Command>,
    pub n: NSpec,
    pub curve: CurveConfig,
    pub model: ModelConfig,
    /// Master seed; run `i` uses `run_seed(seed, seed_offset + i)`.
    pub seed: u64,
    pub seeds: usize,
    pub seed_offset: u64,
    pub sigma: f64,
    pub epsilon: f64,
    pub tol: f64,
    /// Largest `#E` for the exhaustive product audit in `lattice`.
    pub cc_max_points: usize,
    pub cc_max_size: usize,
    /// Commands run by `sweep`.
    pub commands: Vec<Command>,
    pub out: Option<PathBuf>,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
    pub plot: bool,
    pub export_eigenfunctions: bool,
    pub exceptions: ExceptionsConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA.into(),
            command: None,
            n: NSpec::default(),
            curve: CurveConfig::default(),
            model: ModelConfig::default(),
            seed: 1,
            seeds: 1,
            seed_offset: 0,
            sigma: 0.25,
            epsilon: 0.1,
            tol: 1e-9,
            cc_max_points: 24,
            cc_max_size: 6,
            commands: vec![Command::Nodal],
            out: None,
            jobs: 0,
            plot: true,
            export_eigenfunctions: false,
            exceptions: ExceptionsConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(CliError::Config(m.into()));
        if self.schema != SCHEMA {
            return Err(CliError::Config(format!("schema {:?}, expected {SCHEMA:?}", self.schema)));
        }
        if !(self.sigma > 0.0 && self.sigma <= 0.25) {
            return fail("sigma must lie in (0, 1/4]");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return fail("epsilon must lie in (0, 1/2)");
        }
        if !(self.tol > 0.0 && self.tol < 1e-3) {
            return fail("tol must lie in (0, 1e-3)");
        }
        if self.seeds == 0 {
            return fail("seeds must be at least 1");
        }
        if self.commands.contains(&Command::Sweep) {
            return fail("sweep cannot run itself");
        }
        if self.n.values().contains(&0) {
            return fail("n must be positive");
        }
        Ok(())
    }
}
