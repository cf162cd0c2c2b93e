//! Experiment configuration schema.
//!
//! Configs are JSON with a versioned schema; unknown keys are rejected so
//! typos surface as schema errors instead of silently falling back to
//! defaults. Every run record embeds the fully resolved config, so any
//! result file can be re-derived from itself.

use serde::{Deserialize, Serialize};

use qgeo::ensemble::CurvatureDistribution;
use qgeo::kernel::{Normalization, PhaseScale};
use qgeo::wave::Boundary;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Decompose,
    Ensemble,
    Deviation,
    Kernel,
    Stats,
    Evolve,
    Check,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Decompose => "decompose",
            Self::Ensemble => "ensemble",
            Self::Deviation => "deviation",
            Self::Kernel => "kernel",
            Self::Stats => "stats",
            Self::Evolve => "evolve",
            Self::Check => "check",
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "one")]
    pub hbar: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self { c: 1.0, hbar: 1.0 }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    pub seed: u64,
    #[serde(default)]
    pub constants: Constants,
    pub output_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decompose: Option<DecomposeParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation: Option<DeviationParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<StatsParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolve: Option<EvolveParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckParams>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeParams {
    /// Amplitudes as `[re, im]` pairs.
    pub psi1: Vec<[f64; 2]>,
    pub psi2: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleParams {
    pub count_j: u64,
    pub distribution: CurvatureDistribution,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviationParams {
    pub r1010: f64,
    #[serde(default)]
    pub f: f64,
    pub initial_ell: [f64; 4],
    pub initial_rate: [f64; 4],
    pub velocity: [f64; 4],
    pub t_span: f64,
    pub dt: f64,
    /// Optional constant momentum: reports the plane-wave cross-check
    /// `S = p . x` over the worldline displacement alongside the phase
    /// route.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum: Option<[f64; 4]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelParams {
    /// Ensemble sizes to sweep.
    pub sweep_j: Vec<u64>,
    /// Time spans to sweep.
    pub t_spans: Vec<f64>,
    pub distribution: CurvatureDistribution,
    #[serde(default = "default_normalization")]
    pub normalization: Normalization,
    #[serde(default = "default_scale")]
    pub scale: PhaseScale,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn default_normalization() -> Normalization {
    Normalization::Mean
}

fn default_scale() -> PhaseScale {
    PhaseScale::Hbar
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsParams {
    pub sigma: f64,
    pub s0: f64,
    /// Interval values at which the densities are tabulated.
    pub probe_deltas: Vec<f64>,
    /// Synthetic-velocity KS run: sample count per seed (0 skips the run).
    #[serde(default)]
    pub ks_samples: usize,
    #[serde(default)]
    pub ks_seeds: u64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PacketSpec {
    Gaussian { x0: f64, sigma: f64, k0: f64 },
    PlaneWave { mode: i32 },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    None,
    Harmonic {
        omega: f64,
        #[serde(default)]
        center: f64,
    },
}

impl PotentialSpec {
    pub fn sample(&self, mass: f64, x: f64) -> f64 {
        match *self {
            Self::None => 0.0,
            Self::Harmonic { omega, center } => {
                0.5 * mass * omega * omega * (x - center) * (x - center)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveParams {
    pub grid: GridParams,
    pub packet: PacketSpec,
    pub potential: PotentialSpec,
    pub mass: f64,
    /// Geometric action scale S0; exactly one of this and `hbar` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_scale: Option<f64>,
    /// Standard parameterization; stored as S0 = hbar / 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
    pub dt: f64,
    pub steps: usize,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
    /// Write a snapshot every this many steps (0 = only the final one).
    #[serde(default)]
    pub snapshot_stride: usize,
}

fn default_boundary() -> Boundary {
    Boundary::Periodic
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckParams {
    /// Check names to run, or the single entry "all".
    #[serde(default = "default_suite")]
    pub suite: Vec<String>,
    /// Override of the step ladder for the integrator check; coarse
    /// ladders demonstrate the designed failure path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation_steps_per_period: Option<Vec<f64>>,
}

fn default_suite() -> Vec<String> {
    vec!["all".into()]
}

/// Configuration errors carry the offending key path.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| ConfigError(format!("config parse: {e}")))?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(ConfigError(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                config.schema_version
            )));
        }
        config.validate_block_presence()?;
        Ok(config)
    }

    fn validate_block_presence(&self) -> Result<(), ConfigError> {
        let missing = |key: &str| ConfigError(format!("missing config block: {key}"));
        match self.experiment {
            ExperimentKind::Decompose if self.decompose.is_none() => Err(missing("decompose")),
            ExperimentKind::Ensemble if self.ensemble.is_none() => Err(missing("ensemble")),
            ExperimentKind::Deviation if self.deviation.is_none() => Err(missing("deviation")),
            ExperimentKind::Kernel if self.kernel.is_none() => Err(missing("kernel")),
            ExperimentKind::Stats if self.stats.is_none() => Err(missing("stats")),
            ExperimentKind::Evolve if self.evolve.is_none() => Err(missing("evolve")),
            ExperimentKind::Check if self.check.is_none() => Err(missing("check")),
            _ => Ok(()),
        }
    }
}
