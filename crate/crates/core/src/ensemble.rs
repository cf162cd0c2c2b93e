//! Reproducible ensembles of random background fields.
//!
//! Each field `j` carries a curvature component, the tidal frequency
//! `omega = c * sqrt(R1010)`, a wave covector, and a constant forcing term.
//! Sampling is keyed per index: field `j` depends only on `(seed, j)`, so
//! ensembles are bitwise reproducible under any parallel schedule.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// One independent curvature component `R^i_{kmn}` along the worldline.
///
/// Values follow the sign convention of [`crate::deviation`]: a positive
/// component acts as a restoring tidal force on the paired interval
/// component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureComponent {
    pub i: usize,
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub value: f64,
}

/// One random background field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    /// 1-based field index.
    #[serde(rename = "j")]
    pub index_j: u64,
    /// Tidal curvature component, units 1/length^2.
    #[serde(rename = "R1010")]
    pub curvature_r1010: f64,
    /// Oscillation frequency `c * sqrt(R1010)`, units 1/time.
    pub omega: f64,
    /// Wave covector; slot 0 stores `omega / c`, slots 1..3 the spatial part.
    #[serde(rename = "k")]
    pub wave_covector: [f64; 4],
    /// Constant forcing term, units length/time^2. Zero in the default case.
    #[serde(rename = "f", default)]
    pub stochastic_f: f64,
    /// Optional full set of independent curvature components; when absent
    /// only `R1010` is populated.
    #[serde(
        rename = "R_components",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub full_curvature: Option<Vec<CurvatureComponent>>,
}

impl FieldSample {
    /// Build a sample from a curvature value, deriving `omega` and the
    /// covector time slot. The spatial covector defaults to zero.
    pub fn from_curvature(index_j: u64, r1010: f64, f: f64, c: f64) -> Result<Self> {
        if r1010 < 0.0 {
            return Err(Error::NegativeCurvature(r1010));
        }
        if !(c > 0.0) {
            return Err(Error::NonPositive {
                name: "light_speed_c",
                value: c,
            });
        }
        let omega = c * r1010.sqrt();
        Ok(Self {
            index_j,
            curvature_r1010: r1010,
            omega,
            wave_covector: [omega / c, 0.0, 0.0, 0.0],
            stochastic_f: f,
            full_curvature: None,
        })
    }

    /// Check the internal consistency of a (possibly deserialized) sample.
    pub fn validate(&self, c: f64) -> Result<()> {
        if self.curvature_r1010 < 0.0 {
            return Err(Error::NegativeCurvature(self.curvature_r1010));
        }
        let expect = c * self.curvature_r1010.sqrt();
        if (self.omega - expect).abs() > 1e-12 * expect.max(1.0) {
            return Err(Error::InvalidConfig(format!(
                "field {}: omega {} does not match c*sqrt(R1010) = {}",
                self.index_j, self.omega, expect
            )));
        }
        Ok(())
    }
}

/// Law for drawing the curvature component of each field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurvatureDistribution {
    /// `|scale * N(0,1)|`; keeps curvature nonnegative with one parameter.
    HalfNormal { scale: f64 },
    /// `exp(U(ln lo, ln hi))`.
    LogUniform { lo: f64, hi: f64 },
    /// A single deterministic value.
    Delta { value: f64 },
}

impl CurvatureDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::HalfNormal { scale } if !(scale > 0.0) => Err(Error::InvalidConfig(format!(
                "half_normal scale must be positive, got {scale}"
            ))),
            Self::LogUniform { lo, hi } if !(lo > 0.0) || !(hi > lo) => Err(Error::InvalidConfig(
                format!("log_uniform needs 0 < lo < hi, got lo = {lo}, hi = {hi}"),
            )),
            Self::Delta { value } if value < 0.0 => Err(Error::InvalidConfig(format!(
                "delta value must be >= 0, got {value}"
            ))),
            _ => Ok(()),
        }
    }

    fn draw(&self, stream: &mut Stream) -> f64 {
        match *self {
            Self::HalfNormal { scale } => (scale * stream.next_normal()).abs(),
            Self::LogUniform { lo, hi } => {
                let u = stream.next_f64();
                (lo.ln() + u * (hi.ln() - lo.ln())).exp()
            }
            Self::Delta { value } => value,
        }
    }

    /// Closed-form mean of the law.
    pub fn mean(&self) -> f64 {
        match *self {
            Self::HalfNormal { scale } => scale * (2.0 / std::f64::consts::PI).sqrt(),
            Self::LogUniform { lo, hi } => (hi - lo) / (hi / lo).ln(),
            Self::Delta { value } => value,
        }
    }

    /// Closed-form variance of the law.
    pub fn variance(&self) -> f64 {
        match *self {
            Self::HalfNormal { scale } => scale * scale * (1.0 - 2.0 / std::f64::consts::PI),
            Self::LogUniform { lo, hi } => {
                let mean = self.mean();
                (hi * hi - lo * lo) / (2.0 * (hi / lo).ln()) - mean * mean
            }
            Self::Delta { .. } => 0.0,
        }
    }
}

/// Parameters of one reproducible ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub count_j: u64,
    pub distribution: CurvatureDistribution,
    pub seed: u64,
    pub light_speed_c: f64,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.count_j < 1 {
            return Err(Error::InvalidConfig("count_j must be >= 1".into()));
        }
        if !(self.light_speed_c > 0.0) {
            return Err(Error::NonPositive {
                name: "light_speed_c",
                value: self.light_speed_c,
            });
        }
        self.distribution.validate()
    }
}

/// Draw the full ensemble. Sample `j` depends only on `(seed, j)`.
///
/// The spatial covector direction is isotropic with magnitude `omega / c`,
/// matching the time slot.
pub fn sample_ensemble(config: &EnsembleConfig) -> Result<Vec<FieldSample>> {
    config.validate()?;
    let c = config.light_speed_c;
    Ok((1..=config.count_j)
        .into_par_iter()
        .map(|j| {
            let mut stream = Stream::for_index(config.seed, j);
            let r1010 = config.distribution.draw(&mut stream);
            let omega = c * r1010.sqrt();
            let k_mag = omega / c;
            let u = 2.0 * stream.next_f64() - 1.0;
            let phi = std::f64::consts::TAU * stream.next_f64();
            let s = (1.0 - u * u).max(0.0).sqrt();
            FieldSample {
                index_j: j,
                curvature_r1010: r1010,
                omega,
                wave_covector: [
                    k_mag,
                    k_mag * s * phi.cos(),
                    k_mag * s * phi.sin(),
                    k_mag * u,
                ],
                stochastic_f: 0.0,
                full_curvature: None,
            }
        })
        .collect())
}

/// Tidal frequency `c * sqrt(R1010)` of a sample.
pub fn frequency_of(sample: &FieldSample, c: f64) -> Result<f64> {
    if sample.curvature_r1010 < 0.0 {
        return Err(Error::NegativeCurvature(sample.curvature_r1010));
    }
    Ok(c * sample.curvature_r1010.sqrt())
}
