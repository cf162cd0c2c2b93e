//! Phase-sum kernels over field ensembles, with analytic and lattice
//! propagator routes for cross-checking.
//!
//! Each field contributes `C * exp(i S(j) / scale)`; the kernel is the sum
//! (or mean) of those contributions. The scale divides out either a fixed
//! quantum of action or the ensemble's total action; both conventions are
//! supported and callers must record which one they used.
//!
//! Note the asymmetry between the two routes: the ensemble phases depend
//! only on each field's frequency and the time span, so the endpoints of
//! the estimated propagator are pure metadata here. They become physical
//! only in the analytic and lattice routes, which is exactly what the
//! oracle comparisons probe.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::deviation::{accumulate_action, total_action};
use crate::ensemble::{sample_ensemble, EnsembleConfig};
use crate::error::{Error, Result};

/// One field's contribution to the kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseFactor {
    pub field_index: u64,
    pub amplitude: f64,
    pub phase: f64,
    pub value: Complex64,
}

/// Build `C * exp(i S / scale)` for one field.
pub fn phase_factor(
    field_index: u64,
    action: f64,
    scale: f64,
    amplitude: f64,
) -> Result<PhaseFactor> {
    if !(scale > 0.0) {
        return Err(Error::NonPositive {
            name: "scale",
            value: scale,
        });
    }
    if amplitude < 0.0 {
        return Err(Error::Negative {
            name: "amplitude",
            value: amplitude,
        });
    }
    let phase = action / scale;
    Ok(PhaseFactor {
        field_index,
        amplitude,
        phase,
        value: amplitude * Complex64::from_polar(1.0, phase),
    })
}

/// How the per-field contributions are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    RawSum,
    Mean,
}

/// Which action scale divides the phases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseScale {
    /// Divide each action by the quantum of action.
    Hbar,
    /// Divide each action by the summed ensemble action.
    TotalAction,
}

/// Kernel value with ensemble size and the dispersion of the mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelEstimate {
    pub value: Complex64,
    pub ensemble_size: usize,
    pub std_error: f64,
}

/// Combine phase factors in index order.
///
/// `std_error` is the sample standard deviation of the contributions
/// (real and imaginary parts combined) divided by `sqrt(J)`; it is zero
/// for a single contribution. Summation order is fixed so results do not
/// depend on the parallelism of upstream stages.
pub fn kernel_sum(phases: &[PhaseFactor], normalization: Normalization) -> Result<KernelEstimate> {
    if phases.is_empty() {
        return Err(Error::EmptyInput("phase factors"));
    }
    let n = phases.len();
    let sum: Complex64 = phases.iter().map(|p| p.value).sum();
    let mean = sum / n as f64;

    let std_error = if n > 1 {
        let (var_re, var_im) = phases.iter().fold((0.0, 0.0), |(re, im), p| {
            let dr = p.value.re - mean.re;
            let di = p.value.im - mean.im;
            (re + dr * dr, im + di * di)
        });
        (((var_re + var_im) / (n - 1) as f64) / n as f64).sqrt()
    } else {
        0.0
    };

    let value = match normalization {
        Normalization::RawSum => sum,
        Normalization::Mean => mean,
    };
    Ok(KernelEstimate {
        value,
        ensemble_size: n,
        std_error,
    })
}

/// Closed-form one-dimensional free propagator
/// `sqrt(m / (2 pi i hbar T)) * exp(i m (xb - xa)^2 / (2 hbar T))`,
/// with `sqrt(1/i)` on the principal branch `exp(-i pi / 4)`.
pub fn analytic_free_kernel(m: f64, t: f64, xa: f64, xb: f64, hbar: f64) -> Result<Complex64> {
    for (name, value) in [("mass", m), ("t_span", t), ("hbar", hbar)] {
        if !(value > 0.0) {
            return Err(Error::NonPositive { name, value });
        }
    }
    let magnitude = (m / (2.0 * std::f64::consts::PI * hbar * t)).sqrt();
    let dx = xb - xa;
    let phase = m * dx * dx / (2.0 * hbar * t) - std::f64::consts::FRAC_PI_4;
    Ok(magnitude * Complex64::from_polar(1.0, phase))
}

/// Uniform spatial grid for the lattice propagator.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl LatticeGrid {
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    fn validate(&self) -> Result<()> {
        if self.points < 3 {
            return Err(Error::InvalidConfig(format!(
                "lattice grid needs at least 3 points, got {}",
                self.points
            )));
        }
        if !(self.x_max > self.x_min) {
            return Err(Error::InvalidConfig(format!(
                "lattice grid needs x_min < x_max, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        Ok(())
    }
}

/// Brute-force time-sliced propagator between fixed endpoints.
///
/// Composes `slices` short-time kernels with a symmetric potential split
/// and evaluates the intermediate integrals with trapezoidal quadrature on
/// the grid. The quadrature weights roll off smoothly over the outer fifth
/// of the grid on each side: the integrand never decays on its own, and a
/// hard cutoff reflects coherently across slices, while contributions from
/// the rolled-off zone carry no stationary phase for interior endpoints.
/// Rejects grids whose node-to-node phase step exceeds pi.
#[allow(clippy::too_many_arguments)]
pub fn lattice_path_integral(
    potential: impl Fn(f64) -> f64,
    m: f64,
    hbar: f64,
    t: f64,
    xa: f64,
    xb: f64,
    slices: usize,
    grid: &LatticeGrid,
) -> Result<Complex64> {
    for (name, value) in [("mass", m), ("t_span", t), ("hbar", hbar)] {
        if !(value > 0.0) {
            return Err(Error::NonPositive { name, value });
        }
    }
    if slices == 0 {
        return Err(Error::InvalidConfig("slices must be >= 1".into()));
    }
    grid.validate()?;
    // endpoints must sit on the full-weight plateau of the quadrature window
    let margin = 0.2 * (grid.x_max - grid.x_min);
    for (name, x) in [("xa", xa), ("xb", xb)] {
        if x < grid.x_min + margin || x > grid.x_max - margin {
            return Err(Error::InvalidConfig(format!(
                "{name} = {x} outside the interior [{}, {}] of the grid",
                grid.x_min + margin,
                grid.x_max - margin
            )));
        }
    }

    let eps = t / slices as f64;
    let half_u = |x: f64| Complex64::from_polar(1.0, -0.5 * eps * potential(x) / hbar);
    let free = |dx: f64| -> Complex64 {
        let magnitude = (m / (2.0 * std::f64::consts::PI * hbar * eps)).sqrt();
        let phase = m * dx * dx / (2.0 * hbar * eps) - std::f64::consts::FRAC_PI_4;
        magnitude * Complex64::from_polar(1.0, phase)
    };
    // one slice: a single short-time kernel, no intermediate integral
    if slices == 1 {
        return Ok(half_u(xb) * free(xb - xa) * half_u(xa));
    }

    let p = grid.points;
    let dx = grid.dx();
    let length = grid.x_max - grid.x_min;

    // sampling check: kinetic plus potential phase step per grid node
    let u_samples: Vec<f64> = (0..p).map(|i| potential(grid.x(i))).collect();
    let max_du = u_samples
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / dx)
        .fold(0.0, f64::max);
    let phase_step = dx * (m * length / (hbar * eps) + eps * max_du / hbar);
    if phase_step > std::f64::consts::PI {
        return Err(Error::GridTooCoarse { phase_step });
    }

    // short-time kernel split as diag(e^{-i eps U / 2hbar}) * toeplitz(free) * diag(...)
    let half_u_grid: Vec<Complex64> = u_samples
        .iter()
        .map(|&u| Complex64::from_polar(1.0, -0.5 * eps * u / hbar))
        .collect();
    let free_by_offset: Vec<Complex64> = (0..p).map(|d| free(d as f64 * dx)).collect();
    let roll = 0.2 * length;
    let window = |x: f64| -> f64 {
        let edge = (x - grid.x_min).min(grid.x_max - x);
        if edge >= roll {
            1.0
        } else {
            let s = (std::f64::consts::FRAC_PI_2 * edge / roll).sin();
            s * s
        }
    };
    let weight = |j: usize| {
        let trapezoid = if j == 0 || j == p - 1 { 0.5 * dx } else { dx };
        trapezoid * window(grid.x(j))
    };

    // amplitude after the first slice, on the grid
    let mut v: Vec<Complex64> = (0..p)
        .map(|i| half_u_grid[i] * free(grid.x(i) - xa) * half_u(xa))
        .collect();

    // remaining interior integrals
    let mut scratch: Vec<Complex64> = vec![Complex64::ZERO; p];
    for _ in 0..slices - 2 {
        let weighted: Vec<Complex64> = (0..p).map(|j| v[j] * half_u_grid[j] * weight(j)).collect();
        scratch.par_iter_mut().enumerate().for_each(|(i, out)| {
            let mut acc = Complex64::ZERO;
            for (j, w) in weighted.iter().enumerate() {
                let d = i.abs_diff(j);
                acc += free_by_offset[d] * w;
            }
            *out = half_u_grid[i] * acc;
        });
        std::mem::swap(&mut v, &mut scratch);
    }

    // close the path at xb
    let mut acc = Complex64::ZERO;
    for j in 0..p {
        acc += free(xb - grid.x(j)) * half_u_grid[j] * weight(j) * v[j];
    }
    Ok(half_u(xb) * acc)
}

/// Parameters for one ensemble-kernel evaluation.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelJob {
    pub t_span: f64,
    pub hbar: f64,
    pub normalization: Normalization,
    pub scale: PhaseScale,
    /// Contribution amplitude `C`, the same for every field.
    pub amplitude: f64,
}

impl KernelJob {
    pub fn new(t_span: f64, hbar: f64) -> Self {
        Self {
            t_span,
            hbar,
            normalization: Normalization::Mean,
            scale: PhaseScale::Hbar,
            amplitude: 1.0,
        }
    }
}

/// Sample an ensemble, accumulate per-field actions, and sum the phases.
///
/// Deterministic for a given config seed: phase generation is parallel over
/// fields and the reduction runs in index order.
pub fn ensemble_kernel(config: &EnsembleConfig, job: &KernelJob) -> Result<KernelEstimate> {
    if !(job.t_span > 0.0) {
        return Err(Error::NonPositive {
            name: "t_span",
            value: job.t_span,
        });
    }
    if !(job.hbar > 0.0) {
        return Err(Error::NonPositive {
            name: "hbar",
            value: job.hbar,
        });
    }
    let fields = sample_ensemble(config)?;
    let actions: Vec<f64> = fields
        .par_iter()
        .map(|f| accumulate_action(f, job.hbar, job.t_span).map(|ap| ap.action))
        .collect::<Result<_>>()?;
    let scale = match job.scale {
        PhaseScale::Hbar => job.hbar,
        PhaseScale::TotalAction => total_action(&actions)?,
    };
    let phases: Vec<PhaseFactor> = fields
        .par_iter()
        .zip(&actions)
        .map(|(f, &s)| phase_factor(f.index_j, s, scale, job.amplitude))
        .collect::<Result<_>>()?;
    kernel_sum(&phases, job.normalization)
}

/// One row of a kernel sweep.
#[derive(Clone, Copy, Debug)]
pub struct KernelSweepRow {
    pub count_j: u64,
    pub t_span: f64,
    pub estimate: KernelEstimate,
}

/// Write sweep rows as CSV with columns `J,t_span,re_K,im_K,std_error`.
pub fn write_kernel_csv<W: Write>(out: &mut W, rows: &[KernelSweepRow]) -> std::io::Result<()> {
    writeln!(out, "J,t_span,re_K,im_K,std_error")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.count_j, r.t_span, r.estimate.value.re, r.estimate.value.im, r.estimate.std_error
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::CurvatureDistribution;
    use crate::rng::Stream;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn phase_factor_values() {
        let unit = phase_factor(0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(unit.value, Complex64::new(1.0, 0.0));

        let half_turn = phase_factor(0, PI * 2.5, 2.5, 1.0).unwrap();
        assert!((half_turn.value + Complex64::new(1.0, 0.0)).norm() < 1e-12);

        for n in 1..=100 {
            let full = phase_factor(0, TAU * 3.0 * n as f64, 3.0, 1.0).unwrap();
            assert!(
                (full.value - Complex64::new(1.0, 0.0)).norm() < 1e-12,
                "n = {n}"
            );
        }
    }

    #[test]
    fn phase_factor_rejects_bad_input() {
        assert!(matches!(
            phase_factor(0, 1.0, 0.0, 1.0),
            Err(Error::NonPositive { name: "scale", .. })
        ));
        assert!(phase_factor(0, 1.0, -1.0, 1.0).is_err());
        assert!(phase_factor(0, 1.0, 1.0, -0.5).is_err());
    }

    #[test]
    fn phase_factor_modulus_invariant() {
        let mut stream = Stream::labeled(3, "phase-mod");
        for _ in 0..200 {
            let c = 2.0 * stream.next_f64();
            let p = phase_factor(0, 10.0 * stream.next_normal(), 1.0, c).unwrap();
            assert!((p.value.norm() - c).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_sum_basic_cases() {
        let aligned: Vec<PhaseFactor> = (0..5)
            .map(|j| phase_factor(j, 0.0, 1.0, 1.0).unwrap())
            .collect();
        let k = kernel_sum(&aligned, Normalization::Mean).unwrap();
        assert_eq!(k.value, Complex64::new(1.0, 0.0));
        assert_eq!(k.std_error, 0.0);
        assert_eq!(k.ensemble_size, 5);

        let cancel = vec![
            phase_factor(0, 0.0, 1.0, 1.0).unwrap(),
            phase_factor(1, PI, 1.0, 1.0).unwrap(),
        ];
        let k = kernel_sum(&cancel, Normalization::RawSum).unwrap();
        assert!(k.value.norm() < 1e-12);

        assert!(kernel_sum(&[], Normalization::Mean).is_err());
    }

    #[test]
    fn uniform_phases_follow_random_walk_scaling() {
        let j = 100_000usize;
        let mut stream = Stream::labeled(17, "uniform-phases");
        let phases: Vec<PhaseFactor> = (0..j)
            .map(|i| phase_factor(i as u64, TAU * stream.next_f64(), 1.0, 1.0).unwrap())
            .collect();
        let k = kernel_sum(&phases, Normalization::Mean).unwrap();
        let scale = 1.0 / (j as f64).sqrt();
        assert!(k.value.norm() < 5.0 * scale, "|K| = {}", k.value.norm());
        assert!(
            k.std_error > 0.7 * scale && k.std_error < 1.3 * scale,
            "se {}",
            k.std_error
        );
    }

    #[test]
    fn raw_sum_is_linear_over_concatenation() {
        let mut stream = Stream::labeled(5, "linearity");
        let make = |stream: &mut Stream, n: usize| -> Vec<PhaseFactor> {
            (0..n)
                .map(|i| {
                    phase_factor(i as u64, 3.0 * stream.next_normal(), 1.0, stream.next_f64())
                        .unwrap()
                })
                .collect()
        };
        let a = make(&mut stream, 100);
        let b = make(&mut stream, 100);
        let mut joined = a.clone();
        joined.extend_from_slice(&b);
        let ka = kernel_sum(&a, Normalization::RawSum).unwrap().value;
        let kb = kernel_sum(&b, Normalization::RawSum).unwrap().value;
        let kj = kernel_sum(&joined, Normalization::RawSum).unwrap().value;
        assert!((kj - (ka + kb)).norm() < 1e-12);
    }

    #[test]
    fn mean_kernel_bounded_by_max_amplitude() {
        let mut stream = Stream::labeled(5, "triangle");
        let phases: Vec<PhaseFactor> = (0..500)
            .map(|i| {
                phase_factor(i as u64, stream.next_normal(), 0.3, 2.0 * stream.next_f64()).unwrap()
            })
            .collect();
        let max_c = phases.iter().map(|p| p.amplitude).fold(0.0, f64::max);
        let k = kernel_sum(&phases, Normalization::Mean).unwrap();
        assert!(k.value.norm() <= max_c + 1e-12);
    }

    #[test]
    fn free_kernel_point_value() {
        let k = analytic_free_kernel(1.0, 1.0, 0.4, 0.4, 1.0).unwrap();
        let expect = 1.0 / (2.0 * PI).sqrt();
        assert!((k.norm() - expect).abs() < 1e-12);
        assert!((k.norm() - 0.398_942_280_401_432_7).abs() < 1e-12);

        // modulus does not depend on the endpoints
        let shifted = analytic_free_kernel(1.0, 1.0, 0.4, 3.1, 1.0).unwrap();
        assert!((shifted.norm() - expect).abs() < 1e-12);

        assert!(analytic_free_kernel(0.0, 1.0, 0.0, 0.0, 1.0).is_err());
        assert!(analytic_free_kernel(1.0, -1.0, 0.0, 0.0, 1.0).is_err());
        assert!(analytic_free_kernel(1.0, 1.0, 0.0, 0.0, 0.0).is_err());
    }

    /// Quadrature oracle for the propagator composition law. The integrand
    /// is entire with a quadratic phase, so integrate along the line
    /// through the stationary point rotated by pi/4, where it decays as a
    /// real Gaussian.
    fn compose_free_kernels(m: f64, hbar: f64, t1: f64, t2: f64, xa: f64, xb: f64) -> Complex64 {
        let alpha = m / (2.0 * hbar) * (1.0 / t1 + 1.0 / t2);
        let beta = -m / hbar * (xa / t1 + xb / t2);
        let center = -beta / (2.0 * alpha);
        let rot = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);

        let pref1 = (m / (2.0 * PI * hbar * t1)).sqrt();
        let pref2 = (m / (2.0 * PI * hbar * t2)).sqrt();
        let pref = pref1 * pref2 * Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_2);
        let i = Complex64::i();
        let integrand = |c: Complex64| -> Complex64 {
            let phase1 = m * (c - xa) * (c - xa) / (2.0 * hbar * t1);
            let phase2 =
                m * (Complex64::from(xb) - c) * (Complex64::from(xb) - c) / (2.0 * hbar * t2);
            pref * (i * (phase1 + phase2)).exp()
        };

        let half_width = 8.0 / alpha.sqrt();
        let n = 4000;
        let ds = 2.0 * half_width / n as f64;
        let mut sum = Complex64::ZERO;
        for k in 0..=n {
            let s = -half_width + k as f64 * ds;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            sum += w * integrand(center + rot * s);
        }
        sum * rot * ds
    }

    #[test]
    fn free_kernel_semigroup_property() {
        let (m, hbar, xa, xb) = (1.0, 1.0, -0.3, 1.1);
        for (t1, t2) in [(0.5, 0.5), (0.2, 0.9), (1.5, 0.4)] {
            let composed = compose_free_kernels(m, hbar, t1, t2, xa, xb);
            let direct = analytic_free_kernel(m, t1 + t2, xa, xb, hbar).unwrap();
            assert!(
                (composed - direct).norm() < 1e-6,
                "t1 {t1} t2 {t2}: {composed} vs {direct}"
            );
        }
    }

    #[test]
    fn lattice_single_slice_is_exact_for_free_particle() {
        let grid = LatticeGrid {
            x_min: -8.0,
            x_max: 8.0,
            points: 64,
        };
        let k = lattice_path_integral(|_| 0.0, 1.0, 1.0, 1.0, -0.5, 0.75, 1, &grid).unwrap();
        let expect = analytic_free_kernel(1.0, 1.0, -0.5, 0.75, 1.0).unwrap();
        assert!((k - expect).norm() < 1e-8, "{k} vs {expect}");
    }

    #[test]
    fn lattice_error_shrinks_with_grid_refinement() {
        let (m, hbar, t, xa, xb) = (1.0, 1.0, 1.0, 0.0, 0.5);
        let exact = analytic_free_kernel(m, t, xa, xb, hbar).unwrap();
        let mut last = f64::INFINITY;
        for (x_half, points) in [(6.0, 400), (8.0, 700), (12.0, 1600)] {
            let grid = LatticeGrid {
                x_min: -x_half,
                x_max: x_half,
                points,
            };
            let k = lattice_path_integral(|_| 0.0, m, hbar, t, xa, xb, 4, &grid).unwrap();
            let err = (k - exact).norm() / exact.norm();
            assert!(
                err < last * 1.05,
                "error {err} did not shrink (last {last})"
            );
            last = err;
        }
        assert!(last < 0.01, "finest error {last}");
    }

    #[test]
    fn lattice_rejects_coarse_grid() {
        let grid = LatticeGrid {
            x_min: -8.0,
            x_max: 8.0,
            points: 64,
        };
        let err = lattice_path_integral(|_| 0.0, 1.0, 1.0, 1.0, 0.0, 0.5, 64, &grid).unwrap_err();
        assert!(matches!(err, Error::GridTooCoarse { .. }));
    }

    #[test]
    fn lattice_rejects_endpoints_outside_grid() {
        let grid = LatticeGrid {
            x_min: -1.0,
            x_max: 1.0,
            points: 8,
        };
        assert!(lattice_path_integral(|_| 0.0, 1.0, 1.0, 1.0, -3.0, 0.0, 1, &grid).is_err());
    }

    #[test]
    fn delta_ensembles_have_trivial_kernels() {
        let still = EnsembleConfig {
            count_j: 64,
            distribution: CurvatureDistribution::Delta { value: 0.0 },
            seed: 1,
            light_speed_c: 1.0,
        };
        let job = KernelJob::new(2.0, 1.0);
        let k = ensemble_kernel(&still, &job).unwrap();
        assert_eq!(k.value, Complex64::new(1.0, 0.0));
        assert_eq!(k.std_error, 0.0);

        let raw = ensemble_kernel(
            &still,
            &KernelJob {
                normalization: Normalization::RawSum,
                ..job
            },
        )
        .unwrap();
        assert_eq!(raw.value, Complex64::new(64.0, 0.0));

        // identical nonzero phases: |K| = C under the mean
        let spinning = EnsembleConfig {
            count_j: 32,
            distribution: CurvatureDistribution::Delta { value: 4.0 },
            seed: 1,
            light_speed_c: 1.0,
        };
        let k = ensemble_kernel(&spinning, &job).unwrap();
        let expect = Complex64::from_polar(1.0, 2.0 * job.t_span);
        assert!((k.value - expect).norm() < 1e-12);
        assert!(k.std_error < 1e-12);
    }

    #[test]
    fn ensemble_kernel_deterministic_across_pools() {
        let config = EnsembleConfig {
            count_j: 2000,
            distribution: CurvatureDistribution::HalfNormal { scale: 1.0 },
            seed: 99,
            light_speed_c: 1.0,
        };
        let job = KernelJob::new(5.0, 1.0);
        let reference = ensemble_kernel(&config, &job).unwrap();
        for threads in [1, 4] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let k = pool.install(|| ensemble_kernel(&config, &job).unwrap());
            assert_eq!(k.value, reference.value);
            assert_eq!(k.std_error, reference.std_error);
        }
    }

    #[test]
    fn mean_kernel_decays_with_time_span_for_random_frequencies() {
        let config = EnsembleConfig {
            count_j: 20_000,
            distribution: CurvatureDistribution::HalfNormal { scale: 1.0 },
            seed: 4,
            light_speed_c: 1.0,
        };
        let mut last = f64::INFINITY;
        for t_span in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let k = ensemble_kernel(&config, &KernelJob::new(t_span, 1.0)).unwrap();
            let magnitude = k.value.norm();
            assert!(
                magnitude < last,
                "|K({t_span})| = {magnitude} did not decrease"
            );
            last = magnitude;
        }
    }

    #[test]
    fn total_action_scale_normalizes_phases() {
        let config = EnsembleConfig {
            count_j: 100,
            distribution: CurvatureDistribution::Delta { value: 4.0 },
            seed: 7,
            light_speed_c: 1.0,
        };
        let mut job = KernelJob::new(1.0, 1.0);
        job.scale = PhaseScale::TotalAction;
        // identical fields: each phase is S / (J S) = 1/J
        let k = ensemble_kernel(&config, &job).unwrap();
        let expect = Complex64::from_polar(1.0, 1.0 / 100.0);
        assert!((k.value - expect).norm() < 1e-12);

        // zero total action cannot scale phases
        let zero = EnsembleConfig {
            count_j: 3,
            distribution: CurvatureDistribution::Delta { value: 0.0 },
            seed: 7,
            light_speed_c: 1.0,
        };
        assert!(ensemble_kernel(&zero, &job).is_err());
    }

    #[test]
    fn sweep_csv_format() {
        let rows = vec![KernelSweepRow {
            count_j: 10,
            t_span: 2.0,
            estimate: KernelEstimate {
                value: Complex64::new(0.5, -0.25),
                ensemble_size: 10,
                std_error: 0.01,
            },
        }];
        let mut buf = Vec::new();
        write_kernel_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "J,t_span,re_K,im_K,std_error\n10,2,0.5,-0.25,0.01\n");
    }
}
