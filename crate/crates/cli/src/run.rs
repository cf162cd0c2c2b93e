//! Experiment execution: compose the library modules per config, write
//! result records and CSV side files, and map failures to exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use qgeo::checks::{self, CheckOutcome};
use qgeo::deviation::{integrate_deviation, write_trajectory_csv, DeviationState};
use qgeo::ensemble::{sample_ensemble, EnsembleConfig, FieldSample};
use qgeo::hilbert::{bloch_project, decompose_inner_product, fubini_study_distance, ComplexState};
use qgeo::kernel::{ensemble_kernel, write_kernel_csv, KernelJob, KernelSweepRow};
use qgeo::rng::Stream;
use qgeo::statistics::{
    action_probability, energy_probability, interval_probability,
    interval_probability_conventional, property_suite, velocity_probability,
    velocity_sample_report, GaussianLaw, IntervalMetric, LawKind,
};
use qgeo::wave::{evolve, write_snapshot_csv, WaveField};

use crate::config::{CheckParams, ExperimentConfig, ExperimentKind, PacketSpec};

/// Failure with its process exit code.
#[derive(Debug)]
pub struct CliFailure {
    pub code: i32,
    pub message: String,
}

impl CliFailure {
    pub fn schema(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<qgeo::Error> for CliFailure {
    fn from(e: qgeo::Error) -> Self {
        use qgeo::Error;
        let code = match e {
            Error::Divergence { .. }
            | Error::StabilityBound(_)
            | Error::GridTooCoarse { .. }
            | Error::UnwrapFailure { .. } => 3,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliFailure {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: 1,
            message: format!("io: {e}"),
        }
    }
}

impl From<serde_json::Error> for CliFailure {
    fn from(e: serde_json::Error) -> Self {
        Self {
            code: 1,
            message: format!("json: {e}"),
        }
    }
}

#[derive(Serialize)]
struct RunRecord<'a> {
    config: &'a ExperimentConfig,
    outputs: Value,
    diagnostics: Diagnostics,
    wall_time_ms: u128,
}

#[derive(Serialize, Default)]
struct Diagnostics {
    files: Vec<String>,
    notes: Vec<String>,
}

/// Derive a module seed from the master seed and a stage label.
fn sub_seed(master: u64, label: &str) -> u64 {
    Stream::labeled(master, label).next_u64()
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), CliFailure> {
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn complex_pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Run the configured experiment; returns the process exit code. A
/// failing experiment leaves a structured `error.json` in the output
/// directory alongside the stderr message.
pub fn run(config: &ExperimentConfig) -> Result<i32, CliFailure> {
    let started = Instant::now();
    let out_dir = PathBuf::from(&config.output_path);
    fs::create_dir_all(&out_dir)?;

    match run_inner(config, &out_dir, started) {
        Ok(code) => Ok(code),
        Err(failure) => {
            let record = json!({
                "config": config,
                "error": failure.message,
                "exit_code": failure.code,
            });
            if let Ok(text) = serde_json::to_string_pretty(&record) {
                let _ = fs::write(out_dir.join("error.json"), text);
            }
            Err(failure)
        }
    }
}

fn run_inner(
    config: &ExperimentConfig,
    out_dir: &Path,
    started: Instant,
) -> Result<i32, CliFailure> {
    if config.experiment == ExperimentKind::Check {
        return run_check(config, out_dir);
    }

    let mut diagnostics = Diagnostics::default();
    let outputs = match config.experiment {
        ExperimentKind::Decompose => run_decompose(config)?,
        ExperimentKind::Ensemble => run_ensemble(config, out_dir, &mut diagnostics)?,
        ExperimentKind::Deviation => run_deviation(config, out_dir, &mut diagnostics)?,
        ExperimentKind::Kernel => run_kernel(config, out_dir, &mut diagnostics)?,
        ExperimentKind::Stats => run_stats(config, out_dir, &mut diagnostics)?,
        ExperimentKind::Evolve => run_evolve(config, out_dir, &mut diagnostics)?,
        ExperimentKind::Check => unreachable!(),
    };

    diagnostics.files.push("result.json".into());
    let record = RunRecord {
        config,
        outputs,
        diagnostics,
        wall_time_ms: started.elapsed().as_millis(),
    };
    write_text(
        out_dir,
        "result.json",
        &serde_json::to_string_pretty(&record)?,
    )?;
    println!("wrote {}", out_dir.join("result.json").display());
    Ok(0)
}

fn state_from_pairs(pairs: &[[f64; 2]]) -> Result<ComplexState, CliFailure> {
    ComplexState::from_pairs(&pairs.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>())
        .map_err(CliFailure::from)
}

fn run_decompose(config: &ExperimentConfig) -> Result<Value, CliFailure> {
    let params = config.decompose.as_ref().expect("block checked");
    let psi1 = state_from_pairs(&params.psi1)?;
    let psi2 = state_from_pairs(&params.psi2)?;
    let parts = decompose_inner_product(&psi1, &psi2)?;
    let direct = psi1.inner(&psi2)?;
    let distance = fubini_study_distance(&psi1, &psi2)?;
    let bloch = |psi: &ComplexState| -> Value {
        if psi.dimension() == 2 && psi.is_normalized() {
            json!(bloch_project(psi).ok())
        } else {
            Value::Null
        }
    };
    Ok(json!({
        "riemannian": parts.riemannian,
        "symplectic": parts.symplectic,
        "reconstructed": complex_pair(parts.reconstruct()),
        "direct": complex_pair(direct),
        "reconstruction_error": (parts.reconstruct() - direct).norm(),
        "fubini_study_distance": distance,
        "bloch_psi1": bloch(&psi1),
        "bloch_psi2": bloch(&psi2),
    }))
}

fn ensemble_config_for(
    config: &ExperimentConfig,
    label: &str,
    count_j: u64,
    distribution: qgeo::ensemble::CurvatureDistribution,
) -> EnsembleConfig {
    EnsembleConfig {
        count_j,
        distribution,
        seed: sub_seed(config.seed, label),
        light_speed_c: config.constants.c,
    }
}

fn run_ensemble(
    config: &ExperimentConfig,
    out_dir: &Path,
    diagnostics: &mut Diagnostics,
) -> Result<Value, CliFailure> {
    let params = config.ensemble.as_ref().expect("block checked");
    let ensemble_config = ensemble_config_for(
        config,
        "ensemble",
        params.count_j,
        params.distribution.clone(),
    );
    let fields = sample_ensemble(&ensemble_config)?;
    write_text(
        out_dir,
        "ensemble.json",
        &serde_json::to_string_pretty(&fields)?,
    )?;
    diagnostics.files.push("ensemble.json".into());
    diagnostics
        .notes
        .push(format!("ensemble substream seed: {}", ensemble_config.seed));

    let n = fields.len() as f64;
    let mean_r = fields.iter().map(|f| f.curvature_r1010).sum::<f64>() / n;
    let var_r = fields
        .iter()
        .map(|f| (f.curvature_r1010 - mean_r).powi(2))
        .sum::<f64>()
        / (n - 1.0).max(1.0);
    let mean_omega = fields.iter().map(|f| f.omega).sum::<f64>() / n;
    Ok(json!({
        "count": fields.len(),
        "mean_r1010": mean_r,
        "var_r1010": var_r,
        "mean_omega": mean_omega,
        "distribution_mean": params.distribution.mean(),
        "distribution_variance": params.distribution.variance(),
    }))
}

fn run_deviation(
    config: &ExperimentConfig,
    out_dir: &Path,
    diagnostics: &mut Diagnostics,
) -> Result<Value, CliFailure> {
    let params = config.deviation.as_ref().expect("block checked");
    let sample = FieldSample::from_curvature(1, params.r1010, params.f, config.constants.c)?;
    let initial = DeviationState::new(params.initial_ell, params.initial_rate);
    let trajectory = integrate_deviation(
        &sample,
        initial,
        params.velocity,
        params.t_span,
        params.dt,
        config.constants.hbar,
    )?;
    let mut csv = Vec::new();
    write_trajectory_csv(&mut csv, &trajectory)?;
    fs::write(out_dir.join("trajectory.csv"), csv)?;
    diagnostics.files.push("trajectory.csv".into());

    let last = trajectory.final_state();
    // plane-wave cross-check over the worldline displacement u * t_span
    let momentum_route = params.momentum.map(|p| {
        let displacement = params.velocity.map(|u| u * params.t_span);
        qgeo::deviation::momentum_action(&p, &displacement)
    });
    Ok(json!({
        "action": trajectory.action,
        "phase": trajectory.phase,
        "dt": trajectory.dt(),
        "samples": trajectory.samples.len(),
        "final_ell": last.ell,
        "final_rate": last.ell_rate,
        "omega": sample.omega,
        "momentum_action": momentum_route,
    }))
}

fn run_kernel(
    config: &ExperimentConfig,
    out_dir: &Path,
    diagnostics: &mut Diagnostics,
) -> Result<Value, CliFailure> {
    let params = config.kernel.as_ref().expect("block checked");
    if params.sweep_j.is_empty() || params.t_spans.is_empty() {
        return Err(CliFailure::schema(
            "kernel: sweep_j and t_spans must be nonempty",
        ));
    }
    let mut rows = Vec::new();
    let mut rows_json = Vec::new();
    for &count_j in &params.sweep_j {
        for &t_span in &params.t_spans {
            let ensemble_config = ensemble_config_for(
                config,
                "kernel-ensemble",
                count_j,
                params.distribution.clone(),
            );
            let job = KernelJob {
                t_span,
                hbar: config.constants.hbar,
                normalization: params.normalization,
                scale: params.scale,
                amplitude: params.amplitude,
            };
            let estimate = ensemble_kernel(&ensemble_config, &job)?;
            rows_json.push(json!({
                "J": count_j,
                "t_span": t_span,
                "re_K": estimate.value.re,
                "im_K": estimate.value.im,
                "std_error": estimate.std_error,
            }));
            rows.push(KernelSweepRow {
                count_j,
                t_span,
                estimate,
            });
        }
    }
    let mut csv = Vec::new();
    write_kernel_csv(&mut csv, &rows)?;
    fs::write(out_dir.join("kernel.csv"), csv)?;
    diagnostics.files.push("kernel.csv".into());
    diagnostics.notes.push(format!(
        "phase scale: {:?}; normalization: {:?}",
        params.scale, params.normalization
    ));

    Ok(json!({ "rows": rows_json }))
}

fn run_stats(
    config: &ExperimentConfig,
    out_dir: &Path,
    diagnostics: &mut Diagnostics,
) -> Result<Value, CliFailure> {
    let params = config.stats.as_ref().expect("block checked");
    let interval_law = GaussianLaw::new(params.sigma, LawKind::Interval)?;
    let velocity_law = GaussianLaw::new(params.sigma, LawKind::Velocity)?;

    let probes: Vec<Value> = params
        .probe_deltas
        .iter()
        .map(|&d| -> Result<Value, CliFailure> {
            Ok(json!({
                "delta": d,
                "interval": interval_probability(d, &interval_law)?,
                "interval_conventional": interval_probability_conventional(d, &interval_law)?,
                "velocity": velocity_probability(d, &velocity_law)?,
                "action": action_probability(d.abs(), params.s0, params.sigma)?,
                "energy": energy_probability(d.abs(), params.sigma)?,
            }))
        })
        .collect::<Result<_, _>>()?;

    let properties = property_suite(&interval_law, &IntervalMetric::default())?;

    let ks = if params.ks_samples > 0 && params.ks_seeds > 0 {
        let base = sub_seed(config.seed, "stats-ks");
        let mut passes = 0u64;
        let mut reports = Vec::new();
        for s in 0..params.ks_seeds {
            let mut stream = Stream::for_index(base, s);
            let velocities: Vec<f64> = (0..params.ks_samples)
                .map(|_| stream.next_normal())
                .collect();
            let report = velocity_sample_report(&velocities)?;
            if report.ks_statistic.unwrap_or(f64::NAN) < report.ks_critical_95 {
                passes += 1;
            }
            reports.push(serde_json::to_value(&report)?);
        }
        json!({
            "samples_per_seed": params.ks_samples,
            "seeds": params.ks_seeds,
            "passes": passes,
            "pass_fraction": passes as f64 / params.ks_seeds as f64,
            "reports": reports,
        })
    } else {
        Value::Null
    };

    let report = json!({
        "law": { "sigma": params.sigma, "s0": params.s0 },
        "probes": probes,
        "properties": properties,
        "ks": ks,
    });
    write_text(
        out_dir,
        "stats_report.json",
        &serde_json::to_string_pretty(&report)?,
    )?;
    diagnostics.files.push("stats_report.json".into());
    Ok(report)
}

fn run_evolve(
    config: &ExperimentConfig,
    out_dir: &Path,
    diagnostics: &mut Diagnostics,
) -> Result<Value, CliFailure> {
    let params = config.evolve.as_ref().expect("block checked");
    let action_scale = match (params.action_scale, params.hbar) {
        (Some(s0), None) => s0,
        (None, Some(hbar)) => 0.5 * hbar,
        _ => {
            return Err(CliFailure::schema(
                "evolve: provide exactly one of action_scale, hbar",
            ))
        }
    };
    let grid = params.grid;
    if grid.points < 8 {
        return Err(CliFailure::schema("evolve.grid.points: need at least 8"));
    }
    if !(grid.x_max > grid.x_min) {
        return Err(CliFailure::schema("evolve.grid: x_min must be below x_max"));
    }
    // periodic length is x_max - x_min; x_max itself is the wrap point
    let dx = (grid.x_max - grid.x_min) / grid.points as f64;
    let potential: Vec<f64> = (0..grid.points)
        .map(|i| {
            params
                .potential
                .sample(params.mass, grid.x_min + i as f64 * dx)
        })
        .collect();

    let field = match params.packet {
        PacketSpec::Gaussian { x0, sigma, k0 } => WaveField::gaussian_packet(
            grid.points,
            grid.x_min,
            dx,
            x0,
            sigma,
            k0,
            params.mass,
            action_scale,
            potential,
            params.boundary,
        )?,
        PacketSpec::PlaneWave { mode } => WaveField::plane_wave(
            grid.points,
            grid.x_min,
            dx,
            mode,
            params.mass,
            action_scale,
            potential,
            params.boundary,
        )?,
    };

    let mut snapshot = |field: &WaveField, name: &str| -> Result<(), CliFailure> {
        let mut csv = Vec::new();
        write_snapshot_csv(&mut csv, field)?;
        fs::write(out_dir.join(name), csv)?;
        diagnostics.files.push(name.into());
        Ok(())
    };

    let norm_initial = field.norm();
    let width_initial = field.width();
    let mut current = field;
    if params.snapshot_stride > 0 {
        snapshot(&current, "snapshot_000000.csv")?;
        let mut done = 0;
        while done < params.steps {
            let chunk = params.snapshot_stride.min(params.steps - done);
            current = evolve(&current, params.dt, chunk)?;
            done += chunk;
            snapshot(&current, &format!("snapshot_{done:06}.csv"))?;
        }
    } else {
        current = evolve(&current, params.dt, params.steps)?;
    }
    snapshot(&current, "snapshot_final.csv")?;

    Ok(json!({
        "norm_initial": norm_initial,
        "norm_final": current.norm(),
        "norm_drift": (current.norm() - norm_initial).abs(),
        "width_initial": width_initial,
        "width_final": current.width(),
        "centroid_final": current.centroid(),
        "time_final": current.time(),
        "hbar_eff": current.hbar_eff(),
    }))
}

fn run_check(config: &ExperimentConfig, out_dir: &Path) -> Result<i32, CliFailure> {
    let params: &CheckParams = config.check.as_ref().expect("block checked");
    let names: Vec<&str> = if params.suite.len() == 1 && params.suite[0] == "all" {
        checks::CHECK_NAMES.to_vec()
    } else {
        params.suite.iter().map(String::as_str).collect()
    };

    let mut outcomes: Vec<CheckOutcome> = Vec::with_capacity(names.len());
    for name in names {
        let outcome = if name == "deviation_integrator" {
            match &params.deviation_steps_per_period {
                Some(ladder) => {
                    let reference = ladder.iter().copied().fold(f64::MIN, f64::max);
                    checks::deviation_integrator_check_with(ladder, reference)?
                }
                None => checks::run_named(name, config.seed)?,
            }
        } else {
            checks::run_named(name, config.seed)?
        };
        println!("{}", outcome.summary_line());
        outcomes.push(outcome);
    }

    let report = json!({ "config": config, "criteria": outcomes });
    write_text(
        out_dir,
        "check_report.json",
        &serde_json::to_string_pretty(&report)?,
    )?;
    println!("wrote {}", out_dir.join("check_report.json").display());

    Ok(if outcomes.iter().all(|o| o.passed) {
        0
    } else {
        4
    })
}
