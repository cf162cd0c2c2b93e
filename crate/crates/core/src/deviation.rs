//! Relative-interval dynamics in one background field.
//!
//! Integrates the second-order tidal system
//!
//! ```text
//! d^2 ell^i / dtau^2 = -sum R^i_{kmn} ell^m u^k u^n + f
//! ```
//!
//! with a fixed-step classical Runge-Kutta scheme. Stored curvature
//! components use the convention that a positive `R1010` is a restoring
//! force: with worldline velocity `(c, 0, 0, 0)` the driven component obeys
//! `ell'' + c^2 R1010 ell = 0` and oscillates at `omega = c * sqrt(R1010)`.
//! Each trajectory carries the accumulated phase `Phi = integral omega dtau`
//! and action `S = hbar * Phi`.

use std::io::Write;

use num_complex::Complex64;

use crate::ensemble::{CurvatureComponent, FieldSample};
use crate::error::{Error, Result};

/// Interval state at one proper time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeviationState {
    pub ell: [f64; 4],
    pub ell_rate: [f64; 4],
    pub tau: f64,
}

impl DeviationState {
    pub fn new(ell: [f64; 4], ell_rate: [f64; 4]) -> Self {
        Self {
            ell,
            ell_rate,
            tau: 0.0,
        }
    }

    fn is_finite(&self) -> bool {
        self.ell.iter().chain(&self.ell_rate).all(|v| v.is_finite())
    }
}

/// Accumulated action and phase of one field over a time span.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionPhase {
    pub action: f64,
    pub phase: f64,
}

/// Time series of the interval in one field, with its action and phase.
#[derive(Clone, Debug)]
pub struct DeviationTrajectory {
    pub field_index: u64,
    /// States at uniform steps, `samples[i].tau = i * dt`.
    pub samples: Vec<DeviationState>,
    pub action: f64,
    pub phase: f64,
    dt: f64,
}

impl DeviationTrajectory {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn final_state(&self) -> &DeviationState {
        self.samples
            .last()
            .expect("trajectory has at least the initial state")
    }

    pub fn action_phase(&self) -> ActionPhase {
        ActionPhase {
            action: self.action,
            phase: self.phase,
        }
    }
}

fn curvature_terms(sample: &FieldSample) -> Vec<CurvatureComponent> {
    match &sample.full_curvature {
        Some(components) => components.clone(),
        None => vec![CurvatureComponent {
            i: 1,
            k: 0,
            m: 1,
            n: 0,
            value: sample.curvature_r1010,
        }],
    }
}

fn acceleration(
    components: &[CurvatureComponent],
    f: f64,
    ell: &[f64; 4],
    velocity: &[f64; 4],
) -> [f64; 4] {
    let mut acc = [f; 4];
    for c in components {
        acc[c.i] -= c.value * ell[c.m] * velocity[c.k] * velocity[c.n];
    }
    acc
}

/// Integrate the deviation system over `[0, t_span]` with step near `dt`.
///
/// The requested step is adjusted to the nearest exact divisor of `t_span`
/// so samples sit on a uniform grid. The worldline velocity is held fixed
/// over the span. `hbar` converts the accumulated phase into an action.
pub fn integrate_deviation(
    sample: &FieldSample,
    initial: DeviationState,
    worldline_velocity: [f64; 4],
    t_span: f64,
    dt: f64,
    hbar: f64,
) -> Result<DeviationTrajectory> {
    if !(dt > 0.0) {
        return Err(Error::NonPositive {
            name: "dt",
            value: dt,
        });
    }
    if t_span < dt {
        return Err(Error::InvalidConfig(format!(
            "t_span {t_span} shorter than dt {dt}"
        )));
    }
    let n_steps = (t_span / dt).round().max(1.0) as usize;
    let h = t_span / n_steps as f64;

    let components = curvature_terms(sample);
    let f = sample.stochastic_f;
    let accel = |ell: &[f64; 4]| acceleration(&components, f, ell, &worldline_velocity);

    let mut samples = Vec::with_capacity(n_steps + 1);
    let mut state = DeviationState {
        tau: 0.0,
        ..initial
    };
    samples.push(state);

    for step in 0..n_steps {
        let (ell, rate) = (state.ell, state.ell_rate);

        let a1 = accel(&ell);
        let (ell2, rate2) = half_step(&ell, &rate, &rate, &a1, 0.5 * h);
        let a2 = accel(&ell2);
        let (ell3, rate3) = half_step(&ell, &rate, &rate2, &a2, 0.5 * h);
        let a3 = accel(&ell3);
        let (ell4, rate4) = half_step(&ell, &rate, &rate3, &a3, h);
        let a4 = accel(&ell4);

        let mut next = state;
        for i in 0..4 {
            next.ell[i] = ell[i] + h / 6.0 * (rate[i] + 2.0 * rate2[i] + 2.0 * rate3[i] + rate4[i]);
            next.ell_rate[i] = rate[i] + h / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
        }
        next.tau = (step + 1) as f64 * h;

        if !next.is_finite() {
            return Err(Error::Divergence { tau: next.tau });
        }
        samples.push(next);
        state = next;
    }

    let phase = sample.omega * t_span;
    Ok(DeviationTrajectory {
        field_index: sample.index_j,
        samples,
        action: hbar * phase,
        phase,
        dt: h,
    })
}

fn half_step(
    ell: &[f64; 4],
    rate: &[f64; 4],
    k_rate: &[f64; 4],
    k_acc: &[f64; 4],
    h: f64,
) -> ([f64; 4], [f64; 4]) {
    let mut e = [0.0; 4];
    let mut r = [0.0; 4];
    for i in 0..4 {
        e[i] = ell[i] + h * k_rate[i];
        r[i] = rate[i] + h * k_acc[i];
    }
    (e, r)
}

/// Closed-form solution of `ell'' + omega^2 ell = 0` with the free-motion
/// limit at `omega = 0`.
pub fn oscillator_closed_form(ell0: f64, v0: f64, omega: f64, t: f64) -> f64 {
    if omega > 0.0 {
        ell0 * (omega * t).cos() + v0 / omega * (omega * t).sin()
    } else {
        ell0 + v0 * t
    }
}

/// Residual of the oscillatory exponential ansatz at one event.
///
/// Evaluates `ell(x, t) = exp(k . x_spatial) * exp(i omega t)`, applies the
/// analytic second time derivative, and returns
/// `|ell'' + c^2 R1010 ell| / |ell|`, which vanishes exactly when the
/// dispersion relation `omega^2 = c^2 R1010` holds. Slot 0 of `x` is the
/// time coordinate and does not enter; time enters through `t`.
pub fn exp_solution_residual(sample: &FieldSample, x: [f64; 4], t: f64, c: f64) -> f64 {
    let k = &sample.wave_covector;
    let growth = k[1] * x[1] + k[2] * x[2] + k[3] * x[3];
    let ell = growth.exp() * Complex64::from_polar(1.0, sample.omega * t);
    let ddot = -sample.omega * sample.omega * ell;
    (ddot + c * c * sample.curvature_r1010 * ell).norm() / ell.norm()
}

/// Action and phase of one field: `Phi = omega * t_span`, `S = hbar * Phi`.
pub fn accumulate_action(sample: &FieldSample, hbar: f64, t_span: f64) -> Result<ActionPhase> {
    if !(t_span > 0.0) {
        return Err(Error::NonPositive {
            name: "t_span",
            value: t_span,
        });
    }
    let phase = sample.omega * t_span;
    Ok(ActionPhase {
        action: hbar * phase,
        phase,
    })
}

/// Midpoint-rule phase for a time-dependent frequency profile.
pub fn accumulate_action_profile(
    omega: impl Fn(f64) -> f64,
    hbar: f64,
    t_span: f64,
    steps: usize,
) -> Result<ActionPhase> {
    if !(t_span > 0.0) {
        return Err(Error::NonPositive {
            name: "t_span",
            value: t_span,
        });
    }
    if steps == 0 {
        return Err(Error::InvalidConfig(
            "midpoint rule needs at least one step".into(),
        ));
    }
    let h = t_span / steps as f64;
    let phase: f64 = (0..steps).map(|i| omega((i as f64 + 0.5) * h) * h).sum();
    Ok(ActionPhase {
        action: hbar * phase,
        phase,
    })
}

/// Sum per-field actions with compensated (Neumaier) accumulation.
pub fn total_action(actions: &[f64]) -> Result<f64> {
    if actions.is_empty() {
        return Err(Error::EmptyInput("actions"));
    }
    let mut sum = 0.0;
    let mut compensation = 0.0;
    for &x in actions {
        let t = sum + x;
        compensation += if sum.abs() >= x.abs() {
            (sum - t) + x
        } else {
            (x - t) + sum
        };
        sum = t;
    }
    Ok(sum + compensation)
}

/// Plane-wave action cross-check `S = p . x` for a user-supplied momentum.
pub fn momentum_action(momentum: &[f64; 4], displacement: &[f64; 4]) -> f64 {
    momentum.iter().zip(displacement).map(|(p, x)| p * x).sum()
}

/// Write a trajectory as CSV with columns
/// `tau,ell0,ell1,ell2,ell3,rate0,rate1,rate2,rate3`.
pub fn write_trajectory_csv<W: Write>(
    out: &mut W,
    traj: &DeviationTrajectory,
) -> std::io::Result<()> {
    writeln!(out, "tau,ell0,ell1,ell2,ell3,rate0,rate1,rate2,rate3")?;
    for s in &traj.samples {
        write!(out, "{}", s.tau)?;
        for v in &s.ell {
            write!(out, ",{v}")?;
        }
        for v in &s.ell_rate {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn flat_sample(f: f64) -> FieldSample {
        let mut s = FieldSample::from_curvature(1, 0.0, 0.0, 1.0).unwrap();
        s.stochastic_f = f;
        s
    }

    fn oscillator_sample(omega: f64, c: f64) -> FieldSample {
        FieldSample::from_curvature(1, (omega / c).powi(2), 0.0, c).unwrap()
    }

    #[test]
    fn force_free_motion_is_linear() {
        let initial = DeviationState::new([0.0, 2.0, 0.0, 0.0], [0.0, 0.5, 0.0, 0.0]);
        let traj = integrate_deviation(
            &flat_sample(0.0),
            initial,
            [1.0, 0.0, 0.0, 0.0],
            10.0,
            0.01,
            1.0,
        )
        .unwrap();
        for s in &traj.samples {
            let expect = 2.0 + 0.5 * s.tau;
            assert!(
                (s.ell[1] - expect).abs() < 1e-12,
                "tau {} err {}",
                s.tau,
                s.ell[1] - expect
            );
            assert!(s.ell[0].abs() < 1e-12 && s.ell[2].abs() < 1e-12);
        }
    }

    #[test]
    fn oscillator_matches_closed_form_over_ten_periods() {
        let omega = 1.0;
        let period = TAU / omega;
        let (ell0, v0) = (1.0, 0.5);
        let sample = oscillator_sample(omega, 1.0);
        let initial = DeviationState::new([0.0, ell0, 0.0, 0.0], [0.0, v0, 0.0, 0.0]);
        let traj = integrate_deviation(
            &sample,
            initial,
            [1.0, 0.0, 0.0, 0.0],
            10.0 * period,
            period / 1000.0,
            1.0,
        )
        .unwrap();
        let amplitude = (ell0 * ell0 + (v0 / omega) * (v0 / omega)).sqrt();
        let max_err = traj
            .samples
            .iter()
            .map(|s| (s.ell[1] - oscillator_closed_form(ell0, v0, omega, s.tau)).abs())
            .fold(0.0, f64::max);
        assert!(
            max_err / amplitude < 1e-6,
            "relative error {}",
            max_err / amplitude
        );
    }

    #[test]
    fn constant_forcing_quadratic() {
        let f = 0.75;
        let (ell0, v0) = (1.0, 2.0);
        let initial = DeviationState::new([0.0, ell0, 0.0, 0.0], [0.0, v0, 0.0, 0.0]);
        let traj = integrate_deviation(
            &flat_sample(f),
            initial,
            [1.0, 0.0, 0.0, 0.0],
            4.0,
            0.01,
            1.0,
        )
        .unwrap();
        for s in &traj.samples {
            let expect = ell0 + v0 * s.tau + 0.5 * f * s.tau * s.tau;
            assert!((s.ell[1] - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let omega = 1.0;
        let period = TAU / omega;
        let sample = oscillator_sample(omega, 1.0);
        let initial = DeviationState::new([0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]);
        let errors: Vec<f64> = [250.0, 500.0, 1000.0, 2000.0]
            .iter()
            .map(|&steps_per_period| {
                let traj = integrate_deviation(
                    &sample,
                    initial,
                    [1.0, 0.0, 0.0, 0.0],
                    10.0 * period,
                    period / steps_per_period,
                    1.0,
                )
                .unwrap();
                traj.samples
                    .iter()
                    .map(|s| (s.ell[1] - oscillator_closed_form(1.0, 0.0, omega, s.tau)).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        for pair in errors.windows(2) {
            let order = (pair[0] / pair[1]).log2();
            assert!(
                (order - 4.0).abs() < 0.2,
                "order {order}, errors {errors:?}"
            );
        }
    }

    #[test]
    fn oscillator_energy_drift_is_small() {
        let omega = 2.0;
        let period = TAU / omega;
        let sample = oscillator_sample(omega, 1.0);
        let initial = DeviationState::new([0.0, 1.0, 0.0, 0.0], [0.0, 0.3, 0.0, 0.0]);
        let traj = integrate_deviation(
            &sample,
            initial,
            [1.0, 0.0, 0.0, 0.0],
            10.0 * period,
            period / 1000.0,
            1.0,
        )
        .unwrap();
        let energy = |s: &DeviationState| {
            0.5 * s.ell_rate[1] * s.ell_rate[1] + 0.5 * omega * omega * s.ell[1] * s.ell[1]
        };
        let e0 = energy(&traj.samples[0]);
        let drift = traj
            .samples
            .iter()
            .map(|s| (energy(s) - e0).abs() / e0)
            .fold(0.0, f64::max);
        assert!(drift < 1e-6, "energy drift {drift}");
    }

    #[test]
    fn divergence_is_reported_with_tau() {
        // anti-restoring component: exponential growth overflows
        let mut sample = flat_sample(0.0);
        sample.full_curvature = Some(vec![CurvatureComponent {
            i: 1,
            k: 0,
            m: 1,
            n: 0,
            value: -100.0,
        }]);
        let initial = DeviationState::new([0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]);
        let err = integrate_deviation(&sample, initial, [1.0, 0.0, 0.0, 0.0], 200.0, 0.05, 1.0)
            .unwrap_err();
        match err {
            Error::Divergence { tau } => assert!(tau > 0.0 && tau <= 200.0),
            other => panic!("expected divergence, got {other}"),
        }
    }

    #[test]
    fn closed_form_values() {
        assert!((oscillator_closed_form(1.0, 0.0, 2.0, PI) - 1.0).abs() < 1e-12);
        assert_eq!(oscillator_closed_form(1.0, 2.0, 0.0, 3.0), 7.0);
    }

    #[test]
    fn closed_form_free_limit_is_continuous() {
        let (ell0, v0, t) = (1.0, 2.0, 3.0);
        let tiny = oscillator_closed_form(ell0, v0, 1e-6, t);
        let free = oscillator_closed_form(ell0, v0, 0.0, t);
        assert!((tiny - free).abs() < 1e-8, "gap {}", tiny - free);
    }

    #[test]
    fn dispersion_residual_values() {
        // matched: omega = 2, c^2 R = 4
        let matched = oscillator_sample(2.0, 1.0);
        assert!(exp_solution_residual(&matched, [0.0, 0.1, 0.2, 0.3], 0.7, 1.0) < 1e-12);

        // mismatched: omega = 1, c^2 R = 4 -> |-1 + 4| = 3
        let mut off = oscillator_sample(2.0, 1.0);
        off.omega = 1.0;
        off.wave_covector = [1.0, 0.5, 0.0, 0.0];
        let r = exp_solution_residual(&off, [0.0, 0.4, 0.0, 0.0], 1.3, 1.0);
        assert!((r - 3.0).abs() < 1e-12, "residual {r}");
    }

    #[test]
    fn dispersion_residual_random_matched_samples() {
        let mut stream = crate::rng::Stream::labeled(7, "dispersion");
        for j in 0..100 {
            let c = 0.5 + 2.0 * stream.next_f64();
            let omega = 3.0 * stream.next_f64();
            let sample = FieldSample::from_curvature(j, (omega / c).powi(2), 0.0, c).unwrap();
            let x = [
                0.0,
                stream.next_normal(),
                stream.next_normal(),
                stream.next_normal(),
            ];
            let t = 2.0 * stream.next_f64();
            assert!(exp_solution_residual(&sample, x, t, c) < 1e-12);
        }
    }

    #[test]
    fn action_phase_consistency() {
        let sample = oscillator_sample(2.0, 1.0);
        let ap = accumulate_action(&sample, 3.0, PI).unwrap();
        assert!((ap.phase - TAU).abs() < 1e-12);
        assert!((ap.action - 3.0 * TAU).abs() < 1e-12);

        let zero = flat_sample(0.0);
        let ap = accumulate_action(&zero, 1.0, 5.0).unwrap();
        assert_eq!(ap.phase, 0.0);
        assert_eq!(ap.action, 0.0);

        assert!(accumulate_action(&sample, 1.0, 0.0).is_err());
    }

    #[test]
    fn trajectory_phase_action_invariant() {
        let sample = oscillator_sample(1.5, 1.0);
        let hbar = 0.7;
        let initial = DeviationState::new([0.0, 1.0, 0.0, 0.0], [0.0; 4]);
        let traj =
            integrate_deviation(&sample, initial, [1.0, 0.0, 0.0, 0.0], 3.0, 0.01, hbar).unwrap();
        assert!((traj.phase * hbar - traj.action).abs() <= 1e-9 * traj.action.abs());
    }

    #[test]
    fn midpoint_rule_converges_quadratically() {
        // omega(t) = 1 + sin(t) on [0, 2]: integral = 3 - cos(2)
        let omega = |t: f64| 1.0 + t.sin();
        let exact = 3.0 - 2.0f64.cos();
        let coarse = accumulate_action_profile(omega, 1.0, 2.0, 50)
            .unwrap()
            .phase;
        let fine = accumulate_action_profile(omega, 1.0, 2.0, 100)
            .unwrap()
            .phase;
        let ratio = (coarse - exact).abs() / (fine - exact).abs();
        assert!((ratio - 4.0).abs() < 0.3, "midpoint ratio {ratio}");
        assert!((fine - exact).abs() < 1e-4);
    }

    #[test]
    fn total_action_matches_pairwise_oracle() {
        // oracle: recursive pairwise summation
        fn pairwise(xs: &[f64]) -> f64 {
            match xs.len() {
                0 => 0.0,
                1 => xs[0],
                n => pairwise(&xs[..n / 2]) + pairwise(&xs[n / 2..]),
            }
        }
        let mut stream = crate::rng::Stream::labeled(11, "total-action");
        let values: Vec<f64> = (0..50_000).map(|_| stream.next_normal() * 1e3).collect();
        let expect = pairwise(&values);
        let got = total_action(&values).unwrap();
        assert!(
            (got - expect).abs() <= 1e-12 * expect.abs().max(1.0),
            "{got} vs {expect}"
        );

        assert_eq!(total_action(&[1.0, 2.0]).unwrap(), 3.0);
        assert_eq!(total_action(&[4.25]).unwrap(), 4.25);
        assert!(total_action(&[]).is_err());
    }

    #[test]
    fn momentum_cross_check_matches_constant_omega_case() {
        // plane wave with p = (hbar omega / c, 0, 0, 0) over x = (c t, 0, 0, 0)
        let (hbar, omega, c, t) = (1.0, 2.0, 3.0, 1.5);
        let p = [hbar * omega / c, 0.0, 0.0, 0.0];
        let x = [c * t, 0.0, 0.0, 0.0];
        let sample = oscillator_sample(omega, c);
        let via_phase = accumulate_action(&sample, hbar, t).unwrap().action;
        assert!((momentum_action(&p, &x) - via_phase).abs() < 1e-12);
    }

    #[test]
    fn csv_export_shape() {
        let initial = DeviationState::new([0.0, 1.0, 0.0, 0.0], [0.0; 4]);
        let traj = integrate_deviation(
            &flat_sample(0.0),
            initial,
            [1.0, 0.0, 0.0, 0.0],
            1.0,
            0.5,
            1.0,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "tau,ell0,ell1,ell2,ell3,rate0,rate1,rate2,rate3"
        );
        assert_eq!(lines.count(), traj.samples.len());
    }
}
