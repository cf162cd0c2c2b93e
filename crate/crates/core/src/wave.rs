//! Complex field on a 1D grid evolving under
//! `i (2 S0) dpsi/dt = -(4 S0^2 / 2m) lap psi + U psi`.
//!
//! The effective quantum of action is `2 S0`; setting `2 S0 = hbar`
//! reproduces standard wave mechanics through the identical code path.
//! Time stepping uses the trapezoidal (Cayley) form of the generator,
//! which conserves the norm exactly for Hermitian generators, with either
//! periodic boundaries (cyclic tridiagonal solve) or absorbing boundaries
//! (Dirichlet ends plus a negative imaginary ramp).
//!
//! The amplitude/action split `psi = a exp(i S / (2 S0))` is available in
//! both directions, with grid-continuous phase unwrapping, alongside the
//! Hamilton-Jacobi and continuity residual operators used to measure how
//! far an evolved field is from the classical transport pair.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Amplitudes below this threshold leave the phase undefined for
/// unwrapping purposes.
pub const UNWRAP_AMPLITUDE_FLOOR: f64 = 1e-8;

/// Boundary treatment for time evolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Boundary {
    Periodic,
    /// Dirichlet ends with a quadratic negative-imaginary ramp over
    /// `width` cells on each side.
    Absorbing {
        width: usize,
        strength: f64,
    },
}

/// Complex amplitudes on a uniform grid with the physical parameters of
/// their evolution.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveField {
    amplitudes: Vec<Complex64>,
    x_min: f64,
    dx: f64,
    mass: f64,
    action_scale: f64,
    potential: Vec<f64>,
    time: f64,
    boundary: Boundary,
}

/// Amplitude and continuous action representative of a field.
#[derive(Clone, Debug, PartialEq)]
pub struct MadelungFields {
    pub amplitude: Vec<f64>,
    pub action: Vec<f64>,
}

impl WaveField {
    pub fn new(
        amplitudes: Vec<Complex64>,
        x_min: f64,
        dx: f64,
        mass: f64,
        action_scale: f64,
        potential: Vec<f64>,
        boundary: Boundary,
    ) -> Result<Self> {
        if amplitudes.len() < 8 {
            return Err(Error::InvalidConfig(format!(
                "grid needs at least 8 points, got {}",
                amplitudes.len()
            )));
        }
        if potential.len() != amplitudes.len() {
            return Err(Error::DimensionMismatch(potential.len(), amplitudes.len()));
        }
        for (name, value) in [("dx", dx), ("mass", mass), ("action_scale", action_scale)] {
            if !(value > 0.0) {
                return Err(Error::NonPositive { name, value });
            }
        }
        let field = Self {
            amplitudes,
            x_min,
            dx,
            mass,
            action_scale,
            potential,
            time: 0.0,
            boundary,
        };
        if !field.norm().is_finite() {
            return Err(Error::InvalidConfig("non-finite amplitudes".into()));
        }
        Ok(field)
    }

    /// Assemble `psi = a exp(i S / (2 S0))` from amplitude and action fields.
    #[allow(clippy::too_many_arguments)]
    pub fn from_madelung(
        amplitude: &[f64],
        action: &[f64],
        x_min: f64,
        dx: f64,
        mass: f64,
        action_scale: f64,
        potential: Vec<f64>,
        boundary: Boundary,
    ) -> Result<Self> {
        let psi = geometric_wavefunction(amplitude, action, action_scale)?;
        Self::new(psi, x_min, dx, mass, action_scale, potential, boundary)
    }

    /// Standard wave-mechanics parameterization: stores `S0 = hbar / 2` so
    /// the evolution reduces to the usual equation through the same path.
    #[allow(clippy::too_many_arguments)]
    pub fn with_hbar(
        amplitudes: Vec<Complex64>,
        x_min: f64,
        dx: f64,
        mass: f64,
        hbar: f64,
        potential: Vec<f64>,
        boundary: Boundary,
    ) -> Result<Self> {
        Self::new(amplitudes, x_min, dx, mass, 0.5 * hbar, potential, boundary)
    }

    /// Normalized Gaussian packet `exp(-(x-x0)^2/(4 sigma^2) + i k0 x)`.
    #[allow(clippy::too_many_arguments)]
    pub fn gaussian_packet(
        n: usize,
        x_min: f64,
        dx: f64,
        x0: f64,
        sigma: f64,
        k0: f64,
        mass: f64,
        action_scale: f64,
        potential: Vec<f64>,
        boundary: Boundary,
    ) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::NonPositive {
                name: "sigma",
                value: sigma,
            });
        }
        let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
        let amplitudes = (0..n)
            .map(|i| {
                let x = x_min + i as f64 * dx;
                let envelope = norm * (-(x - x0) * (x - x0) / (4.0 * sigma * sigma)).exp();
                envelope * Complex64::from_polar(1.0, k0 * x)
            })
            .collect();
        Self::new(
            amplitudes,
            x_min,
            dx,
            mass,
            action_scale,
            potential,
            boundary,
        )
    }

    /// Unit-norm plane wave `exp(i k x) / sqrt(L)` with `k = 2 pi mode / L`;
    /// commensurate with a periodic grid of length `n * dx`.
    #[allow(clippy::too_many_arguments)]
    pub fn plane_wave(
        n: usize,
        x_min: f64,
        dx: f64,
        mode: i32,
        mass: f64,
        action_scale: f64,
        potential: Vec<f64>,
        boundary: Boundary,
    ) -> Result<Self> {
        let length = n as f64 * dx;
        let k = std::f64::consts::TAU * f64::from(mode) / length;
        let scale = 1.0 / length.sqrt();
        let amplitudes = (0..n)
            .map(|i| scale * Complex64::from_polar(1.0, k * (x_min + i as f64 * dx)))
            .collect();
        Self::new(
            amplitudes,
            x_min,
            dx,
            mass,
            action_scale,
            potential,
            boundary,
        )
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn action_scale(&self) -> f64 {
        self.action_scale
    }

    /// Effective quantum of action `2 S0`.
    pub fn hbar_eff(&self) -> f64 {
        2.0 * self.action_scale
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// `sum |psi|^2 dx`.
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.dx
    }

    pub fn probability_density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Probability-weighted mean position.
    pub fn centroid(&self) -> f64 {
        let weight: f64 = self.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let moment: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * self.x(i))
            .sum();
        moment / weight
    }

    /// Probability-weighted standard deviation of position.
    pub fn width(&self) -> f64 {
        let c = self.centroid();
        let weight: f64 = self.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let moment: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * (self.x(i) - c) * (self.x(i) - c))
            .sum();
        (moment / weight).sqrt()
    }
}

/// Pointwise `psi = a exp(i S / (2 S0))`.
pub fn geometric_wavefunction(
    amplitude: &[f64],
    action: &[f64],
    action_scale: f64,
) -> Result<Vec<Complex64>> {
    if amplitude.len() != action.len() {
        return Err(Error::DimensionMismatch(amplitude.len(), action.len()));
    }
    if !(action_scale > 0.0) {
        return Err(Error::NonPositive {
            name: "action_scale",
            value: action_scale,
        });
    }
    let hbar_eff = 2.0 * action_scale;
    amplitude
        .iter()
        .zip(action)
        .map(|(&a, &s)| {
            if a < 0.0 {
                return Err(Error::Negative {
                    name: "amplitude",
                    value: a,
                });
            }
            Ok(a * Complex64::from_polar(1.0, s / hbar_eff))
        })
        .collect()
}

/// Split a field into amplitude and grid-continuous action.
///
/// The phase is unwrapped left to right, folding jumps above pi back by
/// full turns; the action is `2 S0` times the unwrapped phase. Fails if
/// the amplitude drops below [`UNWRAP_AMPLITUDE_FLOOR`] anywhere on the
/// path, since the phase is undefined at a node.
pub fn madelung_decompose(field: &WaveField) -> Result<MadelungFields> {
    let hbar_eff = field.hbar_eff();
    let n = field.len();
    let mut amplitude = Vec::with_capacity(n);
    let mut action = Vec::with_capacity(n);

    let mut previous_raw = 0.0;
    let mut unwrapped = 0.0;
    for (i, psi) in field.amplitudes.iter().enumerate() {
        let a = psi.norm();
        if a <= UNWRAP_AMPLITUDE_FLOOR {
            return Err(Error::UnwrapFailure {
                index: i,
                amplitude: a,
            });
        }
        let raw = psi.arg();
        if i == 0 {
            unwrapped = raw;
        } else {
            let mut step = raw - previous_raw;
            step -= std::f64::consts::TAU * (step / std::f64::consts::TAU).round();
            unwrapped += step;
        }
        previous_raw = raw;
        amplitude.push(a);
        action.push(hbar_eff * unwrapped);
    }
    Ok(MadelungFields { amplitude, action })
}

/// First derivative on a uniform grid: central interior, second-order
/// one-sided at the ends.
pub fn gradient(field: &[f64], dx: f64) -> Vec<f64> {
    let n = field.len();
    let mut out = vec![0.0; n];
    if n < 3 {
        return out;
    }
    out[0] = (-3.0 * field[0] + 4.0 * field[1] - field[2]) / (2.0 * dx);
    for i in 1..n - 1 {
        out[i] = (field[i + 1] - field[i - 1]) / (2.0 * dx);
    }
    out[n - 1] = (3.0 * field[n - 1] - 4.0 * field[n - 2] + field[n - 3]) / (2.0 * dx);
    out
}

/// Second derivative on a uniform grid: central interior, second-order
/// one-sided at the ends.
pub fn second_derivative(field: &[f64], dx: f64) -> Vec<f64> {
    let n = field.len();
    let mut out = vec![0.0; n];
    if n < 4 {
        return out;
    }
    let dx2 = dx * dx;
    out[0] = (2.0 * field[0] - 5.0 * field[1] + 4.0 * field[2] - field[3]) / dx2;
    for i in 1..n - 1 {
        out[i] = (field[i - 1] - 2.0 * field[i] + field[i + 1]) / dx2;
    }
    out[n - 1] =
        (2.0 * field[n - 1] - 5.0 * field[n - 2] + 4.0 * field[n - 3] - field[n - 4]) / dx2;
    out
}

/// Pointwise residual of `dS/dt + (grad S)^2 / 2m + U`.
pub fn hamilton_jacobi_residual(
    action: &[f64],
    potential: &[f64],
    mass: f64,
    ds_dt: &[f64],
    dx: f64,
) -> Vec<f64> {
    let grad = gradient(action, dx);
    (0..action.len())
        .map(|i| ds_dt[i] + grad[i] * grad[i] / (2.0 * mass) + potential[i])
        .collect()
}

/// Pointwise residual of `d(a^2)/dt + d/dx (a^2 grad S / m)`.
pub fn continuity_residual(
    a_squared: &[f64],
    action: &[f64],
    mass: f64,
    da2_dt: &[f64],
    dx: f64,
) -> Vec<f64> {
    let grad_s = gradient(action, dx);
    let flux: Vec<f64> = (0..a_squared.len())
        .map(|i| a_squared[i] * grad_s[i] / mass)
        .collect();
    let div = gradient(&flux, dx);
    (0..a_squared.len()).map(|i| da2_dt[i] + div[i]).collect()
}

/// The term `-(2 S0)^2 / (2m) * (lap a) / a`, pointwise.
///
/// Meaningful only where the amplitude is bounded away from zero.
pub fn quantum_potential(amplitude: &[f64], mass: f64, action_scale: f64, dx: f64) -> Vec<f64> {
    let hbar_eff = 2.0 * action_scale;
    let lap = second_derivative(amplitude, dx);
    amplitude
        .iter()
        .zip(&lap)
        .map(|(&a, &l)| -hbar_eff * hbar_eff / (2.0 * mass) * l / a)
        .collect()
}

/// Advance a field by `steps` trapezoidal steps of size `dt`.
///
/// Rejects configurations whose per-step potential or grid-scale kinetic
/// phase exceeds one half, before any stepping happens.
pub fn evolve(field: &WaveField, dt: f64, steps: usize) -> Result<WaveField> {
    if !(dt > 0.0) {
        return Err(Error::NonPositive {
            name: "dt",
            value: dt,
        });
    }
    let hbar_eff = field.hbar_eff();
    let mass = field.mass;
    let dx = field.dx;
    let k_max = std::f64::consts::PI / dx;
    let kinetic_bound = dt * hbar_eff * k_max * k_max / (2.0 * mass);
    if kinetic_bound >= 0.5 {
        return Err(Error::StabilityBound(format!(
            "dt * (2 S0) * k_max^2 / (2m) = {kinetic_bound:.3} must stay below 0.5"
        )));
    }
    let max_u = field.potential.iter().fold(0.0f64, |m, &u| m.max(u.abs()));
    let potential_bound = dt * max_u / hbar_eff;
    if potential_bound >= 0.5 {
        return Err(Error::StabilityBound(format!(
            "dt * max|U| / (2 S0) = {potential_bound:.3} must stay below 0.5"
        )));
    }

    let n = field.len();
    let lambda = dt / (2.0 * hbar_eff);
    let hop = -hbar_eff * hbar_eff / (2.0 * mass * dx * dx);
    // complex growth of the diagonal: U - i W with W the absorbing ramp
    let mut diag_h: Vec<Complex64> = field
        .potential
        .iter()
        .map(|&u| Complex64::new(-2.0 * hop + u, 0.0))
        .collect();
    if let Boundary::Absorbing { width, strength } = field.boundary {
        let width = width.min(n / 2);
        for j in 0..width {
            let ramp = (width - j) as f64 / width as f64;
            let w = strength * ramp * ramp;
            diag_h[j].im -= w;
            diag_h[n - 1 - j].im -= w;
        }
    }

    let i_unit = Complex64::i();
    let off_a = i_unit * lambda * hop;
    let diag_a: Vec<Complex64> = diag_h.iter().map(|&d| 1.0 + i_unit * lambda * d).collect();

    let mut psi = field.amplitudes.clone();
    let periodic = matches!(field.boundary, Boundary::Periodic);
    let mut rhs = vec![Complex64::ZERO; n];
    for _ in 0..steps {
        for i in 0..n {
            let left = if i > 0 {
                psi[i - 1]
            } else if periodic {
                psi[n - 1]
            } else {
                Complex64::ZERO
            };
            let right = if i + 1 < n {
                psi[i + 1]
            } else if periodic {
                psi[0]
            } else {
                Complex64::ZERO
            };
            let h_psi = hop * (left + right) + diag_h[i] * psi[i];
            rhs[i] = psi[i] - i_unit * lambda * h_psi;
        }
        psi = if periodic {
            solve_cyclic(&diag_a, off_a, &rhs)
        } else {
            solve_tridiagonal(&diag_a, off_a, &rhs)
        };
    }

    let mut out = field.clone();
    out.amplitudes = psi;
    out.time += dt * steps as f64;
    Ok(out)
}

/// Thomas algorithm for a tridiagonal system with constant off-diagonal.
fn solve_tridiagonal(diag: &[Complex64], off: Complex64, rhs: &[Complex64]) -> Vec<Complex64> {
    let n = diag.len();
    let mut c_prime = vec![Complex64::ZERO; n];
    let mut d_prime = vec![Complex64::ZERO; n];
    c_prime[0] = off / diag[0];
    d_prime[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - off * c_prime[i - 1];
        c_prime[i] = off / denom;
        d_prime[i] = (rhs[i] - off * d_prime[i - 1]) / denom;
    }
    let mut x = vec![Complex64::ZERO; n];
    x[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
    x
}

/// Cyclic tridiagonal solve via the Sherman-Morrison correction.
fn solve_cyclic(diag: &[Complex64], off: Complex64, rhs: &[Complex64]) -> Vec<Complex64> {
    let n = diag.len();
    let gamma = -diag[0];
    let mut modified = diag.to_vec();
    modified[0] = diag[0] - gamma;
    modified[n - 1] = diag[n - 1] - off * off / gamma;

    let mut x = solve_tridiagonal(&modified, off, rhs);
    let mut u = vec![Complex64::ZERO; n];
    u[0] = gamma;
    u[n - 1] = off;
    let z = solve_tridiagonal(&modified, off, &u);

    let factor = (x[0] + off * x[n - 1] / gamma)
        / (Complex64::new(1.0, 0.0) + z[0] + off * z[n - 1] / gamma);
    for i in 0..n {
        x[i] -= factor * z[i];
    }
    x
}

/// Write one snapshot as CSV with columns
/// `x,re_psi,im_psi,abs_psi_sq,action_s`. The action column holds `NaN`
/// when the phase cannot be unwrapped (a node on the grid).
pub fn write_snapshot_csv<W: Write>(out: &mut W, field: &WaveField) -> std::io::Result<()> {
    writeln!(out, "x,re_psi,im_psi,abs_psi_sq,action_s")?;
    let action = madelung_decompose(field).ok().map(|m| m.action);
    for (i, psi) in field.amplitudes().iter().enumerate() {
        let s = action.as_ref().map_or(f64::NAN, |a| a[i]);
        writeln!(
            out,
            "{},{},{},{},{}",
            field.x(i),
            psi.re,
            psi.im,
            psi.norm_sqr(),
            s
        )?;
    }
    Ok(())
}
