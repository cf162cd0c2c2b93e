//! Closed-form reference solutions used to cross-check simulated routes.
//!
//! These stay independent of the numerical paths they validate: the lattice
//! propagator is checked against [`harmonic_kernel`], packet spreading
//! against [`free_packet_width`].

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Closed-form harmonic-oscillator propagator (Mehler kernel),
/// `sqrt(m w / (2 pi i hbar sin wT)) *
///  exp(i m w ((xa^2 + xb^2) cos wT - 2 xa xb) / (2 hbar sin wT))`,
/// valid before the first caustic (`0 < wT < pi`).
pub fn harmonic_kernel(
    m: f64,
    omega: f64,
    t: f64,
    xa: f64,
    xb: f64,
    hbar: f64,
) -> Result<Complex64> {
    for (name, value) in [("mass", m), ("omega", omega), ("t_span", t), ("hbar", hbar)] {
        if !(value > 0.0) {
            return Err(Error::NonPositive { name, value });
        }
    }
    let wt = omega * t;
    if wt >= std::f64::consts::PI {
        return Err(Error::InvalidConfig(format!(
            "harmonic kernel requested past the first caustic: omega*t = {wt}"
        )));
    }
    let sin_wt = wt.sin();
    let magnitude = (m * omega / (2.0 * std::f64::consts::PI * hbar * sin_wt)).sqrt();
    let phase = m * omega * ((xa * xa + xb * xb) * wt.cos() - 2.0 * xa * xb)
        / (2.0 * hbar * sin_wt)
        - std::f64::consts::FRAC_PI_4;
    Ok(magnitude * Complex64::from_polar(1.0, phase))
}

/// Width of a freely spreading Gaussian packet:
/// `sigma0 * sqrt(1 + (hbar_eff t / (2 m sigma0^2))^2)`.
pub fn free_packet_width(sigma0: f64, t: f64, mass: f64, hbar_eff: f64) -> f64 {
    let spread = hbar_eff * t / (2.0 * mass * sigma0 * sigma0);
    sigma0 * (1.0 + spread * spread).sqrt()
}
