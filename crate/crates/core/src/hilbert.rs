//! Ray-space geometry of finite-dimensional complex states.
//!
//! The Hermitian inner product splits into a Riemannian part `G` and a
//! symplectic part `Omega` via `<psi1|psi2> = G - i*Omega`, taking the inner
//! product conjugate-linear in the first argument. Two-level states project
//! onto the Bloch sphere, and rays are compared with the Fubini-Study angle
//! `arccos(|<psi1|psi2>| / (|psi1| |psi2|))`.
//!
//! The symplectic part is exposed for state comparison only; no dynamics
//! in this crate is built on it.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for the normalization flag and the reconstruction identity.
pub const NORM_TOL: f64 = 1e-12;

/// A finite-dimensional complex state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexState {
    amplitudes: Vec<Complex64>,
}

impl ComplexState {
    /// Wrap an amplitude vector. Rejects the empty vector.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyInput("state amplitudes"));
        }
        Ok(Self { amplitudes })
    }

    /// Build a state from `(re, im)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(re, im)| Complex64::new(re, im))
                .collect(),
        )
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// True when `sum |amplitude|^2 = 1` within [`NORM_TOL`].
    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    /// Rescale to unit norm. Rejects the zero vector.
    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n > 0.0) {
            return Err(Error::ZeroVector);
        }
        for a in &mut self.amplitudes {
            *a /= n;
        }
        Ok(self)
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dimension() != other.dimension() {
            return Err(Error::DimensionMismatch(
                self.dimension(),
                other.dimension(),
            ));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// Real and imaginary structure of one Hermitian inner product value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerProductParts {
    /// Riemannian part: `(u1,u2) + (v1,v2)`.
    pub riemannian: f64,
    /// Symplectic part: `(v1,u2) - (u1,v2)`.
    pub symplectic: f64,
}

impl InnerProductParts {
    /// Reassemble the complex inner product `G - i*Omega`.
    pub fn reconstruct(&self) -> Complex64 {
        Complex64::new(self.riemannian, -self.symplectic)
    }
}

/// Split `<psi1|psi2>` into Riemannian and symplectic parts.
///
/// With states written `psi = u + i v`, the parts are
/// `G = (u1,u2) + (v1,v2)` and `Omega = (v1,u2) - (u1,v2)`, and
/// `G - i*Omega` equals the inner product conjugated in the first slot.
pub fn decompose_inner_product(
    psi1: &ComplexState,
    psi2: &ComplexState,
) -> Result<InnerProductParts> {
    if psi1.dimension() != psi2.dimension() {
        return Err(Error::DimensionMismatch(psi1.dimension(), psi2.dimension()));
    }
    let mut riemannian = 0.0;
    let mut symplectic = 0.0;
    for (a, b) in psi1.amplitudes.iter().zip(&psi2.amplitudes) {
        let (u1, v1) = (a.re, a.im);
        let (u2, v2) = (b.re, b.im);
        riemannian += u1 * u2 + v1 * v2;
        symplectic += v1 * u2 - u1 * v2;
    }
    Ok(InnerProductParts {
        riemannian,
        symplectic,
    })
}

/// Project a normalized two-level state onto the unit sphere.
///
/// Conventions: `(1, 0)` maps to the north pole `(0, 0, 1)`; the azimuth
/// is the relative phase of the second amplitude. The output is invariant
/// under a global phase.
pub fn bloch_project(psi: &ComplexState) -> Result<[f64; 3]> {
    if psi.dimension() != 2 {
        return Err(Error::DimensionMismatch(psi.dimension(), 2));
    }
    if !psi.is_normalized() {
        return Err(Error::NotNormalized(psi.norm_sqr()));
    }
    let a = psi.amplitudes[0];
    let b = psi.amplitudes[1];
    let cross = a.conj() * b;
    Ok([2.0 * cross.re, 2.0 * cross.im, a.norm_sqr() - b.norm_sqr()])
}

/// Geodesic angle between the rays of two nonzero states, in `[0, pi/2]`.
///
/// Symmetric, and zero exactly when the states agree up to complex scale.
pub fn fubini_study_distance(psi1: &ComplexState, psi2: &ComplexState) -> Result<f64> {
    let n1 = psi1.norm_sqr().sqrt();
    let n2 = psi2.norm_sqr().sqrt();
    if !(n1 > 0.0) || !(n2 > 0.0) {
        return Err(Error::ZeroVector);
    }
    let overlap = psi1.inner(psi2)?.norm() / (n1 * n2);
    Ok(overlap.clamp(0.0, 1.0).acos())
}
