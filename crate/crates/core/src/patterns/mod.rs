//! Far-field patterns, sphere quadrature and directivity.
//!
//! Every pattern is phase-referenced to one global origin. Field values are
//! polarized: a pair of complex components along the spherical unit vectors
//! θ̂ and φ̂ at the evaluation direction.

mod element;
mod grid;
mod sampled;

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul};

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use element::{
    array_pattern, hertzian_dipole_eep, iep_array_pattern, isotropic_eep, ArrayGeometry, ArrayPattern, ElementPattern,
};
pub use grid::{gauss_legendre, make_sphere_grid, SphereGrid, DEFAULT_N_PHI, DEFAULT_N_THETA};
pub use sampled::{SampledPattern, EEP_CSV_HEADER};

/// Default azimuth sample count for planar cuts (0.1° resolution).
pub const DEFAULT_PLANAR_N_PHI: usize = 3600;

/// A direction on the unit sphere. `theta` is the zenith angle in `[0, π]`,
/// `phi` the azimuth normalized into `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::invalid("direction angles must be finite"));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::invalid(format!("theta {theta} outside [0, pi]")));
        }
        let mut phi = phi.rem_euclid(2.0 * PI);
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        Ok(Direction { theta, phi })
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Result<Self> {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians())
    }

    /// θ = 90°, φ = 270°: the −y axis, endfire for arrays laid out along y.
    pub fn endfire() -> Self {
        Direction {
            theta: PI / 2.0,
            phi: 1.5 * PI,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn unit_vector(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    pub fn theta_hat(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(ct * cp, ct * sp, -st)
    }

    pub fn phi_hat(&self) -> Vector3<f64> {
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(-sp, cp, 0.0)
    }
}

/// Complex far-field value in the (θ̂, φ̂) basis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolarizedField {
    pub e_theta: Complex64,
    pub e_phi: Complex64,
}

impl PolarizedField {
    pub const ZERO: PolarizedField = PolarizedField {
        e_theta: Complex64 { re: 0.0, im: 0.0 },
        e_phi: Complex64 { re: 0.0, im: 0.0 },
    };

    pub fn new(e_theta: Complex64, e_phi: Complex64) -> Self {
        PolarizedField { e_theta, e_phi }
    }

    pub fn scalar(e_theta: Complex64) -> Self {
        PolarizedField {
            e_theta,
            e_phi: Complex64::new(0.0, 0.0),
        }
    }

    /// `|e_theta|² + |e_phi|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.e_theta.norm_sqr() + self.e_phi.norm_sqr()
    }

    /// `f · gᴴ = e_θ,f conj(e_θ,g) + e_φ,f conj(e_φ,g)`.
    pub fn inner(&self, other: &PolarizedField) -> Complex64 {
        self.e_theta * other.e_theta.conj() + self.e_phi * other.e_phi.conj()
    }
}

impl Add for PolarizedField {
    type Output = PolarizedField;
    fn add(self, rhs: PolarizedField) -> PolarizedField {
        PolarizedField::new(self.e_theta + rhs.e_theta, self.e_phi + rhs.e_phi)
    }
}

impl AddAssign for PolarizedField {
    fn add_assign(&mut self, rhs: PolarizedField) {
        self.e_theta += rhs.e_theta;
        self.e_phi += rhs.e_phi;
    }
}

impl Mul<Complex64> for PolarizedField {
    type Output = PolarizedField;
    fn mul(self, rhs: Complex64) -> PolarizedField {
        PolarizedField::new(self.e_theta * rhs, self.e_phi * rhs)
    }
}

/// Anything that can be evaluated as a far-field pattern.
pub trait FarField {
    fn field(&self, dir: &Direction) -> Result<PolarizedField>;
}

impl<T: FarField + ?Sized> FarField for &T {
    fn field(&self, dir: &Direction) -> Result<PolarizedField> {
        (**self).field(dir)
    }
}

/// Full-sphere directivity `|F(u0)|² / ((1/4π) ∫ |F|² dΩ)`.
pub fn directivity_from_pattern<P: FarField + ?Sized>(pattern: &P, grid: &SphereGrid, u0: &Direction) -> Result<f64> {
    let mut total = 0.0;
    for (dir, w) in grid.nodes().iter().zip(grid.weights()) {
        total += w * pattern.field(dir)?.norm_sqr();
    }
    let mean = total / (4.0 * PI);
    if !(mean > 0.0) {
        return Err(Error::DegeneratePattern("pattern vanishes on every grid node".into()));
    }
    Ok(pattern.field(u0)?.norm_sqr() / mean)
}

/// Power `|F(θ0, φ_k)|²` on `n_phi` uniform azimuth samples starting at φ = 0.
pub fn planar_cut<P: FarField + ?Sized>(pattern: &P, theta0: f64, n_phi: usize) -> Result<Vec<(f64, f64)>> {
    if n_phi < 8 {
        return Err(Error::invalid(format!("planar cut needs n_phi >= 8, got {n_phi}")));
    }
    (0..n_phi)
        .map(|k| {
            let phi = 2.0 * PI * k as f64 / n_phi as f64;
            let dir = Direction::new(theta0, phi)?;
            Ok((phi, pattern.field(&dir)?.norm_sqr()))
        })
        .collect()
}

/// Planar directivity on the cone θ = θ0: peak cut power over its azimuthal
/// mean, the mean taken with the periodic trapezoid rule.
pub fn planar_directivity<P: FarField + ?Sized>(pattern: &P, theta0: f64, n_phi: usize) -> Result<f64> {
    let cut = planar_cut(pattern, theta0, n_phi)?;
    let peak = cut.iter().map(|&(_, p)| p).fold(0.0, f64::max);
    let mean = cut.iter().map(|&(_, p)| p).sum::<f64>() / n_phi as f64;
    if !(mean > 0.0) {
        return Err(Error::DegeneratePattern(format!("cut at theta = {theta0} vanishes")));
    }
    Ok(peak / mean)
}
