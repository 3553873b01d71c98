use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Vector3;
use num_complex::Complex64;

use super::{Direction, FarField, PolarizedField, SampledPattern};
use crate::error::{Error, Result};

/// Element positions (meters) and the operating wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    positions: Vec<Vector3<f64>>,
    wavelength: f64,
}

impl ArrayGeometry {
    pub fn new(positions: Vec<Vector3<f64>>, wavelength: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::invalid("array needs at least one element"));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::invalid(format!("wavelength must be positive, got {wavelength}")));
        }
        if positions.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::invalid("element positions must be finite"));
        }
        Ok(ArrayGeometry { positions, wavelength })
    }

    /// `m` elements spaced `spacing` meters apart along y, centered on the
    /// origin.
    pub fn uniform_linear(m: usize, spacing: f64, wavelength: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing >= 0.0) {
            return Err(Error::invalid(format!("spacing must be >= 0, got {spacing}")));
        }
        let center = (m as f64 - 1.0) / 2.0;
        let positions = (0..m)
            .map(|i| Vector3::new(0.0, (i as f64 - center) * spacing, 0.0))
            .collect();
        Self::new(positions, wavelength)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    fn position(&self, index: usize) -> Result<Vector3<f64>> {
        self.positions.get(index).copied().ok_or_else(|| {
            Error::invalid(format!(
                "element index {index} out of range for {} elements",
                self.len()
            ))
        })
    }

    /// Coupling-free element patterns of the pattern-multiplication model:
    /// the shared isolated pattern displaced to each element position.
    pub fn displaced_patterns(&self, iep: &ElementPattern) -> Vec<ElementPattern> {
        let base = Arc::new(iep.clone());
        let k = self.wavenumber();
        self.positions
            .iter()
            .map(|r| ElementPattern::Displaced {
                base: Arc::clone(&base),
                offset: *r,
                wavenumber: k,
            })
            .collect()
    }
}

/// One element's far-field pattern.
#[derive(Debug, Clone)]
pub enum ElementPattern {
    /// Unit-magnitude θ-polarized radiator with its phase center displaced.
    Isotropic {
        phase_center: Vector3<f64>,
        wavenumber: f64,
    },
    /// Short dipole along `axis`: magnitude sin(angle to axis), polarized
    /// along the transverse projection of the axis.
    HertzianDipole {
        phase_center: Vector3<f64>,
        wavenumber: f64,
        axis: Vector3<f64>,
    },
    /// Measured or simulated lattice, already referenced to the array origin.
    Sampled(Arc<SampledPattern>),
    /// `exp(j k r·u) · base(u)`.
    Displaced {
        base: Arc<ElementPattern>,
        offset: Vector3<f64>,
        wavenumber: f64,
    },
}

fn phase_factor(center: &Vector3<f64>, k: f64, u: &Vector3<f64>) -> Complex64 {
    Complex64::from_polar(1.0, k * center.dot(u))
}

impl FarField for ElementPattern {
    fn field(&self, dir: &Direction) -> Result<PolarizedField> {
        match self {
            ElementPattern::Isotropic {
                phase_center,
                wavenumber,
            } => Ok(PolarizedField::scalar(phase_factor(
                phase_center,
                *wavenumber,
                &dir.unit_vector(),
            ))),
            ElementPattern::HertzianDipole {
                phase_center,
                wavenumber,
                axis,
            } => {
                let phase = phase_factor(phase_center, *wavenumber, &dir.unit_vector());
                // Sign chosen so a z-directed dipole has e_theta = +sin(theta).
                let et = -axis.dot(&dir.theta_hat());
                let ep = -axis.dot(&dir.phi_hat());
                Ok(PolarizedField::new(phase * et, phase * ep))
            }
            ElementPattern::Sampled(s) => s.field(dir),
            ElementPattern::Displaced {
                base,
                offset,
                wavenumber,
            } => Ok(base.field(dir)? * phase_factor(offset, *wavenumber, &dir.unit_vector())),
        }
    }
}

/// Isotropic element `index` of the geometry: `f(u) = exp(j k r_i·u)`.
pub fn isotropic_eep(geometry: &ArrayGeometry, index: usize) -> Result<ElementPattern> {
    Ok(ElementPattern::Isotropic {
        phase_center: geometry.position(index)?,
        wavenumber: geometry.wavenumber(),
    })
}

/// Hertzian dipole element `index` oriented along the unit vector `axis`.
pub fn hertzian_dipole_eep(geometry: &ArrayGeometry, index: usize, axis: Vector3<f64>) -> Result<ElementPattern> {
    let norm = axis.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::invalid("dipole axis must be a nonzero vector"));
    }
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("dipole axis must have unit norm, got {norm}")));
    }
    Ok(ElementPattern::HertzianDipole {
        phase_center: geometry.position(index)?,
        wavenumber: geometry.wavenumber(),
        axis,
    })
}

/// `F(u) = Σ a_i f_i(u)`.
#[derive(Debug, Clone)]
pub struct ArrayPattern {
    excitation: Vec<Complex64>,
    elements: Vec<ElementPattern>,
}

impl ArrayPattern {
    pub fn excitation(&self) -> &[Complex64] {
        &self.excitation
    }

    pub fn elements(&self) -> &[ElementPattern] {
        &self.elements
    }

    /// The same element patterns driven by `scale · a`.
    pub fn scaled(&self, scale: Complex64) -> ArrayPattern {
        ArrayPattern {
            excitation: self.excitation.iter().map(|a| a * scale).collect(),
            elements: self.elements.clone(),
        }
    }
}

impl FarField for ArrayPattern {
    fn field(&self, dir: &Direction) -> Result<PolarizedField> {
        let mut total = PolarizedField::ZERO;
        for (a, f) in self.excitation.iter().zip(&self.elements) {
            total += f.field(dir)? * *a;
        }
        Ok(total)
    }
}

pub fn array_pattern(excitation: &[Complex64], patterns: &[ElementPattern]) -> Result<ArrayPattern> {
    if excitation.len() != patterns.len() {
        return Err(Error::invalid(format!(
            "excitation has {} entries but there are {} element patterns",
            excitation.len(),
            patterns.len()
        )));
    }
    Ok(ArrayPattern {
        excitation: excitation.to_vec(),
        elements: patterns.to_vec(),
    })
}

/// Pattern-multiplication model `F(u) = Σ a_i exp(j k r_i·u) f(u)` with one
/// shared isolated pattern `iep` centered on each element.
pub fn iep_array_pattern(
    excitation: &[Complex64],
    geometry: &ArrayGeometry,
    iep: &ElementPattern,
) -> Result<ArrayPattern> {
    if excitation.len() != geometry.len() {
        return Err(Error::invalid(format!(
            "excitation has {} entries but the geometry has {} elements",
            excitation.len(),
            geometry.len()
        )));
    }
    array_pattern(excitation, &geometry.displaced_patterns(iep))
}
