//! Beam coupling factor (BCF) matrices and steering vectors.
//!
//! `B` comes either from integrating element-pattern inner products over
//! the sphere or, for lossless arrays, from network parameters through
//! energy conservation. The absolute scale of `B` depends on the route
//! (pattern units versus generator-voltage units with η/4π factors). Every
//! quotient computed downstream is invariant to a common scale of `B` and
//! `|v0|²`, so only mixing sources calls for care.

mod network;
mod touchstone;

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{self, Pair};
use crate::linalg::{self, CMatrix, CVector};
use crate::patterns::{ArrayGeometry, Direction, ElementPattern, FarField, PolarizedField, SphereGrid};

pub use network::{bcf_from_generalized_s, bcf_from_s, bcf_from_z, generalized_s, NetworkData, FREE_SPACE_IMPEDANCE};
pub use touchstone::read_touchstone;

/// Relative tolerance for the Hermitian and PSD checks on every `B`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// `B_ij = (1/4π) ∫ f_i(u)·f_j(u)ᴴ dΩ` on the given quadrature.
///
/// Each pattern is sampled once; the upper triangle is accumulated in node
/// order and mirrored, so the result is exactly Hermitian.
pub fn bcf_integrate(patterns: &[ElementPattern], grid: &SphereGrid) -> Result<CMatrix> {
    if patterns.is_empty() {
        return Err(Error::invalid("bcf_integrate needs at least one pattern"));
    }
    let samples: Vec<Vec<PolarizedField>> = patterns
        .iter()
        .map(|p| grid.nodes().iter().map(|d| p.field(d)).collect())
        .collect::<Result<_>>()?;
    let m = patterns.len();
    let mut b = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for ((fi, fj), w) in samples[i].iter().zip(&samples[j]).zip(grid.weights()) {
                acc += fi.inner(fj) * *w;
            }
            let bij = acc / (4.0 * PI);
            b[(i, j)] = bij;
            b[(j, i)] = bij.conj();
        }
        b[(i, i)].im = 0.0;
    }
    Ok(b)
}

/// Closed form of [`bcf_integrate`] for isotropic elements:
/// `B_ij = sinc(k |r_i − r_j|)` with `sinc(x) = sin x / x`.
pub fn sinc_bcf(geometry: &ArrayGeometry) -> CMatrix {
    let k = geometry.wavenumber();
    let pos = geometry.positions();
    let m = pos.len();
    CMatrix::from_fn(m, m, |i, j| {
        let x = k * (pos[i] - pos[j]).norm();
        Complex64::new(if x == 0.0 { 1.0 } else { x.sin() / x }, 0.0)
    })
}

/// Steering data at the look direction.
#[derive(Debug, Clone)]
pub struct Steering {
    /// Co-polar component of each element field at u0.
    pub v0: CVector,
    /// `|f_i(u0)|²` with both polarizations.
    pub d_f0: Vec<f64>,
    /// Unit polarization the fields were projected on; its largest component
    /// is real and positive.
    pub polarization: PolarizedField,
    /// `‖f − p̂ v0‖ / ‖f‖` stacked over elements; zero for co-polarized arrays.
    pub cross_pol_residual: f64,
}

/// Element fields at `u0`, reduced to scalars along the polarization of the
/// unit-excitation sum `Σ_i f_i(u0)`.
pub fn steering_at(patterns: &[ElementPattern], u0: &Direction) -> Result<Steering> {
    if patterns.is_empty() {
        return Err(Error::invalid("steering_at needs at least one pattern"));
    }
    let fields: Vec<PolarizedField> = patterns.iter().map(|p| p.field(u0)).collect::<Result<_>>()?;
    let total = fields.iter().fold(PolarizedField::ZERO, |acc, f| acc + *f);
    let reference = if total.norm_sqr() > 0.0 {
        total
    } else {
        // Fields cancel: fall back to the strongest element, then to θ̂.
        fields
            .iter()
            .copied()
            .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
            .filter(|f| f.norm_sqr() > 0.0)
            .unwrap_or(PolarizedField::scalar(Complex64::new(1.0, 0.0)))
    };
    let polarization = unit_polarization(reference);
    let v0 = CVector::from_iterator(fields.len(), fields.iter().map(|f| f.inner(&polarization)));
    let d_f0: Vec<f64> = fields.iter().map(PolarizedField::norm_sqr).collect();
    let total_power: f64 = d_f0.iter().sum();
    let cross: f64 = fields
        .iter()
        .zip(v0.iter())
        .map(|(f, v)| {
            let co = polarization * *v;
            (f.e_theta - co.e_theta).norm_sqr() + (f.e_phi - co.e_phi).norm_sqr()
        })
        .sum();
    let cross_pol_residual = if total_power > 0.0 {
        (cross / total_power).sqrt()
    } else {
        0.0
    };
    Ok(Steering {
        v0,
        d_f0,
        polarization,
        cross_pol_residual,
    })
}

fn unit_polarization(f: PolarizedField) -> PolarizedField {
    let n = f.norm_sqr().sqrt();
    let lead = if f.e_theta.norm() >= f.e_phi.norm() {
        f.e_theta
    } else {
        f.e_phi
    };
    let phase = Complex64::from_polar(1.0, -lead.arg());
    f * (phase / n)
}

/// `B`, `v0` and the diagonal of `D_f0` for one array and look direction.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    b: CMatrix,
    v0: CVector,
    d_f0: Vec<f64>,
    cross_pol_residual: f64,
}

impl CouplingMatrix {
    /// Validates shapes, finiteness, `d_f0 ≥ 0`, and that `b` is Hermitian
    /// PSD to [`HERMITIAN_TOL`]. `b` is stored with its rounding-level
    /// asymmetry averaged out.
    pub fn new(b: CMatrix, v0: CVector, d_f0: Vec<f64>) -> Result<Self> {
        let m = v0.len();
        if m == 0 {
            return Err(Error::invalid("coupling data needs at least one element"));
        }
        if b.nrows() != m || b.ncols() != m || d_f0.len() != m {
            return Err(Error::invalid(format!(
                "inconsistent sizes: B is {}x{}, v0 has {m}, d_f0 has {}",
                b.nrows(),
                b.ncols(),
                d_f0.len()
            )));
        }
        if !b.iter().chain(v0.iter()).all(|z| z.is_finite()) {
            return Err(Error::invalid("coupling data must be finite"));
        }
        if d_f0.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::invalid("d_f0 entries must be finite and >= 0"));
        }
        linalg::check_hermitian_psd(&b, HERMITIAN_TOL)?;
        Ok(CouplingMatrix {
            b: linalg::hermitize(&b),
            v0,
            d_f0,
            cross_pol_residual: 0.0,
        })
    }

    pub fn from_steering(b: CMatrix, steering: &Steering) -> Result<Self> {
        let mut c = Self::new(b, steering.v0.clone(), steering.d_f0.clone())?;
        c.cross_pol_residual = steering.cross_pol_residual;
        Ok(c)
    }

    /// Integrated `B` plus steering, both from the same element patterns.
    pub fn from_patterns(patterns: &[ElementPattern], grid: &SphereGrid, u0: &Direction) -> Result<Self> {
        let b = bcf_integrate(patterns, grid)?;
        Self::from_steering(b, &steering_at(patterns, u0)?)
    }

    pub fn m(&self) -> usize {
        self.v0.len()
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    pub fn v0(&self) -> &CVector {
        &self.v0
    }

    pub fn d_f0(&self) -> &[f64] {
        &self.d_f0
    }

    pub fn cross_pol_residual(&self) -> f64 {
        self.cross_pol_residual
    }

    /// `D_f0` as a dense complex diagonal matrix.
    pub fn d_f0_matrix(&self) -> CMatrix {
        linalg::real_diag(&self.d_f0)
    }

    pub fn with_scaled_b(&self, scale: f64) -> Self {
        CouplingMatrix {
            b: self.b.scale(scale),
            ..self.clone()
        }
    }
}

/// On-disk coupling file. `v0`/`d_f0` are null when the source had no
/// steering information (network data alone).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingFile {
    pub m: usize,
    pub route: String,
    pub b: Vec<Vec<Pair>>,
    pub v0: Option<Vec<Pair>>,
    pub d_f0: Option<Vec<f64>>,
    #[serde(default)]
    pub cross_pol_residual: f64,
    #[serde(default)]
    pub hermitian_asymmetry: f64,
    #[serde(default)]
    pub min_eigen_ratio: f64,
}

impl CouplingFile {
    pub fn new(route: &str, b: &CMatrix, steering: Option<&Steering>) -> Self {
        CouplingFile {
            m: b.nrows(),
            route: route.to_string(),
            b: json::matrix_pairs(b),
            v0: steering.map(|s| json::vector_pairs(&s.v0)),
            d_f0: steering.map(|s| s.d_f0.clone()),
            cross_pol_residual: steering.map_or(0.0, |s| s.cross_pol_residual),
            hermitian_asymmetry: linalg::hermitian_asymmetry(b),
            min_eigen_ratio: linalg::min_eigen_ratio(b),
        }
    }

    pub fn from_coupling(route: &str, c: &CouplingMatrix) -> Self {
        let mut f = CouplingFile::new(route, c.b(), None);
        f.v0 = Some(json::vector_pairs(c.v0()));
        f.d_f0 = Some(c.d_f0().to_vec());
        f.cross_pol_residual = c.cross_pol_residual();
        f
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        json::read(path)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        json::write(path, self)
    }

    pub fn b_matrix(&self) -> std::result::Result<CMatrix, String> {
        json::matrix(&self.b, self.m, "b")
    }

    /// Rebuilds the validated coupling; errors when steering data is absent.
    pub fn to_coupling(&self) -> Result<CouplingMatrix> {
        let b = self.b_matrix().map_err(Error::invalid)?;
        let (v0, d_f0) = match (&self.v0, &self.d_f0) {
            (Some(v), Some(d)) => (v, d),
            _ => {
                return Err(Error::invalid(
                    "coupling file has no steering vector (v0); rerun `bcf` with a steering source",
                ))
            }
        };
        if v0.len() != self.m {
            return Err(Error::invalid(format!("v0 has {} entries, m = {}", v0.len(), self.m)));
        }
        let v0 = CVector::from_vec(json::complexes(v0));
        let mut c = CouplingMatrix::new(b, v0, d_f0.clone())?;
        c.cross_pol_residual = self.cross_pol_residual;
        Ok(c)
    }
}
