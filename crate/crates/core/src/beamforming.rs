//! Excitation solvers: the coupled-array maximum-directivity optimum, the
//! traditional isolated-element solution, and conjugate-steering MRT.

use std::fmt;
use std::path::Path;

use nalgebra::Cholesky;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupling::CouplingMatrix;
use crate::error::{Error, Result};
use crate::json::{self, Pair};
use crate::linalg::{self, CMatrix, CVector};
use crate::patterns::{ArrayGeometry, Direction, ElementPattern, SphereGrid};

/// Below this eigenvalue ratio `B` is flagged as ill-conditioned.
pub const ILL_CONDITIONED_RATIO: f64 = 1e-12;
const LOADING_START: f64 = 1e-12;
const LOADING_STEPS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Eepb,
    Iep,
    Mrt,
    Ocrb,
    MinVariance,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Eepb => "eepb",
            Method::Iep => "iep",
            Method::Mrt => "mrt",
            Method::Ocrb => "ocrb",
            Method::MinVariance => "minvariance",
        })
    }
}

/// Port weights `a`. Finite and not all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Excitation(CVector);

impl Excitation {
    pub fn new(a: Vec<Complex64>) -> Result<Self> {
        Self::from_vector(CVector::from_vec(a))
    }

    pub fn from_vector(a: CVector) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::invalid("excitation needs at least one entry"));
        }
        if !a.iter().all(|z| z.is_finite()) {
            return Err(Error::invalid("excitation entries must be finite"));
        }
        if a.iter().all(|z| z.norm_sqr() == 0.0) {
            return Err(Error::invalid("excitation is identically zero"));
        }
        Ok(Excitation(a))
    }

    /// Skips validation; callers guarantee finite entries.
    pub(crate) fn from_raw(a: CVector) -> Self {
        Excitation(a)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_vector(&self) -> &CVector {
        &self.0
    }

    pub fn as_slice(&self) -> &[Complex64] {
        self.0.as_slice()
    }

    /// Rescaled to `aᵀBa* = 1`, then rotated so the largest-magnitude entry
    /// (first one on ties) is real and positive.
    pub fn canonical(&self, b: &CMatrix) -> Result<Excitation> {
        let power = linalg::quad_form(&self.0, b);
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::DegenerateExcitation(power));
        }
        let mut lead = 0;
        for (i, z) in self.0.iter().enumerate() {
            if z.norm() > self.0[lead].norm() {
                lead = i;
            }
        }
        let rot = Complex64::from_polar(1.0 / power.sqrt(), -self.0[lead].arg());
        let mut a = self.0.map(|z| z * rot);
        a[lead] = Complex64::new(a[lead].norm(), 0.0);
        Ok(Excitation(a))
    }
}

/// `|aᵀv0|² / (aᵀBa*)`.
pub fn directivity_quotient(a: &Excitation, c: &CouplingMatrix) -> Result<f64> {
    if a.len() != c.m() {
        return Err(Error::invalid(format!(
            "excitation has {} entries, coupling has {}",
            a.len(),
            c.m()
        )));
    }
    let power = linalg::quad_form(a.as_vector(), c.b());
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::DegenerateExcitation(power));
    }
    Ok(linalg::dot_t(a.as_vector(), c.v0()).norm_sqr() / power)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformResult {
    pub excitation: Excitation,
    /// Rayleigh quotient of `excitation` under the solver's coupling.
    pub directivity: f64,
    pub method: Method,
    /// Smallest-to-largest eigenvalue ratio of `B` fell below
    /// [`ILL_CONDITIONED_RATIO`].
    pub ill_conditioned: bool,
    /// Diagonal loading that was needed to factor `B`; zero when none.
    pub loading: f64,
}

/// Hermitian factorization of `B`, loaded only when the plain factorization
/// fails. Returns the factor and the loading applied.
pub(crate) fn factor_coupling(b: &CMatrix) -> Result<(Cholesky<Complex64, nalgebra::Dyn>, f64)> {
    if let Some(ch) = Cholesky::new(b.clone()) {
        return Ok((ch, 0.0));
    }
    let m = b.nrows();
    let trace: f64 = (0..m).map(|i| b[(i, i)].re).sum::<f64>() / m as f64;
    let mut loading = LOADING_START * trace;
    for _ in 0..LOADING_STEPS {
        let mut loaded = b.clone();
        for i in 0..m {
            loaded[(i, i)] += loading;
        }
        if let Some(ch) = Cholesky::new(loaded) {
            return Ok((ch, loading));
        }
        loading *= 10.0;
    }
    Err(Error::SingularCoupling(format!(
        "factorization failed with diagonal loading up to {:e}",
        loading / 10.0
    )))
}

/// Maximum-directivity excitation `a0* ∝ B⁻¹ v0`.
pub fn eepb_solve(c: &CouplingMatrix) -> Result<BeamformResult> {
    solve_with(c, Method::Eepb)
}

fn solve_with(c: &CouplingMatrix, method: Method) -> Result<BeamformResult> {
    if linalg::vec_norm(c.v0()) == 0.0 {
        return Err(Error::DegenerateSteering("v0 is zero".into()));
    }
    let ill_conditioned = linalg::min_eigen_ratio(c.b()) < ILL_CONDITIONED_RATIO;
    let (chol, loading) = factor_coupling(c.b())?;
    let x = chol.solve(c.v0());
    let a = Excitation::from_vector(x.map(|z| z.conj()))?.canonical(c.b())?;
    let directivity = directivity_quotient(&a, c)?;
    Ok(BeamformResult {
        excitation: a,
        directivity,
        method,
        ill_conditioned,
        loading,
    })
}

/// Traditional beamforming: the optimum for pseudo-EEPs built from one
/// isolated pattern and the element positions, ignoring coupling.
pub fn iep_solve(
    geometry: &ArrayGeometry,
    iep: &ElementPattern,
    grid: &SphereGrid,
    u0: &Direction,
) -> Result<BeamformResult> {
    let pseudo = geometry.displaced_patterns(iep);
    let c = CouplingMatrix::from_patterns(&pseudo, grid, u0)?;
    solve_with(&c, Method::Iep)
}

/// Conjugate-steering weights `a = v0*`, canonically normalized.
pub fn mrt(c: &CouplingMatrix) -> Result<BeamformResult> {
    let norm = linalg::vec_norm(c.v0());
    if norm == 0.0 {
        return Err(Error::DegenerateSteering("v0 is zero".into()));
    }
    let a = Excitation::from_vector(c.v0().map(|z| z.conj() / norm))?.canonical(c.b())?;
    let directivity = directivity_quotient(&a, c)?;
    Ok(BeamformResult {
        excitation: a,
        directivity,
        method: Method::Mrt,
        ill_conditioned: linalg::min_eigen_ratio(c.b()) < ILL_CONDITIONED_RATIO,
        loading: 0.0,
    })
}

/// `{"m", "a", "method", "directivity"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationFile {
    pub m: usize,
    pub a: Vec<Pair>,
    pub method: Method,
    pub directivity: f64,
}

impl ExcitationFile {
    pub fn from_result(r: &BeamformResult) -> Self {
        ExcitationFile {
            m: r.excitation.len(),
            a: json::pairs(r.excitation.as_slice()),
            method: r.method,
            directivity: r.directivity,
        }
    }

    pub fn excitation(&self) -> Result<Excitation> {
        if self.a.len() != self.m {
            return Err(Error::invalid(format!(
                "a has {} entries, m = {}",
                self.a.len(),
                self.m
            )));
        }
        Excitation::new(json::complexes(&self.a))
    }

    /// Reads and validates; malformed content is a parse error.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f: ExcitationFile = json::read(path)?;
        f.excitation().map_err(|e| Error::parse(path, 0, e.to_string()))?;
        Ok(f)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        json::write(path, self)
    }
}
