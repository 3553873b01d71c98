use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{self, Pair};
use crate::linalg::{self, CMatrix};

/// Free-space wave impedance in ohms.
pub const FREE_SPACE_IMPEDANCE: f64 = 376.730313668;

const PASSIVITY_TOL: f64 = 1e-9;
const EQUAL_Z0_TOL: f64 = 1e-12;

/// Port parameters of an M-port array.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkData {
    s: Option<CMatrix>,
    z: Option<CMatrix>,
    z0: Vec<Complex64>,
    eta: f64,
}

impl NetworkData {
    pub fn new(s: Option<CMatrix>, z: Option<CMatrix>, z0: Vec<Complex64>, eta: f64) -> Result<Self> {
        let m = z0.len();
        if m == 0 {
            return Err(Error::invalid("network needs at least one port"));
        }
        if s.is_none() && z.is_none() {
            return Err(Error::invalid("network needs an S or a Z matrix"));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::invalid(format!("eta must be positive, got {eta}")));
        }
        if let Some(bad) = z0.iter().position(|z| !(z.is_finite() && z.re > 0.0)) {
            return Err(Error::invalid(format!(
                "reference impedance z0[{bad}] = {} needs a positive real part",
                z0[bad]
            )));
        }
        for (name, mat) in [("s", &s), ("z", &z)] {
            if let Some(mat) = mat {
                if mat.nrows() != m || mat.ncols() != m {
                    return Err(Error::invalid(format!(
                        "{name} is {}x{} but there are {m} ports",
                        mat.nrows(),
                        mat.ncols()
                    )));
                }
                if !mat.iter().all(|v| v.is_finite()) {
                    return Err(Error::invalid(format!("{name} has non-finite entries")));
                }
            }
        }
        if let Some(z) = &z {
            let ratio = linalg::min_eigen_ratio(&resistance(z));
            if ratio < -PASSIVITY_TOL {
                return Err(Error::NotPositiveSemidefinite {
                    ratio,
                    tol: PASSIVITY_TOL,
                });
            }
        }
        Ok(NetworkData { s, z, z0, eta })
    }

    /// S-parameters measured in a common real reference impedance.
    pub fn from_s(s: CMatrix, z0: f64) -> Result<Self> {
        let m = s.nrows();
        Self::new(Some(s), None, vec![Complex64::new(z0, 0.0); m], FREE_SPACE_IMPEDANCE)
    }

    /// Impedance matrix driven from per-port generator impedances.
    pub fn from_z(z: CMatrix, z0: Vec<Complex64>) -> Result<Self> {
        Self::new(None, Some(z), z0, FREE_SPACE_IMPEDANCE)
    }

    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::invalid(format!("eta must be positive, got {eta}")));
        }
        self.eta = eta;
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.z0.len()
    }

    pub fn s(&self) -> Option<&CMatrix> {
        self.s.as_ref()
    }

    pub fn z(&self) -> Option<&CMatrix> {
        self.z.as_ref()
    }

    pub fn z0(&self) -> &[Complex64] {
        &self.z0
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// The shared real reference impedance, if every port has the same one.
    pub fn common_real_z0(&self) -> Option<f64> {
        let r = self.z0[0].re;
        self.z0
            .iter()
            .all(|z| (z.re - r).abs() <= EQUAL_Z0_TOL * r && z.im.abs() <= EQUAL_Z0_TOL * r)
            .then_some(r)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file: NetworkFile = json::read(path)?;
        file.into_network().map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::parse(path, 0, msg),
            other => other,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        json::write(path, &NetworkFile::from(self))
    }
}

/// `{"m", "z0", "s" | null, "z" | null, "eta"?}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct NetworkFile {
    m: usize,
    z0: Vec<Pair>,
    #[serde(default)]
    s: Option<Vec<Vec<Pair>>>,
    #[serde(default)]
    z: Option<Vec<Vec<Pair>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
}

impl NetworkFile {
    fn into_network(self) -> Result<NetworkData> {
        if self.z0.len() != self.m {
            return Err(Error::invalid(format!(
                "z0 has {} entries, m = {}",
                self.z0.len(),
                self.m
            )));
        }
        let s = self
            .s
            .map(|s| json::matrix(&s, self.m, "s"))
            .transpose()
            .map_err(Error::invalid)?;
        let z = self
            .z
            .map(|z| json::matrix(&z, self.m, "z"))
            .transpose()
            .map_err(Error::invalid)?;
        NetworkData::new(
            s,
            z,
            json::complexes(&self.z0),
            self.eta.unwrap_or(FREE_SPACE_IMPEDANCE),
        )
    }
}

impl From<&NetworkData> for NetworkFile {
    fn from(n: &NetworkData) -> Self {
        NetworkFile {
            m: n.m(),
            z0: json::pairs(&n.z0),
            s: n.s.as_ref().map(json::matrix_pairs),
            z: n.z.as_ref().map(json::matrix_pairs),
            eta: Some(n.eta),
        }
    }
}

/// Hermitian part of an impedance matrix; for reciprocal networks this is
/// the elementwise real part.
fn resistance(z: &CMatrix) -> CMatrix {
    linalg::hermitize(z)
}

fn identity(m: usize) -> CMatrix {
    CMatrix::identity(m, m)
}

/// `B = η/(16π Z0) (I − Sᵀ S*)` for a shared real reference impedance.
pub fn bcf_from_s(net: &NetworkData) -> Result<CMatrix> {
    let s = net
        .s()
        .ok_or_else(|| Error::RouteMismatch("network has no S matrix".into()))?;
    let z0 = net.common_real_z0().ok_or_else(|| {
        Error::RouteMismatch("port reference impedances differ or are complex; use the generalized-S route".into())
    })?;
    let m = net.m();
    let b = (identity(m) - s.transpose() * s.conjugate()).scale(net.eta / (16.0 * PI * z0));
    Ok(linalg::hermitize(&b))
}

/// Power-wave scattering matrix referred to the per-port impedances `z0`,
/// from `S` measured in the real base impedance `base_z0`:
/// `S_G = (G*)⁻¹ (S − Γ*) (I − Γ S)⁻¹ G`.
pub fn generalized_s(net: &NetworkData, base_z0: f64) -> Result<CMatrix> {
    let s = net
        .s()
        .ok_or_else(|| Error::RouteMismatch("network has no S matrix".into()))?;
    if !(base_z0.is_finite() && base_z0 > 0.0) {
        return Err(Error::invalid(format!(
            "base impedance must be positive, got {base_z0}"
        )));
    }
    let m = net.m();
    let base = Complex64::new(base_z0, 0.0);
    let gamma: Vec<Complex64> = net.z0.iter().map(|z| (z - base) / (z + base)).collect();
    let g: Vec<Complex64> = gamma
        .iter()
        .map(|gm| {
            let one = Complex64::new(1.0, 0.0);
            (one - gm) * ((1.0 - gm.norm_sqr()).sqrt() / (one - gm.conj()).norm())
        })
        .collect();
    let gamma_m = linalg::diag(&gamma);
    let gamma_conj = gamma_m.conjugate();
    let inner = linalg::inverse(&(identity(m) - &gamma_m * s), "I - Gamma S")?;
    let g_conj_inv = linalg::diag(&g.iter().map(|x| x.conj().inv()).collect::<Vec<_>>());
    Ok(g_conj_inv * (s - gamma_conj) * inner * linalg::diag(&g))
}

/// `B = η/(16π) R^{-1/2} (I − S_Gᵀ S_G*) R^{-1/2}` with `R = Re{Z0}`.
pub fn bcf_from_generalized_s(s_g: &CMatrix, net: &NetworkData) -> Result<CMatrix> {
    let m = net.m();
    if s_g.nrows() != m || s_g.ncols() != m {
        return Err(Error::invalid(format!("S_G must be {m}x{m}")));
    }
    if let Some(bad) = net.z0.iter().position(|z| z.re <= 0.0) {
        return Err(Error::invalid(format!("Re z0[{bad}] must be positive")));
    }
    let r = linalg::real_diag(&net.z0.iter().map(|z| z.re.sqrt().recip()).collect::<Vec<_>>());
    let core = identity(m) - s_g.transpose() * s_g.conjugate();
    let b = (&r * core * &r).scale(net.eta / (16.0 * PI));
    Ok(linalg::hermitize(&b))
}

/// `B = η/(4π) ((Z+Z0)⁻¹)ᵀ Re{Z} ((Z+Z0)⁻¹)*`.
pub fn bcf_from_z(net: &NetworkData) -> Result<CMatrix> {
    let z = net
        .z()
        .ok_or_else(|| Error::RouteMismatch("network has no Z matrix".into()))?;
    let a = linalg::inverse(&(z + linalg::diag(&net.z0)), "Z + Z0")?;
    let b = (a.transpose() * resistance(z) * a.conjugate()).scale(net.eta / (4.0 * PI));
    Ok(linalg::hermitize(&b))
}
