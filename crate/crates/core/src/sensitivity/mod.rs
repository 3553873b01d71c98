//! Random excitation errors: the Gaussian error model, the fluctuation
//! metric H, the normalized variance Ξ and its minimizer, expected field and
//! power patterns, and a deterministic Monte Carlo engine.

mod monte_carlo;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::beamforming::Excitation;
use crate::coupling::CouplingMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, CVector};
use crate::patterns::{array_pattern, ArrayPattern, Direction, ElementPattern, FarField};

pub use monte_carlo::{
    monte_carlo, sample_fields, sample_rng, worker_threads, EvalMode, Histogram, MonteCarloReport, ReportFile,
    DEFAULT_BINS, THREADS_ENV,
};

/// Independent Gaussian amplitude and phase errors per element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorModel {
    sigma_amp: f64,
    sigma_phase: f64,
}

impl ErrorModel {
    /// `sigma_amp` is relative, `sigma_phase` in radians.
    pub fn new(sigma_amp: f64, sigma_phase: f64) -> Result<Self> {
        for (name, v) in [("sigma_amp", sigma_amp), ("sigma_phase", sigma_phase)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(ErrorModel { sigma_amp, sigma_phase })
    }

    pub fn from_degrees(sigma_amp: f64, sigma_phase_deg: f64) -> Result<Self> {
        Self::new(sigma_amp, sigma_phase_deg.to_radians())
    }

    pub fn zero() -> Self {
        ErrorModel {
            sigma_amp: 0.0,
            sigma_phase: 0.0,
        }
    }

    pub fn sigma_amp(&self) -> f64 {
        self.sigma_amp
    }

    pub fn sigma_phase(&self) -> f64 {
        self.sigma_phase
    }

    /// `E{(1 + α)e^{jδ}} = e^{−δ̄²/2}`.
    pub fn field_attenuation(&self) -> f64 {
        (-0.5 * self.sigma_phase * self.sigma_phase).exp()
    }

    /// `ᾱ² e^{δ̄²}`, the scale between Ξ and the normalized field variance as
    /// published.
    pub fn variance_scale(&self) -> f64 {
        self.sigma_amp.powi(2) * self.sigma_phase.powi(2).exp()
    }

    /// `1 + ᾱ² − e^{−δ̄²}`: the exact scale between Ξ and
    /// `Var{F(u0)} / |F0(u0)|²`.
    pub fn exact_variance_scale(&self) -> f64 {
        1.0 + self.sigma_amp.powi(2) - (-self.sigma_phase.powi(2)).exp()
    }
}

/// `a_i (1 + α_i) e^{jδ_i}`. Draws all M amplitudes first, then all M phases.
pub fn perturb<R: Rng + ?Sized>(a: &Excitation, em: &ErrorModel, rng: &mut R) -> Excitation {
    let m = a.len();
    let alphas: Vec<f64> = (0..m)
        .map(|_| em.sigma_amp * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let deltas: Vec<f64> = (0..m)
        .map(|_| em.sigma_phase * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let v = CVector::from_fn(m, |i, _| {
        a.as_slice()[i] * Complex64::from_polar(1.0 + alphas[i], deltas[i])
    });
    Excitation::from_raw(v)
}

/// `H = Σ (D_i − D_0)² / N`.
pub fn fluctuation_h(d0: f64, samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("fluctuation metric needs at least one sample"));
    }
    Ok(samples.iter().map(|d| (d - d0).powi(2)).sum::<f64>() / samples.len() as f64)
}

/// `Ξ = aᵀ D_f0 a* / |aᵀ v0|²`.
pub fn normalized_variance(a: &Excitation, c: &CouplingMatrix) -> Result<f64> {
    if a.len() != c.m() {
        return Err(Error::invalid(format!(
            "excitation has {} entries, coupling has {}",
            a.len(),
            c.m()
        )));
    }
    let main = linalg::dot_t(a.as_vector(), c.v0()).norm_sqr();
    if main == 0.0 {
        return Err(Error::UndefinedVariance);
    }
    let num: f64 = a.as_slice().iter().zip(c.d_f0()).map(|(x, d)| x.norm_sqr() * d).sum();
    Ok(num / main)
}

/// The excitation attaining the lower bound `Ξ = 1/M`:
/// `a_i ∝ v0_i* / |f_i(u0)|²`, which is `1/f_i(u0)` for co-polarized
/// elements. Canonically normalized against `B`.
pub fn min_variance_excitation(c: &CouplingMatrix) -> Result<Excitation> {
    if let Some(i) = (0..c.m()).find(|&i| c.d_f0()[i] == 0.0 || c.v0()[i].norm_sqr() == 0.0) {
        return Err(Error::DegenerateSteering(format!(
            "element {i} has no field at the look direction"
        )));
    }
    let a = CVector::from_fn(c.m(), |i, _| c.v0()[i].conj() / c.d_f0()[i]);
    Excitation::from_vector(a)?.canonical(c.b())
}

/// `E{F(u)} = F0(u) e^{−δ̄²/2}`.
pub fn expected_pattern(a: &Excitation, patterns: &[ElementPattern], em: &ErrorModel) -> Result<ArrayPattern> {
    Ok(array_pattern(a.as_slice(), patterns)?.scaled(Complex64::new(em.field_attenuation(), 0.0)))
}

fn pattern_terms(a: &Excitation, patterns: &[ElementPattern], u: &Direction) -> Result<(f64, f64)> {
    let f0 = array_pattern(a.as_slice(), patterns)?.field(u)?.norm_sqr();
    let mut spread = 0.0;
    for (x, p) in a.as_slice().iter().zip(patterns) {
        spread += x.norm_sqr() * p.field(u)?.norm_sqr();
    }
    Ok((f0, spread))
}

/// Published expected power: `|F0(u)|² e^{−δ̄²} + ᾱ² Σ |a_i|² |f_i(u)|²`.
pub fn expected_power_pattern(
    a: &Excitation,
    patterns: &[ElementPattern],
    em: &ErrorModel,
    u: &Direction,
) -> Result<f64> {
    let (f0, spread) = pattern_terms(a, patterns, u)?;
    Ok(f0 * (-em.sigma_phase.powi(2)).exp() + em.sigma_amp.powi(2) * spread)
}

/// Exact second moment under the same model:
/// `|F0(u)|² e^{−δ̄²} + (1 + ᾱ² − e^{−δ̄²}) Σ |a_i|² |f_i(u)|²`.
pub fn exact_expected_power_pattern(
    a: &Excitation,
    patterns: &[ElementPattern],
    em: &ErrorModel,
    u: &Direction,
) -> Result<f64> {
    let (f0, spread) = pattern_terms(a, patterns, u)?;
    Ok(f0 * (-em.sigma_phase.powi(2)).exp() + em.exact_variance_scale() * spread)
}
