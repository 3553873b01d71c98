//! Sensitivity-constrained beamforming: maximize `D` subject to `Ξ = ξ`.
//!
//! Stationary points satisfy `a* ∝ K(p)⁻¹ v0` with `K(p) = B + p Mξ` and
//! `Mξ = ξ v0 v0ᴴ − D_f0`. Admissible `p` are the roots of `det W(p)`, where
//! `W = [v0, K Mξ⁻¹ K v_2, …, K Mξ⁻¹ K v_M]` and `{v_i}` spans the
//! orthogonal complement of `v0`. `det W` is a polynomial of degree
//! `2(M−1)`; it is fitted from samples, its roots come from a companion
//! matrix and are then polished by Newton steps on the determinant and,
//! for real roots, on the constraint equation.

use std::io::Write;
use std::path::Path;

use nalgebra::Schur;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamforming::{directivity_quotient, Excitation};
use crate::coupling::CouplingMatrix;
use crate::error::{Error, Result};
use crate::json::{self, Pair};
use crate::linalg::{self, CMatrix, CVector};
use crate::sensitivity::normalized_variance;

/// Roots with `|Im p| > REAL_ROOT_TOL·(1 + |Re p|)` are not stationary points.
pub const REAL_ROOT_TOL: f64 = 1e-6;
/// Relative tolerance on the achieved `Ξ`.
pub const XI_TOL: f64 = 1e-6;
/// Bound on the normalized constraint residual.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Relative step used when `Mξ` is singular.
pub const XI_NUDGE: f64 = 1e-9;

const NEWTON_ITERS: usize = 60;
const DEDUPE_TOL: f64 = 1e-8;

/// Smallest attainable `Ξ` for this coupling: `1 / Σ_i |v0_i|²/|f_i(u0)|²`,
/// which is `1/M` for co-polarized elements.
pub fn variance_bound(c: &CouplingMatrix) -> f64 {
    let s: f64 = c
        .v0()
        .iter()
        .zip(c.d_f0())
        .filter(|(_, d)| **d > 0.0)
        .map(|(v, d)| v.norm_sqr() / d)
        .sum();
    if s > 0.0 {
        1.0 / s
    } else {
        f64::INFINITY
    }
}

/// `Mξ = ξ v0 v0ᴴ − D_f0`.
pub fn constraint_matrix(c: &CouplingMatrix, xi: f64) -> CMatrix {
    (c.v0() * c.v0().adjoint()).scale(xi) - c.d_f0_matrix()
}

/// Columns 2..M of the Householder reflector taking `v0/‖v0‖` to a
/// multiple of `e_1`.
pub fn orthogonal_complement(v0: &CVector) -> Result<Vec<CVector>> {
    let m = v0.len();
    let norm = linalg::vec_norm(v0);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateSteering("v0 is zero".into()));
    }
    let u = v0.unscale(norm);
    let phase = if u[0].norm() > 0.0 {
        u[0] / u[0].norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut w = u.clone();
    w[0] += phase;
    let w = w.unscale(linalg::vec_norm(&w));
    let h = CMatrix::identity(m, m) - (&w * w.adjoint()).scale(2.0);
    Ok((1..m).map(|j| h.column(j).into_owned()).collect())
}

/// Precomputed pieces of `W(p)` for one coupling and one `ξ`.
#[derive(Debug, Clone)]
struct WSystem {
    b: CMatrix,
    v0: CVector,
    mx: CMatrix,
    mx_inv: CMatrix,
    basis: Vec<CVector>,
}

impl WSystem {
    fn new(c: &CouplingMatrix, xi: f64, basis: &[CVector]) -> Result<Self> {
        if basis.len() + 1 != c.m() || basis.iter().any(|v| v.len() != c.m()) {
            return Err(Error::invalid(format!(
                "basis must hold {} vectors of length {}",
                c.m() - 1,
                c.m()
            )));
        }
        let mx = constraint_matrix(c, xi);
        let mx_inv = linalg::inverse(&mx, "constraint matrix").map_err(|_| Error::ConstraintDegenerate(xi))?;
        Ok(WSystem {
            b: c.b().clone(),
            v0: c.v0().clone(),
            mx,
            mx_inv,
            basis: basis.to_vec(),
        })
    }

    fn k(&self, p: Complex64) -> CMatrix {
        &self.b + self.mx.map(|z| z * p)
    }

    fn w(&self, p: Complex64) -> CMatrix {
        let k = self.k(p);
        let kmk = &k * &self.mx_inv * &k;
        let mut w = CMatrix::zeros(self.v0.len(), self.v0.len());
        w.set_column(0, &self.v0);
        for (j, v) in self.basis.iter().enumerate() {
            w.set_column(j + 1, &(&kmk * v));
        }
        w
    }

    /// `dW/dp`: `d/dp (K Mξ⁻¹ K) = 2K`.
    fn dw(&self, p: Complex64) -> CMatrix {
        let k2 = self.k(p).scale(2.0);
        let mut d = CMatrix::zeros(self.v0.len(), self.v0.len());
        for (j, v) in self.basis.iter().enumerate() {
            d.set_column(j + 1, &(&k2 * v));
        }
        d
    }

    fn det(&self, p: Complex64) -> Complex64 {
        self.w(p).determinant()
    }

    /// `s^{2(M−1)} det W(1/s)`, whose small roots are the large roots of `det W`.
    fn det_reversed(&self, s: Complex64) -> Complex64 {
        let k = self.b.map(|z| z * s) + &self.mx;
        let kmk = &k * &self.mx_inv * &k;
        let mut w = CMatrix::zeros(self.v0.len(), self.v0.len());
        w.set_column(0, &self.v0);
        for (j, v) in self.basis.iter().enumerate() {
            w.set_column(j + 1, &(&kmk * v));
        }
        w.determinant()
    }

    /// `|det W| / Π ‖W_j‖`, a scale-free measure of how singular `W` is.
    fn relative_det(&self, p: Complex64) -> f64 {
        let w = self.w(p);
        let cols: f64 = (0..w.ncols()).map(|j| w.column(j).norm()).product();
        if cols == 0.0 {
            0.0
        } else {
            w.determinant().norm() / cols
        }
    }

    fn newton_polish(&self, p0: Complex64) -> Complex64 {
        let mut p = p0;
        for _ in 0..NEWTON_ITERS {
            let Some(w_inv) = self.w(p).try_inverse() else {
                break;
            };
            let t = (w_inv * self.dw(p)).trace();
            if t.norm() == 0.0 || !t.is_finite() {
                break;
            }
            let step = t.inv();
            let next = p - step;
            if !next.is_finite() {
                break;
            }
            p = next;
            if step.norm() <= 1e-14 * (1.0 + p.norm()) {
                break;
            }
        }
        if self.relative_det(p) <= self.relative_det(p0) {
            p
        } else {
            p0
        }
    }
}

impl WSystem {
    /// `xᴴ Mξ x` with `x = K(p)⁻¹ v0`, and its derivative in `p`.
    fn constraint(&self, p: f64) -> Option<(f64, f64)> {
        let lu = self.k(Complex64::new(p, 0.0)).lu();
        let x = lu.solve(&self.v0)?;
        let mx_x = &self.mx * &x;
        let g = x.dotc(&mx_x).re;
        let dg = -2.0 * mx_x.dotc(&lu.solve(&mx_x)?).re;
        Some((g, dg))
    }

    /// Newton on the real constraint equation, starting from a root of `det W`.
    fn constraint_polish(&self, p0: f64) -> f64 {
        let Some((mut g, _)) = self.constraint(p0) else {
            return p0;
        };
        let mut p = p0;
        for _ in 0..NEWTON_ITERS {
            let Some((_, dg)) = self.constraint(p) else { break };
            if dg == 0.0 || !dg.is_finite() {
                break;
            }
            let next = p - g / dg;
            match self.constraint(next) {
                Some((gn, _)) if gn.abs() < g.abs() => {
                    let done = (next - p).abs() <= 1e-15 * (1.0 + p.abs());
                    p = next;
                    g = gn;
                    if done {
                        break;
                    }
                }
                _ => break,
            }
        }
        p
    }
}

/// `W(p) = [v0, K Mξ⁻¹ K v_2, …]` from the factored form.
pub fn build_w(p: Complex64, c: &CouplingMatrix, xi: f64, basis: &[CVector]) -> Result<CMatrix> {
    Ok(WSystem::new(c, xi, basis)?.w(p))
}

/// `det W(p)` as a polynomial, coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct DetPolynomial {
    pub coeffs: Vec<Complex64>,
    /// Half-width of the sampling interval.
    pub rho: f64,
    /// `|c_top| / max_k |c_k|`.
    pub leading_ratio: f64,
}

impl DetPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, p: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * p + c)
    }

    pub fn roots(&self) -> Result<Vec<Complex64>> {
        polynomial_roots(&self.coeffs)
    }
}

fn default_rho(sys: &WSystem) -> f64 {
    let rho = linalg::hermitian_norm2(&sys.b) / linalg::hermitian_norm2(&sys.mx);
    if rho.is_finite() && rho > 0.0 {
        rho
    } else {
        1.0
    }
}

fn fit(sys: &WSystem, rho: f64) -> Result<DetPolynomial> {
    fit_samples(|p| sys.det(p), 2 * (sys.v0.len() - 1), rho)
}

fn fit_samples(f: impl Fn(Complex64) -> Complex64, n: usize, rho: f64) -> Result<DetPolynomial> {
    let t: Vec<f64> = (0..=n)
        .map(|k| (std::f64::consts::PI * (k as f64 + 0.5) / (n as f64 + 1.0)).cos())
        .collect();
    let vals = CVector::from_iterator(n + 1, t.iter().map(|tk| f(Complex64::new(rho * tk, 0.0))));
    let vander = CMatrix::from_fn(n + 1, n + 1, |i, j| Complex64::new(t[i].powi(j as i32), 0.0));
    let scaled = vander
        .lu()
        .solve(&vals)
        .ok_or_else(|| Error::NumericalConditioning("interpolation system for det W is singular".into()))?;
    let coeffs: Vec<Complex64> = scaled.iter().enumerate().map(|(j, c)| c / rho.powi(j as i32)).collect();
    let top = coeffs.iter().fold(0.0_f64, |a, c| a.max(c.norm()));
    let leading_ratio = if top > 0.0 { coeffs[n].norm() / top } else { 0.0 };
    Ok(DetPolynomial {
        coeffs,
        rho,
        leading_ratio,
    })
}

/// Fits `det W` from `2M−1` Chebyshev samples on `[−ρ, ρ]`,
/// `ρ = ‖B‖₂ / ‖Mξ‖₂`, with a Vandermonde system in the scaled variable.
pub fn det_w_polynomial(c: &CouplingMatrix, xi: f64, basis: &[CVector]) -> Result<DetPolynomial> {
    let sys = WSystem::new(c, xi, basis)?;
    fit(&sys, default_rho(&sys))
}

/// Roots of `Σ c_k p^k` (ascending) from the balanced companion matrix.
/// Negligible leading coefficients are dropped first.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let top = coeffs.iter().fold(0.0_f64, |a, c| a.max(c.norm()));
    if top == 0.0 || !top.is_finite() {
        return Err(Error::NumericalConditioning("polynomial is zero or not finite".into()));
    }
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].norm() <= 1e-14 * top {
        deg -= 1;
    }
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    let mut comp = CMatrix::zeros(deg, deg);
    for j in 0..deg {
        comp[(0, j)] = -coeffs[deg - 1 - j] / lead;
    }
    for i in 1..deg {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    balance(&mut comp);
    let schur = Schur::try_new(comp, 1e-15, 10_000)
        .ok_or_else(|| Error::NumericalConditioning("companion eigenvalues did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

/// Parlett–Reinsch balancing with radix-2 scalings; eigenvalues unchanged.
fn balance(a: &mut CMatrix) {
    let n = a.nrows();
    let radix = 2.0_f64;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].norm();
                    r += a[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            while cc < r / radix {
                cc *= radix;
                f *= radix;
            }
            let mut rr = r;
            while cc >= rr * radix {
                cc /= radix;
                f /= radix;
                rr = r;
            }
            if (cc + r / f) < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// What happened to one root of `det W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootDiagnostic {
    pub p: Pair,
    pub directivity: Option<f64>,
    pub xi: Option<f64>,
    pub residual: Option<f64>,
    pub accepted: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustSolution {
    /// Requested `ξ`.
    pub xi: f64,
    /// `ξ` actually used; differs from `xi` only after the singular-`Mξ` retry.
    pub xi_used: f64,
    /// Roots of `det W`, after polishing.
    pub roots: Vec<Complex64>,
    pub chosen_p: Complex64,
    pub excitation: Excitation,
    pub directivity: f64,
    pub xi_achieved: f64,
    /// `|v0ᴴK⁻¹MξK⁻¹v0| / (‖v0‖² ‖K⁻¹‖² ‖D_f0‖)`.
    pub residual: f64,
    pub polynomial: DetPolynomial,
    pub diagnostics: Vec<RootDiagnostic>,
}

struct Candidate {
    excitation: Excitation,
    directivity: f64,
    xi: f64,
    residual: f64,
}

fn evaluate_root(c: &CouplingMatrix, sys: &WSystem, p: f64) -> Result<Candidate> {
    let k = sys.k(Complex64::new(p, 0.0));
    let k_inv = linalg::inverse(&k, "K(p)").map_err(|_| Error::NumericalConditioning("K(p) is singular".into()))?;
    let x = &k_inv * c.v0();
    let excitation = Excitation::from_vector(x.map(|z| z.conj()))?.canonical(c.b())?;
    let directivity = directivity_quotient(&excitation, c)?;
    let xi = normalized_variance(&excitation, c)?;
    let k_inv_norm = linalg::hermitian_norm2(&linalg::hermitize(&k_inv));
    let d_norm = c.d_f0().iter().copied().fold(0.0, f64::max);
    let num = (x.adjoint() * &sys.mx * &x)[(0, 0)].norm();
    let den = c.v0().norm_squared() * k_inv_norm * k_inv_norm * d_norm;
    let residual = if den > 0.0 { num / den } else { num };
    Ok(Candidate {
        excitation,
        directivity,
        xi,
        residual,
    })
}

fn dedupe_push(list: &mut Vec<Complex64>, p: Complex64) {
    if !list.iter().any(|q| (p - q).norm() <= DEDUPE_TOL * (1.0 + p.norm())) {
        list.push(p);
    }
}

fn solve_at(c: &CouplingMatrix, xi_requested: f64, xi: f64) -> Result<RobustSolution> {
    let basis = orthogonal_complement(c.v0())?;
    let sys = WSystem::new(c, xi, &basis)?;
    let rho = default_rho(&sys);
    let poly = fit(&sys, rho)?;
    let n = poly.degree();
    let raw = poly.roots()?;

    let mut polished = Vec::new();
    for p in &raw {
        dedupe_push(&mut polished, sys.newton_polish(*p));
    }
    let big = raw.iter().fold(0.0_f64, |a, p| a.max(p.norm()));
    if big > 4.0 * rho {
        for p in fit(&sys, big)?.roots()? {
            dedupe_push(&mut polished, sys.newton_polish(p));
        }
    }
    for s in fit_samples(|s| sys.det_reversed(s), n, 1.0 / rho)?.roots()? {
        if s.norm() > 0.0 && s.norm() * rho < 0.25 {
            dedupe_push(&mut polished, sys.newton_polish(s.inv()));
        }
    }
    polished.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let mut diagnostics = Vec::with_capacity(polished.len());
    let mut best: Option<(Complex64, Candidate)> = None;
    for p in &polished {
        let mut diag = RootDiagnostic {
            p: json::pair(*p),
            directivity: None,
            xi: None,
            residual: None,
            accepted: false,
            note: String::new(),
        };
        let real = p.im.abs() <= REAL_ROOT_TOL * (1.0 + p.re.abs());
        let p_re = if real { sys.constraint_polish(p.re) } else { p.re };
        let p = &Complex64::new(p_re, if real { 0.0 } else { p.im });
        diag.p = json::pair(*p);
        match evaluate_root(c, &sys, p.re) {
            Err(e) => diag.note = format!("discarded: {e}"),
            Ok(cand) => {
                diag.directivity = Some(cand.directivity);
                diag.xi = Some(cand.xi);
                diag.residual = Some(cand.residual);
                if !real {
                    diag.note = "discarded: complex root".into();
                } else if (cand.xi - xi).abs() > XI_TOL * xi {
                    diag.note = "discarded: constraint not met".into();
                } else if cand.residual > RESIDUAL_TOL {
                    diag.note = "discarded: stationarity residual too large".into();
                } else {
                    diag.accepted = true;
                    if best.as_ref().is_none_or(|(_, b)| cand.directivity > b.directivity) {
                        best = Some((*p, cand));
                    }
                }
            }
        }
        diagnostics.push(diag);
    }
    let Some((chosen_p, cand)) = best else {
        let detail: Vec<String> = diagnostics
            .iter()
            .map(|d| {
                format!(
                    "p=({:.6e},{:.6e}) xi={} {}",
                    d.p[0],
                    d.p[1],
                    d.xi.map_or("-".into(), |x| format!("{x:.6e}")),
                    d.note
                )
            })
            .collect();
        return Err(Error::InfeasibleConstraint {
            xi: xi_requested,
            bound: variance_bound(c),
            reason: format!("no root of det W passes the feasibility filter [{}]", detail.join("; ")),
        });
    };
    Ok(RobustSolution {
        xi: xi_requested,
        xi_used: xi,
        roots: diagnostics.iter().map(|d| json::complex(&d.p)).collect(),
        chosen_p,
        excitation: cand.excitation,
        directivity: cand.directivity,
        xi_achieved: cand.xi,
        residual: cand.residual,
        polynomial: poly,
        diagnostics,
    })
}

/// Maximum-directivity excitation with normalized variance `ξ`.
pub fn ocrb_solve(c: &CouplingMatrix, xi: f64) -> Result<RobustSolution> {
    let bound = variance_bound(c);
    if !xi.is_finite() {
        return Err(Error::invalid(format!("xi must be finite, got {xi}")));
    }
    if xi < bound * (1.0 - 1e-12) {
        return Err(Error::InfeasibleConstraint {
            xi,
            bound,
            reason: format!("normalized variance cannot fall below {bound}"),
        });
    }
    if c.m() == 1 {
        let excitation = Excitation::new(vec![Complex64::new(1.0, 0.0)])?.canonical(c.b())?;
        let directivity = directivity_quotient(&excitation, c)?;
        let xi_achieved = normalized_variance(&excitation, c)?;
        if (xi_achieved - xi).abs() > XI_TOL * xi {
            return Err(Error::InfeasibleConstraint {
                xi,
                bound,
                reason: "a single element has exactly one attainable normalized variance".into(),
            });
        }
        return Ok(RobustSolution {
            xi,
            xi_used: xi,
            roots: Vec::new(),
            chosen_p: Complex64::new(0.0, 0.0),
            excitation,
            directivity,
            xi_achieved,
            residual: 0.0,
            polynomial: DetPolynomial {
                coeffs: vec![c.v0()[0]],
                rho: 1.0,
                leading_ratio: 1.0,
            },
            diagnostics: Vec::new(),
        });
    }
    // At the bound Mξ is singular; start from the nudged value directly.
    let start = if (xi - bound).abs() <= 1e-12 * bound { bound } else { xi };
    let first = if start == bound {
        Err(Error::ConstraintDegenerate(xi))
    } else {
        solve_at(c, xi, start)
    };
    match first {
        Err(Error::ConstraintDegenerate(_)) => match solve_at(c, xi, start * (1.0 + XI_NUDGE)) {
            Err(Error::ConstraintDegenerate(x)) => Err(Error::ConstraintDegenerate(x)),
            other => other,
        },
        other => other,
    }
}

/// One point of a trade-off sweep.
#[derive(Debug)]
pub struct SweepPoint {
    pub xi: f64,
    pub outcome: Result<RobustSolution>,
}

/// `ocrb_solve` at each `ξ`; failures are kept per point.
pub fn tradeoff_sweep(c: &CouplingMatrix, xi_values: &[f64]) -> Vec<SweepPoint> {
    xi_values
        .iter()
        .map(|&xi| SweepPoint {
            xi,
            outcome: ocrb_solve(c, xi),
        })
        .collect()
}

pub const SWEEP_CSV_HEADER: &str = "xi,d,p_re,p_im,residual,error";

/// `xi,d,p_re,p_im,residual,error`; failed points leave the numeric fields
/// empty and carry the message.
pub fn write_sweep_csv(points: &[SweepPoint], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    w.write_record(SWEEP_CSV_HEADER.split(',')).map_err(io)?;
    for pt in points {
        let row = match &pt.outcome {
            Ok(s) => vec![
                format!("{:?}", pt.xi),
                format!("{:?}", s.directivity),
                format!("{:?}", s.chosen_p.re),
                format!("{:?}", s.chosen_p.im),
                format!("{:?}", s.residual),
                String::new(),
            ],
            Err(e) => vec![
                format!("{:?}", pt.xi),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                e.to_string(),
            ],
        };
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

/// `{"xi", "p_roots", "p", "a", "d", "xi_achieved", "residual"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub xi: f64,
    pub p_roots: Vec<Pair>,
    pub p: Pair,
    pub a: Vec<Pair>,
    pub d: f64,
    pub xi_achieved: f64,
    pub residual: f64,
}

impl SolutionFile {
    pub fn from_solution(s: &RobustSolution) -> Self {
        SolutionFile {
            xi: s.xi,
            p_roots: json::pairs(&s.roots),
            p: json::pair(s.chosen_p),
            a: json::pairs(s.excitation.as_slice()),
            d: s.directivity,
            xi_achieved: s.xi_achieved,
            residual: s.residual,
        }
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        json::read(path)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        json::write(path, self)
    }
}
