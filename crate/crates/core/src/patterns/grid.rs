use std::f64::consts::PI;

use super::Direction;
use crate::error::{Error, Result};

pub const DEFAULT_N_THETA: usize = 64;
pub const DEFAULT_N_PHI: usize = 128;

/// Product quadrature on the unit sphere: Gauss–Legendre in cos θ crossed
/// with a uniform azimuth rule. Nodes are stored theta-major.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    nodes: Vec<Direction>,
    weights: Vec<f64>,
    n_theta: usize,
    n_phi: usize,
}

impl SphereGrid {
    pub fn nodes(&self) -> &[Direction] {
        &self.nodes
    }

    /// Solid-angle weights in steradians; they sum to 4π.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    /// `∫ f dΩ` over the sphere.
    pub fn integrate(&self, mut f: impl FnMut(&Direction) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(d, w)| w * f(d)).sum()
    }
}

impl Default for SphereGrid {
    fn default() -> Self {
        make_sphere_grid(DEFAULT_N_THETA, DEFAULT_N_PHI).expect("default grid sizes are valid")
    }
}

pub fn make_sphere_grid(n_theta: usize, n_phi: usize) -> Result<SphereGrid> {
    if n_theta < 2 {
        return Err(Error::invalid(format!("n_theta must be >= 2, got {n_theta}")));
    }
    if n_phi < 4 {
        return Err(Error::invalid(format!("n_phi must be >= 4, got {n_phi}")));
    }
    let (xs, ws) = gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    for (x, w) in xs.iter().zip(&ws) {
        let theta = x.clamp(-1.0, 1.0).acos();
        for k in 0..n_phi {
            nodes.push(Direction::new(theta, k as f64 * dphi)?);
            weights.push(w * dphi);
        }
    }
    Ok(SphereGrid {
        nodes,
        weights,
        n_theta,
        n_phi,
    })
}

/// Gauss–Legendre nodes and weights on [−1, 1], nodes ascending.
///
/// Newton iteration on the three-term Legendre recurrence from the
/// Tricomi initial guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = -x;
        xs[n - 1 - i] = x;
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        xs[n / 2] = 0.0;
    }
    (xs, ws)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}
