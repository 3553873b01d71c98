use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fluctuation_h, perturb, ErrorModel};
use crate::beamforming::{directivity_quotient, Excitation};
use crate::coupling::CouplingMatrix;
use crate::error::{Error, Result};
use crate::json;
use crate::patterns::{Direction, ElementPattern, FarField, PolarizedField, SphereGrid};

/// Environment variable fixing the worker count.
pub const THREADS_ENV: &str = "SUPERDIR_THREADS";
pub const DEFAULT_BINS: usize = 50;

/// Worker count from `SUPERDIR_THREADS`, else the available parallelism.
pub fn worker_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Generator for sample `index`: ChaCha20 keyed by `seed`, stream `index`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// How each perturbed excitation is scored.
#[derive(Debug, Clone, Copy)]
pub enum EvalMode<'a> {
    /// Rayleigh quotient with the fixed `B` and `v0`.
    Quotient,
    /// Full-sphere integration of the perturbed array pattern.
    Pattern {
        patterns: &'a [ElementPattern],
        grid: &'a SphereGrid,
        u0: Direction,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub d0: f64,
    /// Directivity of each perturbed excitation, in sample-index order.
    pub samples: Vec<f64>,
    pub h: f64,
    pub mean_d: f64,
    pub seed: u64,
    pub n: usize,
}

fn run_indexed<T, F>(n: usize, threads: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..n as u64).into_par_iter().map(&f).collect())
}

struct PatternScorer {
    /// `fields[n][i]` is element `i` at grid node `n`.
    fields: Vec<Vec<PolarizedField>>,
    weights: Vec<f64>,
    at_u0: Vec<PolarizedField>,
}

impl PatternScorer {
    fn new(patterns: &[ElementPattern], grid: &SphereGrid, u0: &Direction) -> Result<Self> {
        let fields = grid
            .nodes()
            .iter()
            .map(|d| patterns.iter().map(|p| p.field(d)).collect())
            .collect::<Result<_>>()?;
        let at_u0 = patterns.iter().map(|p| p.field(u0)).collect::<Result<_>>()?;
        Ok(PatternScorer {
            fields,
            weights: grid.weights().to_vec(),
            at_u0,
        })
    }

    fn directivity(&self, a: &Excitation) -> Result<f64> {
        let combine = |f: &[PolarizedField]| {
            f.iter()
                .zip(a.as_slice())
                .fold(PolarizedField::ZERO, |acc, (fi, ai)| acc + *fi * *ai)
        };
        let mut power = 0.0;
        for (f, w) in self.fields.iter().zip(&self.weights) {
            power += w * combine(f).norm_sqr();
        }
        power /= 4.0 * PI;
        if !(power > 0.0) {
            return Err(Error::DegeneratePattern(
                "perturbed array pattern vanishes on the grid".into(),
            ));
        }
        Ok(combine(&self.at_u0).norm_sqr() / power)
    }
}

/// Draws `n` perturbed copies of `a` (sample `i` on stream `(seed, i)`) and
/// scores each. The result does not depend on `threads`.
pub fn monte_carlo(
    a: &Excitation,
    c: &CouplingMatrix,
    mode: EvalMode<'_>,
    em: &ErrorModel,
    n: usize,
    seed: u64,
    threads: usize,
) -> Result<MonteCarloReport> {
    if n == 0 {
        return Err(Error::invalid("Monte Carlo needs at least one sample"));
    }
    if a.len() != c.m() {
        return Err(Error::invalid(format!(
            "excitation has {} entries, coupling has {}",
            a.len(),
            c.m()
        )));
    }
    let scorer = match mode {
        EvalMode::Quotient => None,
        EvalMode::Pattern { patterns, grid, u0 } => {
            if patterns.len() != a.len() {
                return Err(Error::invalid("pattern count differs from excitation length"));
            }
            Some(PatternScorer::new(patterns, grid, &u0)?)
        }
    };
    let score = |x: &Excitation| match &scorer {
        None => directivity_quotient(x, c),
        Some(s) => s.directivity(x),
    };
    let d0 = score(a)?;
    let samples = run_indexed(n, threads, |i| score(&perturb(a, em, &mut sample_rng(seed, i))))?;
    let h = fluctuation_h(d0, &samples)?;
    let mean_d = samples.iter().sum::<f64>() / n as f64;
    Ok(MonteCarloReport {
        d0,
        samples,
        h,
        mean_d,
        seed,
        n,
    })
}

/// Perturbed array fields `Σ a_i (1+α_i)e^{jδ_i} f_i` for given element
/// values, on the same streams as [`monte_carlo`].
pub fn sample_fields(
    a: &Excitation,
    element_fields: &[PolarizedField],
    em: &ErrorModel,
    n: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<PolarizedField>> {
    if element_fields.len() != a.len() {
        return Err(Error::invalid("element field count differs from excitation length"));
    }
    run_indexed(n, threads, |i| {
        let x = perturb(a, em, &mut sample_rng(seed, i));
        Ok(element_fields
            .iter()
            .zip(x.as_slice())
            .fold(PolarizedField::ZERO, |acc, (f, w)| acc + *f * *w))
    })
}

/// Equal-width bins over `[min, max]` of the samples; the last bin is closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(samples: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::invalid("histogram needs at least one bin"));
        }
        if samples.is_empty() {
            return Err(Error::invalid("histogram needs at least one sample"));
        }
        let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins)
            .map(|k| if k == bins { hi } else { lo + k as f64 * width })
            .collect();
        let mut counts = vec![0; bins];
        for s in samples {
            let k = (((s - lo) / width).floor() as usize).min(bins - 1);
            counts[k] += 1;
        }
        Ok(Histogram { edges, counts })
    }
}

impl MonteCarloReport {
    pub fn histogram(&self, bins: usize) -> Result<Histogram> {
        Histogram::new(&self.samples, bins)
    }

    /// One directivity per line in index order.
    pub fn write_samples_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = Vec::with_capacity(self.samples.len() * 20);
        for s in &self.samples {
            writeln!(out, "{s:?}").expect("writing to memory");
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// `{"d0", "h", "mean_d", "n", "seed", "histogram", "samples_path"?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub d0: f64,
    pub h: f64,
    pub mean_d: f64,
    pub n: usize,
    pub seed: u64,
    pub histogram: Histogram,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_path: Option<String>,
}

impl ReportFile {
    pub fn new(r: &MonteCarloReport, bins: usize, samples_path: Option<String>) -> Result<Self> {
        Ok(ReportFile {
            d0: r.d0,
            h: r.h,
            mean_d: r.mean_d,
            n: r.n,
            seed: r.seed,
            histogram: r.histogram(bins)?,
            samples_path,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        json::read(path)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        json::write(path, self)
    }
}
