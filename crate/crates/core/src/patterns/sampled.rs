use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use super::{Direction, FarField, PolarizedField};
use crate::error::{Error, Result};

pub const EEP_CSV_HEADER: [&str; 6] = ["theta_deg", "phi_deg", "re_etheta", "im_etheta", "re_ephi", "im_ephi"];

const ANGLE_TOL_DEG: f64 = 1e-9;

/// A pattern tabulated on a regular (θ, φ) lattice, interpolated bilinearly
/// with azimuth wrap-around.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPattern {
    thetas: Vec<f64>,
    phis: Vec<f64>,
    /// Row-major, `values[i * phis.len() + j]` at `(thetas[i], phis[j])`.
    values: Vec<PolarizedField>,
}

impl SampledPattern {
    /// Angles in radians. `thetas` must be strictly increasing inside
    /// `[0, π]`, `phis` strictly increasing inside `[0, 2π)`.
    pub fn new(thetas: Vec<f64>, phis: Vec<f64>, values: Vec<PolarizedField>) -> Result<Self> {
        if thetas.len() < 2 || phis.len() < 2 {
            return Err(Error::invalid("sampled lattice needs at least 2 thetas and 2 phis"));
        }
        if values.len() != thetas.len() * phis.len() {
            return Err(Error::invalid(format!(
                "lattice {}x{} needs {} values, got {}",
                thetas.len(),
                phis.len(),
                thetas.len() * phis.len(),
                values.len()
            )));
        }
        if !strictly_increasing(&thetas) || !strictly_increasing(&phis) {
            return Err(Error::invalid("lattice angles must be strictly increasing"));
        }
        if thetas[0] < 0.0 || thetas[thetas.len() - 1] > PI + 1e-12 {
            return Err(Error::invalid("lattice theta values must lie in [0, 180] degrees"));
        }
        if phis[0] < 0.0 || phis[phis.len() - 1] >= 2.0 * PI {
            return Err(Error::invalid("lattice phi values must lie in [0, 360) degrees"));
        }
        if values.iter().any(|v| !(v.e_theta.is_finite() && v.e_phi.is_finite())) {
            return Err(Error::invalid("lattice values must be finite"));
        }
        Ok(SampledPattern { thetas, phis, values })
    }

    /// Tabulates any pattern on the given lattice (degrees).
    pub fn from_far_field<P: FarField + ?Sized>(pattern: &P, thetas_deg: &[f64], phis_deg: &[f64]) -> Result<Self> {
        let mut values = Vec::with_capacity(thetas_deg.len() * phis_deg.len());
        for &t in thetas_deg {
            for &p in phis_deg {
                values.push(pattern.field(&Direction::from_degrees(t, p)?)?);
            }
        }
        Self::new(
            thetas_deg.iter().map(|t| t.to_radians()).collect(),
            phis_deg.iter().map(|p| p.to_radians()).collect(),
            values,
        )
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    pub fn values(&self) -> &[PolarizedField] {
        &self.values
    }

    fn at(&self, i: usize, j: usize) -> PolarizedField {
        self.values[i * self.phis.len() + j]
    }

    /// Reads one element's pattern from the EEP CSV format.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| csv_error(path, e))?;
        let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
        if header.len() != EEP_CSV_HEADER.len() || header.iter().zip(EEP_CSV_HEADER).any(|(h, want)| h != want) {
            return Err(Error::parse(
                path,
                1,
                format!("expected header `{}`", EEP_CSV_HEADER.join(",")),
            ));
        }

        let mut rows: Vec<(usize, [f64; 6])> = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(path, e))?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            if record.len() != 6 {
                return Err(Error::parse(
                    path,
                    line,
                    format!("expected 6 fields, got {}", record.len()),
                ));
            }
            let mut vals = [0.0; 6];
            for (k, field) in record.iter().enumerate() {
                vals[k] = field.parse::<f64>().map_err(|_| {
                    Error::parse(
                        path,
                        line,
                        format!("column `{}`: cannot parse `{field}`", EEP_CSV_HEADER[k]),
                    )
                })?;
            }
            rows.push((line, vals));
        }
        if rows.is_empty() {
            return Err(Error::parse(path, 1, "no data rows"));
        }

        let first_theta = rows[0].1[0];
        let n_phi = rows
            .iter()
            .take_while(|(_, r)| (r[0] - first_theta).abs() <= ANGLE_TOL_DEG)
            .count();
        if rows.len() % n_phi != 0 {
            return Err(Error::parse(
                path,
                rows[rows.len() - 1].0,
                format!("{} rows do not form a lattice with {n_phi} phi values", rows.len()),
            ));
        }
        let phis_deg: Vec<f64> = rows[..n_phi].iter().map(|(_, r)| r[1]).collect();
        let mut thetas_deg = Vec::with_capacity(rows.len() / n_phi);
        let mut values = Vec::with_capacity(rows.len());
        for (block_idx, block) in rows.chunks(n_phi).enumerate() {
            let theta = block[0].1[0];
            if let Some(&prev) = thetas_deg.last() {
                if theta <= prev {
                    return Err(Error::parse(path, block[0].0, "theta values must increase"));
                }
            }
            thetas_deg.push(theta);
            for (j, (line, r)) in block.iter().enumerate() {
                if (r[0] - theta).abs() > ANGLE_TOL_DEG {
                    return Err(Error::parse(
                        path,
                        *line,
                        format!("theta {} breaks lattice block {block_idx}", r[0]),
                    ));
                }
                if (r[1] - phis_deg[j]).abs() > ANGLE_TOL_DEG {
                    return Err(Error::parse(
                        path,
                        *line,
                        format!("phi {} does not match lattice value {}", r[1], phis_deg[j]),
                    ));
                }
                values.push(PolarizedField::new(
                    Complex64::new(r[2], r[3]),
                    Complex64::new(r[4], r[5]),
                ));
            }
        }
        Self::new(
            thetas_deg.iter().map(|t| t.to_radians()).collect(),
            phis_deg.iter().map(|p| p.to_radians()).collect(),
            values,
        )
        .map_err(|e| Error::parse(path, 2, e.to_string()))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(out, "{}", EEP_CSV_HEADER.join(",")).map_err(io)?;
        for (i, t) in self.thetas.iter().enumerate() {
            for (j, p) in self.phis.iter().enumerate() {
                let v = self.at(i, j);
                writeln!(
                    out,
                    "{:?},{:?},{:?},{:?},{:?},{:?}",
                    t.to_degrees(),
                    p.to_degrees(),
                    v.e_theta.re,
                    v.e_theta.im,
                    v.e_phi.re,
                    v.e_phi.im
                )
                .map_err(io)?;
            }
        }
        out.flush().map_err(io)
    }
}

impl FarField for SampledPattern {
    fn field(&self, dir: &Direction) -> Result<PolarizedField> {
        let theta = dir.theta();
        let (t_lo, t_hi) = (self.thetas[0], self.thetas[self.thetas.len() - 1]);
        let eps = 1e-12;
        if theta < t_lo - eps || theta > t_hi + eps {
            return Err(Error::InterpolationDomain {
                theta_deg: theta.to_degrees(),
                phi_deg: dir.phi().to_degrees(),
            });
        }
        let theta = theta.clamp(t_lo, t_hi);
        let i = self
            .thetas
            .partition_point(|&t| t <= theta)
            .clamp(1, self.thetas.len() - 1)
            - 1;
        let wt = (theta - self.thetas[i]) / (self.thetas[i + 1] - self.thetas[i]);

        let phi = dir.phi();
        let np = self.phis.len();
        let k = self.phis.partition_point(|&p| p <= phi);
        let (j0, j1, wp) = if k == 0 || k == np {
            // Between the last sample and the first one shifted by 2π.
            let lo = self.phis[np - 1];
            let hi = self.phis[0] + 2.0 * PI;
            let x = if phi >= lo { phi } else { phi + 2.0 * PI };
            (np - 1, 0, (x - lo) / (hi - lo))
        } else {
            let (lo, hi) = (self.phis[k - 1], self.phis[k]);
            (k - 1, k, (phi - lo) / (hi - lo))
        };

        let lerp = |a: PolarizedField, b: PolarizedField, w: f64| {
            a * Complex64::new(1.0 - w, 0.0) + b * Complex64::new(w, 0.0)
        };
        let lo = lerp(self.at(i, j0), self.at(i, j1), wp);
        let hi = lerp(self.at(i + 1, j0), self.at(i + 1, j1), wp);
        Ok(lerp(lo, hi, wt))
    }
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite()) && xs.windows(2).all(|w| w[1] > w[0])
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, line, format!("{other:?}")),
    }
}
