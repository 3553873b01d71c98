//! Touchstone v1 (`.sNp`) reader, S-parameters only.

use std::path::Path;

use num_complex::Complex64;

use super::network::{NetworkData, FREE_SPACE_IMPEDANCE};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Format {
    RealImag,
    MagAngle,
    DbAngle,
}

/// Reads the frequency point nearest to `freq_hz`; returns the network and
/// the frequency actually used. The port count comes from the extension.
pub fn read_touchstone(path: impl AsRef<Path>, freq_hz: f64) -> Result<(NetworkData, f64)> {
    let path = path.as_ref();
    let ports = port_count(path)?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text, ports, freq_hz).map_err(|(line, msg)| Error::parse(path, line, msg))
}

fn port_count(path: &Path) -> Result<usize> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    ext.strip_prefix('s')
        .and_then(|r| r.strip_suffix('p'))
        .and_then(|n| n.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::invalid(format!("{}: expected a .sNp extension", path.display())))
}

type ParseResult<T> = std::result::Result<T, (usize, String)>;

fn parse(text: &str, ports: usize, freq_hz: f64) -> ParseResult<(NetworkData, f64)> {
    let mut unit = 1e9;
    let mut format = Format::MagAngle;
    let mut z0 = 50.0;
    let mut seen_option = false;
    let mut tokens: Vec<(usize, f64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('!').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(opts) = line.strip_prefix('#') {
            if seen_option {
                continue;
            }
            seen_option = true;
            let words: Vec<String> = opts.split_whitespace().map(str::to_ascii_uppercase).collect();
            let mut i = 0;
            while i < words.len() {
                match words[i].as_str() {
                    "HZ" => unit = 1.0,
                    "KHZ" => unit = 1e3,
                    "MHZ" => unit = 1e6,
                    "GHZ" => unit = 1e9,
                    "S" => {}
                    "Y" | "Z" | "H" | "G" => {
                        return Err((line_no, format!("only S-parameters are supported, found {}", words[i])))
                    }
                    "RI" => format = Format::RealImag,
                    "MA" => format = Format::MagAngle,
                    "DB" => format = Format::DbAngle,
                    "R" => {
                        i += 1;
                        z0 = words
                            .get(i)
                            .and_then(|w| w.parse::<f64>().ok())
                            .filter(|r| r.is_finite() && *r > 0.0)
                            .ok_or((line_no, "R must be followed by a positive resistance".to_string()))?;
                    }
                    other => return Err((line_no, format!("unknown option `{other}`"))),
                }
                i += 1;
            }
            continue;
        }
        if line.starts_with('[') {
            return Err((line_no, "Touchstone v2 keywords are not supported".into()));
        }
        for word in line.split_whitespace() {
            let v = word
                .parse::<f64>()
                .map_err(|_| (line_no, format!("`{word}` is not a number")))?;
            tokens.push((line_no, v));
        }
    }
    let per_record = 1 + 2 * ports * ports;
    if tokens.is_empty() {
        return Err((text.lines().count(), "no data records".into()));
    }
    if tokens.len() % per_record != 0 {
        let last = tokens[tokens.len() - 1].0;
        return Err((
            last,
            format!("data count is not a multiple of {per_record} values per frequency"),
        ));
    }
    let records: Vec<&[(usize, f64)]> = tokens.chunks(per_record).collect();
    let mut prev = f64::NEG_INFINITY;
    for r in &records {
        if r[0].1 <= prev {
            return Err((r[0].0, "frequencies must be strictly increasing".into()));
        }
        prev = r[0].1;
    }
    let best = records
        .iter()
        .min_by(|a, b| {
            (a[0].1 * unit - freq_hz)
                .abs()
                .total_cmp(&(b[0].1 * unit - freq_hz).abs())
        })
        .expect("at least one record");
    let values: Vec<Complex64> = best[1..]
        .chunks(2)
        .map(|p| to_complex(format, p[0].1, p[1].1))
        .collect();
    let s = CMatrix::from_fn(ports, ports, |i, j| {
        let k = if ports == 2 { j * 2 + i } else { i * ports + j };
        values[k]
    });
    let net = NetworkData::new(
        Some(s),
        None,
        vec![Complex64::new(z0, 0.0); ports],
        FREE_SPACE_IMPEDANCE,
    )
    .map_err(|e| (best[0].0, e.to_string()))?;
    Ok((net, best[0].1 * unit))
}

fn to_complex(format: Format, x: f64, y: f64) -> Complex64 {
    match format {
        Format::RealImag => Complex64::new(x, y),
        Format::MagAngle => Complex64::from_polar(x, y.to_radians()),
        Format::DbAngle => Complex64::from_polar(10f64.powf(x / 20.0), y.to_radians()),
    }
}
