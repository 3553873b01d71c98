//! JSON plumbing shared by the file formats: complex numbers travel as
//! `[re, im]` pairs, matrices as row-major nested arrays of pairs.

use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};

pub type Pair = [f64; 2];

pub fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

pub fn complex(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn pairs(v: &[Complex64]) -> Vec<Pair> {
    v.iter().copied().map(pair).collect()
}

pub fn vector_pairs(v: &CVector) -> Vec<Pair> {
    v.iter().copied().map(pair).collect()
}

pub fn complexes(v: &[Pair]) -> Vec<Complex64> {
    v.iter().map(complex).collect()
}

pub fn matrix_pairs(m: &CMatrix) -> Vec<Vec<Pair>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect())
        .collect()
}

/// Square matrix from nested pairs; `what` names the field in errors.
pub fn matrix(rows: &[Vec<Pair>], m: usize, what: &str) -> std::result::Result<CMatrix, String> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        return Err(format!("`{what}` must be a {m}x{m} matrix"));
    }
    Ok(CMatrix::from_fn(m, m, |i, j| complex(&rows[i][j])))
}

pub fn read<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

/// Pretty-printed JSON with a trailing newline. serde_json prints the
/// shortest round-tripping decimal for every double, so output is byte-stable.
pub fn to_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file formats always serialize");
    s.push('\n');
    s
}

pub fn write<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_string(value)).map_err(|e| Error::io(path, e))
}
