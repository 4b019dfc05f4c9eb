//! JSON files holding a Hadamard matrix:
//!
//! ```json
//! { "d": 2, "label": "z2", "entries": [[[0.707, 0.0], [0.707, 0.0]], [[0.707, 0.0], [-0.707, 0.0]]] }
//! ```
//!
//! Entries include the `1/√d` prefactor. Reals are written with 17
//! significant digits so that a save/load cycle is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use crate::report::ValidationReport;

#[derive(Debug, Clone, PartialEq)]
pub struct HadamardFile {
    pub d: usize,
    pub label: String,
    pub matrix: ComplexMatrix,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    d: usize,
    #[serde(default)]
    label: String,
    entries: Vec<Vec<[f64; 2]>>,
}

/// Formats a real with 17 significant digits.
pub(crate) fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn hadamard_to_json(m: &ComplexMatrix, label: &str) -> Result<String> {
    if !m.is_square() {
        return Err(Error::InvalidArgument(format!(
            "matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if let Some(z) = m.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite entry {z}")));
    }
    let d = m.nrows();
    let mut out = String::new();
    writeln!(out, "{{").unwrap();
    writeln!(out, "  \"d\": {d},").unwrap();
    writeln!(out, "  \"label\": {},", serde_json::to_string(label).unwrap()).unwrap();
    writeln!(out, "  \"entries\": [").unwrap();
    for x in 0..d {
        let row: Vec<String> = (0..d)
            .map(|y| {
                let z = m[(x, y)];
                format!("[{}, {}]", fmt_real(z.re), fmt_real(z.im))
            })
            .collect();
        let sep = if x + 1 < d { "," } else { "" };
        writeln!(out, "    [{}]{sep}", row.join(", ")).unwrap();
    }
    writeln!(out, "  ]").unwrap();
    writeln!(out, "}}").unwrap();
    Ok(out)
}

pub fn hadamard_from_json(text: &str) -> Result<HadamardFile> {
    let raw: RawFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let rows = raw.entries.len();
    for (x, row) in raw.entries.iter().enumerate() {
        if row.len() != raw.entries[0].len() {
            return Err(Error::Parse(format!(
                "field entries: row {x} has {} entries, row 0 has {}",
                row.len(),
                raw.entries[0].len()
            )));
        }
    }
    let cols = raw.entries.first().map_or(0, Vec::len);
    if rows != cols || rows == 0 {
        let mut report = ValidationReport::new();
        report.push_verdict("square", false, Some(format!("{rows}x{cols}")));
        return Err(Error::InvalidMatrix {
            summary: format!("Hadamard matrix must be square and non-empty, got {rows}x{cols}"),
            report: Box::new(report),
        });
    }
    if raw.d != rows {
        return Err(Error::Parse(format!(
            "field d: declared {} but entries are {rows}x{rows}",
            raw.d
        )));
    }
    let matrix = DMatrix::from_fn(rows, rows, |x, y| {
        let [re, im] = raw.entries[x][y];
        Complex64::new(re, im)
    });
    Ok(HadamardFile {
        d: rows,
        label: raw.label,
        matrix,
    })
}

pub fn save_hadamard(m: &ComplexMatrix, label: &str, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, hadamard_to_json(m, label)?)?;
    Ok(())
}

pub fn load_hadamard(path: impl AsRef<Path>) -> Result<HadamardFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    hadamard_from_json(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}
