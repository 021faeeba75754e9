//! Feature-matrix CSV parsing and float formatting.
//!
//! Format: UTF-8 CSV with header `id,f0,f1,...,f{d-1}`, one row per vector.
//! Identifiers must not contain commas; floats are 64-bit binary floating
//! point. All floats are printed with 17 significant digits so parsing the
//! output recovers the in-memory values exactly.

use std::path::Path;

use covlab::select::FeatureMatrix;
use covlab::{Error, Result};
use ndarray::{Array1, Array2};

/// 17-significant-digit scientific notation; round-trips any finite f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::data(format!("cannot read {}: {e}", path.display())))
}

/// Load a feature matrix, naming the offending 1-based line on failure.
pub fn load_feature_matrix(path: &Path) -> Result<FeatureMatrix> {
    let text = read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::data(format!("{}: line 1: empty file", path.display())))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 2 || cols[0] != "id" {
        return Err(Error::data(format!(
            "{}: line 1: header must be 'id,f0,f1,...', got '{header}'",
            path.display()
        )));
    }
    let d = cols.len() - 1;
    for (j, col) in cols.iter().skip(1).enumerate() {
        if *col != format!("f{j}") {
            return Err(Error::data(format!(
                "{}: line 1: expected column 'f{j}', got '{col}'",
                path.display()
            )));
        }
    }

    let mut ids = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 1 {
            return Err(Error::data(format!(
                "{}: line {}: expected {} fields, got {}",
                path.display(),
                lineno + 1,
                d + 1,
                fields.len()
            )));
        }
        ids.push(fields[0].to_string());
        for field in &fields[1..] {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::data(format!(
                    "{}: line {}: cannot parse '{field}' as a float",
                    path.display(),
                    lineno + 1
                ))
            })?;
            values.push(v);
        }
    }
    let rows = ids.len();
    let data = Array2::from_shape_vec((rows, d), values)
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    FeatureMatrix::new(ids, data).map_err(|e| Error::data(format!("{}: {e}", path.display())))
}

/// Load a reference vector: one CSV row of floats, no header.
pub fn load_ref_vector(path: &Path) -> Result<Array1<f64>> {
    let text = read_to_string(path)?;
    let mut rows = text.lines().filter(|l| !l.trim().is_empty());
    let line = rows
        .next()
        .ok_or_else(|| Error::data(format!("{}: empty reference vector file", path.display())))?;
    if rows.next().is_some() {
        return Err(Error::data(format!(
            "{}: reference vector file must contain a single row",
            path.display()
        )));
    }
    let values = line
        .split(',')
        .map(|f| {
            f.trim().parse::<f64>().map_err(|_| {
                Error::data(format!("{}: cannot parse '{f}' as a float", path.display()))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Array1::from_vec(values))
}

/// Parse a comma-separated list of floats from a flag value.
pub fn parse_float_list(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|_| Error::param(format!("cannot parse '{f}' as a float")))
        })
        .collect()
}
