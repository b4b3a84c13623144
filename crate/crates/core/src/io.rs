//! Text formats shared by the library and the command-line tool.
//!
//! Matrices are headerless CSV with one row per sample. Vectors are read
//! from any CSV layout (one column, one row, or a mix) and written as a
//! single column. Numbers are printed in Rust's shortest round-trip form,
//! so reading back yields the identical `f64`.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use thiserror::Error;

use crate::weights::{oscar_weights, slope_weights, WeightVector};
use crate::error::OwlError;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}, line {line}: {msg}")]
    Parse {
        origin: String,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Invalid(#[from] OwlError),
}

impl FormatError {
    pub(crate) fn parse(origin: &str, line: usize, msg: impl Into<String>) -> Self {
        FormatError::Parse {
            origin: origin.to_string(),
            line,
            msg: msg.into(),
        }
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_rows(text: &str, origin: &str) -> Result<Vec<Vec<f64>>, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| FormatError::parse(origin, k + 1, e.to_string()))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let line = record.position().map_or(k + 1, |p| p.line() as usize);
        let row = record
            .iter()
            .map(|field| {
                let v: f64 = field
                    .parse()
                    .map_err(|_| FormatError::parse(origin, line, format!("not a number: {field:?}")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(FormatError::parse(origin, line, format!("non-finite value: {field:?}")))
                }
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn parse_matrix(text: &str, origin: &str) -> Result<Array2<f64>, FormatError> {
    let rows = parse_rows(text, origin)?;
    let Some(first) = rows.first() else {
        return Err(FormatError::parse(origin, 1, "matrix is empty"));
    };
    let cols = first.len();
    if let Some(k) = rows.iter().position(|r| r.len() != cols) {
        return Err(FormatError::parse(
            origin,
            k + 1,
            format!("expected {cols} columns, found {}", rows[k].len()),
        ));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(Array2::from_shape_vec((flat.len() / cols, cols), flat).expect("rectangular rows"))
}

pub fn parse_vector(text: &str, origin: &str) -> Result<Array1<f64>, FormatError> {
    let v: Vec<f64> = parse_rows(text, origin)?.into_iter().flatten().collect();
    if v.is_empty() {
        return Err(FormatError::parse(origin, 1, "vector is empty"));
    }
    Ok(Array1::from(v))
}

pub fn read_matrix(path: &Path) -> Result<Array2<f64>, FormatError> {
    parse_matrix(&read_text(path)?, &path.display().to_string())
}

pub fn read_vector(path: &Path) -> Result<Array1<f64>, FormatError> {
    parse_vector(&read_text(path)?, &path.display().to_string())
}

/// Shortest round-trip text for `v`, in plain or exponent notation
/// whichever is shorter (`0.25`, `1e-20`, `2`).
pub fn format_number(v: f64) -> String {
    let plain = format!("{v}");
    let exp = format!("{v:e}");
    if exp.len() < plain.len() {
        exp
    } else {
        plain
    }
}

/// Comma-joined values on one line (no trailing newline).
pub fn format_row(values: &[f64]) -> String {
    let mut out = String::new();
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(&format_number(*v));
    }
    out
}

pub fn format_matrix(m: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        out.push_str(&format_row(&row.to_vec()));
        out.push('\n');
    }
    out
}

pub fn format_vector_column(v: &Array1<f64>) -> String {
    v.iter().map(|x| format_number(*x) + "\n").collect()
}

pub fn write_matrix(path: &Path, m: &Array2<f64>) -> Result<(), FormatError> {
    write_text(path, &format_matrix(m))
}

pub fn write_vector(path: &Path, v: &Array1<f64>) -> Result<(), FormatError> {
    write_text(path, &format_vector_column(v))
}

/// How to build a weight vector once the dimension is known.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Uniform(f64),
    Oscar { lambda1: f64, lambda2: f64 },
    Slope(f64),
    Values(Vec<f64>),
}

impl WeightSpec {
    /// Parses `uniform[:λ]`, `oscar:λ1,λ2`, `slope:q` or `file:PATH` (a
    /// vector file, read immediately).
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let origin = "weight spec";
        let text = text.trim();
        let (kind, args) = text.split_once(':').unwrap_or((text, ""));
        let numbers = || -> Result<Vec<f64>, FormatError> {
            args.split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| FormatError::parse(origin, 1, format!("not a number: {s:?}")))
                })
                .collect()
        };
        match kind.trim() {
            "uniform" => match numbers()?.as_slice() {
                [] => Ok(WeightSpec::Uniform(1.0)),
                [l] => Ok(WeightSpec::Uniform(*l)),
                _ => Err(FormatError::parse(origin, 1, "uniform takes one value")),
            },
            "oscar" => match numbers()?.as_slice() {
                [l1, l2] => Ok(WeightSpec::Oscar {
                    lambda1: *l1,
                    lambda2: *l2,
                }),
                _ => Err(FormatError::parse(origin, 1, "oscar takes λ1,λ2")),
            },
            "slope" => match numbers()?.as_slice() {
                [q] => Ok(WeightSpec::Slope(*q)),
                _ => Err(FormatError::parse(origin, 1, "slope takes one level q")),
            },
            "file" => Ok(WeightSpec::Values(read_vector(Path::new(args.trim()))?.to_vec())),
            other => Err(FormatError::parse(
                origin,
                1,
                format!("unknown weight kind {other:?} (expected uniform, oscar, slope or file)"),
            )),
        }
    }

    pub fn build(&self, p: usize) -> Result<WeightVector, OwlError> {
        match self {
            WeightSpec::Uniform(l) => WeightVector::uniform(p, *l),
            WeightSpec::Oscar { lambda1, lambda2 } => oscar_weights(p, *lambda1, *lambda2),
            WeightSpec::Slope(q) => slope_weights(p, *q),
            WeightSpec::Values(v) => {
                if v.len() != p {
                    return Err(OwlError::DimensionMismatch {
                        what: "weight file",
                        expected: p,
                        got: v.len(),
                    });
                }
                WeightVector::new(v.clone())
            }
        }
    }
}

impl std::fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WeightSpec::Uniform(l) => write!(f, "uniform:{l}"),
            WeightSpec::Oscar { lambda1, lambda2 } => write!(f, "oscar:{lambda1},{lambda2}"),
            WeightSpec::Slope(q) => write!(f, "slope:{q}"),
            WeightSpec::Values(v) => write!(f, "values:{}", format_row(v)),
        }
    }
}
