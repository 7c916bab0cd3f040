use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{ScalarField, UniformGrid};
use crate::scalar::Scalar;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    lower: Vec<f64>,
    upper: Vec<f64>,
    cells: Vec<usize>,
    count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<String>,
}

/// Writes a one-line JSON grid header followed by the node values as raw
/// little-endian `f64`.
pub fn write_field<T: Scalar, W: Write>(field: &ScalarField<T>, mut out: W) -> std::io::Result<()> {
    let grid = field.grid();
    let header = Header {
        lower: grid.lower().iter().map(|v| v.as_f64()).collect(),
        upper: grid.upper().iter().map(|v| v.as_f64()).collect(),
        cells: grid.cells().to_vec(),
        count: field.values().len(),
        source: field.source().map(str::to_owned),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for v in field.values() {
        out.write_all(&v.as_f64().to_le_bytes())?;
    }
    out.flush()
}

pub fn read_field<T: Scalar, R: BufRead>(mut input: R) -> Result<ScalarField<T>> {
    let bad = |e: &dyn std::fmt::Display| LabError::Inconsistent(format!("malformed field file: {e}"));
    let mut line = String::new();
    input.read_line(&mut line).map_err(|e| bad(&e))?;
    let header: Header = serde_json::from_str(&line).map_err(|e| bad(&e))?;
    let lower: Vec<T> = header.lower.iter().map(|&v| T::of(v)).collect();
    let upper: Vec<T> = header.upper.iter().map(|&v| T::of(v)).collect();
    let grid = Arc::new(UniformGrid::new(&lower, &upper, &header.cells)?);
    if grid.node_count() != header.count {
        return Err(LabError::GridMismatch);
    }
    let mut bytes = vec![0u8; header.count * 8];
    input.read_exact(&mut bytes).map_err(|e| bad(&e))?;
    let values = bytes
        .chunks_exact(8)
        .map(|c| T::of(f64::from_le_bytes(c.try_into().expect("8-byte chunk"))))
        .collect();
    let field = ScalarField::new(&grid, values)?;
    Ok(match header.source {
        Some(s) => field.with_source(s),
        None => field,
    })
}
