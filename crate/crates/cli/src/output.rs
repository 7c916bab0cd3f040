use std::fs::File;
use std::path::{Path, PathBuf};

use dglab::degiorgi::{CheckRow, Verdict};
use serde::Serialize;

use crate::error::{io_err, Result};

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

/// Files written by one run plus the number of failed verdicts.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub failed: usize,
    pub rows: usize,
}

impl RunSummary {
    pub fn count(&mut self, verdict: Verdict) {
        self.rows += 1;
        if verdict == Verdict::Fail {
            self.failed += 1;
        }
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>], summary: &mut RunSummary) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush().map_err(io_err(path))?;
    summary.files.push(path.to_path_buf());
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize, summary: &mut RunSummary) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable report");
    std::fs::write(path, text + "\n").map_err(io_err(path))?;
    summary.files.push(path.to_path_buf());
    Ok(())
}

pub const CHECK_HEADER: [&str; 8] = ["check", "family", "R", "rho", "sigma", "tau", "value", "verdict"];

pub fn check_record(row: &CheckRow) -> Vec<String> {
    vec![
        row.check.clone(),
        row.family.clone(),
        opt_float(row.big_r),
        opt_float(row.rho),
        opt_float(row.sigma),
        opt_float(row.tau),
        float(row.value),
        row.verdict.to_string(),
    ]
}
