use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dglab::degiorgi::Verdict;

use crate::config::ReportConfig;
use crate::error::{CliError, Result};
use crate::output::{write_csv, RunSummary};

#[derive(Default)]
struct Tally {
    pass: usize,
    fail: usize,
}

/// Counts verdicts per `(file, check)`; files without a `check` column are
/// tallied under their stem.
fn tally(path: &Path, into: &mut BTreeMap<(String, String), Tally>) -> Result<()> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let verdict = column("verdict")
        .ok_or_else(|| CliError::Config(format!("{} has no verdict column", path.display())))?;
    let check = column("check");
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    for record in reader.records() {
        let record = record?;
        let name = check.and_then(|i| record.get(i)).unwrap_or(&stem).to_string();
        let t = into.entry((stem.clone(), name)).or_default();
        match record.get(verdict) {
            Some("PASS") => t.pass += 1,
            Some("FAIL") => t.fail += 1,
            other => {
                return Err(CliError::Config(format!("{}: unexpected verdict {other:?}", path.display())));
            }
        }
    }
    Ok(())
}

pub fn run(cfg: &ReportConfig, base: &Path, out: &Path) -> Result<RunSummary> {
    let mut tallies = BTreeMap::new();
    for input in &cfg.inputs {
        let path: PathBuf = if input.is_absolute() { input.clone() } else { base.join(input) };
        if !path.is_file() {
            return Err(CliError::Config(format!("missing input {}", path.display())));
        }
        tally(&path, &mut tallies)?;
    }
    let mut summary = RunSummary::default();
    let table: Vec<Vec<String>> = tallies
        .iter()
        .map(|((file, check), t)| {
            let verdict = Verdict::from_bool(t.fail == 0);
            summary.count(verdict);
            vec![file.clone(), check.clone(), t.pass.to_string(), t.fail.to_string(), verdict.to_string()]
        })
        .collect();
    write_csv(&out.join("summary.csv"), &["source", "check", "pass", "fail", "verdict"], &table, &mut summary)?;
    for row in &table {
        println!("{:<16} {:<24} pass {:>4}  fail {:>4}  {}", row[0], row[1], row[2], row[3], row[4]);
    }
    Ok(summary)
}
