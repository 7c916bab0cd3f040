use std::path::Path;
use std::sync::Arc;

use dglab::capacity::{cap_ball_annulus, cap_estimate_variational, CapacityRecord};
use dglab::degiorgi::Verdict;
use dglab::{CondenserProblem, SetMask, UniformGrid};
use rayon::prelude::*;

use crate::config::{CapacityConfig, CondenserSpec, InnerSet};
use crate::error::{CliError, Result};
use crate::output::{float, opt_float, write_csv, write_json, RunSummary};

struct Row {
    spec: CondenserSpec,
    analytic: Option<f64>,
    record: CapacityRecord,
}

fn estimate(spec: &CondenserSpec, tolerance: f64) -> Result<Row> {
    if spec.h <= 0.0 || spec.outer_radius <= 0.0 {
        return Err(CliError::Config("h and outer_radius must be positive".into()));
    }
    let g = Arc::new(UniformGrid::centered(spec.dim, spec.outer_radius, spec.h)?);
    let c = vec![0.0; spec.dim];
    let (inner, analytic) = match spec.inner {
        InnerSet::Ball { radius } => {
            (SetMask::ball(&g, &c, radius), Some(cap_ball_annulus(spec.p, spec.dim, radius, spec.outer_radius)?))
        }
        InnerSet::Slab { m, radius } => {
            (SetMask::hyperplane_slab(&g, m)?.intersect(&SetMask::ball(&g, &c, radius))?, None)
        }
    };
    let problem = CondenserProblem::new(inner, SetMask::open_ball(&g, &c, spec.outer_radius), spec.p)?;
    let record = cap_estimate_variational(&problem, tolerance, None)?.record();
    Ok(Row { spec: spec.clone(), analytic, record })
}

fn inner_label(inner: &InnerSet) -> (String, f64) {
    match *inner {
        InnerSet::Ball { radius } => ("ball".into(), radius),
        InnerSet::Slab { m, radius } => (format!("slab{m}"), radius),
    }
}

pub fn run(cfg: &CapacityConfig, out: &Path) -> Result<RunSummary> {
    let rows: Vec<Row> = cfg.condensers.par_iter().map(|s| estimate(s, cfg.tolerance)).collect::<Result<_>>()?;
    let mut summary = RunSummary::default();
    let mut table = Vec::new();
    for row in &rows {
        let rel = row.analytic.map(|a| (row.record.value - a).abs() / a);
        let verdict = Verdict::from_bool(row.record.converged && rel.is_none_or(|e| e <= cfg.acceptance));
        summary.count(verdict);
        let (shape, radius) = inner_label(&row.spec.inner);
        table.push(vec![
            row.spec.dim.to_string(),
            float(row.spec.p),
            float(row.spec.h),
            shape,
            float(radius),
            float(row.spec.outer_radius),
            opt_float(row.analytic),
            float(row.record.value),
            opt_float(rel),
            row.record.iterations.to_string(),
            float(row.record.energy_gap),
            row.record.converged.to_string(),
            verdict.to_string(),
        ]);
    }
    let header = [
        "N", "p", "h", "inner", "inner_radius", "outer_radius", "analytic", "estimate", "rel_error", "iterations",
        "energy_gap", "converged", "verdict",
    ];
    write_csv(&out.join("capacity.csv"), &header, &table, &mut summary)?;
    let records: Vec<&CapacityRecord> = rows.iter().map(|r| &r.record).collect();
    write_json(&out.join("capacity.json"), &records, &mut summary)?;
    Ok(summary)
}
