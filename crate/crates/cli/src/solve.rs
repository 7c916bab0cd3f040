use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use dglab::counterexamples::FamilyKind;
use dglab::degiorgi::Verdict;
use dglab::solver::{solve_linear, write_field, LinearSolution};
use dglab::{DirichletProblem, Family, UniformGrid};
use rayon::prelude::*;

use crate::config::SolveConfig;
use crate::error::{io_err, CliError, Result};
use crate::output::{float, opt_float, write_csv, RunSummary};

/// Discrete maximum principle slack.
const EXCESS_TOLERANCE: f64 = 1e-10;

fn default_box(dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut lower = vec![-0.5; dim];
    let mut upper = vec![0.5; dim];
    lower[0] = 0.1;
    upper[0] = 1.1;
    (lower, upper)
}

fn solve_one(family: &Family, lower: &[f64], upper: &[f64], h: f64, cfg: &SolveConfig) -> Result<(LinearSolution<f64>, f64)> {
    if !(h > 0.0) {
        return Err(CliError::Config("spacings must be positive".into()));
    }
    let cells: Vec<usize> = lower.iter().zip(upper).map(|(a, b)| ((b - a) / h).round() as usize).collect();
    let g = Arc::new(UniformGrid::new(lower, upper, &cells)?);
    let sol = solve_linear(&DirichletProblem::for_family(&g, family), cfg.tolerance, cfg.max_iterations)?;
    let mut err = 0.0f64;
    for i in (0..g.node_count()).filter(|&i| !g.is_boundary(i)) {
        err = err.max((sol.field.values()[i] - family.evaluate_or_limit(&g.coords(i))?).abs());
    }
    Ok((sol, err))
}

pub fn run(cfg: &SolveConfig, out: &Path) -> Result<RunSummary> {
    let family = cfg.family.build()?;
    if family.kind() == FamilyKind::Quartic4d {
        return Err(CliError::Config("solve handles the linear families meyers2d and cone3d".into()));
    }
    let (lower, upper) = match (&cfg.lower, &cfg.upper) {
        (Some(l), Some(u)) => (l.clone(), u.clone()),
        (None, None) => default_box(family.dim()),
        _ => return Err(CliError::Config("give both lower and upper, or neither".into())),
    };
    if lower.len() != family.dim() || upper.len() != family.dim() {
        return Err(CliError::Config(format!("{} needs {}-dimensional box corners", family.kind(), family.dim())));
    }
    let solved: Vec<(LinearSolution<f64>, f64)> =
        cfg.spacings.par_iter().map(|&h| solve_one(&family, &lower, &upper, h, cfg)).collect::<Result<_>>()?;
    let mut summary = RunSummary::default();
    let mut table = Vec::new();
    for (i, (sol, err)) in solved.iter().enumerate() {
        let contraction = (i > 0).then(|| solved[i - 1].1 / err);
        let ok = sol.max_principle_excess <= EXCESS_TOLERANCE && contraction.is_none_or(|c| c >= cfg.min_contraction);
        let verdict = Verdict::from_bool(ok);
        summary.count(verdict);
        table.push(vec![
            family.kind().to_string(),
            float(family.parameter()),
            float(cfg.spacings[i]),
            sol.field.grid().node_count().to_string(),
            sol.iterations.to_string(),
            float(sol.relative_residual),
            float(sol.flux_imbalance),
            float(sol.max_principle_excess),
            float(*err),
            opt_float(contraction),
            verdict.to_string(),
        ]);
        if cfg.write_fields {
            let path = out.join(format!("field_{i}.bin"));
            let mut w = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
            write_field(&sol.field, &mut w).and_then(|_| w.flush()).map_err(io_err(&path))?;
            summary.files.push(path);
        }
    }
    let header = [
        "family", "parameter", "h", "nodes", "iterations", "relative_residual", "flux_imbalance",
        "max_principle_excess", "interior_error", "contraction", "verdict",
    ];
    write_csv(&out.join("solve.csv"), &header, &table, &mut summary)?;
    Ok(summary)
}
