use std::f64::consts::PI;
use std::path::Path;

use dglab::counterexamples::{weak_subsolution_check, Bump, FamilyKind};
use dglab::degiorgi::Verdict;
use dglab::Family;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::CounterexampleConfig;
use crate::error::{CliError, Result};
use crate::output::{float, write_csv, RunSummary};

const EIGEN_TOLERANCE: f64 = 1e-10;
/// `|div flux|` relative to the flux size, linear families.
const LINEAR_RESIDUAL_TOLERANCE: f64 = 1e-5;
/// Relative error of the quartic residual against its closed form.
const QUARTIC_RESIDUAL_TOLERANCE: f64 = 1e-4;
const WEAK_FORM_TOLERANCE: f64 = 1e-8;

/// Point with `0.2 <= |x| <= 3`, kept `0.3` away from the quartic axis.
fn sample_point(family: &Family, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let dim = family.dim();
    loop {
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let planar = x[0].hypot(x[1]);
        if (0.2..=3.0).contains(&r) && (family.kind() != FamilyKind::Quartic4d || planar >= 0.3) {
            return x;
        }
    }
}

fn sample_bump(rng: &mut ChaCha8Rng) -> Bump<f64> {
    let radius = rng.gen_range(0.2..0.6);
    let angle = rng.gen_range(0.0..2.0 * PI);
    let planar = radius + rng.gen_range(0.2..1.0);
    let center = vec![planar * angle.cos(), planar * angle.sin(), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    Bump::new(center, radius)
}

struct Row {
    check: &'static str,
    index: usize,
    value: f64,
    threshold: f64,
}

fn point_rows(family: &Family, x: &[f64], index: usize, step: f64) -> Result<Vec<Row>> {
    let ev = family.coefficient_matrix(x)?.eigenvalues();
    let eig = ev.iter().zip(family.expected_eigenvalues()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let residual = family.residual_strong(x, step)?;
    let row = if family.kind() == FamilyKind::Quartic4d {
        let exact = family.divergence_closed_form(x)?;
        Row { check: "residual_rel_error", index, value: (residual - exact).abs() / exact.abs(), threshold: QUARTIC_RESIDUAL_TOLERANCE }
    } else {
        Row { check: "residual", index, value: residual.abs() / family.flux_scale(x)?, threshold: LINEAR_RESIDUAL_TOLERANCE }
    };
    Ok(vec![Row { check: "eigenvalue_error", index, value: eig, threshold: EIGEN_TOLERANCE }, row])
}

pub fn run(cfg: &CounterexampleConfig, out: &Path) -> Result<RunSummary> {
    let family = cfg.family.build()?;
    if !(cfg.step > 0.0) {
        return Err(CliError::Config("step must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let points: Vec<Vec<f64>> = (0..cfg.points).map(|_| sample_point(&family, &mut rng)).collect();
    let mut rows: Vec<Row> = points
        .par_iter()
        .enumerate()
        .map(|(i, x)| point_rows(&family, x, i, cfg.step))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    if family.kind() == FamilyKind::Quartic4d {
        let bumps: Vec<Bump<f64>> = (0..cfg.bumps).map(|_| sample_bump(&mut rng)).collect();
        let weak = bumps
            .par_iter()
            .map(|b| weak_subsolution_check(&family, b, cfg.bump_cells))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        rows.extend(weak.into_iter().enumerate().map(|(index, value)| Row {
            check: "weak_form",
            index,
            value,
            threshold: WEAK_FORM_TOLERANCE,
        }));
    }
    let mut summary = RunSummary::default();
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let verdict = Verdict::from_bool(r.value <= r.threshold);
            summary.count(verdict);
            vec![
                r.check.to_string(),
                family.kind().to_string(),
                float(family.parameter()),
                r.index.to_string(),
                float(r.value),
                float(r.threshold),
                verdict.to_string(),
            ]
        })
        .collect();
    let header = ["check", "family", "parameter", "index", "value", "threshold", "verdict"];
    write_csv(&out.join("counterexample.csv"), &header, &table, &mut summary)?;
    Ok(summary)
}
