use std::path::Path;
use std::sync::Arc;

use dglab::capacity::{fatness_ratio, DEFAULT_TOLERANCE};
use dglab::counterexamples::FamilyKind;
use dglab::degiorgi::{
    default_sigma, degiorgi_lemma_check, log_estimate_report, sup_bound_ratio, theta0, weak_harnack_ratio, CheckRow,
    Verdict,
};
use dglab::geometry::MaskTag;
use dglab::solver::{caccioppoli_data, Sign};
use dglab::{Family, ScalarField, SetMask, UniformGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::DgcheckConfig;
use crate::error::{CliError, Result};
use crate::output::{check_record, write_csv, RunSummary, CHECK_HEADER};

/// Vanishing set of the family on `grid`: the half-space `{x1 <= 0}` or the
/// one-cell neighbourhood of `{x1 = x2 = 0}`.
fn vanishing_set(family: &Family, grid: &Arc<UniformGrid>) -> SetMask {
    match family.kind() {
        FamilyKind::Quartic4d => {
            let half: Vec<f64> = grid.spacing().iter().map(|h| h / 2.0).collect();
            SetMask::from_predicate(grid, MaskTag::Custom("x1=x2=0".into()), |x| {
                x[0].abs() <= half[0] && x[1].abs() <= half[1]
            })
        }
        _ => SetMask::from_predicate(grid, MaskTag::Custom("x1<=0".into()), |x| x[0] <= 0.0),
    }
}

fn sampled_field(family: &Family, h: f64, half_width: f64) -> Result<ScalarField> {
    let g = Arc::new(UniformGrid::centered(family.dim(), half_width, h)?);
    let mut err = None;
    let u = ScalarField::from_fn(&g, |x| {
        if !family.in_positivity_domain(x) {
            return 0.0;
        }
        family.evaluate_or_limit(x).unwrap_or_else(|e| {
            err.get_or_insert(e);
            0.0
        })
    })?;
    match err {
        Some(e) => Err(e.into()),
        None => Ok(u.with_source(family.kind().id())),
    }
}

fn row(check: &str, family: &Family, r: Option<f64>, rho: Option<f64>, sigma: Option<f64>, tau: Option<f64>, value: f64, ok: bool) -> CheckRow {
    CheckRow {
        check: check.into(),
        family: family.kind().to_string(),
        big_r: r,
        rho,
        sigma,
        tau,
        value,
        verdict: Verdict::from_bool(ok),
    }
}

fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

fn ball_sup(u: &ScalarField, c: &[f64], r: f64) -> Result<f64> {
    Ok(u.max_over(&SetMask::ball(u.grid(), c, r))?.unwrap_or(0.0))
}

fn with_spread(
    mut rows: Vec<CheckRow>,
    check: &str,
    family: &Family,
    limit: f64,
    sigma: Option<f64>,
    tau: Option<f64>,
) -> Vec<CheckRow> {
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let s = spread(&values);
    rows.push(row(check, family, None, None, sigma, tau, s, s < limit));
    rows
}

pub fn run(cfg: &DgcheckConfig, out: &Path) -> Result<RunSummary> {
    let family = cfg.family.build()?;
    let n = family.dim();
    let p = family.power();
    let hw = cfg.half_width;
    if let Some(&r) = cfg.radii.iter().find(|&&r| !(r > 0.0 && 2.0 * r <= hw)) {
        return Err(CliError::Config(format!("radius {r} needs 0 < 2R <= half_width = {hw}")));
    }
    let u = sampled_field(&family, cfg.h, hw)?;
    let c = vec![0.0; n];

    let harnack = cfg
        .radii
        .par_iter()
        .map(|&rho| {
            let mu = ball_sup(&u, &c, 2.0 * rho)?;
            let v = u.map(|x| mu - x)?;
            let rep = weak_harnack_ratio(&v, cfg.tau, cfg.sigma, cfg.eta, rho, &c)?;
            Ok(row("weak_harnack", &family, None, Some(rho), Some(cfg.sigma), Some(cfg.tau), rep.ratio, rep.ratio.is_finite()))
        })
        .collect::<Result<Vec<_>>>()?;
    let harnack = with_spread(harnack, "weak_harnack_spread", &family, cfg.harnack_spread, Some(cfg.sigma), Some(cfg.tau));

    let sup = cfg
        .radii
        .par_iter()
        .map(|&rho| {
            let ratio = sup_bound_ratio(&u, cfg.sigma, cfg.q, rho, &c)?;
            Ok(row("sup_bound", &family, None, Some(rho), Some(cfg.sigma), None, ratio, ratio.is_finite()))
        })
        .collect::<Result<Vec<_>>>()?;
    let sup = with_spread(sup, "sup_bound_spread", &family, cfg.sup_spread, Some(cfg.sigma), None);

    let log_sigma = default_sigma(p);
    let log = cfg
        .radii
        .par_iter()
        .map(|&r| {
            let g = Arc::new(UniformGrid::centered(n, 2.0 * r, r / cfg.cells_per_radius as f64)?);
            let delta = fatness_ratio(&vanishing_set(&family, &g), &c, r, p, DEFAULT_TOLERANCE)?.ratio;
            let rep = log_estimate_report(&u, ball_sup(&u, &c, 2.0 * r)?, log_sigma, r, p, delta, &c)?;
            let ok = rep.normalized.is_finite() && rep.normalized > 0.0;
            Ok(row("log_estimate", &family, Some(r), None, Some(log_sigma), None, rep.normalized, ok))
        })
        .collect::<Result<Vec<_>>>()?;
    let log = with_spread(log, "log_estimate_spread", &family, cfg.log_spread, Some(log_sigma), None);

    // random configurations are drawn up front so the pool size cannot matter
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let centre = |rng: &mut ChaCha8Rng, margin: f64| -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-hw + margin..=hw - margin)).collect()
    };
    let lemma_cfgs: Vec<(Vec<f64>, f64, u32)> = (0..cfg.samples)
        .map(|_| {
            let r = rng.gen_range(hw / 16.0..hw / 4.0);
            (centre(&mut rng, 2.0 * r), r, rng.gen_range(2..=6))
        })
        .collect();
    let energy_cfgs: Vec<(Vec<f64>, f64, f64, f64)> = (0..cfg.samples)
        .map(|_| {
            let rho = rng.gen_range(hw / 16.0..hw / 4.0);
            (centre(&mut rng, rho), rho, rng.gen_range(0.2..0.8), rng.gen_range(0.0..1.0))
        })
        .collect();
    let theta = theta0(n, p, 1.0, 1.0)?.value;
    let lemma = lemma_cfgs
        .par_iter()
        .map(|(x, r, s)| {
            let v = degiorgi_lemma_check(&u, x, *r, *s, theta)?;
            Ok(row("degiorgi_lemma", &family, Some(*r), None, None, None, v.level_fraction, v.consistent))
        })
        .collect::<Result<Vec<_>>>()?;
    let energy = energy_cfgs
        .par_iter()
        .enumerate()
        .map(|(i, (x, rho, sigma, t))| {
            let k = t * ball_sup(&u, x, *rho)?;
            let sign = if i % 2 == 0 { Sign::Plus } else { Sign::Minus };
            let gamma = caccioppoli_data(&u, x, *rho, *sigma, k, sign, p)?.implied_gamma();
            Ok(row("caccioppoli", &family, None, Some(*rho), Some(*sigma), None, gamma, gamma.is_finite()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summary = RunSummary::default();
    let table: Vec<Vec<String>> = [harnack, sup, log, lemma, energy]
        .iter()
        .flatten()
        .map(|r| {
            summary.count(r.verdict);
            check_record(r)
        })
        .collect();
    write_csv(&out.join("dgcheck.csv"), &CHECK_HEADER, &table, &mut summary)?;
    Ok(summary)
}
