use std::path::Path;
use std::sync::Arc;

use dglab::degiorgi::{harnack_chain_eta, Verdict};
use dglab::growth::{dyadic_radii, eta_max, fit_exponent, iteration_exponent, mu_plus_curve, GrowthSource};
use dglab::{Family, FitResult, GrowthCurve, ScalarField, UniformGrid};
use serde::Serialize;

use crate::config::GrowthConfig;
use crate::error::{CliError, Result};
use crate::output::{float, opt_float, write_csv, write_json, RunSummary};

#[derive(Serialize)]
struct FitReport {
    source: String,
    fit: FitResult,
    chain_eta: f64,
    iteration_exponent: f64,
    certificate_exponent: f64,
    expected: f64,
    verdict: Verdict,
}

fn fit_report(curve: &GrowthCurve, source: &GrowthSource<'_, f64>, expected: f64, tolerance: f64) -> Result<FitReport> {
    let fit = fit_exponent(curve)?;
    let big_r = *curve.radii().last().expect("fit needs radii");
    let chain_eta = harnack_chain_eta(source, big_r, big_r / 4.0)?;
    let exponent = iteration_exponent(chain_eta, 4.0)?;
    let certificate = iteration_exponent(eta_max(chain_eta)?, 4.0)?;
    let ok = (fit.exponent - expected).abs() <= tolerance && fit.exponent > 0.0 && fit.exponent < 1.0;
    Ok(FitReport {
        source: curve.source().to_string(),
        fit,
        chain_eta,
        iteration_exponent: exponent,
        certificate_exponent: certificate,
        expected,
        verdict: Verdict::from_bool(ok),
    })
}

fn sampled(family: &Family, h: f64, half_width: f64) -> Result<ScalarField> {
    let g = Arc::new(UniformGrid::centered(family.dim(), half_width, h)?);
    let values = (0..g.node_count())
        .map(|i| {
            let x = g.coords(i);
            if family.in_positivity_domain(&x) {
                family.evaluate_or_limit(&x)
            } else {
                Ok(0.0)
            }
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(ScalarField::new(&g, values)?.with_source(format!("sampled {}", family.kind())))
}

pub fn run(cfg: &GrowthConfig, out: &Path) -> Result<RunSummary> {
    let family = cfg.family.build()?;
    let radii = cfg.radii.clone().unwrap_or_else(|| dyadic_radii(cfg.base, cfg.count));
    if radii.len() < 3 {
        return Err(CliError::Config("growth needs at least 3 radii".into()));
    }
    let expected = family.growth_exponent();
    let analytic = GrowthSource::Analytic(&family);
    let mut curves = vec![mu_plus_curve(&analytic, &radii)?];
    let mut reports = vec![fit_report(&curves[0], &analytic, expected, cfg.tolerance)?];
    if let Some(s) = &cfg.field {
        let u = sampled(&family, s.h, s.half_width)?;
        let c = vec![0.0; family.dim()];
        let source = GrowthSource::Field { field: &u, center: &c, domain: None };
        let curve = mu_plus_curve(&source, &radii)?;
        reports.push(fit_report(&curve, &source, expected, s.tolerance)?);
        curves.push(curve);
    }
    let mut summary = RunSummary::default();
    let mut table = Vec::new();
    for curve in &curves {
        let slopes = curve.pair_slopes();
        for (i, (&r, &m)) in curve.radii().iter().zip(curve.sup_values()).enumerate() {
            let slope = if i == 0 { None } else { slopes[i - 1] };
            table.push(vec![curve.source().to_string(), float(r), float(m), opt_float(slope)]);
        }
    }
    write_csv(&out.join("growth.csv"), &["source", "r", "mu_plus", "pair_slope"], &table, &mut summary)?;
    let fits: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            summary.count(r.verdict);
            vec![
                r.source.clone(),
                float(r.fit.exponent),
                float(r.fit.log_intercept),
                float(r.fit.max_residual),
                float(r.fit.tail_liminf_slope),
                float(r.chain_eta),
                float(r.iteration_exponent),
                float(r.certificate_exponent),
                float(r.expected),
                r.verdict.to_string(),
            ]
        })
        .collect();
    let header = [
        "source", "exponent", "log_intercept", "max_residual", "tail_liminf_slope", "chain_eta",
        "iteration_exponent", "certificate_exponent", "expected", "verdict",
    ];
    write_csv(&out.join("growth_fit.csv"), &header, &fits, &mut summary)?;
    write_json(&out.join("growth_fit.json"), &reports, &mut summary)?;
    Ok(summary)
}
