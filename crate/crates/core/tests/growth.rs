use std::sync::Arc;

use dglab::degiorgi::harnack_chain_eta;
use dglab::growth::{dyadic_radii, eta_max, fit_exponent, iteration_exponent, mu_plus_curve, GrowthSource};
use dglab::solver::{solve_linear, BoundaryData, Coefficient};
use dglab::{DirichletProblem, Family, GrowthCurve, ScalarField, SetMask, UniformGrid};

fn families() -> Vec<(Family, f64)> {
    vec![
        (Family::meyers(0.5).unwrap(), 0.5),
        (Family::meyers(0.3).unwrap(), 0.3),
        (Family::cone(-0.5).unwrap(), 0.5),
        (Family::cone(-0.2).unwrap(), 0.8),
        (Family::quartic(0.2).unwrap(), 2.0 / 3.0 - 0.2),
        (Family::quartic(1.0 / 3.0).unwrap(), 1.0 / 3.0),
    ]
}

#[test]
fn meyers_sup_values_on_dyadic_radii() {
    let f = Family::meyers(0.5).unwrap();
    let curve = mu_plus_curve(&GrowthSource::Analytic(&f), &dyadic_radii(1.0, 3)).unwrap();
    assert_eq!(curve.radii(), &[1.0, 4.0, 16.0]);
    for (v, e) in curve.sup_values().iter().zip([1.0, 2.0, 4.0]) {
        assert!((v - e).abs() < 1e-14);
    }
}

#[test]
fn analytic_exponents_are_recovered() {
    for (f, expected) in families() {
        let curve = mu_plus_curve(&GrowthSource::Analytic(&f), &dyadic_radii(0.5, 5)).unwrap();
        let fit = fit_exponent(&curve).unwrap();
        assert!((fit.exponent - expected).abs() <= 1e-10, "{}: {}", f.kind(), fit.exponent);
        assert!(fit.exponent > 0.0 && fit.exponent < 1.0);
        assert!(fit.max_residual < 1e-12);
        assert!((fit.tail_liminf_slope - expected).abs() < 1e-10);
    }
}

#[test]
fn quartic_exponent_stays_below_two_thirds() {
    let f = Family::quartic(0.2).unwrap();
    let fit = fit_exponent(&mu_plus_curve(&GrowthSource::Analytic(&f), &dyadic_radii(1.0, 4)).unwrap()).unwrap();
    assert!((fit.exponent - 0.4667).abs() < 1e-4);
    assert!(fit.exponent < 2.0 / 3.0);
}

#[test]
fn fit_is_invariant_under_scaling() {
    let radii = vec![1.0, 3.0, 9.0, 27.0];
    let base: Vec<f64> = radii.iter().map(|r: &f64| 0.7 * r.powf(0.37)).collect();
    let a = fit_exponent(&GrowthCurve::new(radii.clone(), base.clone(), "a").unwrap()).unwrap();
    let scaled_values: Vec<f64> = base.iter().map(|v| 5.0 * v).collect();
    let b = fit_exponent(&GrowthCurve::new(radii.clone(), scaled_values, "b").unwrap()).unwrap();
    let scaled_radii: Vec<f64> = radii.iter().map(|r| 2.5 * r).collect();
    let c = fit_exponent(&GrowthCurve::new(scaled_radii, base, "c").unwrap()).unwrap();
    assert!((a.exponent - 0.37).abs() < 1e-12);
    assert!((b.exponent - a.exponent).abs() < 1e-12 && (c.exponent - a.exponent).abs() < 1e-12);
    assert!((b.log_intercept - a.log_intercept - 5f64.ln()).abs() < 1e-12);
}

#[test]
fn curves_need_three_positive_points() {
    let short = GrowthCurve::new(vec![1.0, 2.0], vec![1.0, 2.0], "short").unwrap();
    assert!(fit_exponent(&short).is_err());
    let zero = GrowthCurve::new(vec![1.0, 2.0, 4.0], vec![0.0, 1.0, 2.0], "zero").unwrap();
    assert!(fit_exponent(&zero).is_err());
    assert!(GrowthCurve::new(vec![1.0, 2.0], vec![2.0, 1.0], "decreasing").is_err());
    assert!(GrowthCurve::new(vec![2.0, 1.0], vec![1.0, 2.0], "radii").is_err());
}

#[test]
fn chain_contraction_gives_the_exact_exponent() {
    for (f, expected) in families() {
        let eta = harnack_chain_eta(&GrowthSource::Analytic(&f), 4.0, 1.0).unwrap();
        assert!((eta - 4f64.powf(-expected)).abs() < 1e-14);
        assert!((iteration_exponent(eta, 4.0).unwrap() - expected).abs() < 1e-12);
    }
}

#[test]
fn certificate_branch() {
    assert_eq!(eta_max(0.5).unwrap(), 15.0 / 16.0);
    assert_eq!(eta_max(0.97).unwrap(), 0.97);
    let alpha = iteration_exponent(eta_max(0.5).unwrap(), 4.0).unwrap();
    assert!((alpha - (16.0f64 / 15.0).ln() / 4f64.ln()).abs() < 1e-15);
    assert!((alpha - 0.0465).abs() < 1e-4);
    assert!(iteration_exponent(1.0, 4.0).is_err() && iteration_exponent(0.5, 1.0).is_err());
}

#[test]
fn sampled_field_matches_the_analytic_curve() {
    let f = Family::meyers(0.5).unwrap();
    let g = Arc::new(UniformGrid::centered(2, 8.0, 1.0 / 8.0).unwrap());
    let u = ScalarField::from_fn(&g, |x| if f.in_positivity_domain(x) { f.evaluate(x).unwrap() } else { 0.0 }).unwrap();
    let c = [0.0, 0.0];
    let curve = mu_plus_curve(&GrowthSource::Field { field: &u, center: &c, domain: None }, &[0.5, 1.0, 2.0, 4.0, 8.0]).unwrap();
    for (&r, &v) in curve.radii().iter().zip(curve.sup_values()) {
        // (r, 0) is a node, so the node maximum is exact
        assert!((v - r.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn solved_field_growth_is_close_to_the_analytic_one() {
    let f = Family::meyers(0.5).unwrap();
    let g = Arc::new(UniformGrid::cube(2, -1.0, 1.0, 64).unwrap());
    let left = SetMask::from_predicate(&g, dglab::geometry::MaskTag::Custom("x1<=0".into()), |x| x[0] <= 0.0);
    let problem = DirichletProblem::new(&g, Coefficient::Family(f.clone()), BoundaryData::Family(f.clone())).with_forced_zero(left);
    let sol = solve_linear(&problem, 1e-12, 100_000).unwrap();
    let c = [0.0, 0.0];
    let radii = [0.375, 0.5, 0.75];
    let solved = mu_plus_curve(&GrowthSource::Field { field: &sol.field, center: &c, domain: None }, &radii).unwrap();
    let exact = mu_plus_curve(&GrowthSource::Analytic(&f), &radii).unwrap();
    for (s, e) in solved.sup_values().iter().zip(exact.sup_values()) {
        assert!((s - e).abs() / e < 0.02, "{s} vs {e}");
    }
    let fit = fit_exponent(&solved).unwrap();
    assert!((fit.exponent - 0.5).abs() < 0.02, "{}", fit.exponent);
}
