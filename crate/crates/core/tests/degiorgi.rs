use std::f64::consts::PI;
use std::sync::Arc;

use dglab::capacity::{fatness_ratio, DEFAULT_TOLERANCE};
use dglab::degiorgi::*;
use dglab::geometry::MaskTag;
use dglab::growth::GrowthSource;
use dglab::solver::solve_linear;
use dglab::{DirichletProblem, Family, ScalarField, SetMask, UniformGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Meyers field with mu = 1/2 on [-8, 8]^2, extended by zero to `x1 <= 0`.
fn meyers_plane(h: f64) -> ScalarField {
    let f = Family::meyers(0.5).unwrap();
    let g = Arc::new(UniformGrid::centered(2, 8.0, h).unwrap());
    ScalarField::from_fn(&g, |x| if f.in_positivity_domain(x) { f.evaluate(x).unwrap() } else { 0.0 }).unwrap()
}

fn solved_meyers() -> ScalarField {
    let f = Family::meyers(0.5).unwrap();
    let g = Arc::new(UniformGrid::new(&[0.1, -0.5], &[1.1, 0.5], &[64, 64]).unwrap());
    solve_linear(&DirichletProblem::for_family(&g, &f), 1e-12, 100_000).unwrap().field
}

fn ball_sup(u: &ScalarField, c: &[f64], r: f64) -> f64 {
    u.max_over(&SetMask::ball(u.grid(), c, r)).unwrap().unwrap()
}

fn spread(xs: &[f64]) -> f64 {
    let hi = xs.iter().copied().fold(f64::MIN, f64::max);
    let lo = xs.iter().copied().fold(f64::MAX, f64::min);
    hi / lo
}

#[test]
fn theta0_planar_closed_form() {
    let t = theta0(2, 2.0, 1.0, 1.0).unwrap();
    let oracle = (2.0 * PI).powi(2) / (4.0 * 6f64.powi(16));
    assert!((t.value - oracle).abs() <= 1e-14 * oracle);
    assert!((t.geometric - 125.0 * 2.0 * PI / 432.0).abs() < 1e-14);
    assert_eq!(t.branch, Theta0Branch::Structural);
    assert!(theta0(2, 2.0, 10.0, 1.0).unwrap().value < t.value);
    assert!(theta0(2, 2.0, 1.0, 2.0).unwrap().value < t.value);
    assert!(theta0(3, 2.0, 1.0, 1.0).unwrap().value < t.value);
}

#[test]
fn lemma_trivial_fields() {
    let g = Arc::new(UniformGrid::centered(2, 1.0, 1.0 / 16.0).unwrap());
    let theta = theta0(2, 2.0, 1.0, 1.0).unwrap().value;
    let zero = ScalarField::constant(&g, 0.0).unwrap();
    let v = degiorgi_lemma_check(&zero, &[0.0, 0.0], 0.5, 2, theta).unwrap();
    assert!(v.premise_holds && v.conclusion_holds && v.consistent);
    let one = ScalarField::constant(&g, 3.0).unwrap();
    let v = degiorgi_lemma_check(&one, &[0.0, 0.0], 0.5, 3, theta).unwrap();
    assert!(!v.premise_holds && v.consistent);
    assert_eq!(v.level_fraction, 1.0);
    assert!(degiorgi_lemma_check(&one, &[0.0, 0.0], 0.6, 3, theta).is_err());
    assert!(degiorgi_lemma_check(&one, &[0.0, 0.0], 0.25, 1, theta).is_err());
}

#[test]
fn lemma_is_consistent_on_solved_meyers_fields() {
    let u = solved_meyers();
    let theta = theta0(2, 2.0, 1.0, 1.0).unwrap().value;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let r = rng.gen_range(0.03..0.12);
        let c = [rng.gen_range(0.1 + 2.0 * r..1.1 - 2.0 * r), rng.gen_range(-0.5 + 2.0 * r..0.5 - 2.0 * r)];
        let s = rng.gen_range(2..=6);
        let v = degiorgi_lemma_check(&u, &c, r, s, theta).unwrap();
        assert!(v.consistent, "{c:?} {r} {s}: {v:?}");
    }
}

#[test]
fn lemma_premise_can_hold_with_a_generous_theta() {
    // a spike at the centre: the super-level set is a single node
    let g = Arc::new(UniformGrid::centered(2, 1.0, 1.0 / 32.0).unwrap());
    let u = ScalarField::from_fn(&g, |x| if x[0] == 0.0 && x[1] == 0.0 { 1.0 } else { 0.0 }).unwrap();
    let v = degiorgi_lemma_check(&u, &[0.0, 0.0], 0.5, 2, 0.5).unwrap();
    assert!(v.premise_holds && !v.conclusion_holds && !v.consistent);
}

#[test]
fn sup_bound_constant_and_linear() {
    let g = Arc::new(UniformGrid::centered(2, 4.0, 1.0 / 64.0).unwrap());
    let one = ScalarField::constant(&g, 1.0).unwrap();
    for (s, q, r) in [(0.5, 1.0, 1.0), (0.25, 2.0, 3.0), (0.9, 0.3, 0.5)] {
        assert!((sup_bound_ratio(&one, s, q, r, &[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-14);
    }
    // u = x1 on B_1((2, 0)); mean of x1^2 over a disc is c^2 + rho^2/4
    let lin = ScalarField::from_fn(&g, |x| x[0]).unwrap();
    let (c, rho, sigma): (f64, f64, f64) = (2.0, 1.0, 0.5);
    let oracle = (c + sigma * rho) / (c * c + rho * rho / 4.0).sqrt();
    let got = sup_bound_ratio(&lin, sigma, 2.0, rho, &[c, 0.0]).unwrap();
    assert!((got - oracle).abs() / oracle < 0.01, "{got} vs {oracle}");
    let zero = ScalarField::constant(&g, 0.0).unwrap();
    assert_eq!(sup_bound_ratio(&zero, 0.5, 1.0, 1.0, &[0.0, 0.0]).unwrap(), 0.0);
}

#[test]
fn sup_bound_is_uniform_across_scales() {
    let u = meyers_plane(1.0 / 64.0);
    let ratios: Vec<f64> = [0.25, 0.5, 1.0]
        .iter()
        .map(|&rho| sup_bound_ratio(&u, 0.5, 1.0, rho, &[0.0, 0.0]).unwrap())
        .collect();
    assert!(ratios.iter().all(|r| r.is_finite()));
    assert!(spread(&ratios) < 2.0, "{ratios:?}");
}

#[test]
fn weak_harnack_constant_and_tau_monotonicity() {
    let g = Arc::new(UniformGrid::centered(2, 2.0, 1.0 / 16.0).unwrap());
    let c = ScalarField::constant(&g, 2.5).unwrap();
    assert_eq!(weak_harnack_ratio(&c, 0.1, 0.5, 0.5, 1.0, &[0.0, 0.0]).unwrap().ratio, 1.0);
    let u = meyers_plane(1.0 / 16.0);
    let mu = ball_sup(&u, &[0.0, 0.0], 4.0);
    let v = u.map(|x| mu - x).unwrap();
    let mut last = 0.0;
    for tau in [0.05, 0.1, 0.3, 0.6, 0.9] {
        let r = weak_harnack_ratio(&v, tau, 0.5, 0.5, 2.0, &[0.0, 0.0]).unwrap().ratio;
        assert!(last <= r + 1e-10);
        last = r;
    }
    let neg = ScalarField::constant(&g, -1.0).unwrap();
    assert!(weak_harnack_ratio(&neg, 0.1, 0.5, 0.5, 1.0, &[0.0, 0.0]).is_err());
}

#[test]
fn weak_harnack_flags_a_vanishing_infimum() {
    let u = meyers_plane(1.0 / 16.0);
    let rep = weak_harnack_ratio(&u, 0.1, 0.5, 0.5, 1.0, &[0.0, 0.0]).unwrap();
    assert!(rep.is_unbounded() && rep.infimum == 0.0);
}

#[test]
fn weak_harnack_for_the_gap_is_uniform_across_scales() {
    let u = meyers_plane(1.0 / 16.0);
    let c = [0.0, 0.0];
    let ratios: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|&rho| {
            let mu = ball_sup(&u, &c, 2.0 * rho);
            let v = u.map(|x| mu - x).unwrap();
            weak_harnack_ratio(&v, DEFAULT_TAU, 0.5, 0.5, rho, &c).unwrap().ratio
        })
        .collect();
    assert!(ratios.iter().all(|r| r.is_finite()));
    assert!(spread(&ratios) < 2.0, "{ratios:?}");
}

#[test]
fn chain_eta_examples() {
    let f = Family::meyers(0.5).unwrap();
    assert!((harnack_chain_eta(&GrowthSource::Analytic(&f), 4.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
    let q = Family::quartic(1.0 / 3.0).unwrap();
    let eta = harnack_chain_eta(&GrowthSource::Analytic(&q), 4.0, 1.0).unwrap();
    assert!((eta - 4f64.powf(-1.0 / 3.0)).abs() < 1e-14);
    let g = Arc::new(UniformGrid::centered(2, 4.0, 0.25).unwrap());
    let c = ScalarField::constant(&g, 0.3).unwrap();
    let src = GrowthSource::Field { field: &c, center: &[0.0, 0.0], domain: None };
    assert_eq!(harnack_chain_eta(&src, 4.0, 1.0).unwrap(), 1.0);
    let z = ScalarField::constant(&g, 0.0).unwrap();
    let src = GrowthSource::Field { field: &z, center: &[0.0, 0.0], domain: None };
    assert!(harnack_chain_eta(&src, 4.0, 1.0).is_err());
}

#[test]
fn log_estimate_trivial_values() {
    let g = Arc::new(UniformGrid::centered(2, 2.0, 1.0 / 16.0).unwrap());
    let zero = ScalarField::constant(&g, 0.0).unwrap();
    assert_eq!(log_estimate_report(&zero, 1.0, 0.4, 1.0, 3.0, 1.0, &[0.0, 0.0]).unwrap().lhs_mean, 0.0);
    let mu = 2.0;
    let c = ScalarField::constant(&g, mu * (1.0 - (-1.0f64).exp())).unwrap();
    let rep = log_estimate_report(&c, mu, 0.4, 1.0, 3.0, 0.5, &[0.0, 0.0]).unwrap();
    assert!((rep.lhs_mean - 1.0).abs() < 1e-12);
    assert!((rep.normalized - 0.5f64.cbrt()).abs() < 1e-12);
    let top = ScalarField::constant(&g, mu).unwrap();
    let rep = log_estimate_report(&top, mu, 0.4, 1.0, 3.0, 1.0, &[0.0, 0.0]).unwrap();
    assert!(rep.clamped > 0 && rep.lhs_mean.is_finite());
    assert!(log_estimate_report(&c, mu, 0.5, 1.0, 2.0, 1.0, &[0.0, 0.0]).is_err());
    assert!(log_estimate_report(&c, 0.0, 0.2, 1.0, 2.0, 1.0, &[0.0, 0.0]).is_err());
}

#[test]
fn log_estimate_is_monotone_in_the_field() {
    let u = meyers_plane(1.0 / 16.0);
    let mu = ball_sup(&u, &[0.0, 0.0], 4.0);
    let w = u.map(|x| (1.2 * x).min(mu)).unwrap();
    let a = log_estimate_report(&u, mu, 0.2, 2.0, 2.0, 1.0, &[0.0, 0.0]).unwrap();
    let b = log_estimate_report(&w, mu, 0.2, 2.0, 2.0, 1.0, &[0.0, 0.0]).unwrap();
    assert!(a.lhs_mean <= b.lhs_mean);
}

#[test]
fn normalized_log_estimate_is_uniform_across_scales() {
    let u = meyers_plane(1.0 / 16.0);
    let c = [0.0, 0.0];
    let p = 2.0;
    let sigma = default_sigma(p);
    let normalized: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|&r| {
            let g = Arc::new(UniformGrid::centered(2, 2.0 * r, r / 16.0).unwrap());
            let left = SetMask::from_predicate(&g, MaskTag::Custom("x1<=0".into()), |x| x[0] <= 0.0);
            let delta = fatness_ratio(&left, &c, r, p, DEFAULT_TOLERANCE).unwrap().ratio;
            let mu = ball_sup(&u, &c, 2.0 * r);
            log_estimate_report(&u, mu, sigma, r, p, delta, &c).unwrap().normalized
        })
        .collect();
    assert!(normalized.iter().all(|v| v.is_finite() && *v > 0.0));
    assert!(spread(&normalized) < 3.0, "{normalized:?}");
}

#[test]
fn log_gradient_examples() {
    let g = Arc::new(UniformGrid::centered(2, 1.5, 1.0 / 64.0).unwrap());
    let m = ScalarField::constant(&g, 2.0).unwrap();
    let d = log_gradient_check(&m, 2.0, 0.5, 1.0, 2.0, &[0.0, 0.0]).unwrap();
    assert_eq!((d.lhs, d.rhs_raw), (0.0, 0.0));
    assert_eq!(d.implied_gamma(), 0.0);
    // |D ln u| = 1, so the lhs is the disc area
    let e = ScalarField::from_fn(&g, |x| x[0].exp()).unwrap();
    let d = log_gradient_check(&e, 1f64.exp(), 0.5, 1.0, 2.0, &[0.0, 0.0]).unwrap();
    assert!((d.lhs - PI * 0.25).abs() / (PI * 0.25) < 0.01, "{}", d.lhs);
    // int_{B_1} (1 - x1) = pi
    assert!((d.rhs_raw - 2.0 / 0.25 * PI).abs() / (8.0 * PI) < 0.01, "{}", d.rhs_raw);
    assert!(d.implied_gamma().is_finite());
    assert!(log_gradient_check(&e, 1.0, 0.5, 1.0, 2.0, &[0.0, 0.0]).is_err());
}

#[test]
fn log_gradient_gap_of_solved_meyers_fields() {
    let u = solved_meyers();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let r = rng.gen_range(0.06..0.12);
        let c = [rng.gen_range(0.1 + 2.0 * r..1.1 - 2.0 * r), rng.gen_range(-0.5 + 2.0 * r..0.5 - 2.0 * r)];
        let mu = ball_sup(&u, &c, 2.0 * r);
        let v = u.map(|x| mu - x).unwrap();
        let vmax = ball_sup(&v, &c, r);
        let d = log_gradient_check(&v, vmax, 0.5 * r, r, 2.0, &c).unwrap();
        assert!(d.implied_gamma().is_finite() && d.implied_gamma() > 0.0, "{d:?}");
    }
}

#[test]
fn convex_compositions() {
    let g = Arc::new(UniformGrid::centered(2, 1.0, 0.25).unwrap());
    let zero = ScalarField::constant(&g, 0.0).unwrap();
    assert!(compose_convex(&zero, Composition::ReciprocalGap).unwrap().values().iter().all(|&v| v == 1.0));
    assert!(compose_convex(&zero, Composition::LogReciprocalGap).unwrap().values().iter().all(|&v| v == 0.0));
    let e = ScalarField::constant(&g, 1.0 - (-1.0f64).exp()).unwrap();
    let l = compose_convex(&e, Composition::LogReciprocalGap).unwrap();
    assert!(l.values().iter().all(|v| (v - 1.0).abs() < 1e-14));
    let a = ScalarField::from_fn(&g, |x| 0.4 * x[0].abs()).unwrap();
    let b = a.map(|v| v + 0.1).unwrap();
    for kind in [Composition::ReciprocalGap, Composition::LogReciprocalGap] {
        let (ca, cb) = (compose_convex(&a, kind).unwrap(), compose_convex(&b, kind).unwrap());
        assert!(ca.values().iter().zip(cb.values()).all(|(x, y)| x <= y));
    }
    assert!(compose_convex(&ScalarField::constant(&g, 1.0).unwrap(), Composition::ReciprocalGap).is_err());
}

#[test]
fn reciprocal_gap_sup_bound_across_scales() {
    let u = meyers_plane(1.0 / 16.0);
    let c = [0.0, 0.0];
    let ratios: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|&rho| {
            let mu = ball_sup(&u, &c, 2.0 * rho);
            let w = u.map(|x| (0.5 * x / mu).min(0.5)).unwrap();
            let phi = compose_convex(&w, Composition::ReciprocalGap).unwrap();
            sup_bound_ratio(&phi, 0.5, DEFAULT_TAU, 2.0 * rho, &c).unwrap()
        })
        .collect();
    assert!(ratios.iter().all(|r| r.is_finite()));
    assert!(spread(&ratios) < 2.0, "{ratios:?}");
}

#[test]
fn check_rows_serialize_with_uppercase_verdicts() {
    let row = CheckRow {
        check: "weak_harnack".into(),
        family: "meyers2d".into(),
        big_r: None,
        rho: Some(1.0),
        sigma: Some(0.5),
        tau: Some(0.1),
        value: 1.25,
        verdict: Verdict::from_bool(false),
    };
    let s = serde_json::to_string(&row).unwrap();
    assert!(s.contains("\"FAIL\"") && s.contains("\"R\":null"));
    assert_eq!(serde_json::from_str::<CheckRow>(&s).unwrap(), row);
    assert_eq!(Verdict::Pass.to_string(), "PASS");
}
