//! Acceptance criteria for the dglab workspace, each returning a verdict and
//! a one-line summary of the measured numbers.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use dglab::capacity::{cap_estimate_variational, fatness_ratio, DEFAULT_TOLERANCE};
use dglab::counterexamples::{weak_subsolution_check, Bump};
use dglab::degiorgi::{default_sigma, harnack_chain_eta, log_estimate_report, weak_harnack_ratio, DEFAULT_TAU};
use dglab::geometry::MaskTag;
use dglab::growth::{dyadic_radii, eta_max, fit_exponent, iteration_exponent, mu_plus_curve, GrowthSource};
use dglab::solver::{caccioppoli_data, solve_linear, Sign};
use dglab::{CondenserProblem, DirichletProblem, Family, ScalarField, SetMask, UniformGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn grid(half: f64, h: f64, dim: usize) -> Arc<UniformGrid> {
    Arc::new(UniformGrid::centered(dim, half, h).unwrap())
}

fn ball_capacity(g: &Arc<UniformGrid>, r: f64, big_r: f64) -> f64 {
    let c = vec![0.0; g.dim()];
    let problem =
        CondenserProblem::new(SetMask::ball(g, &c, r), SetMask::open_ball(g, &c, big_r), 2.0).unwrap();
    let est = cap_estimate_variational(&problem, DEFAULT_TOLERANCE, None).unwrap();
    assert!(est.converged);
    est.value
}

fn spread(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::MIN, f64::max) / xs.iter().copied().fold(f64::MAX, f64::min)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn capacity_formula() -> Outcome {
    let start = Instant::now();
    let est = ball_capacity(&grid(2.0, 1.0 / 16.0, 3), 1.0, 2.0);
    let secs = start.elapsed().as_secs_f64();
    let err = rel(est, 8.0 * PI);
    outcome(err <= 0.05 && secs < 60.0, format!("cap2(B1,B2) = {est:.4} vs 8pi = {:.4}, rel err {err:.4}, {secs:.1} s", 8.0 * PI))
}

fn scaling_law() -> Outcome {
    let small = ball_capacity(&grid(2.0, 1.0 / 16.0, 3), 1.0, 2.0);
    let same_h = ball_capacity(&grid(4.0, 1.0 / 16.0, 3), 2.0, 4.0);
    let scaled = ball_capacity(&grid(4.0, 1.0 / 8.0, 3), 2.0, 4.0);
    // 2^{N-p} = 2 for N = 3, p = 2
    let (e1, e2) = (rel(same_h, 2.0 * small), rel(scaled, 2.0 * small));
    outcome(
        e1 <= 0.05 && e2 <= 0.05,
        format!("(B2,B4) = {same_h:.4} at equal h, {scaled:.4} on the scaled grid, vs 2 x {small:.4}; rel err {e1:.4}, {e2:.4}"),
    )
}

fn disc_capacity(outer: f64) -> f64 {
    let g = grid(outer, 1.0 / 8.0, 3);
    let c = [0.0; 3];
    let disc = SetMask::hyperplane_slab(&g, 2).unwrap().intersect(&SetMask::ball(&g, &c, 1.0)).unwrap();
    let problem = CondenserProblem::new(disc, SetMask::open_ball(&g, &c, outer), 2.0).unwrap();
    cap_estimate_variational(&problem, DEFAULT_TOLERANCE, None).unwrap().value
}

fn disc_value() -> Outcome {
    let target = 2.0 / (PI * PI);
    let (b4, b8) = (disc_capacity(4.0), disc_capacity(8.0));
    let err = rel(b8, target);
    let monotone = b8 < b4;
    outcome(
        err <= 0.2 && monotone,
        format!(
            "cap2(D1,B8) = {b8:.4} vs 2/pi^2 = {target:.4}, rel err {err:.2}; B4 -> B8: {b4:.4} -> {b8:.4} ({}); rel err vs 8r: {:.3}",
            if monotone { "decreasing" } else { "not decreasing" },
            rel(b8, 8.0)
        ),
    )
}

fn shell_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let planar = (x[0] * x[0] + x[1] * x[1]).sqrt();
        if (0.3..=2.0).contains(&r) && (dim < 4 || planar >= 0.3) {
            return x;
        }
    }
}

fn counterexample_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mu, alpha_cone, alpha_quartic) = (0.5, -0.5, 1.0 / 3.0);
    let c_cone = -alpha_cone * (alpha_cone + 3.0) / 2.0;
    let c_quartic = 1.0 - (2.0 - 3.0 * alpha_quartic) * (2.0 - 3.0 * alpha_quartic) / 8.0;
    let cases = [
        (Family::meyers(mu).unwrap(), vec![mu * mu, 1.0]),
        (Family::cone(alpha_cone).unwrap(), vec![1.0 - c_cone, 1.0 - c_cone, 1.0]),
        (Family::quartic(alpha_quartic).unwrap(), vec![1.0 - c_quartic, 1.0 - c_quartic, 1.0 - c_quartic, 1.0]),
    ];
    let mut eig_err: f64 = 0.0;
    for (f, expected) in &cases {
        for _ in 0..100 {
            let ev = f.coefficient_matrix(&shell_point(&mut rng, f.dim())).unwrap().eigenvalues();
            for (a, b) in ev.iter().zip(expected) {
                eig_err = eig_err.max((a - b).abs());
            }
        }
    }
    // linear families: observed order of the central-difference residual
    let mut order = f64::INFINITY;
    for (f, _) in &cases[..2] {
        let points: Vec<Vec<f64>> = (0..100).map(|_| shell_point(&mut rng, f.dim())).collect();
        let total = |step: f64| points.iter().map(|x| f.residual_strong(x, step).unwrap().abs()).sum::<f64>();
        let (a, b, c) = (total(1e-2), total(5e-3), total(2.5e-3));
        order = order.min((a / b).log2()).min((b / c).log2());
    }
    let q = &cases[2].0;
    let mut quartic_err: f64 = 0.0;
    for _ in 0..100 {
        let x = shell_point(&mut rng, 4);
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let oracle = r2.powf(-1.5 * alpha_quartic - 1.0) * (2.0 - 3.0 * alpha_quartic).powi(4) / 54.0;
        quartic_err = quartic_err.max(rel(q.residual_strong(&x, 1e-4).unwrap(), oracle));
    }
    let mut weak: f64 = f64::NEG_INFINITY;
    for _ in 0..10 {
        let radius = rng.gen_range(0.2..0.6);
        let angle = rng.gen_range(0.0..2.0 * PI);
        let planar = radius + rng.gen_range(0.2..1.0);
        let center = vec![planar * angle.cos(), planar * angle.sin(), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        weak = weak.max(weak_subsolution_check(q, &Bump::new(center, radius), 24).unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        eig_err <= 1e-10 && order >= 1.8 && quartic_err <= 1e-4 && weak <= 1e-8 && secs < 30.0,
        format!(
            "eigenvalue err {eig_err:.2e}; linear residual order {order:.2}; quartic residual rel err {quartic_err:.2e}; max weak form {weak:.3e}; {secs:.1} s"
        ),
    )
}

fn interior_error(f: &Family, lo: &[f64], hi: &[f64], h: f64) -> f64 {
    let cells: Vec<usize> = lo.iter().zip(hi).map(|(a, b)| ((b - a) / h).round() as usize).collect();
    let g = Arc::new(UniformGrid::new(lo, hi, &cells).unwrap());
    let sol = solve_linear(&DirichletProblem::for_family(&g, f), 1e-12, 100_000).unwrap();
    (0..g.node_count())
        .filter(|&i| !g.is_boundary(i))
        .map(|i| (sol.field.values()[i] - f.evaluate(&g.coords(i)).unwrap()).abs())
        .fold(0.0, f64::max)
}

fn sci(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn solver_convergence() -> Outcome {
    let m = Family::meyers(0.5).unwrap();
    let e2: Vec<f64> =
        [16.0, 32.0, 64.0].iter().map(|n| interior_error(&m, &[0.1, -0.5], &[1.1, 0.5], 1.0 / n)).collect();
    let c = Family::cone(-0.5).unwrap();
    let e3: Vec<f64> =
        [8.0, 16.0].iter().map(|n| interior_error(&c, &[0.1, -0.5, -0.5], &[1.1, 0.5, 0.5], 1.0 / n)).collect();
    let ratios = [e2[0] / e2[1], e2[1] / e2[2], e3[0] / e3[1]];
    outcome(
        ratios.iter().all(|&r| r >= 1.5),
        format!("meyers2d errors {}, cone3d errors {}, contractions {ratios:.2?}", sci(&e2), sci(&e3)),
    )
}

fn class_membership() -> Outcome {
    let f = Family::meyers(0.5).unwrap();
    let g = Arc::new(UniformGrid::new(&[0.1, -0.5], &[1.1, 0.5], &[64, 64]).unwrap());
    let u = solve_linear(&DirichletProblem::for_family(&g, &f), 1e-12, 100_000).unwrap().field;
    let (lambda, shift) = (2.5, 0.75);
    let scaled = u.map(|v| lambda * v).unwrap();
    let shifted = u.map(|v| v + shift).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut finite, mut worst_gamma, mut drift) = (true, 0.0f64, 0.0f64);
    for i in 0..50 {
        let c = [rng.gen_range(0.35..0.85), rng.gen_range(-0.25..0.25)];
        let rho = rng.gen_range(0.05..0.25);
        let sigma = rng.gen_range(0.2..0.8);
        let k = rng.gen_range(0.2..0.9);
        let sign = if i % 2 == 0 { Sign::Plus } else { Sign::Minus };
        let gamma = |field: &ScalarField, level: f64| {
            caccioppoli_data(field, &c, rho, sigma, level, sign, 2.0).unwrap().implied_gamma()
        };
        let base = gamma(&u, k);
        finite &= base.is_finite();
        worst_gamma = worst_gamma.max(base);
        if base > 0.0 {
            drift = drift.max(rel(gamma(&scaled, lambda * k), base)).max(rel(gamma(&shifted, k + shift), base));
        }
    }
    outcome(
        finite && drift <= 1e-12,
        format!("50 samples: max implied gamma {worst_gamma:.4}, max relative drift under rescaling {drift:.2e}"),
    )
}

/// Meyers field (mu = 1/2) on [-8, 8]^2, h = 1/16, zero on `x1 <= 0`.
fn meyers_plane() -> ScalarField {
    let f = Family::meyers(0.5).unwrap();
    let g = grid(8.0, 1.0 / 16.0, 2);
    ScalarField::from_fn(&g, |x| if f.in_positivity_domain(x) { f.evaluate(x).unwrap() } else { 0.0 }).unwrap()
}

fn ball_sup(u: &ScalarField, r: f64) -> f64 {
    u.max_over(&SetMask::ball(u.grid(), &[0.0, 0.0], r)).unwrap().unwrap()
}

fn weak_harnack() -> Outcome {
    let u = meyers_plane();
    let ratios: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|&rho| {
            let mu = ball_sup(&u, 2.0 * rho);
            let v = u.map(|x| mu - x).unwrap();
            weak_harnack_ratio(&v, DEFAULT_TAU, 0.5, 0.5, rho, &[0.0, 0.0]).unwrap().ratio
        })
        .collect();
    let s = spread(&ratios);
    outcome(ratios.iter().all(|r| r.is_finite()) && s < 2.0, format!("ratios {ratios:.4?} for rho = 1, 2, 4; spread {s:.4}"))
}

fn log_estimate() -> Outcome {
    let u = meyers_plane();
    let p = 2.0;
    let c = [0.0, 0.0];
    let normalized: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|&r| {
            let g = grid(2.0 * r, r / 16.0, 2);
            let left = SetMask::from_predicate(&g, MaskTag::Custom("x1<=0".into()), |x| x[0] <= 0.0);
            let delta = fatness_ratio(&left, &c, r, p, DEFAULT_TOLERANCE).unwrap().ratio;
            log_estimate_report(&u, ball_sup(&u, 2.0 * r), default_sigma(p), r, p, delta, &c).unwrap().normalized
        })
        .collect();
    let s = spread(&normalized);
    outcome(
        normalized.iter().all(|v| v.is_finite() && *v > 0.0) && s < 3.0,
        format!("normalized {normalized:.4?} for R = 1, 2, 4; spread {s:.4}"),
    )
}

fn growth_exponents() -> Outcome {
    let cases = [
        (Family::meyers(0.5).unwrap(), 0.5),
        (Family::cone(-0.5).unwrap(), 1.0 - 0.5),
        (Family::quartic(0.2).unwrap(), 2.0 / 3.0 - 0.2),
    ];
    let mut ok = true;
    let mut fitted = Vec::new();
    for (f, expected) in &cases {
        let fit = fit_exponent(&mu_plus_curve(&GrowthSource::Analytic(f), &dyadic_radii(1.0, 4)).unwrap()).unwrap();
        ok &= (fit.exponent - expected).abs() <= 1e-10 && fit.exponent > 0.0 && fit.exponent < 1.0;
        fitted.push(fit.exponent);
    }
    let quartic = fitted[2];
    ok &= (quartic - 0.4667).abs() < 5e-5 && quartic < 2.0 / 3.0;
    outcome(ok, format!("fitted {fitted:.10?}; quartic4d(0.2) gives {quartic:.4} < 2/3"))
}

fn iteration_mechanism() -> Outcome {
    let cases = [
        (Family::meyers(0.5).unwrap(), 0.5),
        (Family::cone(-0.5).unwrap(), 0.5),
        (Family::quartic(1.0 / 3.0).unwrap(), 1.0 / 3.0),
    ];
    let mut worst: f64 = 0.0;
    for (f, expected) in &cases {
        let eta = harnack_chain_eta(&GrowthSource::Analytic(f), 4.0, 1.0).unwrap();
        worst = worst.max((iteration_exponent(eta, 4.0).unwrap() - expected).abs());
    }
    let eta = harnack_chain_eta(&GrowthSource::Analytic(&cases[0].0), 4.0, 1.0).unwrap();
    let certificate = iteration_exponent(eta_max(eta).unwrap(), 4.0).unwrap();
    outcome(
        worst <= 1e-12 && (certificate - 0.0465).abs() < 1e-4,
        format!("max exponent error {worst:.2e}; certificate exponent {certificate:.6}"),
    )
}

pub type Check = fn() -> Outcome;

/// The ten criteria in order, with short names.
pub fn criteria() -> [(&'static str, Check); 10] {
    [
        ("capacity formula", capacity_formula),
        ("scaling law", scaling_law),
        ("disc capacity value", disc_value),
        ("counterexample exactness", counterexample_exactness),
        ("solver convergence", solver_convergence),
        ("class membership evidence", class_membership),
        ("weak Harnack", weak_harnack),
        ("log estimate", log_estimate),
        ("growth exponents", growth_exponents),
        ("iteration mechanism", iteration_mechanism),
    ]
}
