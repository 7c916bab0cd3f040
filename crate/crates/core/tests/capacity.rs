use std::f64::consts::PI;
use std::sync::Arc;

use dglab::capacity::{
    cap_ball_annulus, cap_estimate_variational, fatness_ratio, kappa_n, kappa_n_composite, q_fatness_ratios,
    segment_capacity_lower_bound,
};
use dglab::geometry::MaskTag;
use dglab::{CondenserProblem, SetMask, UniformGrid};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-8;

fn cap(inner: &SetMask, outer: &SetMask, p: f64) -> f64 {
    if inner.is_empty() {
        return 0.0;
    }
    let problem = CondenserProblem::new(inner.clone(), outer.clone(), p).unwrap();
    let est = cap_estimate_variational(&problem, TOL, None).unwrap();
    assert!(est.converged);
    est.value
}

fn centered(dim: usize, half: f64, h: f64) -> Arc<UniformGrid> {
    Arc::new(UniformGrid::centered(dim, half, h).unwrap())
}

fn cube_mask(g: &Arc<UniformGrid>, half: f64, open: bool) -> SetMask {
    SetMask::from_predicate(g, MaskTag::Custom("cube".into()), |x| {
        x.iter().all(|v| if open { v.abs() < half - 1e-12 } else { v.abs() <= half + 1e-12 })
    })
}

#[test]
fn kappa_examples() {
    assert!((kappa_n(2).unwrap() - PI / 2.0).abs() < 1e-14);
    // int_0^{pi/2} (sin t)^{-1/2} dt = B(1/4, 1/2) / 2
    let beta = statrs::function::beta::beta(0.25, 0.5);
    assert!((kappa_n(3).unwrap() - beta / 2.0).abs() < 1e-10);
    assert!((kappa_n(3).unwrap() - 2.6221).abs() < 1e-4);
    for n in 2..=6 {
        let a = kappa_n_composite(n, 2048).unwrap();
        let b = kappa_n_composite(n, 4096).unwrap();
        assert!((a - b).abs() < 1e-8);
    }
    assert!(kappa_n(1).is_err());
}

#[test]
fn kappa_general_dimension_matches_beta_identity() {
    // int_0^{pi/2} sin^a t dt = B((a+1)/2, 1/2) / 2
    for n in 4..=6 {
        let a = (2.0 - n as f64) / (n as f64 - 1.0);
        let oracle = statrs::function::beta::beta((a + 1.0) / 2.0, 0.5) / 2.0;
        assert!((kappa_n(n).unwrap() - oracle).abs() < 1e-10, "N = {n}");
    }
}

#[test]
fn segment_bound_value() {
    let b = segment_capacity_lower_bound(3, 2.0).unwrap();
    assert!((b - 2.0 * 3f64.ln() / kappa_n(3).unwrap().powi(2)).abs() < 1e-15);
    assert!((b - 0.3196).abs() < 1e-4);
    assert!(segment_capacity_lower_bound(2, 2.0).is_err());
}

/// `J_r(0) = {(0, 0, t) : -r < t < 0}` as a one-node-thick line.
fn segment(g: &Arc<UniformGrid>, r: f64) -> SetMask {
    let h = g.spacing()[0];
    SetMask::from_predicate(g, MaskTag::Custom("segment".into()), |x| {
        x[0].abs() <= h / 2.0 && x[1].abs() <= h / 2.0 && x[2] <= 0.0 && x[2] >= -r
    })
}

#[test]
fn conformal_segment_capacity_exceeds_the_bound() {
    let bound = segment_capacity_lower_bound(3, 2.0).unwrap();
    let g = centered(3, 2.0, 1.0 / 16.0);
    let problem = CondenserProblem::new(segment(&g, 1.0), SetMask::open_ball(&g, &[0.0; 3], 2.0), 3.0).unwrap();
    let est = cap_estimate_variational(&problem, 1e-6, None).unwrap();
    assert!(est.converged);
    assert!(est.value >= bound, "{} < {bound}", est.value);
    assert!(est.regularized_value >= est.value);
}

#[test]
fn annulus_estimate_within_tolerance_at_coarse_resolution() {
    let g = centered(3, 2.0, 0.125);
    let o = [0.0; 3];
    let v = cap(&SetMask::ball(&g, &o, 1.0), &SetMask::open_ball(&g, &o, 2.0), 2.0);
    let exact = cap_ball_annulus(2.0, 3, 1.0, 2.0).unwrap();
    assert!((v - exact).abs() < 0.06 * exact, "{v} vs {exact}");
}

#[test]
fn plate_next_to_the_outer_boundary_has_larger_capacity() {
    let g = centered(3, 2.0, 0.125);
    let o = [0.0; 3];
    let k = SetMask::ball(&g, &o, 1.0);
    let tight = SetMask::open_ball(&g, &o, 1.0 + 0.15);
    let roomy = SetMask::open_ball(&g, &o, 1.75);
    assert!(cap(&k, &tight, 2.0) > cap(&k, &roomy, 2.0));
}

#[test]
fn monotone_in_plate_and_antitone_in_domain() {
    for p in [2.0, 1.5] {
        let g = centered(2, 2.0, 0.125);
        let o = [0.0; 2];
        let q = SetMask::open_ball(&g, &o, 1.8);
        let k1 = SetMask::ball(&g, &[0.2, 0.0], 0.4);
        let k2 = k1.union(&SetMask::ball(&g, &[-0.3, 0.3], 0.3)).unwrap();
        let c1 = cap(&k1, &q, p);
        let c2 = cap(&k2, &q, p);
        assert!(c1 <= c2 * (1.0 + 1e-6), "p {p}: {c1} > {c2}");
        let bigger = SetMask::open_ball(&g, &o, 1.95);
        assert!(cap(&k1, &bigger, p) <= c1 * (1.0 + 1e-6));
    }
}

#[test]
fn strong_subadditivity_on_random_plates() {
    let g = centered(2, 2.0, 0.125);
    let q = SetMask::open_ball(&g, &[0.0; 2], 1.9);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let blob = |rng: &mut ChaCha8Rng| {
        let mut m = SetMask::empty(&g);
        for _ in 0..3 {
            let c = [rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)];
            m = m.union(&SetMask::ball(&g, &c, rng.gen_range(0.1..0.4))).unwrap();
        }
        m
    };
    for _ in 0..6 {
        let (a, b) = (blob(&mut rng), blob(&mut rng));
        let lhs = cap(&a.intersect(&b).unwrap(), &q, 2.0) + cap(&a.union(&b).unwrap(), &q, 2.0);
        let rhs = cap(&a, &q, 2.0) + cap(&b, &q, 2.0);
        assert!(lhs <= rhs * (1.0 + 2e-6), "{lhs} > {rhs}");
    }
}

#[test]
fn scaling_law_on_scaled_grids() {
    for p in [1.5, 2.0, 2.5] {
        let small = centered(3, 1.0, 0.125);
        let large = centered(3, 2.0, 0.25);
        let o = [0.0; 3];
        let a = cap(&SetMask::ball(&small, &o, 0.5), &SetMask::open_ball(&small, &o, 1.0), p);
        let b = cap(&SetMask::ball(&large, &o, 1.0), &SetMask::open_ball(&large, &o, 2.0), p);
        let predicted = 2f64.powf(3.0 - p) * a;
        assert!((b / predicted - 1.0).abs() < 2e-6, "p {p}: {b} vs {predicted}");
    }
}

#[test]
fn refinement_decreases_estimates_for_grid_aligned_condensers() {
    let mut prev = f64::INFINITY;
    for h in [0.25, 0.125, 0.0625] {
        let g = centered(3, 1.5, h);
        let v = cap(&cube_mask(&g, 0.5, false), &cube_mask(&g, 1.0, true), 2.0);
        assert!(v <= prev * (1.0 + 1e-6), "h {h}: {v} > {prev}");
        prev = v;
    }
}

#[test]
fn minimizer_respects_the_constraints() {
    let g = centered(3, 2.0, 0.25);
    let o = [0.0; 3];
    let k = SetMask::ball(&g, &o, 0.75);
    let q = SetMask::open_ball(&g, &o, 1.75);
    for p in [1.5, 2.0, 3.0] {
        let est = cap_estimate_variational(&CondenserProblem::new(k.clone(), q.clone(), p).unwrap(), 1e-8, None).unwrap();
        let v = est.minimizer.values();
        for i in 0..g.node_count() {
            assert!((0.0..=1.0).contains(&v[i]));
            if k.contains(i) {
                assert_eq!(v[i], 1.0);
            }
            if !q.contains(i) {
                assert_eq!(v[i], 0.0);
            }
        }
        assert!(est.energy_gap <= 1e-8);
    }
}

#[test]
fn unconverged_runs_are_flagged() {
    let g = centered(3, 2.0, 0.125);
    let o = [0.0; 3];
    let problem = CondenserProblem::new(SetMask::ball(&g, &o, 1.0), SetMask::open_ball(&g, &o, 2.0), 2.0).unwrap();
    let est = cap_estimate_variational(&problem, 1e-10, Some(3)).unwrap();
    assert!(!est.converged);
    assert_eq!(est.iterations, 3);
}

#[test]
fn fatness_of_full_space_and_half_space() {
    // estimator tolerance: 5% at h = 1/16, the resolution at which the
    // annulus estimate is calibrated
    let fine = centered(3, 2.0, 0.0625);
    let o = [0.0; 3];
    let full = fatness_ratio(&SetMask::full(&fine), &o, 1.0, 2.0, 1e-8).unwrap();
    assert!((full.ratio - 1.0).abs() < 0.05, "{full:?}");
    let g = centered(3, 2.0, 0.125);
    let half = SetMask::half_space(&g);
    let a = fatness_ratio(&half, &o, 0.5, 2.0, 1e-8).unwrap().ratio;
    let b = fatness_ratio(&half, &o, 1.0, 2.0, 1e-8).unwrap().ratio;
    assert!(a > 0.1 && b > 0.1);
    assert!((a / b - 1.0).abs() < 0.25, "{a} vs {b}");
}

#[test]
fn q_fatness_stays_bounded_below() {
    let g = centered(3, 2.0, 0.125);
    let half = SetMask::half_space(&g);
    let ratios = q_fatness_ratios(&half, &[0.0; 3], 1.0, 2.0, 3, 1e-7).unwrap();
    assert_eq!(ratios.len(), 3);
    for (q, r) in ratios {
        assert!(q > 1.9 && q < 2.0);
        assert!(r > 0.1, "q {q}: {r}");
    }
}

#[test]
fn line_has_vanishing_two_capacity_density() {
    let mut prev = f64::INFINITY;
    for h in [0.125, 0.0625, 0.03125] {
        let g = centered(3, 2.0, h);
        let line = SetMask::hyperplane_slab(&g, 1).unwrap();
        let r = fatness_ratio(&line, &[0.0; 3], 1.0, 2.0, 1e-7).unwrap().ratio;
        assert!(r < prev, "h {h}: {r} >= {prev}");
        prev = r;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn estimates_never_fall_below_zero_and_respect_nesting(
        cx in -0.5f64..0.5, cy in -0.5f64..0.5, r in 0.15f64..0.5, grow in 0.05f64..0.3, p in 1.3f64..2.0,
    ) {
        let g = centered(2, 2.0, 0.125);
        let q = SetMask::open_ball(&g, &[0.0; 2], 1.9);
        let k1 = SetMask::ball(&g, &[cx, cy], r);
        let k2 = SetMask::ball(&g, &[cx, cy], r + grow);
        prop_assume!(!k1.is_empty());
        let (a, b) = (cap(&k1, &q, p), cap(&k2, &q, p));
        prop_assert!(a >= 0.0);
        prop_assert!(a <= b * (1.0 + 1e-6));
    }
}
