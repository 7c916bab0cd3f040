use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::SetMask;
use crate::scalar::Scalar;

use super::condenser::{cap_estimate_variational, CondenserProblem};
use super::formulas::{cap_ball_annulus, check_exponent, is_conformal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FatnessReport<T> {
    /// Estimated `cap_p(E ∩ B_r(x), B_{2r}(x))`.
    pub numerator: T,
    /// `cap_p(B_r, B_{2r})`, absent for `p = N`.
    pub denominator: Option<T>,
    /// `numerator / denominator`, or the bare numerator when `p = N`.
    pub ratio: T,
    pub converged: bool,
}

/// Local capacity density of `set` at `(x, r)`. The outer domain is the open
/// ball `B_{2r}(x)`; an empty intersection has capacity zero.
pub fn fatness_ratio<T: Scalar>(
    set: &SetMask<T>,
    x: &[T],
    r: T,
    p: T,
    tolerance: T,
) -> Result<FatnessReport<T>> {
    let grid = set.grid();
    let n = grid.dim();
    check_exponent(p, n)?;
    if !(r > T::zero()) {
        return Err(LabError::InvalidParameter("radius must be positive".into()));
    }
    let two_r = r + r;
    grid.check_ball(x, two_r)?;
    let inner = set.intersect(&SetMask::ball(grid, x, r))?;
    let (numerator, converged) = if inner.is_empty() {
        (T::zero(), true)
    } else {
        let problem = CondenserProblem::new(inner, SetMask::open_ball(grid, x, two_r), p)?;
        let est = cap_estimate_variational(&problem, tolerance, None)?;
        (est.value, est.converged)
    };
    let denominator = if is_conformal(p, n) { None } else { Some(cap_ball_annulus(p, n, r, two_r)?) };
    let ratio = denominator.map_or(numerator, |d| numerator / d);
    Ok(FatnessReport { numerator, denominator, ratio, converged })
}

/// Fatness ratios for `samples` exponents `q` spread evenly over
/// `(p - 0.1, p)`, returned as `(q, ratio)` pairs in increasing `q`.
pub fn q_fatness_ratios<T: Scalar>(
    set: &SetMask<T>,
    x: &[T],
    r: T,
    p: T,
    samples: usize,
    tolerance: T,
) -> Result<Vec<(T, T)>> {
    let width = T::of(0.1);
    if !(p - width >= T::one()) {
        return Err(LabError::InvalidParameter(format!("p = {p} leaves no room for q in (p - 0.1, p) above 1")));
    }
    (1..=samples)
        .map(|i| {
            let q = p - width + width * T::of_usize(i) / T::of_usize(samples + 1);
            Ok((q, fatness_ratio(set, x, r, q, tolerance)?.ratio))
        })
        .collect()
}
