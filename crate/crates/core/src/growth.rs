//! Growth curves `mu_+(r)`, exponent fits and the iteration-to-exponent map.

use serde::{Deserialize, Serialize};

use crate::counterexamples::Family;
use crate::error::{LabError, Result};
use crate::geometry::{ScalarField, SetMask};
use crate::scalar::Scalar;

/// Where `mu_+(r)` comes from.
#[derive(Debug, Clone, Copy)]
pub enum GrowthSource<'a, T: Scalar> {
    /// Closed form `sup_{B_r} u` of an analytic family (centred at the origin).
    Analytic(&'a Family<T>),
    /// Node maximum of a sampled field over `B_r(center)`, optionally
    /// restricted to a positivity domain.
    Field { field: &'a ScalarField<T>, center: &'a [T], domain: Option<&'a SetMask<T>> },
}

impl<T: Scalar> GrowthSource<'_, T> {
    pub fn tag(&self) -> String {
        match self {
            GrowthSource::Analytic(f) => format!("{}({})", f.kind(), f.parameter()),
            GrowthSource::Field { field, .. } => field.source().unwrap_or("field").to_string(),
        }
    }

    /// `mu_+(r)`.
    pub fn mu_plus(&self, r: T) -> Result<T> {
        if !(r > T::zero()) {
            return Err(LabError::InvalidParameter(format!("radius {r} must be positive")));
        }
        match *self {
            GrowthSource::Analytic(f) => Ok(f.exact_growth(r)),
            GrowthSource::Field { field, center, domain } => {
                let grid = field.grid();
                grid.check_ball(center, r)?;
                let mut ball = SetMask::ball(grid, center, r);
                if let Some(d) = domain {
                    ball = ball.intersect(d)?;
                }
                Ok(field.max_over(&ball)?.unwrap_or(T::zero()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GrowthCurve<T: Scalar> {
    radii: Vec<T>,
    sup_values: Vec<T>,
    source: String,
}

impl<T: Scalar> GrowthCurve<T> {
    /// Radii must increase strictly and the suprema must not decrease.
    pub fn new(radii: Vec<T>, sup_values: Vec<T>, source: impl Into<String>) -> Result<Self> {
        if radii.len() != sup_values.len() {
            return Err(LabError::Inconsistent("one supremum per radius required".into()));
        }
        if radii.first().is_some_and(|&r| !(r > T::zero())) || radii.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(LabError::InvalidParameter("radii must be positive and strictly increasing".into()));
        }
        if sup_values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::NonFinite("growth curve value".into()));
        }
        if sup_values.windows(2).any(|w| w[1] < w[0]) {
            return Err(LabError::Inconsistent("suprema over nested balls must not decrease".into()));
        }
        Ok(GrowthCurve { radii, sup_values, source: source.into() })
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn sup_values(&self) -> &[T] {
        &self.sup_values
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// Log-log slopes between consecutive samples; `None` where a value is 0.
    pub fn pair_slopes(&self) -> Vec<Option<T>> {
        self.radii
            .windows(2)
            .zip(self.sup_values.windows(2))
            .map(|(r, m)| {
                (m[0] > T::zero()).then(|| (m[1] / m[0]).ln() / (r[1] / r[0]).ln())
            })
            .collect()
    }
}

pub fn mu_plus_curve<T: Scalar>(source: &GrowthSource<'_, T>, radii: &[T]) -> Result<GrowthCurve<T>> {
    let values = radii.iter().map(|&r| source.mu_plus(r)).collect::<Result<Vec<_>>>()?;
    GrowthCurve::new(radii.to_vec(), values, source.tag())
}

/// Geometric radii `base * 4^k`, `k = 0..count`.
pub fn dyadic_radii<T: Scalar>(base: T, count: usize) -> Vec<T> {
    (0..count).map(|k| base * T::of(4.0).powi(k as i32)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult<T> {
    /// Least-squares slope of `ln mu_+` against `ln r`.
    pub exponent: T,
    pub log_intercept: T,
    pub max_residual: T,
    /// Smallest consecutive-pair slope over the last half of the pairs.
    pub tail_liminf_slope: T,
}

pub fn fit_exponent<T: Scalar>(curve: &GrowthCurve<T>) -> Result<FitResult<T>> {
    let n = curve.len();
    if n < 3 {
        return Err(LabError::InvalidParameter(format!("need at least 3 radii, got {n}")));
    }
    if let Some(i) = curve.sup_values.iter().position(|&v| !(v > T::zero())) {
        return Err(LabError::InvalidParameter(format!(
            "mu_+ vanishes at r = {}; the curve is not yet nontrivial there",
            curve.radii[i]
        )));
    }
    let xs: Vec<T> = curve.radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<T> = curve.sup_values.iter().map(|v| v.ln()).collect();
    let nn = T::of_usize(n);
    let mx = xs.iter().copied().sum::<T>() / nn;
    let my = ys.iter().copied().sum::<T>() / nn;
    let (sxy, sxx) = xs.iter().zip(&ys).fold((T::zero(), T::zero()), |(sxy, sxx), (&x, &y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    let exponent = sxy / sxx;
    let log_intercept = my - exponent * mx;
    let max_residual = xs
        .iter()
        .zip(&ys)
        .fold(T::zero(), |m, (&x, &y)| m.max((y - log_intercept - exponent * x).abs()));
    let slopes: Vec<T> = curve.pair_slopes().into_iter().map(|s| s.expect("positive values")).collect();
    let tail = slopes.len().div_ceil(2);
    let tail_liminf_slope = slopes[slopes.len() - tail..].iter().fold(T::infinity(), |m, &s| m.min(s));
    Ok(FitResult { exponent, log_intercept, max_residual, tail_liminf_slope })
}

/// `ln(1/eta) / ln(ratio)`.
pub fn iteration_exponent<T: Scalar>(eta: T, ratio: T) -> Result<T> {
    if !(eta > T::zero() && eta < T::one()) {
        return Err(LabError::InvalidParameter(format!("eta = {eta} must lie in (0, 1)")));
    }
    if !(ratio > T::one()) {
        return Err(LabError::InvalidParameter(format!("ratio = {ratio} must exceed 1")));
    }
    Ok(eta.recip().ln() / ratio.ln())
}

/// Worst case of the two contraction branches, `max(15/16, eta)`.
pub fn eta_max<T: Scalar>(eta_measured: T) -> Result<T> {
    if !(eta_measured > T::zero() && eta_measured < T::one()) {
        return Err(LabError::InvalidParameter(format!("eta = {eta_measured} must lie in (0, 1)")));
    }
    Ok(eta_measured.max(T::of(15.0 / 16.0)))
}
