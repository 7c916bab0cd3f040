//! Measurements behind the De Giorgi lemma, sup bounds, weak Harnack,
//! logarithmic and log-gradient estimates.
//!
//! Each verifier returns the two sides of a one-sided inequality (or their
//! ratio); callers judge boundedness across scales rather than any constant.

use serde::{Deserialize, Serialize};

use crate::capacity::omega_n;
use crate::error::{LabError, Result};
use crate::geometry::{measure, ScalarField, SetMask};
use crate::growth::GrowthSource;
use crate::scalar::Scalar;

pub const DEFAULT_TAU: f64 = 0.1;

/// Default log-estimate exponent, `0.4 (p - 1) / p`.
pub fn default_sigma<T: Scalar>(p: T) -> T {
    T::of(0.4) * (p - T::one()) / p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theta0Branch {
    /// `5^{N+1} omega_N / (N 6^{N+1})`.
    Geometric,
    /// `omega_N^N / (N^N 6^{4N+2N^2} gamma^{N/p} beta^N)`.
    Structural,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theta0<T> {
    pub value: T,
    pub branch: Theta0Branch,
    pub geometric: T,
    pub structural: T,
}

pub fn theta0<T: Scalar>(n: usize, p: T, gamma_hat: T, beta: T) -> Result<Theta0<T>> {
    if n < 1 || !(p > T::zero() && gamma_hat > T::zero() && beta > T::zero()) {
        return Err(LabError::InvalidParameter("theta0 needs positive N, p, gamma and beta".into()));
    }
    let nn = T::of_usize(n);
    let omega = omega_n::<T>(n);
    let six = T::of(6.0);
    let geometric = T::of(5.0).powi(n as i32 + 1) * omega / (nn * six.powi(n as i32 + 1));
    // in logarithms: 6^{4N+2N^2} overflows single precision
    let log_structural = nn * omega.ln()
        - nn * nn.ln()
        - T::of_usize(4 * n + 2 * n * n) * six.ln()
        - nn / p * gamma_hat.ln()
        - nn * beta.ln();
    let structural = log_structural.exp();
    let (value, branch) = if geometric <= structural {
        (geometric, Theta0Branch::Geometric)
    } else {
        (structural, Theta0Branch::Structural)
    };
    Ok(Theta0 { value, branch, geometric, structural })
}

fn check_unit<T: Scalar>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v < T::one() {
        Ok(())
    } else {
        Err(LabError::InvalidParameter(format!("{name} = {v} must lie in (0, 1)")))
    }
}

fn check_radius<T: Scalar>(name: &str, v: T) -> Result<()> {
    if v > T::zero() {
        Ok(())
    } else {
        Err(LabError::InvalidParameter(format!("{name} = {v} must be positive")))
    }
}

/// Node values of `field` inside `mask`.
fn values_in<'a, T: Scalar>(field: &'a ScalarField<T>, mask: &'a SetMask<T>) -> impl Iterator<Item = T> + 'a {
    mask.indices().map(move |i| field.values()[i])
}

/// `int_mask f(u) / |mask|`.
fn ball_mean<T: Scalar>(field: &ScalarField<T>, mask: &SetMask<T>, f: impl Fn(T) -> T) -> Result<T> {
    let vol = measure(mask);
    if !(vol > T::zero()) {
        return Err(LabError::EmptySet("integration ball contains no nodes".into()));
    }
    Ok(field.map(f)?.integrate(mask)? / vol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaVerdict<T> {
    pub mu_plus: T,
    /// `|{u > mu_+ (1 - 2^{-s})} ∩ B_R| / |B_R|`.
    pub level_fraction: T,
    /// `sup_{B_{5R/6}} u`.
    pub inner_sup: T,
    pub premise_holds: bool,
    pub conclusion_holds: bool,
    /// `!premise || conclusion`.
    pub consistent: bool,
}

/// If the super-level set `{u > mu_+ (1 - 2^{-s})}` fills less than `theta`
/// of `B_R`, then `u <= mu_+ (1 - 2^{-(s+1)})` on `B_{5R/6}`; `mu_+` is the
/// supremum over `B_{2R}`.
pub fn degiorgi_lemma_check<T: Scalar>(
    field: &ScalarField<T>,
    center: &[T],
    big_r: T,
    s: u32,
    theta: T,
) -> Result<LemmaVerdict<T>> {
    check_radius("R", big_r)?;
    check_unit("theta", theta)?;
    if s < 2 {
        return Err(LabError::InvalidParameter(format!("s = {s} must be at least 2")));
    }
    let grid = field.grid();
    grid.check_ball(center, big_r + big_r)?;
    let outer = SetMask::ball(grid, center, big_r + big_r);
    let ball = SetMask::ball(grid, center, big_r);
    let inner = SetMask::ball(grid, center, big_r * T::of(5.0) / T::of(6.0));
    let mu_plus = field.max_over(&outer)?.unwrap_or(T::zero());
    let half = T::of(0.5);
    let level = mu_plus * (T::one() - half.powi(s as i32));
    let above = ball.select(|i| field.values()[i] > level);
    let level_fraction = measure(&above) / measure(&ball);
    let inner_sup = field.max_over(&inner)?.unwrap_or(T::neg_infinity());
    let premise_holds = level_fraction < theta;
    let conclusion_holds = inner_sup <= mu_plus * (T::one() - half.powi(s as i32 + 1));
    Ok(LemmaVerdict {
        mu_plus,
        level_fraction,
        inner_sup,
        premise_holds,
        conclusion_holds,
        consistent: !premise_holds || conclusion_holds,
    })
}

/// `sup_{B_{sigma rho}} u_+ / (mean_{B_rho} u_+^q)^{1/q}`; `0` when both
/// vanish.
pub fn sup_bound_ratio<T: Scalar>(field: &ScalarField<T>, sigma: T, q: T, rho: T, center: &[T]) -> Result<T> {
    check_unit("sigma", sigma)?;
    check_radius("q", q)?;
    check_radius("rho", rho)?;
    let grid = field.grid();
    grid.check_ball(center, rho)?;
    let inner = SetMask::ball(grid, center, sigma * rho);
    let ball = SetMask::ball(grid, center, rho);
    let sup = values_in(field, &inner).fold(T::zero(), |m, v| m.max(v));
    let mean = ball_mean(field, &ball, |v| v.max(T::zero()).powf(q))?.powf(q.recip());
    if mean > T::zero() {
        Ok(sup / mean)
    } else if sup == T::zero() {
        Ok(T::zero())
    } else {
        Err(LabError::Inconsistent("positive supremum over a ball with vanishing mean".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarnackReport<T> {
    pub tau: T,
    pub sigma: T,
    pub eta: T,
    pub rho: T,
    /// `(mean_{B_{sigma rho}} v^tau)^{1/tau}`.
    pub avg_power_mean: T,
    /// Node minimum over `B_{eta rho}`.
    pub infimum: T,
    /// `avg_power_mean / infimum`: `+inf` if only the infimum vanishes, `0`
    /// if both do.
    pub ratio: T,
}

impl<T: Scalar> HarnackReport<T> {
    pub fn is_unbounded(&self) -> bool {
        self.ratio.is_infinite()
    }
}

const NEGATIVE_SLACK: f64 = 1e-12;

pub fn weak_harnack_ratio<T: Scalar>(
    field: &ScalarField<T>,
    tau: T,
    sigma: T,
    eta: T,
    rho: T,
    center: &[T],
) -> Result<HarnackReport<T>> {
    check_unit("tau", tau)?;
    check_unit("sigma", sigma)?;
    check_unit("eta", eta)?;
    check_radius("rho", rho)?;
    let grid = field.grid();
    grid.check_ball(center, rho)?;
    let ball = SetMask::ball(grid, center, rho);
    if let Some(v) = values_in(field, &ball).find(|&v| v < -T::of(NEGATIVE_SLACK)) {
        return Err(LabError::InvalidParameter(format!("field takes the negative value {v} on the ball")));
    }
    let mean_ball = SetMask::ball(grid, center, sigma * rho);
    let inf_ball = SetMask::ball(grid, center, eta * rho);
    let infimum = values_in(field, &inf_ball)
        .fold(T::infinity(), |m, v| m.min(v.max(T::zero())));
    if infimum == T::infinity() {
        return Err(LabError::EmptySet("infimum ball contains no nodes".into()));
    }
    // normalizing first keeps constant fields at exactly 1
    let (avg_power_mean, ratio) = if infimum > T::zero() {
        let ratio = ball_mean(field, &mean_ball, |v| (v.max(T::zero()) / infimum).powf(tau))?.powf(tau.recip());
        (ratio * infimum, ratio)
    } else {
        let mean = ball_mean(field, &mean_ball, |v| v.max(T::zero()).powf(tau))?.powf(tau.recip());
        (mean, if mean > T::zero() { T::infinity() } else { T::zero() })
    };
    Ok(HarnackReport { tau, sigma, eta, rho, avg_power_mean, infimum, ratio })
}

/// Measured contraction `mu_+(r) / mu_+(R)` of the suprema over nested balls.
pub fn harnack_chain_eta<T: Scalar>(source: &GrowthSource<'_, T>, big_r: T, r: T) -> Result<T> {
    if !(r > T::zero() && r < big_r) {
        return Err(LabError::InvalidParameter(format!("need 0 < r < R, got r = {r}, R = {big_r}")));
    }
    let outer = source.mu_plus(big_r)?;
    if !(outer > T::zero()) {
        return Err(LabError::InvalidParameter("mu_+(R) vanishes".into()));
    }
    Ok(source.mu_plus(r)? / outer)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogEstimateReport<T> {
    pub sigma: T,
    pub p: T,
    pub radius: T,
    /// `mean_{B_R} [ln(mu_+ / (mu_+ - u))]^sigma`.
    pub lhs_mean: T,
    pub delta: T,
    /// `lhs_mean * delta^{1/p}`.
    pub normalized: T,
    /// Nodes whose value was lowered to `mu_+ (1 - 1e-12)`.
    pub clamped: usize,
}

const CLAMP: f64 = 1e-12;

pub fn log_estimate_report<T: Scalar>(
    field: &ScalarField<T>,
    mu_plus: T,
    sigma: T,
    big_r: T,
    p: T,
    delta: T,
    center: &[T],
) -> Result<LogEstimateReport<T>> {
    if !(mu_plus > T::zero()) {
        return Err(LabError::InvalidParameter(format!("mu_+ = {mu_plus} must be positive")));
    }
    if !(p > T::one()) {
        return Err(LabError::InvalidParameter(format!("p = {p} must exceed 1")));
    }
    let sigma_max = (p - T::one()) / p;
    if !(sigma > T::zero() && sigma < sigma_max) {
        return Err(LabError::InvalidParameter(format!("sigma = {sigma} must lie in (0, {sigma_max})")));
    }
    check_radius("R", big_r)?;
    if !(delta >= T::zero()) {
        return Err(LabError::InvalidParameter("delta must be non-negative".into()));
    }
    let grid = field.grid();
    grid.check_ball(center, big_r)?;
    let ball = SetMask::ball(grid, center, big_r);
    let cap = mu_plus * (T::one() - T::of(CLAMP));
    let clamped = values_in(field, &ball).filter(|&v| v > cap).count();
    let lhs_mean = ball_mean(field, &ball, |v| {
        let u = v.max(T::zero()).min(cap);
        (mu_plus / (mu_plus - u)).ln().powf(sigma)
    })?;
    let normalized = lhs_mean * delta.powf(p.recip());
    Ok(LogEstimateReport { sigma, p, radius: big_r, lhs_mean, delta, normalized, clamped })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGradientData<T> {
    /// `int_{B_rho} |D ln u|^p`.
    pub lhs: T,
    /// `p / (R - rho)^p int_{B_R} ln(M / u)`.
    pub rhs_raw: T,
}

impl<T: Scalar> LogGradientData<T> {
    /// `lhs / rhs_raw` with `0/0 = 0`.
    pub fn implied_gamma(&self) -> T {
        if self.lhs == T::zero() {
            T::zero()
        } else if self.rhs_raw == T::zero() {
            T::infinity()
        } else {
            self.lhs / self.rhs_raw
        }
    }
}

/// Both sides of `int_{B_rho} |D ln u|^p <= gamma p / (R - rho)^p int_{B_R} ln(M/u)`
/// with `gamma` removed. The gradient is taken of `ln u` on the whole grid, with
/// non-positive nodes outside `B_R` replaced by 0, so `rho` should stay two
/// cells inside `R`.
pub fn log_gradient_check<T: Scalar>(
    field: &ScalarField<T>,
    m_bound: T,
    rho: T,
    big_r: T,
    p: T,
    center: &[T],
) -> Result<LogGradientData<T>> {
    check_radius("rho", rho)?;
    if !(rho < big_r) {
        return Err(LabError::InvalidParameter("need rho < R".into()));
    }
    if !(p > T::one()) {
        return Err(LabError::InvalidParameter(format!("p = {p} must exceed 1")));
    }
    let grid = field.grid();
    grid.check_ball(center, big_r)?;
    let ball = SetMask::ball(grid, center, big_r);
    if let Some(v) = values_in(field, &ball).find(|&v| !(v > T::zero())) {
        return Err(LabError::InvalidParameter(format!("field must be positive on B_R, found {v}")));
    }
    let sup = values_in(field, &ball).fold(T::zero(), |m, v| m.max(v));
    if m_bound < sup {
        return Err(LabError::InvalidParameter(format!("M = {m_bound} is below sup u = {sup}")));
    }
    let log_u = field.map(|v| if v > T::zero() { v.ln() } else { T::zero() })?;
    let inner = SetMask::ball(grid, center, rho);
    let lhs = log_u.gradient().norm_pow(p)?.integrate(&inner)?;
    let gap = field.map(|v| if v > T::zero() { (m_bound / v).ln() } else { T::zero() })?.integrate(&ball)?;
    let rhs_raw = p / (big_r - rho).powf(p) * gap;
    Ok(LogGradientData { lhs, rhs_raw })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Composition {
    /// `1 / (1 - t)`.
    ReciprocalGap,
    /// `ln(1 / (1 - t))`.
    LogReciprocalGap,
}

pub fn compose_convex<T: Scalar>(field: &ScalarField<T>, kind: Composition) -> Result<ScalarField<T>> {
    if let Some(v) = field.values().iter().find(|&&v| !(v < T::one())) {
        return Err(LabError::InvalidParameter(format!("composition needs values below 1, found {v}")));
    }
    let out = match kind {
        Composition::ReciprocalGap => field.map(|t| (T::one() - t).recip())?,
        Composition::LogReciprocalGap => field.map(|t| -(T::one() - t).ln())?,
    };
    Ok(out.with_source(match kind {
        Composition::ReciprocalGap => "reciprocal_gap",
        Composition::LogReciprocalGap => "log_reciprocal_gap",
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

/// One row of a verification table; absent parameters stay `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub family: String,
    #[serde(rename = "R")]
    pub big_r: Option<f64>,
    pub rho: Option<f64>,
    pub sigma: Option<f64>,
    pub tau: Option<f64>,
    pub value: f64,
    pub verdict: Verdict,
}
