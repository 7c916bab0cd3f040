use crate::error::{LabError, Result};
use crate::scalar::Scalar;

/// `Gamma(n / 2)` for a positive integer `n`.
fn gamma_half<T: Scalar>(n: usize) -> T {
    let (mut value, mut x) = if n.is_multiple_of(2) { (T::one(), T::one()) } else { (T::PI().sqrt(), T::of(0.5)) };
    while x < T::of_usize(n) / T::of(2.0) {
        value = value * x;
        x = x + T::one();
    }
    value
}

/// Surface measure of the unit sphere in `R^n`, `2 pi^{n/2} / Gamma(n/2)`.
/// `omega_n(1) = 2` counts the two points of the 0-sphere.
pub fn omega_n<T: Scalar>(n: usize) -> T {
    assert!(n >= 1, "omega_n needs n >= 1");
    T::of(2.0) * T::PI().powf(T::of_usize(n) / T::of(2.0)) / gamma_half::<T>(n)
}

pub(crate) fn check_exponent<T: Scalar>(p: T, n: usize) -> Result<()> {
    if !(p > T::one() && p <= T::of_usize(n) * (T::one() + T::epsilon())) {
        return Err(LabError::InvalidParameter(format!("p = {p} must lie in (1, {n}]")));
    }
    Ok(())
}

pub(crate) fn is_conformal<T: Scalar>(p: T, n: usize) -> bool {
    (p - T::of_usize(n)).abs() <= T::of(1e-12) * T::of_usize(n)
}

/// p-capacity of the condenser `(B_r, B_R)` in `R^n`.
pub fn cap_ball_annulus<T: Scalar>(p: T, n: usize, r: T, big_r: T) -> Result<T> {
    check_exponent(p, n)?;
    if !(r > T::zero() && r < big_r) {
        return Err(LabError::InvalidParameter(format!("radii must satisfy 0 < r < R, got r = {r}, R = {big_r}")));
    }
    let omega = omega_n::<T>(n);
    let one = T::one();
    if is_conformal(p, n) {
        return Ok(omega * (big_r / r).ln().powf(one - p));
    }
    let q = (p - T::of_usize(n)) / (p - one);
    Ok(omega * q.abs().powf(p - one) * (big_r.powf(q) - r.powf(q)).abs().powf(one - p))
}

/// `cap / R^{n-p}`; the identity when `p = n`.
pub fn delta_ratio<T: Scalar>(cap_value: T, big_r: T, p: T, n: usize) -> Result<T> {
    if !(cap_value >= T::zero()) || !(big_r > T::zero()) {
        return Err(LabError::InvalidParameter("need cap >= 0 and R > 0".into()));
    }
    if is_conformal(p, n) {
        return Ok(cap_value);
    }
    Ok(cap_value / big_r.powf(T::of_usize(n) - p))
}

/// Integrand of `kappa_N` after `t = s^{N-1}`: `(N-1) (u / sin u)^a` with
/// `u = s^{N-1}` and `a = (N-2)/(N-1)`. Bounded on the whole interval.
fn kappa_integrand(n: usize, s: f64) -> f64 {
    let m = (n - 1) as f64;
    let a = (n as f64 - 2.0) / m;
    let u = s.powf(m);
    let ratio = if u < 1e-8 { 1.0 + u * u / 6.0 } else { u / u.sin() };
    m * ratio.powf(a)
}

fn kappa_upper(n: usize) -> f64 {
    std::f64::consts::FRAC_PI_2.powf(1.0 / (n - 1) as f64)
}

fn check_kappa_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(LabError::InvalidParameter(format!("kappa_N needs N >= 2, got {n}")));
    }
    Ok(())
}

/// `kappa_N = int_0^{pi/2} (sin t)^{(2-N)/(N-1)} dt` by adaptive Simpson.
pub fn kappa_n(n: usize) -> Result<f64> {
    check_kappa_dim(n)?;
    let f = |s: f64| kappa_integrand(n, s);
    let b = kappa_upper(n);
    let (fa, fm, fb) = (f(0.0), f(b / 2.0), f(b));
    let whole = b / 6.0 * (fa + 4.0 * fm + fb);
    Ok(adaptive_simpson(&f, 0.0, b, fa, fm, fb, whole, 1e-14, 50))
}

/// Same integral by composite Simpson on `intervals` (even) panels.
pub fn kappa_n_composite(n: usize, intervals: usize) -> Result<f64> {
    check_kappa_dim(n)?;
    if intervals < 2 || intervals % 2 == 1 {
        return Err(LabError::InvalidParameter("composite Simpson needs an even interval count".into()));
    }
    let b = kappa_upper(n);
    let h = b / intervals as f64;
    let inner: f64 = (1..intervals)
        .map(|i| kappa_integrand(n, i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    Ok(h / 3.0 * (kappa_integrand(n, 0.0) + inner + kappa_integrand(n, b)))
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = (a + b) / 2.0;
    let (lm, rm) = ((a + m) / 2.0, (m + b) / 2.0);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Lower bound `omega ln 3 / kappa_N^{N-1}` for the N-capacity of a segment
/// of length comparable to `r` in `B_{2r}`; `omega` is the caller's value for
/// the measure of the `(N-3)`-sphere.
pub fn segment_capacity_lower_bound(n: usize, omega: f64) -> Result<f64> {
    if n < 3 {
        return Err(LabError::InvalidParameter(format!("segment bound needs N >= 3, got {n}")));
    }
    if !(omega > 0.0) {
        return Err(LabError::InvalidParameter("omega must be positive".into()));
    }
    Ok(omega * 3f64.ln() / kappa_n(n)?.powi(n as i32 - 1))
}
