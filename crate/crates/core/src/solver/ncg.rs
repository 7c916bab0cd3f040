use crate::scalar::{dot, Scalar};

/// Smooth objective `f: R^n -> R`.
pub trait Objective<T> {
    fn len(&self) -> usize;
    /// Returns `f(x)` and writes `grad f(x)` into `gradient`.
    fn value_and_gradient(&self, x: &[T], gradient: &mut [T]) -> T;
}

#[derive(Debug, Clone, Copy)]
pub struct NcgOptions<T> {
    /// Stop once one outer iteration lowers `f` by less than this, relatively.
    pub tolerance: T,
    pub max_iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcgOutcome<T> {
    pub value: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub last_relative_decrease: T,
    pub converged: bool,
}

const ARMIJO: f64 = 1e-4;
const CURVATURE: f64 = 0.1;
const MAX_LINE_EVALS: usize = 40;

#[derive(Clone, Copy)]
struct Probe<T> {
    t: T,
    value: T,
    slope: T,
}

/// Polak–Ribière+ nonlinear conjugate gradients, started from `x`.
///
/// The line search brackets a step satisfying the strong Wolfe conditions,
/// interpolating the directional derivative by secants and falling back to
/// bisection; steps that fail to decrease `f` trigger a steepest-descent
/// restart, and a failed restart ends the run.
pub fn nonlinear_cg<T: Scalar, F: Objective<T> + ?Sized>(
    objective: &F,
    x: &mut [T],
    options: NcgOptions<T>,
) -> NcgOutcome<T> {
    let n = objective.len();
    let mut g = vec![T::zero(); n];
    let mut f = objective.value_and_gradient(x, &mut g);
    let mut evaluations = 1;
    let mut d: Vec<T> = g.iter().map(|&v| -v).collect();
    let mut trial = vec![T::zero(); n];
    let mut g_trial = vec![T::zero(); n];
    let mut step_guess: Option<T> = None;
    let mut last = T::infinity();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < options.max_iterations {
        let gg = dot(&g, &g);
        if gg == T::zero() {
            last = T::zero();
            converged = true;
            break;
        }
        let mut slope0 = dot(&g, &d);
        if !(slope0 < T::zero()) {
            d.iter_mut().zip(&g).for_each(|(d, &g)| *d = -g);
            slope0 = -gg;
        }
        let d_max = d.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let t0 = step_guess.unwrap_or_else(|| T::one() / d_max).max(T::epsilon() / d_max);

        let eval = |t: T, trial: &mut [T], g_trial: &mut [T]| {
            trial.iter_mut().zip(x.iter()).zip(&d).for_each(|((y, &x), &d)| *y = x + t * d);
            let value = objective.value_and_gradient(trial, g_trial);
            Probe { t, value, slope: dot(g_trial, &d) }
        };

        let c1 = T::of(ARMIJO);
        let c2 = T::of(CURVATURE);
        let mut lo = Probe { t: T::zero(), value: f, slope: slope0 };
        let mut hi: Option<Probe<T>> = None;
        let mut best: Option<Probe<T>> = None;
        let mut t = t0;
        let mut last_probe = T::nan();
        for _ in 0..MAX_LINE_EVALS {
            let probe = eval(t, &mut trial, &mut g_trial);
            last_probe = probe.t;
            evaluations += 1;
            let armijo = probe.value <= f + c1 * probe.t * slope0 && probe.value.is_finite();
            if armijo && best.as_ref().is_none_or(|b| probe.value < b.value) {
                best = Some(probe);
            }
            if armijo && probe.slope.abs() <= c2 * slope0.abs() {
                break;
            }
            if !armijo || probe.slope >= T::zero() {
                hi = Some(probe);
            } else {
                lo = probe;
            }
            t = match &hi {
                None => lo.t * T::of(4.0),
                Some(h) => {
                    let width = h.t - lo.t;
                    let secant = if h.slope > lo.slope && h.value.is_finite() {
                        lo.t - lo.slope * width / (h.slope - lo.slope)
                    } else {
                        lo.t + width / T::of(2.0)
                    };
                    let margin = width * T::of(0.1);
                    secant.max(lo.t + margin).min(h.t - margin)
                }
            };
            if !(t > T::zero()) {
                break;
            }
        }
        let Some(accepted) = best else {
            // no decrease along d: restart once from steepest descent
            if step_guess.is_none() {
                last = T::zero();
                converged = true;
                break;
            }
            step_guess = None;
            d.iter_mut().zip(&g).for_each(|(d, &g)| *d = -g);
            iterations += 1;
            continue;
        };
        // re-evaluate at the accepted step if the last probe was elsewhere
        let f_new = if accepted.t == last_probe {
            x.copy_from_slice(&trial);
            accepted.value
        } else {
            x.iter_mut().zip(&d).for_each(|(x, &d)| *x = *x + accepted.t * d);
            evaluations += 1;
            objective.value_and_gradient(x, &mut g_trial)
        };
        let beta = {
            let num = g_trial.iter().zip(&g).fold(T::zero(), |acc, (&gn, &go)| acc + gn * (gn - go));
            (num / gg).max(T::zero())
        };
        std::mem::swap(&mut g, &mut g_trial);
        d.iter_mut().zip(&g).for_each(|(d, &g)| *d = -g + beta * *d);
        let scale = f_new.abs().max(T::min_positive_value());
        last = (f - f_new) / scale;
        f = f_new;
        step_guess = Some(accepted.t * slope0 / dot(&g, &d).min(-T::min_positive_value()));
        step_guess = step_guess.filter(|s| s.is_finite() && *s > T::zero());
        iterations += 1;
        if last < options.tolerance {
            converged = true;
            break;
        }
    }
    NcgOutcome { value: f, iterations, evaluations, last_relative_decrease: last, converged }
}
