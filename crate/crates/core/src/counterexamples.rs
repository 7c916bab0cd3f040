//! Closed-form counterexample families.
//!
//! * `meyers2d`: `u = x (x^2 + y^2)^{(mu-1)/2}` solving `div(A Du) = 0` in the
//!   plane, eigenvalues of `A` equal to `mu^2` and `1`. Optional passive
//!   coordinates extend it cylindrically to higher dimension.
//! * `cone3d`: `u = x_1 |x|^alpha`, `alpha in (-1, 0)`, solving a linear
//!   equation in `{x_1 > 0}` with `2C = -alpha (alpha + 3)`.
//! * `quartic4d`: `u = (x_1^2 + x_2^2)^{1/3} / |x|^alpha`, `alpha in (0, 2/3)`,
//!   a sub-solution of `div(A |Du|^2 Du) = 0` with
//!   `C = 1 - (2 - 3 alpha)^2 / 8`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{fmt_point, LabError, Result};
use crate::scalar::Scalar;

/// Points closer than this to an excluded set are rejected.
pub const EXCLUSION_RADIUS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Meyers2d,
    Cone3d,
    Quartic4d,
}

impl FamilyKind {
    pub fn id(self) -> &'static str {
        match self {
            FamilyKind::Meyers2d => "meyers2d",
            FamilyKind::Cone3d => "cone3d",
            FamilyKind::Quartic4d => "quartic4d",
        }
    }

    /// Name of the family parameter in configuration files.
    pub fn parameter_name(self) -> &'static str {
        match self {
            FamilyKind::Meyers2d => "mu",
            _ => "alpha",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for FamilyKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "meyers2d" => Ok(FamilyKind::Meyers2d),
            "cone3d" => Ok(FamilyKind::Cone3d),
            "quartic4d" => Ok(FamilyKind::Quartic4d),
            other => Err(LabError::InvalidParameter(format!("unknown family `{other}`"))),
        }
    }
}

/// Set on which the solution vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VanishingSet {
    /// `{x_1 = 0}`
    Hyperplane,
    /// `{x_1 = x_2 = 0}`
    Codimension2,
}

/// Symmetric coefficient matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix<T> {
    n: usize,
    entries: Vec<T>,
}

impl<T: Scalar> CoefficientMatrix<T> {
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![T::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = T::one();
        }
        CoefficientMatrix { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.n + j]
    }

    fn set(&mut self, i: usize, j: usize, v: T) {
        self.entries[i * self.n + j] = v;
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| (0..self.n).fold(T::zero(), |acc, j| acc + self.get(i, j) * v[j]))
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Eigenvalues in ascending order, computed in `f64`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).as_f64());
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }
}

/// One analytic counterexample: solution, coefficients and flux.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", try_from = "RawFamily<T>")]
pub struct Family<T: Scalar> {
    kind: FamilyKind,
    parameter: T,
    /// Passive coordinates appended to `meyers2d`.
    #[serde(default)]
    extra_dims: usize,
}

#[derive(Deserialize)]
#[serde(bound = "")]
struct RawFamily<T: Scalar> {
    kind: FamilyKind,
    parameter: T,
    #[serde(default)]
    extra_dims: usize,
}

impl<T: Scalar> TryFrom<RawFamily<T>> for Family<T> {
    type Error = LabError;

    fn try_from(raw: RawFamily<T>) -> Result<Self> {
        let f = Family { kind: raw.kind, parameter: raw.parameter, extra_dims: raw.extra_dims };
        f.validate()?;
        Ok(f)
    }
}

impl<T: Scalar> Family<T> {
    pub fn meyers(mu: T) -> Result<Self> {
        Self::new(FamilyKind::Meyers2d, mu)
    }

    /// Meyers' solution extended to `2 + extra_dims` dimensions by passive
    /// coordinates; the coefficient matrix gains an identity block.
    pub fn meyers_cylindrical(mu: T, extra_dims: usize) -> Result<Self> {
        if extra_dims > 2 {
            return Err(LabError::InvalidParameter("at most 2 passive coordinates".into()));
        }
        let mut f = Self::meyers(mu)?;
        f.extra_dims = extra_dims;
        Ok(f)
    }

    pub fn cone(alpha: T) -> Result<Self> {
        Self::new(FamilyKind::Cone3d, alpha)
    }

    pub fn quartic(alpha: T) -> Result<Self> {
        Self::new(FamilyKind::Quartic4d, alpha)
    }

    pub fn new(kind: FamilyKind, parameter: T) -> Result<Self> {
        let f = Family { kind, parameter, extra_dims: 0 };
        f.validate()?;
        Ok(f)
    }

    pub fn from_id(id: &str, parameter: T) -> Result<Self> {
        Self::new(id.parse()?, parameter)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.parameter;
        let ok = p.is_finite()
            && match self.kind {
                FamilyKind::Meyers2d => p > T::zero() && p < T::one(),
                FamilyKind::Cone3d => p > -T::one() && p < T::zero(),
                FamilyKind::Quartic4d => p > T::zero() && p < T::of(2.0) / T::of(3.0),
            };
        if ok && self.extra_dims <= 2 && (self.extra_dims == 0 || self.kind == FamilyKind::Meyers2d) {
            return Ok(());
        }
        Err(LabError::InvalidParameter(match self.kind {
            FamilyKind::Meyers2d => format!("mu must lie in (0, 1), got {p}"),
            FamilyKind::Cone3d => format!("alpha must lie in (-1, 0), got {p}"),
            FamilyKind::Quartic4d => format!("alpha must lie in (0, 2/3), got {p}"),
        }))
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn parameter(&self) -> T {
        self.parameter
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            FamilyKind::Meyers2d => 2 + self.extra_dims,
            FamilyKind::Cone3d => 3,
            FamilyKind::Quartic4d => 4,
        }
    }

    /// Growth exponent of the p-Laplacian-type operator: 2 for the linear
    /// families, 4 for the quartic one.
    pub fn power(&self) -> T {
        match self.kind {
            FamilyKind::Quartic4d => T::of(4.0),
            _ => T::of(2.0),
        }
    }

    /// The constant `C` of the cone and quartic matrices.
    pub fn constant_c(&self) -> Option<T> {
        let a = self.parameter;
        match self.kind {
            FamilyKind::Meyers2d => None,
            FamilyKind::Cone3d => Some(-a * (a + T::of(3.0)) / T::of(2.0)),
            FamilyKind::Quartic4d => {
                let t = T::of(2.0) - T::of(3.0) * a;
                Some(T::one() - t * t / T::of(8.0))
            }
        }
    }

    /// Eigenvalues of the coefficient matrix, ascending.
    pub fn expected_eigenvalues(&self) -> Vec<T> {
        match self.kind {
            FamilyKind::Meyers2d => {
                let mut ev = vec![self.parameter * self.parameter];
                ev.extend(std::iter::repeat_n(T::one(), 1 + self.extra_dims));
                ev
            }
            _ => {
                let c = self.constant_c().expect("cone and quartic carry C");
                let mut ev = vec![T::one() - c; self.dim() - 1];
                ev.push(T::one());
                ev
            }
        }
    }

    pub fn ellipticity_floor(&self) -> T {
        self.expected_eigenvalues()[0]
    }

    /// Exponent `gamma` with `u(lambda x) = lambda^gamma u(x)`, which is also
    /// the growth exponent of `sup_{B_r} u`.
    pub fn growth_exponent(&self) -> T {
        match self.kind {
            FamilyKind::Meyers2d => self.parameter,
            FamilyKind::Cone3d => T::one() + self.parameter,
            FamilyKind::Quartic4d => T::of(2.0) / T::of(3.0) - self.parameter,
        }
    }

    pub fn vanishing_set(&self) -> VanishingSet {
        match self.kind {
            FamilyKind::Quartic4d => VanishingSet::Codimension2,
            _ => VanishingSet::Hyperplane,
        }
    }

    /// Whether the family is positive at `x` (its positivity domain).
    pub fn in_positivity_domain(&self, x: &[T]) -> bool {
        match self.kind {
            FamilyKind::Quartic4d => x[0] != T::zero() || x[1] != T::zero(),
            _ => x[0] > T::zero(),
        }
    }

    /// `sup_{B_r} u` (over the positivity domain), which is `r^gamma`.
    pub fn exact_growth(&self, r: T) -> T {
        r.powf(self.growth_exponent())
    }

    fn check_point(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(LabError::InvalidParameter(format!(
                "{} expects points in R^{}, got {}",
                self.kind,
                self.dim(),
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LabError::NonFinite(fmt_point(x)));
        }
        Ok(())
    }

    fn guard(&self, x: &[T], distance: T) -> Result<()> {
        if distance < T::of(EXCLUSION_RADIUS) {
            Err(LabError::ExcludedPoint(fmt_point(x)))
        } else {
            Ok(())
        }
    }

    /// Squared norm of the first `k` coordinates.
    fn partial_sq(x: &[T], k: usize) -> T {
        x[..k].iter().fold(T::zero(), |acc, &v| acc + v * v)
    }

    pub fn evaluate(&self, x: &[T]) -> Result<T> {
        self.check_point(x)?;
        match self.kind {
            FamilyKind::Meyers2d => {
                let r2 = Self::partial_sq(x, 2);
                self.guard(x, r2.sqrt())?;
                Ok(r2.powf((self.parameter - T::one()) / T::of(2.0)) * x[0])
            }
            FamilyKind::Cone3d => {
                let r2 = Self::partial_sq(x, 3);
                self.guard(x, r2.sqrt())?;
                Ok(x[0] * r2.powf(self.parameter / T::of(2.0)))
            }
            FamilyKind::Quartic4d => {
                let r2 = Self::partial_sq(x, 4);
                self.guard(x, r2.sqrt())?;
                let rho = Self::partial_sq(x, 2);
                Ok(rho.cbrt() / r2.powf(self.parameter / T::of(2.0)))
            }
        }
    }

    /// Value with the continuous extension `u(0) = 0` at the origin.
    pub fn evaluate_or_limit(&self, x: &[T]) -> Result<T> {
        match self.evaluate(x) {
            Err(LabError::ExcludedPoint(_)) => Ok(T::zero()),
            other => other,
        }
    }

    pub fn evaluate_gradient(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_point(x)?;
        let two = T::of(2.0);
        match self.kind {
            FamilyKind::Meyers2d => {
                let mu = self.parameter;
                let r2 = Self::partial_sq(x, 2);
                self.guard(x, r2.sqrt())?;
                // r^{mu-3} (r^2 + (mu-1) x^2),  (mu-1) x y r^{mu-3}
                let f = r2.powf((mu - T::of(3.0)) / two);
                let mut g = vec![T::zero(); self.dim()];
                g[0] = f * (r2 + (mu - T::one()) * x[0] * x[0]);
                g[1] = f * (mu - T::one()) * x[0] * x[1];
                Ok(g)
            }
            FamilyKind::Cone3d => {
                let a = self.parameter;
                let r2 = Self::partial_sq(x, 3);
                self.guard(x, r2.sqrt())?;
                let ra = r2.powf(a / two);
                let f = a * x[0] * r2.powf((a - two) / two);
                Ok(vec![ra + f * x[0], f * x[1], f * x[2]])
            }
            FamilyKind::Quartic4d => {
                let a = self.parameter;
                let rho = Self::partial_sq(x, 2);
                self.guard(x, rho.sqrt())?;
                let r2 = Self::partial_sq(x, 4);
                let lead = T::one() / r2.powf((a + two) / two);
                let third = T::one() / T::of(3.0);
                let rho_m23 = T::one() / (rho.cbrt() * rho.cbrt());
                let rho_13 = rho.cbrt();
                let planar = |xi: T| {
                    lead * (two * third * rho_m23 * xi * r2 - a * rho_13 * xi)
                };
                let transverse = |xi: T| -a * rho_13 * xi * lead;
                Ok(vec![planar(x[0]), planar(x[1]), transverse(x[2]), transverse(x[3])])
            }
        }
    }

    pub fn coefficient_matrix(&self, x: &[T]) -> Result<CoefficientMatrix<T>> {
        self.check_point(x)?;
        let n = self.dim();
        let mut a = CoefficientMatrix::identity(n);
        match self.kind {
            FamilyKind::Meyers2d => {
                let r2 = Self::partial_sq(x, 2);
                self.guard(x, r2.sqrt())?;
                let k = T::one() - self.parameter * self.parameter;
                a.set(0, 0, T::one() - k * x[1] * x[1] / r2);
                a.set(1, 1, T::one() - k * x[0] * x[0] / r2);
                let off = k * x[0] * x[1] / r2;
                a.set(0, 1, off);
                a.set(1, 0, off);
            }
            FamilyKind::Cone3d | FamilyKind::Quartic4d => {
                let r2 = Self::partial_sq(x, n);
                self.guard(x, r2.sqrt())?;
                let c = self.constant_c().expect("C defined");
                for i in 0..n {
                    a.set(i, i, T::one() - c * (r2 - x[i] * x[i]) / r2);
                    for j in 0..i {
                        let off = c * x[i] * x[j] / r2;
                        a.set(i, j, off);
                        a.set(j, i, off);
                    }
                }
            }
        }
        Ok(a)
    }

    /// `A Du`.
    pub fn linear_flux(&self, x: &[T]) -> Result<Vec<T>> {
        let g = self.evaluate_gradient(x)?;
        Ok(self.coefficient_matrix(x)?.mul_vec(&g))
    }

    /// `|Du|^{p-2} A Du`: the linear flux for `p = 2`, and `|Du|^2 A Du` for
    /// the quartic family.
    pub fn flux(&self, x: &[T]) -> Result<Vec<T>> {
        let g = self.evaluate_gradient(x)?;
        let mut f = self.coefficient_matrix(x)?.mul_vec(&g);
        if self.kind == FamilyKind::Quartic4d {
            let s = g.iter().fold(T::zero(), |acc, &v| acc + v * v);
            f.iter_mut().for_each(|v| *v = *v * s);
        }
        Ok(f)
    }

    /// `div(|Du|^2 A Du) = (1/54) |x|^{-3 alpha - 2} (2 - 3 alpha)^4`, valid for
    /// the quartic family only.
    pub fn divergence_closed_form(&self, x: &[T]) -> Result<T> {
        if self.kind != FamilyKind::Quartic4d {
            return Err(LabError::InvalidParameter(format!(
                "closed-form divergence is only known for quartic4d, not {}",
                self.kind
            )));
        }
        self.check_point(x)?;
        let r2 = Self::partial_sq(x, 4);
        self.guard(x, r2.sqrt())?;
        let a = self.parameter;
        let t = T::of(2.0) - T::of(3.0) * a;
        let t4 = t * t * t * t;
        Ok(r2.powf(-T::of(1.5) * a - T::one()) * t4 / T::of(54.0))
    }

    /// Central-difference divergence of the analytic flux with step `step`.
    pub fn residual_strong(&self, x: &[T], step: T) -> Result<T> {
        self.check_point(x)?;
        if !(step > T::zero()) {
            return Err(LabError::InvalidParameter("step must be positive".into()));
        }
        let mut div = T::zero();
        let mut y = x.to_vec();
        for i in 0..self.dim() {
            y[i] = x[i] + step;
            let fp = self.flux(&y)?[i];
            y[i] = x[i] - step;
            let fm = self.flux(&y)?[i];
            y[i] = x[i];
            div = div + (fp - fm) / (step + step);
        }
        Ok(div)
    }

    /// Largest flux component magnitude at `x`, a scale for residuals.
    pub fn flux_scale(&self, x: &[T]) -> Result<T> {
        Ok(self.flux(x)?.iter().fold(T::zero(), |acc, v| acc.max(v.abs())))
    }
}

/// Smooth bump `exp(-1 / (1 - s^2))`, `s = |x - c| / r`, times `amplitude`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bump<T> {
    pub center: Vec<T>,
    pub radius: T,
    pub amplitude: T,
}

impl<T: Scalar> Bump<T> {
    pub fn new(center: Vec<T>, radius: T) -> Self {
        Bump { center, radius, amplitude: T::one() }
    }

    pub fn scaled(mut self, lambda: T) -> Self {
        self.amplitude = self.amplitude * lambda;
        self
    }

    fn s2(&self, x: &[T]) -> T {
        let d2 = x.iter().zip(&self.center).fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b));
        d2 / (self.radius * self.radius)
    }

    pub fn value(&self, x: &[T]) -> T {
        let s2 = self.s2(x);
        if s2 >= T::one() {
            T::zero()
        } else {
            self.amplitude * (-T::one() / (T::one() - s2)).exp()
        }
    }

    pub fn gradient(&self, x: &[T]) -> Vec<T> {
        let s2 = self.s2(x);
        if s2 >= T::one() {
            return vec![T::zero(); x.len()];
        }
        let q = T::one() - s2;
        let phi = self.amplitude * (-T::one() / q).exp();
        let f = -phi * T::of(2.0) / (q * q * self.radius * self.radius);
        x.iter().zip(&self.center).map(|(&a, &b)| f * (a - b)).collect()
    }
}

/// Midpoint quadrature over the bounding cube of the bump with `cells` cells
/// per axis, of `integrand(x, bump)`.
fn bump_quadrature<T: Scalar>(
    bump: &Bump<T>,
    cells: usize,
    mut integrand: impl FnMut(&[T]) -> Result<T>,
) -> Result<T> {
    let n = bump.center.len();
    let h = (bump.radius + bump.radius) / T::of_usize(cells);
    let vol = (0..n).fold(T::one(), |acc, _| acc * h);
    let mut idx = vec![0usize; n];
    let mut x = vec![T::zero(); n];
    let mut partial = Vec::with_capacity(cells);
    let mut acc = T::zero();
    let total = cells.pow(n as u32);
    for count in 0..total {
        for k in 0..n {
            x[k] = bump.center[k] - bump.radius + (T::of_usize(idx[k]) + T::of(0.5)) * h;
        }
        if bump.s2(&x) < T::one() {
            acc = acc + integrand(&x)?;
        }
        for k in 0..n {
            idx[k] += 1;
            if idx[k] < cells {
                break;
            }
            idx[k] = 0;
        }
        if (count + 1) % cells == 0 {
            partial.push(acc);
            acc = T::zero();
        }
    }
    Ok(crate::scalar::pairwise_sum(&partial) * vol)
}

/// Weak form of the sub-solution inequality for the quartic family:
/// `int |Du|^2 A Du . D phi dx` for the bump `phi`. Non-positive for a
/// sub-solution.
pub fn weak_subsolution_check<T: Scalar>(family: &Family<T>, bump: &Bump<T>, cells: usize) -> Result<T> {
    check_bump(family, bump, cells)?;
    bump_quadrature(bump, cells, |x| {
        let f = family.flux(x)?;
        let g = bump.gradient(x);
        Ok(f.iter().zip(&g).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
    })
}

/// `-int div(flux) phi dx` using the closed-form divergence; equals the weak
/// form by the divergence theorem.
pub fn weak_subsolution_oracle<T: Scalar>(family: &Family<T>, bump: &Bump<T>, cells: usize) -> Result<T> {
    check_bump(family, bump, cells)?;
    let v = bump_quadrature(bump, cells, |x| Ok(family.divergence_closed_form(x)? * bump.value(x)))?;
    Ok(-v)
}

fn check_bump<T: Scalar>(family: &Family<T>, bump: &Bump<T>, cells: usize) -> Result<()> {
    if family.kind() != FamilyKind::Quartic4d {
        return Err(LabError::InvalidParameter("weak sub-solution check needs quartic4d".into()));
    }
    if bump.center.len() != 4 || !(bump.radius > T::zero()) || cells < 4 {
        return Err(LabError::InvalidParameter("bump needs a 4D center, positive radius and >= 4 cells".into()));
    }
    let planar = Family::<T>::partial_sq(&bump.center, 2).sqrt();
    if planar - bump.radius <= T::of(EXCLUSION_RADIUS) {
        return Err(LabError::ExcludedPoint(format!(
            "bump support around {} meets {{x1 = x2 = 0}}",
            fmt_point(&bump.center)
        )));
    }
    Ok(())
}
