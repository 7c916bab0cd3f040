use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{ScalarField, SetMask};
use crate::scalar::Scalar;

/// Which truncation `(u - k)_+` or `(u - k)_-` enters the energy estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

/// Both sides of the Caccioppoli inequality with the constant removed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaccioppoliData<T> {
    /// `int_{B_{sigma rho}} |D (u-k)_+-|^p`.
    pub lhs: T,
    /// `((1 - sigma) rho)^{-p} int_{B_rho} (u-k)_+-^p`.
    pub rhs_raw: T,
}

impl<T: Scalar> CaccioppoliData<T> {
    /// `lhs / rhs_raw`, with `0/0 = 0` and `x/0 = inf`.
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

pub fn caccioppoli_data<T: Scalar>(
    field: &ScalarField<T>,
    center: &[T],
    rho: T,
    sigma: T,
    k: T,
    sign: Sign,
    p: T,
) -> Result<CaccioppoliData<T>> {
    if !(sigma > T::zero() && sigma < T::one()) {
        return Err(LabError::InvalidParameter(format!("sigma = {sigma} must lie in (0, 1)")));
    }
    if !(p > T::one()) {
        return Err(LabError::InvalidParameter(format!("p = {p} must exceed 1")));
    }
    let grid = field.grid();
    grid.check_ball(center, rho)?;
    let part = field.level_part(k, sign == Sign::Plus)?;
    let inner = SetMask::ball(grid, center, sigma * rho);
    let outer = SetMask::ball(grid, center, rho);
    let lhs = part.gradient().norm_pow(p)?.integrate(&inner)?;
    let mass = part.map(|v| v.powf(p))?.integrate(&outer)?;
    let rhs_raw = mass / ((T::one() - sigma) * rho).powf(p);
    Ok(CaccioppoliData { lhs, rhs_raw })
}
