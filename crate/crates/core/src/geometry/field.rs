use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::scalar::{pairwise_sum, Scalar};

use super::{SetMask, UniformGrid};

/// Node values of a function on a grid.
#[derive(Debug, Clone)]
pub struct ScalarField<T: Scalar> {
    grid: Arc<UniformGrid<T>>,
    values: Vec<T>,
    source: Option<String>,
}

/// Gradient samples, one component vector per axis.
#[derive(Debug, Clone)]
pub struct GradientField<T: Scalar> {
    grid: Arc<UniformGrid<T>>,
    components: Vec<Vec<T>>,
}

impl<T: Scalar> ScalarField<T> {
    pub fn new(grid: &Arc<UniformGrid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(LabError::GridMismatch);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LabError::NonFinite(format!("field value at node {i}")));
        }
        Ok(ScalarField { grid: grid.clone(), values, source: None })
    }

    pub fn from_fn(grid: &Arc<UniformGrid<T>>, mut f: impl FnMut(&[T]) -> T) -> Result<Self> {
        let mut x = vec![T::zero(); grid.dim()];
        let values = (0..grid.node_count())
            .map(|i| {
                grid.coords_into(i, &mut x);
                f(&x)
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: &Arc<UniformGrid<T>>, c: T) -> Result<Self> {
        Self::new(grid, vec![c; grid.node_count()])
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn grid(&self) -> &Arc<UniformGrid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    /// Pointwise map; the result carries no analytic source.
    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn max_over(&self, mask: &SetMask<T>) -> Result<Option<T>> {
        self.check_mask(mask)?;
        Ok(mask.indices().map(|i| self.values[i]).reduce(T::max))
    }

    pub fn min_over(&self, mask: &SetMask<T>) -> Result<Option<T>> {
        self.check_mask(mask)?;
        Ok(mask.indices().map(|i| self.values[i]).reduce(T::min))
    }

    pub fn sup(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub(crate) fn check_mask(&self, mask: &SetMask<T>) -> Result<()> {
        if mask.same_grid(&self.grid) {
            Ok(())
        } else {
            Err(LabError::GridMismatch)
        }
    }

    /// Second-order finite-difference gradient: central differences inside,
    /// one-sided three-point stencils on the boundary. Exact on affine and
    /// axis-separable quadratic fields.
    pub fn gradient(&self) -> GradientField<T> {
        let g = &self.grid;
        let two = T::of(2.0);
        let three = T::of(3.0);
        let four = T::of(4.0);
        let components = (0..g.dim())
            .map(|k| {
                let s = g.strides()[k];
                let n = g.cells()[k];
                let h = g.spacing()[k];
                let f = &self.values;
                (0..g.node_count())
                    .map(|i| match g.axis_index(i, k) {
                        0 => (-three * f[i] + four * f[i + s] - f[i + 2 * s]) / (two * h),
                        j if j == n => (three * f[i] - four * f[i - s] + f[i - 2 * s]) / (two * h),
                        _ => (f[i + s] - f[i - s]) / (two * h),
                    })
                    .collect()
            })
            .collect();
        GradientField { grid: g.clone(), components }
    }

    /// Trapezoid-weighted sum over the masked nodes.
    pub fn integrate(&self, mask: &SetMask<T>) -> Result<T> {
        self.check_mask(mask)?;
        let terms: Vec<T> =
            mask.indices().map(|i| self.grid.node_weight(i) * self.values[i]).collect();
        Ok(pairwise_sum(&terms))
    }

    /// Clamp to the band `[k, l]` and shift: 0 below `k`, `u - k` inside,
    /// `l - k` above `l`.
    pub fn truncate(&self, k: T, l: T) -> Result<Self> {
        if !(l > k) {
            return Err(LabError::InvalidParameter(format!("truncation needs l > k, got k={k}, l={l}")));
        }
        let top = l - k;
        self.map(|u| {
            if u > l {
                top
            } else if u >= k {
                u - k
            } else {
                T::zero()
            }
        })
    }

    /// `(u - k)_+` or `(u - k)_-` (both non-negative).
    pub fn level_part(&self, k: T, positive: bool) -> Result<Self> {
        if positive {
            self.map(|u| (u - k).max(T::zero()))
        } else {
            self.map(|u| (k - u).max(T::zero()))
        }
    }

    /// Forces the field to zero on `vanishing`; everything else untouched.
    pub fn extend_by_zero(&self, vanishing: &SetMask<T>) -> Result<Self> {
        self.check_mask(vanishing)?;
        let values = self
            .values
            .iter()
            .zip(vanishing.nodes())
            .map(|(&v, &zero)| if zero { T::zero() } else { v })
            .collect();
        Ok(ScalarField { grid: self.grid.clone(), values, source: self.source.clone() })
    }
}

impl<T: Scalar> GradientField<T> {
    pub fn grid(&self) -> &Arc<UniformGrid<T>> {
        &self.grid
    }

    pub fn component(&self, axis: usize) -> &[T] {
        &self.components[axis]
    }

    pub fn at(&self, index: usize) -> Vec<T> {
        self.components.iter().map(|c| c[index]).collect()
    }

    /// `|Du|^p` per node.
    pub fn norm_pow(&self, p: T) -> Result<ScalarField<T>> {
        let values = (0..self.grid.node_count())
            .map(|i| {
                let s: T = self.components.iter().fold(T::zero(), |acc, c| acc + c[i] * c[i]);
                if s == T::zero() {
                    T::zero()
                } else {
                    s.powf(p * T::of(0.5))
                }
            })
            .collect();
        ScalarField::new(&self.grid, values)
    }
}

/// Integral of 1 over the mask (discrete measure).
pub fn measure<T: Scalar>(mask: &SetMask<T>) -> T {
    let terms: Vec<T> = mask.indices().map(|i| mask.grid().node_weight(i)).collect();
    pairwise_sum(&terms)
}
