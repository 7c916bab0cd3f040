use crate::error::{LabError, Result};
use crate::geometry::UniformGrid;
use crate::scalar::Scalar;

use super::LinearOperator;

/// Matrix-free `2N+1`-point Laplacian acting on the `free` nodes, with
/// edge weights `vol / h_j^2`; every other node is held at zero. It is half
/// the Hessian of the `p = 2` energy.
pub struct MaskedLaplacian<'a, T: Scalar> {
    grid: &'a UniformGrid<T>,
    free: &'a [bool],
    weights: Vec<T>,
}

impl<'a, T: Scalar> MaskedLaplacian<'a, T> {
    /// Free nodes may not lie on the grid boundary.
    pub fn new(grid: &'a UniformGrid<T>, free: &'a [bool]) -> Result<Self> {
        if free.len() != grid.node_count() {
            return Err(LabError::GridMismatch);
        }
        if let Some(i) = (0..free.len()).find(|&i| free[i] && grid.is_boundary(i)) {
            return Err(LabError::InvalidParameter(format!("free node {i} lies on the grid boundary")));
        }
        let vol = grid.cell_volume();
        let weights = grid.spacing().iter().map(|&h| vol / (h * h)).collect();
        Ok(MaskedLaplacian { grid, free, weights })
    }

    pub fn diagonal(&self) -> T {
        self.weights.iter().fold(T::zero(), |a, &w| a + w + w)
    }

    /// Right-hand side `b` with `b_a = sum_j w_j (x_{a+s_j} + x_{a-s_j})`
    /// over fixed neighbours of each free node.
    pub fn boundary_rhs(&self, fixed: &[T]) -> Vec<T> {
        let strides = self.grid.strides();
        (0..fixed.len())
            .map(|a| {
                if !self.free[a] {
                    return T::zero();
                }
                let mut acc = T::zero();
                for (j, &s) in strides.iter().enumerate() {
                    for b in [a + s, a - s] {
                        if !self.free[b] {
                            acc = acc + self.weights[j] * fixed[b];
                        }
                    }
                }
                acc
            })
            .collect()
    }
}

impl<T: Scalar> LinearOperator<T> for MaskedLaplacian<'_, T> {
    fn len(&self) -> usize {
        self.free.len()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        let strides = self.grid.strides();
        let diag = self.diagonal();
        for a in 0..x.len() {
            if !self.free[a] {
                y[a] = T::zero();
                continue;
            }
            let mut acc = diag * x[a];
            for (j, &s) in strides.iter().enumerate() {
                let nb = (if self.free[a + s] { x[a + s] } else { T::zero() })
                    + if self.free[a - s] { x[a - s] } else { T::zero() };
                acc = acc - self.weights[j] * nb;
            }
            y[a] = acc;
        }
    }
}
