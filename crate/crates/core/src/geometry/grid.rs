use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::scalar::Scalar;

/// Axis-aligned box discretized by a tensor grid of nodes.
///
/// Nodes are numbered with axis 0 varying fastest. Node coordinates are
/// always computed as `lower + i * h`, so they are reproducible bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct UniformGrid<T: Scalar> {
    lower: Vec<T>,
    upper: Vec<T>,
    cells: Vec<usize>,
    #[serde(skip)]
    spacing: Vec<T>,
    #[serde(skip)]
    strides: Vec<usize>,
}

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 4;
pub const MIN_CELLS: usize = 4;

impl<T: Scalar> UniformGrid<T> {
    pub fn new(lower: &[T], upper: &[T], cells: &[usize]) -> Result<Self> {
        let dim = lower.len();
        if !(MIN_DIM..=MAX_DIM).contains(&dim) {
            return Err(LabError::InvalidGrid(format!(
                "dimension {dim} unsupported (stencils exist for 2, 3 and 4)"
            )));
        }
        if upper.len() != dim || cells.len() != dim {
            return Err(LabError::InvalidGrid("bound and cell vectors differ in length".into()));
        }
        for k in 0..dim {
            if !(lower[k].is_finite() && upper[k].is_finite()) || lower[k] >= upper[k] {
                return Err(LabError::InvalidGrid(format!(
                    "degenerate extent on axis {k}: [{}, {}]",
                    lower[k], upper[k]
                )));
            }
            if cells[k] < MIN_CELLS {
                return Err(LabError::InvalidGrid(format!(
                    "axis {k} has {} cells, need at least {MIN_CELLS}",
                    cells[k]
                )));
            }
        }
        let mut grid = UniformGrid {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            cells: cells.to_vec(),
            spacing: Vec::new(),
            strides: Vec::new(),
        };
        grid.derive();
        Ok(grid)
    }

    /// Same extent and cell count on every axis.
    pub fn cube(dim: usize, lower: T, upper: T, cells: usize) -> Result<Self> {
        if !(MIN_DIM..=MAX_DIM).contains(&dim) {
            return Err(LabError::InvalidGrid(format!(
                "dimension {dim} unsupported (stencils exist for 2, 3 and 4)"
            )));
        }
        Self::new(&vec![lower; dim], &vec![upper; dim], &vec![cells; dim])
    }

    /// Cube `[-half_width, half_width]^dim` with spacing `h` (rounded to a
    /// whole number of cells).
    pub fn centered(dim: usize, half_width: T, h: T) -> Result<Self> {
        let n = ((half_width + half_width) / h).round();
        let cells = n.to_usize().ok_or_else(|| LabError::InvalidGrid("bad spacing".into()))?;
        Self::cube(dim, -half_width, half_width, cells)
    }

    /// Restores derived data after deserialization.
    pub fn derive(&mut self) {
        self.spacing = (0..self.dim())
            .map(|k| (self.upper[k] - self.lower[k]) / T::of_usize(self.cells[k]))
            .collect();
        let mut stride = 1;
        self.strides = self
            .cells
            .iter()
            .map(|&n| {
                let s = stride;
                stride *= n + 1;
                s
            })
            .collect();
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn spacing(&self) -> &[T] {
        &self.spacing
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn points_on_axis(&self, axis: usize) -> usize {
        self.cells[axis] + 1
    }

    pub fn node_count(&self) -> usize {
        self.cells.iter().map(|n| n + 1).product()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn cell_volume(&self) -> T {
        self.spacing.iter().fold(T::one(), |acc, &h| acc * h)
    }

    pub fn diameter(&self) -> T {
        self.lower
            .iter()
            .zip(&self.upper)
            .fold(T::zero(), |acc, (&a, &b)| acc + (b - a) * (b - a))
            .sqrt()
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> T {
        self.lower[axis] + T::of_usize(i) * self.spacing[axis]
    }

    pub fn index_of(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, mut index: usize, out: &mut [usize]) {
        for (k, slot) in out.iter_mut().enumerate().take(self.dim()) {
            let n = self.cells[k] + 1;
            *slot = index % n;
            index /= n;
        }
    }

    /// Index along one axis without decoding the full multi-index.
    pub fn axis_index(&self, index: usize, axis: usize) -> usize {
        (index / self.strides[axis]) % (self.cells[axis] + 1)
    }

    pub fn coords_into(&self, index: usize, out: &mut [T]) {
        for (k, slot) in out.iter_mut().enumerate().take(self.dim()) {
            *slot = self.coordinate(k, self.axis_index(index, k));
        }
    }

    pub fn coords(&self, index: usize) -> Vec<T> {
        let mut x = vec![T::zero(); self.dim()];
        self.coords_into(index, &mut x);
        x
    }

    pub fn is_boundary(&self, index: usize) -> bool {
        (0..self.dim()).any(|k| {
            let i = self.axis_index(index, k);
            i == 0 || i == self.cells[k]
        })
    }

    /// Trapezoidal quadrature weight of a node.
    pub fn node_weight(&self, index: usize) -> T {
        let half = T::of(0.5);
        (0..self.dim()).fold(T::one(), |acc, k| {
            let i = self.axis_index(index, k);
            let w = if i == 0 || i == self.cells[k] { half } else { T::one() };
            acc * w * self.spacing[k]
        })
    }

    /// Whether the closed ball `B_r(center)` lies inside the box.
    pub fn contains_ball(&self, center: &[T], radius: T) -> bool {
        let slack = T::epsilon() * T::of(64.0) * (radius.abs() + T::one());
        center.len() == self.dim()
            && (0..self.dim()).all(|k| {
                center[k] - radius >= self.lower[k] - slack && center[k] + radius <= self.upper[k] + slack
            })
    }

    pub fn check_ball(&self, center: &[T], radius: T) -> Result<()> {
        if self.contains_ball(center, radius) {
            Ok(())
        } else {
            Err(LabError::BallOutsideGrid {
                center: crate::error::fmt_point(center),
                radius: radius.as_f64(),
            })
        }
    }

    /// Calls `f(cell_base_node)` for every cell in index order.
    pub fn for_each_cell(&self, mut f: impl FnMut(usize)) {
        let dim = self.dim();
        let mut multi = vec![0usize; dim];
        for _ in 0..self.cell_count() {
            f(self.index_of(&multi));
            for k in 0..dim {
                multi[k] += 1;
                if multi[k] < self.cells[k] {
                    break;
                }
                multi[k] = 0;
            }
        }
    }

    /// Node offsets of the `2^dim` corners of a cell, bit `k` of the corner
    /// number selecting the upper node along axis `k`.
    pub fn corner_offsets(&self) -> Vec<usize> {
        (0..1usize << self.dim())
            .map(|c| (0..self.dim()).filter(|k| c >> k & 1 == 1).map(|k| self.strides[k]).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_grid_spacing_and_count() {
        let g = UniformGrid::<f64>::cube(2, -1.0, 1.0, 8).unwrap();
        assert_eq!(g.spacing(), &[0.25, 0.25]);
        assert_eq!(g.node_count(), 81);
    }

    #[test]
    fn cube_and_hypercube() {
        let g = UniformGrid::<f64>::cube(3, 0.0, 2.0, 4).unwrap();
        assert_eq!(g.spacing(), &[0.5, 0.5, 0.5]);
        let g4 = UniformGrid::<f64>::cube(4, -1.0, 1.0, 4).unwrap();
        assert_eq!(g4.node_count(), 625);
    }

    #[test]
    fn rejects_bad_dimensions_and_boxes() {
        assert!(UniformGrid::<f64>::cube(1, 0.0, 1.0, 8).is_err());
        assert!(UniformGrid::<f64>::cube(5, 0.0, 1.0, 8).is_err());
        assert!(UniformGrid::<f64>::cube(2, 1.0, 1.0, 8).is_err());
        assert!(UniformGrid::<f64>::cube(2, 0.0, 1.0, 3).is_err());
        assert!(UniformGrid::<f64>::new(&[0.0, 0.0], &[1.0, -1.0], &[4, 4]).is_err());
    }

    #[test]
    fn coordinates_are_lower_plus_i_h() {
        let g = UniformGrid::<f64>::new(&[-1.0, 0.1], &[1.0, 1.1], &[8, 10]).unwrap();
        let mut m = [0usize; 2];
        for idx in 0..g.node_count() {
            g.multi_index(idx, &mut m);
            assert_eq!(g.index_of(&m), idx);
            let x = g.coords(idx);
            assert_eq!(x[0], -1.0 + m[0] as f64 * g.spacing()[0]);
            assert_eq!(x[1], 0.1 + m[1] as f64 * g.spacing()[1]);
        }
    }

    #[test]
    fn trapezoid_weights_sum_to_volume() {
        let g = UniformGrid::<f64>::new(&[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0], &[4, 5, 6]).unwrap();
        let total: f64 = (0..g.node_count()).map(|i| g.node_weight(i)).sum();
        assert!((total - 6.0).abs() < 1e-12);
    }

    #[test]
    fn cell_iteration_visits_every_cell_once() {
        let g = UniformGrid::<f32>::cube(3, 0.0, 1.0, 4).unwrap();
        let mut n = 0;
        g.for_each_cell(|base| {
            assert!(!(0..3).any(|k| g.axis_index(base, k) == 4));
            n += 1;
        });
        assert_eq!(n, 64);
        assert_eq!(g.corner_offsets(), vec![0, 1, 5, 6, 25, 26, 30, 31]);
    }
}
