use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::scalar::Scalar;

use super::UniformGrid;

/// What a mask was built to represent.
#[derive(Debug, Clone, PartialEq)]
pub enum MaskTag<T: Scalar> {
    /// `{x_N <= 0}`: the closed lower half-space.
    HalfSpace,
    /// One-cell thickening of the M-dimensional coordinate hyperplane
    /// `{x_{M+1} = ... = x_N = 0}`.
    HyperplaneSlab { m: usize },
    /// Closed ball.
    Ball { center: Vec<T>, radius: T },
    /// Open ball.
    OpenBall { center: Vec<T>, radius: T },
    Custom(String),
}

/// Boolean node set on a grid.
#[derive(Debug, Clone)]
pub struct SetMask<T: Scalar> {
    grid: Arc<UniformGrid<T>>,
    nodes: Vec<bool>,
    tag: MaskTag<T>,
}

fn within<T: Scalar>(d2: T, r: T) -> bool {
    d2 <= r * r * (T::one() + T::epsilon() * T::of(16.0))
}

fn dist2<T: Scalar>(x: &[T], c: &[T]) -> T {
    x.iter().zip(c).fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b))
}

impl<T: Scalar> SetMask<T> {
    pub fn from_predicate(
        grid: &Arc<UniformGrid<T>>,
        tag: MaskTag<T>,
        mut predicate: impl FnMut(&[T]) -> bool,
    ) -> Self {
        let mut x = vec![T::zero(); grid.dim()];
        let nodes = (0..grid.node_count())
            .map(|i| {
                grid.coords_into(i, &mut x);
                predicate(&x)
            })
            .collect();
        SetMask { grid: grid.clone(), nodes, tag }
    }

    pub fn from_nodes(grid: &Arc<UniformGrid<T>>, nodes: Vec<bool>, name: &str) -> Result<Self> {
        if nodes.len() != grid.node_count() {
            return Err(LabError::GridMismatch);
        }
        Ok(SetMask { grid: grid.clone(), nodes, tag: MaskTag::Custom(name.into()) })
    }

    pub fn empty(grid: &Arc<UniformGrid<T>>) -> Self {
        Self::from_predicate(grid, MaskTag::Custom("empty".into()), |_| false)
    }

    pub fn full(grid: &Arc<UniformGrid<T>>) -> Self {
        Self::from_predicate(grid, MaskTag::Custom("full".into()), |_| true)
    }

    /// `{x_N <= 0}`.
    pub fn half_space(grid: &Arc<UniformGrid<T>>) -> Self {
        let last = grid.dim() - 1;
        Self::from_predicate(grid, MaskTag::HalfSpace, |x| x[last] <= T::zero())
    }

    /// Nodes with `|x_j| <= h_j / 2` for every `j > m` (1-based `j`).
    pub fn hyperplane_slab(grid: &Arc<UniformGrid<T>>, m: usize) -> Result<Self> {
        let dim = grid.dim();
        if m == 0 || m >= dim {
            return Err(LabError::InvalidParameter(format!(
                "hyperplane dimension must lie in 1..={} for N = {dim}",
                dim - 1
            )));
        }
        let half: Vec<T> = grid.spacing().iter().map(|&h| h * T::of(0.5)).collect();
        Ok(Self::from_predicate(grid, MaskTag::HyperplaneSlab { m }, |x| {
            (m..dim).all(|j| x[j].abs() <= half[j])
        }))
    }

    pub fn ball(grid: &Arc<UniformGrid<T>>, center: &[T], radius: T) -> Self {
        let tag = MaskTag::Ball { center: center.to_vec(), radius };
        Self::from_predicate(grid, tag, |x| within(dist2(x, center), radius))
    }

    pub fn open_ball(grid: &Arc<UniformGrid<T>>, center: &[T], radius: T) -> Self {
        let tag = MaskTag::OpenBall { center: center.to_vec(), radius };
        // nodes within rounding distance of the sphere count as on it
        let r2 = radius * radius * (T::one() - T::epsilon() * T::of(16.0));
        Self::from_predicate(grid, tag, |x| dist2(x, center) < r2)
    }

    pub fn grid(&self) -> &Arc<UniformGrid<T>> {
        &self.grid
    }

    pub fn nodes(&self) -> &[bool] {
        &self.nodes
    }

    pub fn tag(&self) -> &MaskTag<T> {
        &self.tag
    }

    pub fn contains(&self, index: usize) -> bool {
        self.nodes[index]
    }

    pub fn count(&self) -> usize {
        self.nodes.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.nodes.iter().any(|&b| b)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn same_grid(&self, grid: &UniformGrid<T>) -> bool {
        std::ptr::eq(self.grid.as_ref(), grid) || *self.grid == *grid
    }

    fn combine(&self, other: &Self, name: &str, op: impl Fn(bool, bool) -> bool) -> Result<Self> {
        if !other.same_grid(&self.grid) {
            return Err(LabError::GridMismatch);
        }
        let nodes = self.nodes.iter().zip(&other.nodes).map(|(&a, &b)| op(a, b)).collect();
        Ok(SetMask { grid: self.grid.clone(), nodes, tag: MaskTag::Custom(name.into()) })
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.combine(other, "intersection", |a, b| a && b)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.combine(other, "union", |a, b| a || b)
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.combine(other, "difference", |a, b| a && !b)
    }

    pub fn complement(&self) -> Self {
        SetMask {
            grid: self.grid.clone(),
            nodes: self.nodes.iter().map(|b| !b).collect(),
            tag: MaskTag::Custom("complement".into()),
        }
    }

    /// Nodes of `self` whose index satisfies `keep`.
    pub fn select(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let nodes = self.nodes.iter().enumerate().map(|(i, &b)| b && keep(i)).collect();
        SetMask { grid: self.grid.clone(), nodes, tag: MaskTag::Custom("selection".into()) }
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        other.same_grid(&self.grid) && self.nodes.iter().zip(&other.nodes).all(|(&a, &b)| !a || b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid3() -> Arc<UniformGrid<f64>> {
        Arc::new(UniformGrid::cube(3, -1.0, 1.0, 8).unwrap())
    }

    #[test]
    fn slab_marks_only_the_coordinate_plane_nodes() {
        let g = grid3();
        let line = SetMask::hyperplane_slab(&g, 1).unwrap();
        // x2 = x3 = 0, x1 free: 9 nodes
        assert_eq!(line.count(), 9);
        let plane = SetMask::hyperplane_slab(&g, 2).unwrap();
        assert_eq!(plane.count(), 81);
        assert!(SetMask::hyperplane_slab(&g, 3).is_err());
    }

    #[test]
    fn half_space_and_balls() {
        let g = grid3();
        let lower = SetMask::half_space(&g);
        assert_eq!(lower.count(), 9 * 9 * 5);
        let closed = SetMask::ball(&g, &[0.0, 0.0, 0.0], 1.0);
        let open = SetMask::open_ball(&g, &[0.0, 0.0, 0.0], 1.0);
        assert!(open.is_subset_of(&closed));
        // the six axis points at distance exactly 1 belong only to the closed ball
        assert_eq!(closed.count() - open.count(), 6);
    }

    #[test]
    fn set_algebra() {
        let g = grid3();
        let a = SetMask::half_space(&g);
        let b = SetMask::ball(&g, &[0.0, 0.0, 0.0], 0.5);
        let i = a.intersect(&b).unwrap();
        let u = a.union(&b).unwrap();
        assert!(i.is_subset_of(&a) && i.is_subset_of(&b));
        assert!(a.is_subset_of(&u) && b.is_subset_of(&u));
        assert_eq!(i.count() + u.count(), a.count() + b.count());
        assert!(a.complement().intersect(&a).unwrap().is_empty());
        let other = Arc::new(UniformGrid::cube(3, -1.0, 1.0, 4).unwrap());
        assert_eq!(a.intersect(&SetMask::full(&other)).unwrap_err(), LabError::GridMismatch);
    }
}
