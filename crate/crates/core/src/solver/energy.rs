use crate::error::{LabError, Result};
use crate::geometry::UniformGrid;
use crate::scalar::{pairwise_sum, Scalar};

use super::Objective;

/// Per-cell corner stencil: for every corner and axis, the node offsets of
/// the cell edge through that corner along that axis.
struct Stencil {
    dim: usize,
    corners: Vec<usize>,
    edges: Vec<[(usize, usize); 4]>,
}

impl Stencil {
    fn new<T: Scalar>(grid: &UniformGrid<T>) -> Self {
        let dim = grid.dim();
        let corners = grid.corner_offsets();
        let edges = (0..corners.len())
            .map(|c| {
                let mut e = [(0, 0); 4];
                for (j, slot) in e.iter_mut().enumerate().take(dim) {
                    let bit = 1 << j;
                    *slot = (corners[c | bit], corners[c & !bit]);
                }
                e
            })
            .collect();
        Stencil { dim, corners, edges }
    }
}

/// Discrete p-Dirichlet energy
/// `sum_cells vol / 2^N * sum_corners (|g_c|^2 + eps^2)^(p/2)`, where `g_c`
/// is the one-sided gradient at a cell corner built from the cell edges
/// meeting there. It is exact for affine fields and reduces to the edge
/// Laplacian energy at `p = 2`.
pub fn p_energy<T: Scalar>(grid: &UniformGrid<T>, values: &[T], p: T, eps: T) -> Result<T> {
    if values.len() != grid.node_count() {
        return Err(LabError::GridMismatch);
    }
    if !(p > T::one()) {
        return Err(LabError::InvalidParameter(format!("p = {p} must exceed 1")));
    }
    Ok(energy_impl(grid, values, p, eps, None))
}

fn energy_impl<T: Scalar>(
    grid: &UniformGrid<T>,
    values: &[T],
    p: T,
    eps: T,
    mut gradient: Option<&mut [T]>,
) -> T {
    let st = Stencil::new(grid);
    let inv_h: Vec<T> = grid.spacing().iter().map(|&h| T::one() / h).collect();
    let weight = grid.cell_volume() / T::of_usize(st.corners.len());
    let half_p = p / T::of(2.0);
    let eps2 = eps * eps;
    if let Some(g) = gradient.as_deref_mut() {
        g.iter_mut().for_each(|v| *v = T::zero());
    }
    let mut cells = Vec::with_capacity(grid.cell_count());
    let mut comp = [T::zero(); 4];
    grid.for_each_cell(|base| {
        let mut cell = T::zero();
        for edges in &st.edges {
            let mut s = eps2;
            for j in 0..st.dim {
                let (hi, lo) = edges[j];
                comp[j] = (values[base + hi] - values[base + lo]) * inv_h[j];
                s = s + comp[j] * comp[j];
            }
            if s == T::zero() {
                continue;
            }
            let lower = s.powf(half_p - T::one());
            cell = cell + s * lower;
            if let Some(g) = gradient.as_deref_mut() {
                let w = weight * p * lower;
                for j in 0..st.dim {
                    let (hi, lo) = edges[j];
                    let f = w * comp[j] * inv_h[j];
                    g[base + hi] = g[base + hi] + f;
                    g[base + lo] = g[base + lo] - f;
                }
            }
        }
        cells.push(cell * weight);
    });
    pairwise_sum(&cells)
}

/// Regularized p-energy restricted to the `free` nodes; other nodes keep
/// whatever value the iterate holds and receive zero gradient.
pub struct PEnergy<'a, T: Scalar> {
    grid: &'a UniformGrid<T>,
    free: &'a [bool],
    p: T,
    eps: T,
}

impl<'a, T: Scalar> PEnergy<'a, T> {
    pub fn new(grid: &'a UniformGrid<T>, free: &'a [bool], p: T, eps: T) -> Result<Self> {
        if free.len() != grid.node_count() {
            return Err(LabError::GridMismatch);
        }
        if !(p > T::one()) || !(eps >= T::zero()) {
            return Err(LabError::InvalidParameter(format!("need p > 1 and eps >= 0, got p = {p}, eps = {eps}")));
        }
        Ok(PEnergy { grid, free, p, eps })
    }
}

impl<T: Scalar> Objective<T> for PEnergy<'_, T> {
    fn len(&self) -> usize {
        self.free.len()
    }

    fn value_and_gradient(&self, x: &[T], gradient: &mut [T]) -> T {
        let value = energy_impl(self.grid, x, self.p, self.eps, Some(gradient));
        gradient.iter_mut().zip(self.free).for_each(|(g, &f)| {
            if !f {
                *g = T::zero()
            }
        });
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn affine(grid: &UniformGrid<f64>, a: &[f64]) -> Vec<f64> {
        (0..grid.node_count())
            .map(|i| grid.coords(i).iter().zip(a).map(|(x, a)| x * a).sum::<f64>() + 0.3)
            .collect()
    }

    #[test]
    fn exact_on_affine_fields() {
        for dim in 2..=4 {
            let grid = UniformGrid::cube(dim, -1.0, 1.0, 4).unwrap();
            let a: Vec<f64> = (0..dim).map(|j| 0.5 + j as f64).collect();
            let slope2: f64 = a.iter().map(|a| a * a).sum();
            let vol = 2f64.powi(dim as i32);
            for p in [1.5, 2.0, 3.0] {
                let e = p_energy(&grid, &affine(&grid, &a), p, 0.0).unwrap();
                let exact = vol * slope2.powf(p / 2.0);
                assert!((e - exact).abs() < 1e-12 * exact, "dim {dim} p {p}: {e} vs {exact}");
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let grid = UniformGrid::cube(2, 0.0, 1.0, 5).unwrap();
        let n = grid.node_count();
        let x: Vec<f64> = (0..n).map(|i| ((i * 7 % 11) as f64 * 0.37).sin()).collect();
        let free = vec![true; n];
        let energy = PEnergy::new(&grid, &free, 3.0, 1e-3).unwrap();
        let mut g = vec![0.0; n];
        energy.value_and_gradient(&x, &mut g);
        let mut scratch = vec![0.0; n];
        for i in [0, 7, 18, n - 1] {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += 1e-6;
            xm[i] -= 1e-6;
            let fd = (energy.value_and_gradient(&xp, &mut scratch) - energy.value_and_gradient(&xm, &mut scratch)) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-6 * (1.0 + g[i].abs()), "node {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn checkerboard_has_positive_energy() {
        let grid = UniformGrid::cube(2, 0.0, 1.0, 4).unwrap();
        let x: Vec<f64> = (0..grid.node_count())
            .map(|i| if (grid.axis_index(i, 0) + grid.axis_index(i, 1)).is_multiple_of(2) { 1.0 } else { 0.0 })
            .collect();
        assert!(p_energy(&grid, &x, 2.0, 0.0).unwrap() > 1.0);
    }
}
