use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::counterexamples::{CoefficientMatrix, Family};
use crate::error::{LabError, Result};
use crate::geometry::{ScalarField, SetMask, UniformGrid};
use crate::scalar::{norm2, Scalar};

use super::{pcg, CgOptions, CsrMatrix, LinearOperator};

/// Coefficient matrix field of `div(A Du) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[serde(bound = "T: Scalar")]
pub enum Coefficient<T: Scalar> {
    Identity,
    Family(Family<T>),
}

impl<T: Scalar> Coefficient<T> {
    fn at(&self, x: &[T]) -> Result<CoefficientMatrix<T>> {
        match self {
            Coefficient::Identity => Ok(CoefficientMatrix::identity(x.len())),
            Coefficient::Family(f) => f.coefficient_matrix(x),
        }
    }
}

/// Dirichlet data on the grid boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[serde(bound = "T: Scalar")]
pub enum BoundaryData<T: Scalar> {
    /// Trace of an exact solution (0 at its excluded points).
    Family(Family<T>),
    /// One value per grid node; only boundary nodes are read.
    Values(Vec<T>),
}

#[derive(Debug, Clone)]
pub struct DirichletProblem<T: Scalar> {
    pub grid: Arc<UniformGrid<T>>,
    pub coefficient: Coefficient<T>,
    pub boundary: BoundaryData<T>,
    /// Nodes pinned to zero in addition to the boundary.
    pub forced_zero: Option<SetMask<T>>,
}

impl<T: Scalar> DirichletProblem<T> {
    pub fn new(grid: &Arc<UniformGrid<T>>, coefficient: Coefficient<T>, boundary: BoundaryData<T>) -> Self {
        DirichletProblem { grid: grid.clone(), coefficient, boundary, forced_zero: None }
    }

    /// Exact-trace problem for a family on `grid`.
    pub fn for_family(grid: &Arc<UniformGrid<T>>, family: &Family<T>) -> Self {
        Self::new(grid, Coefficient::Family(family.clone()), BoundaryData::Family(family.clone()))
    }

    pub fn with_forced_zero(mut self, mask: SetMask<T>) -> Self {
        self.forced_zero = Some(mask);
        self
    }

    fn fixed_values(&self) -> Result<(Vec<T>, Vec<usize>)> {
        let grid = &self.grid;
        let n = grid.node_count();
        if let Some(mask) = &self.forced_zero {
            if !mask.same_grid(grid) {
                return Err(LabError::GridMismatch);
            }
        }
        if let BoundaryData::Values(v) = &self.boundary {
            if v.len() != n {
                return Err(LabError::GridMismatch);
            }
        }
        let mut values = vec![T::zero(); n];
        let mut unknown = vec![usize::MAX; n];
        let mut count = 0;
        let mut x = vec![T::zero(); grid.dim()];
        for i in 0..n {
            if self.forced_zero.as_ref().is_some_and(|m| m.contains(i)) {
                continue;
            }
            if grid.is_boundary(i) {
                values[i] = match &self.boundary {
                    BoundaryData::Family(f) => {
                        grid.coords_into(i, &mut x);
                        f.evaluate_or_limit(&x)?
                    }
                    BoundaryData::Values(v) => v[i],
                };
                if !values[i].is_finite() {
                    return Err(LabError::NonFinite(format!("boundary value at node {i}")));
                }
            } else {
                unknown[i] = count;
                count += 1;
            }
        }
        Ok((values, unknown))
    }
}

/// Solved field plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct LinearSolution<T: Scalar> {
    pub field: ScalarField<T>,
    pub iterations: usize,
    pub relative_residual: T,
    /// Largest nodal flux imbalance relative to `|b|`.
    pub flux_imbalance: T,
    /// How far interior values leave the range of the fixed values (0 if not).
    pub max_principle_excess: T,
}

/// Sparse linear form `sum c_i u_i`.
type Form<T> = Vec<(usize, T)>;

fn difference<T: Scalar>(grid: &UniformGrid<T>, node: usize, axis: usize) -> Form<T> {
    let s = grid.strides()[axis];
    let h = grid.spacing()[axis];
    let i = grid.axis_index(node, axis);
    if i == 0 {
        vec![(node + s, T::one() / h), (node, -T::one() / h)]
    } else if i == grid.cells()[axis] {
        vec![(node, T::one() / h), (node - s, -T::one() / h)]
    } else {
        let c = T::one() / (h + h);
        vec![(node + s, c), (node - s, -c)]
    }
}

/// Assembles the edge energy
/// `sum_e vol_e [A_jj (D_j u)^2 + sum_{k != j} A_jk D_j u Dbar_k u]`, with `A`
/// taken at the edge midpoint and `Dbar_k` the mean of the nodal central
/// differences at the edge ends, and solves for the minimizer with
/// Jacobi-preconditioned CG.
pub fn solve_linear<T: Scalar>(
    problem: &DirichletProblem<T>,
    tolerance: T,
    max_iterations: usize,
) -> Result<LinearSolution<T>> {
    if !(tolerance > T::zero()) {
        return Err(LabError::InvalidParameter("tolerance must be positive".into()));
    }
    let grid = problem.grid.as_ref();
    let dim = grid.dim();
    let (fixed, unknown) = problem.fixed_values()?;
    let m = unknown.iter().filter(|&&u| u != usize::MAX).count();
    let mut triplets: Vec<(usize, usize, T)> = Vec::with_capacity(m * dim * 8 * dim);
    let mut rhs = vec![T::zero(); m];
    let mut add = |a: usize, b: usize, v: T| {
        let ua = unknown[a];
        if ua == usize::MAX {
            return;
        }
        match unknown[b] {
            usize::MAX => rhs[ua] = rhs[ua] - v * fixed[b],
            ub => triplets.push((ua, ub, v)),
        }
    };

    let vol = grid.cell_volume();
    let half = T::of(0.5);
    let mut xa = vec![T::zero(); dim];
    let mut xb = vec![T::zero(); dim];
    for a in 0..grid.node_count() {
        grid.coords_into(a, &mut xa);
        for j in 0..dim {
            if grid.axis_index(a, j) == grid.cells()[j] {
                continue;
            }
            let b = a + grid.strides()[j];
            // skip edges that touch no unknown
            if unknown[a] == usize::MAX && unknown[b] == usize::MAX {
                continue;
            }
            grid.coords_into(b, &mut xb);
            let mid: Vec<T> = xa.iter().zip(&xb).map(|(&p, &q)| (p + q) * half).collect();
            let coef = problem.coefficient.at(&mid)?;
            let mut w = vol;
            for k in (0..dim).filter(|&k| k != j) {
                let i = grid.axis_index(a, k);
                if i == 0 || i == grid.cells()[k] {
                    w = w * half;
                }
            }
            let h = grid.spacing()[j];
            let d = [(b, T::one() / h), (a, -T::one() / h)];
            let ajj = w * coef.get(j, j);
            for &(p, cp) in &d {
                for &(q, cq) in &d {
                    add(p, q, ajj * cp * cq);
                }
            }
            for k in (0..dim).filter(|&k| k != j) {
                let ajk = w * coef.get(j, k) * half;
                if ajk == T::zero() {
                    continue;
                }
                let mut t = difference(grid, a, k);
                t.extend(difference(grid, b, k));
                for &(p, cp) in &d {
                    for &(q, cq) in &t {
                        let v = ajk * cp * cq * half;
                        add(p, q, v);
                        add(q, p, v);
                    }
                }
            }
        }
    }
    let matrix = CsrMatrix::from_triplets(m, triplets);
    let diag = matrix.diagonal();
    if let Some(d) = diag.iter().find(|d| !(**d > T::zero())) {
        return Err(LabError::Indefinite(d.as_f64()));
    }
    let inv_diag: Vec<T> = diag.iter().map(|&d| T::one() / d).collect();
    let mut u = vec![T::zero(); m];
    let out = pcg(&matrix, &rhs, &mut u, Some(&inv_diag), CgOptions { tolerance, max_iterations })?;
    if !out.converged {
        return Err(LabError::NotConverged { iterations: out.iterations, residual: out.relative_residual.as_f64() });
    }

    let mut r = vec![T::zero(); m];
    matrix.apply(&u, &mut r);
    let b_norm = norm2(&rhs).max(T::min_positive_value());
    let flux_imbalance = r.iter().zip(&rhs).fold(T::zero(), |acc, (&r, &b)| acc.max((b - r).abs())) / b_norm;

    let mut values = fixed;
    let (mut lo_fixed, mut hi_fixed) = (T::infinity(), T::neg_infinity());
    let (mut lo_free, mut hi_free) = (T::infinity(), T::neg_infinity());
    for (i, v) in values.iter_mut().enumerate() {
        match unknown[i] {
            usize::MAX => {
                lo_fixed = lo_fixed.min(*v);
                hi_fixed = hi_fixed.max(*v);
            }
            k => {
                *v = u[k];
                lo_free = lo_free.min(*v);
                hi_free = hi_free.max(*v);
            }
        }
    }
    let max_principle_excess = if m == 0 {
        T::zero()
    } else {
        (hi_free - hi_fixed).max(lo_fixed - lo_free).max(T::zero())
    };
    let field = ScalarField::new(&problem.grid, values)?.with_source("solve_linear");
    Ok(LinearSolution {
        field,
        iterations: out.iterations,
        relative_residual: out.relative_residual,
        flux_imbalance,
        max_principle_excess,
    })
}
