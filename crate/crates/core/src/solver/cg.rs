use crate::error::{LabError, Result};
use crate::scalar::{dot, norm2, Scalar};

/// Symmetric linear map `y = A x`.
pub trait LinearOperator<T> {
    fn len(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T]);
}

#[derive(Debug, Clone, Copy)]
pub struct CgOptions<T> {
    /// Stop once `|r| <= tolerance * |b|`.
    pub tolerance: T,
    pub max_iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome<T> {
    pub iterations: usize,
    pub relative_residual: T,
    /// Decrease of `x.Ax/2 - b.x` in the final iteration.
    pub last_decrement: T,
    pub converged: bool,
}

/// Preconditioned conjugate gradients for `A x = b`, starting from the
/// contents of `x`. `inv_diag` is an optional Jacobi preconditioner; entries
/// set to zero freeze the corresponding unknown.
pub fn pcg<T: Scalar, A: LinearOperator<T> + ?Sized>(
    a: &A,
    b: &[T],
    x: &mut [T],
    inv_diag: Option<&[T]>,
    options: CgOptions<T>,
) -> Result<CgOutcome<T>> {
    let n = a.len();
    let precondition = |r: &[T], z: &mut [T]| match inv_diag {
        Some(d) => z.iter_mut().zip(r).zip(d).for_each(|((z, &r), &d)| *z = r * d),
        None => z.copy_from_slice(r),
    };
    let b_norm = norm2(b);
    let mut r = vec![T::zero(); n];
    a.apply(x, &mut r);
    r.iter_mut().zip(b).for_each(|(r, &b)| *r = b - *r);
    if let Some(d) = inv_diag {
        // frozen unknowns carry no residual
        r.iter_mut().zip(d).for_each(|(r, &d)| {
            if d == T::zero() {
                *r = T::zero()
            }
        });
    }
    if b_norm == T::zero() && norm2(&r) == T::zero() {
        return Ok(CgOutcome {
            iterations: 0,
            relative_residual: T::zero(),
            last_decrement: T::zero(),
            converged: true,
        });
    }
    let scale = if b_norm > T::zero() { b_norm } else { T::one() };
    let mut z = vec![T::zero(); n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![T::zero(); n];
    let mut rz = dot(&r, &z);
    let mut rel = norm2(&r) / scale;
    let mut last_decrement = T::zero();
    let mut iterations = 0;
    while rel > options.tolerance && iterations < options.max_iterations {
        a.apply(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if !(curvature > T::zero()) {
            return Err(LabError::Indefinite(curvature.as_f64()));
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * ap[i];
        }
        last_decrement = alpha * rz / T::of(2.0);
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rel = norm2(&r) / scale;
        iterations += 1;
    }
    Ok(CgOutcome {
        iterations,
        relative_residual: rel,
        last_decrement,
        converged: rel <= options.tolerance,
    })
}
