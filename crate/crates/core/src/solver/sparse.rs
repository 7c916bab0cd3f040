use crate::scalar::Scalar;

use super::LinearOperator;

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix<T> {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Square matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by_key(|a| (a.0, a.1));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                let top = values.len() - 1;
                values[top] = values[top] + v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            indptr[r + 1] += indptr[r];
        }
        CsrMatrix { n, indptr, indices, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let row = self.indptr[r]..self.indptr[r + 1];
        match self.indices[row.clone()].binary_search(&c) {
            Ok(k) => self.values[row.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |k| (self.indices[k], self.values[k]))
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> T {
        (0..self.n)
            .flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v)))
            .fold(T::zero(), |acc, (r, c, v)| acc.max((v - self.get(c, r)).abs()))
    }
}

impl<T: Scalar> LinearOperator<T> for CsrMatrix<T> {
    fn len(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc = acc + self.values[k] * x[self.indices[k]];
            }
            *out = acc;
        }
    }
}
