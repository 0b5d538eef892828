use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Compressed-row complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    pub dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex64>,
    pub hermitian: bool,
}

impl SparseOperator {
    /// Sums duplicate entries and drops exact zeros.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, Complex64)>, hermitian: bool) -> Self {
        let mut map: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside dimension {dim}");
            *map.entry((r, c)).or_default() += v;
        }
        let mut indptr = vec![0; dim + 1];
        let mut indices = Vec::with_capacity(map.len());
        let mut values = Vec::with_capacity(map.len());
        for ((r, c), v) in map {
            if v != Complex64::new(0.0, 0.0) {
                indptr[r + 1] += 1;
                indices.push(c);
                values.push(v);
            }
        }
        for r in 0..dim {
            indptr[r + 1] += indptr[r];
        }
        SparseOperator { dim, indptr, indices, values, hermitian }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_triplets(dim, [], true)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k])))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let row = &self.indices[self.indptr[r]..self.indptr[r + 1]];
        match row.binary_search(&c) {
            Ok(k) => self.values[self.indptr[r] + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v.conj())), self.hermitian)
    }

    /// Exact comparison of every stored entry with its mirror.
    pub fn is_hermitian(&self) -> bool {
        self.triplets().all(|(r, c, v)| self.get(c, r) == v.conj())
    }

    /// y += alpha · A x.
    pub fn mul_add(&self, alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
        for (r, out) in y.iter_mut().enumerate().take(self.dim) {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *out += alpha * acc;
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.mul_add(Complex64::new(1.0, 0.0), x, &mut y);
        y
    }

    /// Linear combination Σ c_i A_i on a shared dimension.
    pub fn combine(dim: usize, terms: &[(Complex64, &SparseOperator)], hermitian: bool) -> Self {
        Self::from_triplets(
            dim,
            terms.iter().flat_map(|(c, a)| a.triplets().map(move |(r, col, v)| (r, col, c * v))),
            hermitian,
        )
    }

    /// Submatrix on `keep` (sorted, unique), reindexed to 0..keep.len().
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.dim];
        for (i, &k) in keep.iter().enumerate() {
            pos[k] = i;
        }
        Self::from_triplets(
            keep.len(),
            keep.iter().enumerate().flat_map(|(i, &r)| {
                let pos = &pos;
                (self.indptr[r]..self.indptr[r + 1])
                    .filter(move |&k| pos[self.indices[k]] != usize::MAX)
                    .map(move |k| (i, pos[self.indices[k]], self.values[k]))
            }),
            self.hermitian,
        )
    }

    /// Column indices reachable in one step from row `r`.
    pub(crate) fn row_columns(&self, r: usize) -> &[usize] {
        &self.indices[self.indptr[r]..self.indptr[r + 1]]
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }
}

/// Basis states connected to `seed` through the union pattern of `ops`.
pub fn reachable_set(dim: usize, seed: &[usize], ops: &[&SparseOperator]) -> Vec<usize> {
    let mut seen = vec![false; dim];
    let mut stack: Vec<usize> = seed.to_vec();
    for &s in seed {
        seen[s] = true;
    }
    while let Some(r) = stack.pop() {
        for op in ops {
            for &c in op.row_columns(r) {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
    }
    (0..dim).filter(|&i| seen[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn duplicates_sum_and_zeros_drop() {
        let a = SparseOperator::from_triplets(2, [(0, 1, c(1.0, 0.0)), (0, 1, c(-1.0, 0.0)), (1, 1, c(2.0, 0.0))], true);
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(1, 1), c(2.0, 0.0));
    }

    #[test]
    fn matvec_matches_dense() {
        let a = SparseOperator::from_triplets(3, [(0, 0, c(1.0, 1.0)), (0, 2, c(0.5, 0.0)), (2, 1, c(0.0, -2.0))], false);
        let x = [c(1.0, 0.0), c(0.0, 1.0), c(2.0, -1.0)];
        let y = a.apply(&x);
        let d = a.to_dense() * nalgebra::DVector::from_column_slice(&x);
        for i in 0..3 {
            assert!((y[i] - d[i]).norm() < 1e-15);
        }
        assert!(!a.is_hermitian());
        let h = SparseOperator::combine(3, &[(c(1.0, 0.0), &a), (c(1.0, 0.0), &a.adjoint())], true);
        assert!(h.is_hermitian());
    }

    #[test]
    fn restriction_and_reachability() {
        // Two disconnected blocks {0, 1} and {2, 3}.
        let a = SparseOperator::from_triplets(4, [(0, 1, c(1.0, 0.0)), (1, 0, c(1.0, 0.0)), (2, 3, c(3.0, 0.0)), (3, 2, c(3.0, 0.0))], true);
        assert_eq!(reachable_set(4, &[0], &[&a]), vec![0, 1]);
        assert_eq!(reachable_set(4, &[3], &[&a]), vec![2, 3]);
        let r = a.restrict(&[2, 3]);
        assert_eq!(r.dim, 2);
        assert_eq!(r.get(0, 1), c(3.0, 0.0));
    }
}
