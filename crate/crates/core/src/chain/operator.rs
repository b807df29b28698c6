use nalgebra::DMatrix;

/// Real symmetric operator in coordinate format.
///
/// Entries are kept sorted by `(row, col)` with duplicates summed and exact
/// zeros dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseOperator {
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut raw: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        debug_assert!(raw.iter().all(|&(r, c, _)| r < dim && c < dim));
        raw.sort_by_key(|&(r, c, _)| (r, c));
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(raw.len());
        for (r, c, v) in raw {
            match entries.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => entries.push((r, c, v)),
            }
        }
        entries.retain(|e| e.2 != 0.0);
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// `y = A x`.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.iter_mut().for_each(|v| *v = 0.0);
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.apply_into(x, &mut y);
        y
    }

    /// `⟨x|A|x⟩`.
    pub fn expectation(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim);
        self.entries.iter().map(|&(r, c, v)| x[r] * v * x[c]).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for &(r, c, v) in &self.entries {
            if r == c {
                d[r] = v;
            }
        }
        d
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries.iter().all(|&(r, c, _)| r == c)
    }

    pub fn trace(&self) -> f64 {
        self.entries.iter().filter(|e| e.0 == e.1).map(|e| e.2).sum()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.entries.iter().map(|e| e.2 * e.2).sum()
    }

    /// Transpose symmetry of every entry within `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.entries.iter().all(|&(r, c, v)| {
            r == c
                || self
                    .entries
                    .binary_search_by_key(&(c, r), |&(rr, cc, _)| (rr, cc))
                    .is_ok_and(|k| (self.entries[k].2 - v).abs() <= tol)
        })
    }

    /// `self + t · other`.
    pub fn add_scaled(&self, other: &SparseOperator, t: f64) -> SparseOperator {
        assert_eq!(self.dim, other.dim);
        let scaled = other.entries.iter().map(|&(r, c, v)| (r, c, t * v));
        SparseOperator::from_triplets(self.dim, self.entries.iter().copied().chain(scaled))
    }

    /// Largest entry-wise difference, treating missing entries as zero.
    pub fn max_abs_diff(&self, other: &SparseOperator) -> f64 {
        assert_eq!(self.dim, other.dim);
        let diff = self.add_scaled(other, -1.0);
        diff.entries.iter().fold(0.0, |m, e| m.max(e.2.abs()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let op = SparseOperator::from_triplets(2, [(0, 1, 1.0), (1, 0, 1.0), (0, 1, 0.5), (1, 1, 0.0)]);
        assert_eq!(op.entries(), &[(0, 1, 1.5), (1, 0, 1.0)]);
        assert!(!op.is_symmetric(1e-12));
    }

    #[test]
    fn apply_and_expectation_agree() {
        let op = SparseOperator::from_triplets(3, [(0, 0, 2.0), (0, 2, -1.0), (2, 0, -1.0), (1, 1, 3.0)]);
        let x = [0.6, 0.0, 0.8];
        let y = op.apply(&x);
        let quad: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        assert!((quad - op.expectation(&x)).abs() < 1e-15);
        assert_eq!(op.trace(), 5.0);
        assert_eq!(op.frobenius_norm_sq(), 4.0 + 1.0 + 1.0 + 9.0);
        assert!(op.is_symmetric(0.0));
    }
}
