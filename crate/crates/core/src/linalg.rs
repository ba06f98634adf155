//! Dense linear algebra helpers on top of nalgebra.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::DenseMatrix;

/// Relative eigenvalue cutoff of the pseudo-inverse.
pub const PINV_CUTOFF: f64 = 1e-10;

const POWER_MAX_ITERS: usize = 200;
const POWER_REL_TOL: f64 = 1e-8;

/// Thin SVD with singular values in descending order.
///
/// Each pair is sign-normalized so that the largest-magnitude entry of the
/// left vector is positive (the first such entry on ties).
pub(crate) struct SortedSvd {
    /// Left singular vectors as columns, `m x p`.
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    /// Right singular vectors as rows, `p x n`.
    pub v_t: DMatrix<f64>,
}

impl SortedSvd {
    pub fn new(m: &DenseMatrix) -> Self {
        let svd = SVD::new(m.to_nalgebra(), true, true);
        let mut u = svd.u.expect("u requested");
        let mut v_t = svd.v_t.expect("v_t requested");
        let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
        for j in 0..sigma.len() {
            let col = u.column(j);
            let mut best = 0usize;
            for i in 1..col.len() {
                if col[i].abs() > col[best].abs() {
                    best = i;
                }
            }
            if col[best] < 0.0 {
                u.column_mut(j).neg_mut();
                v_t.row_mut(j).neg_mut();
            }
        }
        Self { u, sigma, v_t }
    }

    pub fn left(&self, j: usize) -> Vec<f64> {
        self.u.column(j).iter().copied().collect()
    }

    pub fn right(&self, j: usize) -> Vec<f64> {
        self.v_t.row(j).iter().copied().collect()
    }

    pub fn top(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }
}

/// All singular values in descending order.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    let svd = SVD::new(m.to_nalgebra(), false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_unstable_by(|a, b| b.total_cmp(a));
    s
}

/// Largest singular value by power iteration on `A^T A`.
///
/// Starts from a seeded uniform vector and stops after 200 iterations or when
/// the eigenvalue estimate changes by less than `1e-8` relative.
pub fn spectral_norm_power(m: &DenseMatrix, seed: u64) -> f64 {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 || m.is_zero() {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..cols).map(|_| rng.random::<f64>() - 0.5).collect();
    normalize(&mut v);
    let data = m.as_slice();
    let mut av = vec![0.0; rows];
    let mut lambda_prev = 0.0;
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        for (i, out) in av.iter_mut().enumerate() {
            *out = data[i * cols..(i + 1) * cols]
                .iter()
                .zip(&v)
                .map(|(a, b)| a * b)
                .sum();
        }
        let mut w = vec![0.0; cols];
        for (i, &a) in av.iter().enumerate() {
            for (wj, &mij) in w.iter_mut().zip(&data[i * cols..(i + 1) * cols]) {
                *wj += mij * a;
            }
        }
        // Rayleigh quotient of A^T A at the unit vector v.
        lambda = av.iter().map(|x| x * x).sum::<f64>();
        let nw = normalize(&mut w);
        if nw == 0.0 {
            break;
        }
        v = w;
        if (lambda - lambda_prev).abs() <= POWER_REL_TOL * lambda {
            break;
        }
        lambda_prev = lambda;
    }
    libm::sqrt(lambda)
}

/// Dot product with independent partial sums so the loop pipelines.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    acc.iter().sum::<f64>() + tail
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Minimum-norm solution of `g s = b` for symmetric positive semi-definite
/// `g`, treating eigenvalues below `PINV_CUTOFF * max` as zero.
pub fn pinv_solve_psd(g: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let k = b.len();
    if k == 0 {
        return Vec::new();
    }
    let eig = SymmetricEigen::new(g.clone());
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l.abs()));
    let cutoff = PINV_CUTOFF * lmax;
    let bv = DVector::from_column_slice(b);
    let proj = eig.eigenvectors.transpose() * bv;
    let mut scaled = DVector::zeros(k);
    for i in 0..k {
        let l = eig.eigenvalues[i];
        if l > cutoff {
            scaled[i] = proj[i] / l;
        }
    }
    let s = &eig.eigenvectors * scaled;
    s.iter().copied().collect()
}

/// Cholesky factor of a Gram matrix that grows one column at a time.
///
/// Columns whose Schur complement falls below `PINV_CUTOFF * max diag` are
/// numerically dependent on the accepted ones; they are recorded and left out
/// of the factor, so the factor always covers an independent subset.
#[derive(Debug, Clone, Default)]
pub(crate) struct IncrementalCholesky {
    /// Row `a` of the lower factor holds `a + 1` entries.
    rows: Vec<Vec<f64>>,
    /// Global index of each accepted column.
    accepted: Vec<usize>,
    dependent: Vec<usize>,
    max_diag: f64,
    len: usize,
}

impl IncrementalCholesky {
    /// Offers the next column. `gram_row(j)` must return `G[new, j]` for any
    /// earlier global index `j`, and `diag` is `G[new, new]`.
    pub fn push(&mut self, diag: f64, mut gram_row: impl FnMut(usize) -> f64) -> bool {
        let index = self.len;
        self.len += 1;
        self.max_diag = self.max_diag.max(diag);
        let a = self.accepted.len();
        let mut l = Vec::with_capacity(a + 1);
        let mut sq = 0.0;
        for (r, &j) in self.accepted.iter().enumerate() {
            let row = &self.rows[r];
            let v = (gram_row(j) - dot(&l, &row[..r])) / row[r];
            sq += v * v;
            l.push(v);
        }
        let schur = diag - sq;
        if schur <= PINV_CUTOFF * self.max_diag {
            self.dependent.push(index);
            return false;
        }
        l.push(libm::sqrt(schur));
        self.rows.push(l);
        self.accepted.push(index);
        true
    }

    pub fn has_dependent(&self) -> bool {
        !self.dependent.is_empty()
    }

    /// Solves `G s = b` on the accepted columns; dependent entries are zero.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let a = self.accepted.len();
        let mut y = vec![0.0; a];
        for r in 0..a {
            let row = &self.rows[r];
            y[r] = (b[self.accepted[r]] - dot(&row[..r], &y[..r])) / row[r];
        }
        // Back substitution with L^T, sweeping rows of L so access stays contiguous.
        for c in (0..a).rev() {
            let row = &self.rows[c];
            y[c] /= row[c];
            let yc = y[c];
            for (acc, &l) in y[..c].iter_mut().zip(&row[..c]) {
                *acc -= l * yc;
            }
        }
        let mut s = vec![0.0; self.len];
        for (r, &j) in self.accepted.iter().enumerate() {
            s[j] = y[r];
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_convention_makes_largest_left_entry_positive() {
        let m = DenseMatrix::new(2, 2, vec![-3.0, 0.0, 0.0, -1.0]).unwrap();
        let svd = SortedSvd::new(&m);
        assert_eq!(svd.sigma, vec![3.0, 1.0]);
        for j in 0..2 {
            let u = svd.left(j);
            let big = u
                .iter()
                .copied()
                .fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            assert!(big > 0.0);
        }
    }

    #[test]
    fn power_iteration_on_diagonal() {
        let m = DenseMatrix::new(2, 2, vec![3.0, 0.0, 0.0, 4.0]).unwrap();
        assert!((spectral_norm_power(&m, 7) - 4.0).abs() < 1e-7);
        assert_eq!(spectral_norm_power(&DenseMatrix::zeros(3, 2), 0), 0.0);
    }

    #[test]
    fn pinv_splits_duplicate_directions() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let s = pinv_solve_psd(&g, &[2.0, 2.0]);
        assert!((s[0] - 1.0).abs() < 1e-12 && (s[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn incremental_cholesky_matches_dense_solve() {
        let g = [[4.0, 2.0, 0.0], [2.0, 5.0, 1.0], [0.0, 1.0, 3.0]];
        let mut chol = IncrementalCholesky::default();
        for (k, row) in g.iter().enumerate() {
            assert!(chol.push(row[k], |j| row[j]));
        }
        let b = [1.0, 2.0, 3.0];
        let s = chol.solve(&b);
        for (row, bi) in g.iter().zip(b) {
            let r: f64 = row.iter().zip(&s).map(|(a, x)| a * x).sum();
            assert!((r - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn incremental_cholesky_flags_dependent_column() {
        let g = [[1.0, 1.0], [1.0, 1.0]];
        let mut chol = IncrementalCholesky::default();
        assert!(chol.push(1.0, |_| unreachable!()));
        assert!(!chol.push(g[1][1], |j| g[1][j]));
        assert!(chol.has_dependent());
        assert_eq!(chol.solve(&[2.0, 2.0]), vec![2.0, 0.0]);
    }
}
