use alloc::vec;
use alloc::vec::Vec;

use crate::conv::FormType;
use crate::cost::CostReport;
use crate::dense::DenseMatrix;
use crate::error::{Result, TsvdError};
use crate::ternary::{Support, TernaryMatrix};

/// `W ~ U diag(S) V` with ternary `U` (`M x K`) and `V` (`K x N`).
#[derive(Debug, Clone, PartialEq)]
pub struct TsvdFactorization {
    u: TernaryMatrix,
    s: Vec<f64>,
    v: TernaryMatrix,
    theta: f64,
    form: Option<FormType>,
}

impl TsvdFactorization {
    pub fn new(u: TernaryMatrix, s: Vec<f64>, v: TernaryMatrix, theta: f64) -> Result<Self> {
        if u.cols() != s.len() {
            return Err(TsvdError::DimensionMismatch {
                expected: u.cols(),
                found: s.len(),
            });
        }
        if v.rows() != s.len() {
            return Err(TsvdError::DimensionMismatch {
                expected: s.len(),
                found: v.rows(),
            });
        }
        if let Some(index) = s.iter().position(|x| !x.is_finite()) {
            return Err(TsvdError::NonFinite { index });
        }
        Ok(Self {
            u,
            s,
            v,
            theta,
            form: None,
        })
    }

    /// The empty (rank 0) factorization of an `m x n` zero matrix.
    pub fn empty(m: usize, n: usize, theta: f64) -> Self {
        Self {
            u: TernaryMatrix::zeros(m, 0),
            s: Vec::new(),
            v: TernaryMatrix::zeros(0, n),
            theta,
            form: None,
        }
    }

    pub fn with_form(mut self, form: Option<FormType>) -> Self {
        self.form = form;
        self
    }

    pub fn u(&self) -> &TernaryMatrix {
        &self.u
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn v(&self) -> &TernaryMatrix {
        &self.v
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn form(&self) -> Option<FormType> {
        self.form
    }

    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// `(M, N)` of the approximated matrix.
    pub fn shape(&self) -> (usize, usize) {
        (self.u.rows(), self.v.cols())
    }

    pub fn nnz(&self) -> usize {
        self.u.nnz() + self.v.nnz()
    }

    /// Pooled nonzero rate `(nnz(U) + nnz(V)) / (M K + K N)`; zero for `K = 0`.
    pub fn sparsity(&self) -> f64 {
        let (m, n) = self.shape();
        let slots = self.rank() * (m + n);
        if slots == 0 {
            0.0
        } else {
            self.nnz() as f64 / slots as f64
        }
    }

    /// Dense `U diag(S) V`, accumulated one rank-1 term at a time.
    pub fn reconstruct(&self) -> DenseMatrix {
        let (m, n) = self.shape();
        let mut out = vec![0.0; m * n];
        for k in 0..self.rank() {
            let u = Support::new(&self.u.column(k));
            let v = Support::new(&self.v.row(k));
            let s = self.s[k];
            for (&i, &su) in u.idx.iter().zip(&u.sign) {
                let row = &mut out[i as usize * n..(i as usize + 1) * n];
                let scale = s * su;
                for (&j, &sv) in v.idx.iter().zip(&v.sign) {
                    row[j as usize] += scale * sv;
                }
            }
        }
        DenseMatrix::from_trusted(m, n, out)
    }

    /// Computes `U (diag(S) (V x))` with addition-only ternary stages and `K`
    /// multiplies, returning the result with the counted cost.
    pub fn apply(&self, x: &[f64], bit_width: u32) -> Result<(Vec<f64>, CostReport)> {
        let (m, n) = self.shape();
        let (mut hidden, adds_v) = self.v.matvec(x)?;
        for (h, s) in hidden.iter_mut().zip(&self.s) {
            *h *= s;
        }
        let (y, adds_u) = self.u.matvec(&hidden)?;
        let report = CostReport::from_counts(
            (adds_u + adds_v) as f64,
            self.rank() as f64,
            m,
            n,
            bit_width,
            self.sparsity(),
            self.rank(),
        );
        Ok((y, report))
    }
}
