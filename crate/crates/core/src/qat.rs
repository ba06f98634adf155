//! Training-time refresh of a TSVD factorization.
//!
//! After each optimizer step on the latent full-precision weight, the old
//! factor directions are re-fitted, directions that still carry more weight
//! than the best new rank-1 direction are kept, and the greedy pursuit
//! continues from them. Gradients taken with respect to the reconstructed
//! weight are applied to the latent weight unchanged.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::decompose::{rank_one_fit, solve_singulars, DecomposeConfig, Decomposition, Pursuit};
use crate::dense::DenseMatrix;
use crate::error::{Result, TsvdError};
use crate::factorization::TsvdFactorization;
use crate::ternary::{TernaryMatrix, TernaryVector};

/// Default main/tail threshold.
pub const DEFAULT_ETA: f64 = 1.0;

const NEGLIGIBLE_RESIDUAL: f64 = 1e-12;

/// Intermediate quantities of one recompute, kept for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct RecomputeReport {
    /// Singular values of the old directions re-solved against the new weight.
    pub refit_s: Vec<f64>,
    /// `|s_k| * sqrt(nnz(u_k) nnz(v_k))` per old direction.
    pub weights: Vec<f64>,
    /// `|s'| ||t_u|| ||t_v||` of the best ternary rank-1 fit of the residual.
    pub reference: f64,
    pub eta: f64,
    /// Directions kept as the main part.
    pub keep: Vec<bool>,
    pub decomposition: Decomposition,
}

impl RecomputeReport {
    pub fn kept(&self) -> usize {
        self.keep.iter().filter(|&&k| k).count()
    }
}

/// Refreshes the factorization of `w_new` starting from the old factors.
pub fn qat_recompute(
    w_new: &DenseMatrix,
    u_old: &TernaryMatrix,
    v_old: &TernaryMatrix,
    eta: f64,
    cfg: &DecomposeConfig,
) -> Result<RecomputeReport> {
    if eta.is_nan() || eta < 0.0 {
        return Err(TsvdError::InvalidConfig("eta must be non-negative"));
    }
    let refit_s = solve_singulars(u_old, v_old, w_new)?;
    let k = refit_s.len();
    let u_cols: Vec<TernaryVector> = (0..k).map(|j| u_old.column(j)).collect();
    let v_rows: Vec<TernaryVector> = (0..k).map(|j| v_old.row(j)).collect();
    let weights: Vec<f64> = refit_s
        .iter()
        .zip(u_cols.iter().zip(&v_rows))
        .map(|(s, (u, v))| s.abs() * libm::sqrt((u.nnz() * v.nnz()) as f64))
        .collect();

    let fitted = TsvdFactorization::new(
        u_old.clone(),
        refit_s.clone(),
        v_old.clone(),
        cfg.theta.theta(),
    )?;
    let residual = w_new.sub(&fitted.reconstruct())?;
    // Rounding noise left after an exact refit has no meaningful direction.
    let reference = if residual.frobenius_norm() <= NEGLIGIBLE_RESIDUAL * w_new.frobenius_norm() {
        0.0
    } else {
        let (u, v, s) = rank_one_fit(&residual, &cfg.theta)?;
        s.abs() * libm::sqrt((u.len() * v.len()) as f64)
    };
    // An infinite eta keeps nothing, even against a zero reference.
    let bar = if eta.is_infinite() {
        f64::INFINITY
    } else {
        eta * reference
    };
    let keep: Vec<bool> = weights.iter().map(|&w| w > bar).collect();

    let main_u: Vec<TernaryVector> = u_cols
        .into_iter()
        .zip(&keep)
        .filter_map(|(u, &k)| k.then_some(u))
        .collect();
    let main_v: Vec<TernaryVector> = v_rows
        .into_iter()
        .zip(&keep)
        .filter_map(|(v, &k)| k.then_some(v))
        .collect();
    let decomposition = Pursuit::warm_start(w_new, cfg, &main_u, &main_v)?.run()?;
    Ok(RecomputeReport {
        refit_s,
        weights,
        reference,
        eta,
        keep,
        decomposition,
    })
}

/// Latent weight together with its current factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct QatState {
    pub weight: DenseMatrix,
    pub factorization: TsvdFactorization,
    pub eta: f64,
    pub cfg: DecomposeConfig,
}

impl QatState {
    /// Factors `weight` from scratch.
    pub fn new(weight: DenseMatrix, eta: f64, cfg: DecomposeConfig) -> Result<Self> {
        let empty_u = TernaryMatrix::zeros(weight.rows(), 0);
        let empty_v = TernaryMatrix::zeros(0, weight.cols());
        let report = qat_recompute(&weight, &empty_u, &empty_v, eta, &cfg)?;
        Ok(Self {
            factorization: report.decomposition.factorization,
            weight,
            eta,
            cfg,
        })
    }

    /// The weight used in the forward pass.
    pub fn effective_weight(&self) -> DenseMatrix {
        self.factorization.reconstruct()
    }

    /// One gradient step with the gradient taken at the effective weight.
    pub fn ste_step(&self, grad: &DenseMatrix, lr: f64) -> Result<(Self, RecomputeReport)> {
        let weight = self.weight.add_scaled(-lr, grad)?;
        let report = qat_recompute(
            &weight,
            self.factorization.u(),
            self.factorization.v(),
            self.eta,
            &self.cfg,
        )?;
        let next = Self {
            weight,
            factorization: report.decomposition.factorization.clone(),
            eta: self.eta,
            cfg: self.cfg.clone(),
        };
        Ok((next, report))
    }
}

/// `L(W) = 1/2 ||W X - T||_F^2` on fixed inputs `X` and targets `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRegression {
    pub inputs: DenseMatrix,
    pub targets: DenseMatrix,
}

impl LinearRegression {
    pub fn new(inputs: DenseMatrix, targets: DenseMatrix) -> Result<Self> {
        if inputs.cols() != targets.cols() {
            return Err(TsvdError::DimensionMismatch {
                expected: inputs.cols(),
                found: targets.cols(),
            });
        }
        Ok(Self { inputs, targets })
    }

    pub fn weight_shape(&self) -> (usize, usize) {
        (self.targets.rows(), self.inputs.rows())
    }

    pub fn residual(&self, w: &DenseMatrix) -> Result<DenseMatrix> {
        w.matmul(&self.inputs)?.sub(&self.targets)
    }

    pub fn loss(&self, w: &DenseMatrix) -> Result<f64> {
        let r = self.residual(w)?.frobenius_norm();
        Ok(0.5 * r * r)
    }

    /// `(W X - T) X^T`.
    pub fn grad(&self, w: &DenseMatrix) -> Result<DenseMatrix> {
        self.residual(w)?.matmul(&self.inputs.transpose())
    }

    /// Unconstrained minimizer `T X^T (X X^T)^-1`.
    pub fn least_squares(&self) -> Result<DenseMatrix> {
        let x = self.inputs.to_nalgebra();
        let t = self.targets.to_nalgebra();
        let gram: DMatrix<f64> = &x * x.transpose();
        let chol = gram
            .cholesky()
            .ok_or(TsvdError::InvalidConfig("inputs are rank deficient"))?;
        // W = T X^T G^-1, solved as G W^T = X T^T.
        let wt = chol.solve(&(&x * t.transpose()));
        Ok(DenseMatrix::from_nalgebra(&wt.transpose()))
    }

    /// Largest eigenvalue of `X X^T`, the gradient's Lipschitz constant.
    pub fn lipschitz(&self) -> f64 {
        let x = self.inputs.to_nalgebra();
        let gram: DMatrix<f64> = &x * x.transpose();
        gram.symmetric_eigenvalues()
            .iter()
            .fold(0.0f64, |a, &l| a.max(l))
    }
}
