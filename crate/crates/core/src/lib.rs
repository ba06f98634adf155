//! Ternary SVD: `W ~ U diag(S) V` with `U`, `V` in `{-1, 0, +1}`.
//!
//! The factors are applied with additions only; the `K` entries of `S` are
//! the sole multiplies. This crate holds the numerical core and needs only
//! `alloc`.

#![no_std]

extern crate alloc;

pub mod conv;
pub mod cost;
pub mod decompose;
mod dense;
mod error;
mod factorization;
mod linalg;
pub mod qat;
pub mod ternarize;
mod ternary;

pub use conv::{ConvFactorization, ConvSpec, FormType, Kernel4, Tensor3, TileSpec};
pub use cost::{BaselineSpec, CostReport};
pub use decompose::{
    tsvd_decompose, DecomposeConfig, DecomposeTrace, Decomposition, ErrorNorm, IterationRecord,
    Pursuit, QPolicy, RankLimit, StepOutcome, StopReason,
};
pub use dense::DenseMatrix;
pub use error::{Result, TsvdError};
pub use factorization::TsvdFactorization;
pub use linalg::{singular_values, spectral_norm_power};
pub use ternarize::{ternarize, AngleThreshold};
pub use ternary::{TernaryMatrix, TernaryVector};
