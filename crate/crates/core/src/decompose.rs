//! Greedy residual pursuit into TSVD form.
//!
//! Each iteration takes the SVD of the current residual, ternarizes the top
//! `q` singular-vector pairs, appends them to the factors and re-solves every
//! singular value by least squares against the target.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::time::Duration;

use nalgebra::DMatrix;

use crate::cost::{critical_rank, DEFAULT_BIT_WIDTH, TYPICAL_SPARSITY};
use crate::dense::DenseMatrix;
use crate::error::{Result, TsvdError};
use crate::factorization::TsvdFactorization;
use crate::linalg::{pinv_solve_psd, spectral_norm_power, IncrementalCholesky, SortedSvd};
use crate::ternarize::{ternarize, AngleThreshold};
use crate::ternary::{BitPlanes, Support, TernaryMatrix, TernaryVector};

/// Seed of the power-iteration start vector in [`relative_error`].
pub const POWER_ITERATION_SEED: u64 = 0x5eed;

/// Singular values of the residual below this fraction of the largest are
/// not offered to the ternarizer.
const NULL_SPACE_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorNorm {
    #[default]
    Spectral,
    Frobenius,
}

impl ErrorNorm {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Spectral => "spectral",
            Self::Frobenius => "frobenius",
        }
    }
}

/// How many singular-vector pairs are ternarized per iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QPolicy {
    Fixed(usize),
    /// Aim for at least `min_iters` iterations, taking at most `q_cap` pairs.
    Adaptive {
        min_iters: usize,
        q_cap: usize,
    },
}

impl Default for QPolicy {
    fn default() -> Self {
        Self::Adaptive {
            min_iters: 20,
            q_cap: 256,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankLimit {
    /// Break-even rank at the typical sparsity, where TSVD stops paying off.
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposeConfig {
    pub theta: AngleThreshold,
    /// Relative error target in `(0, 1)`.
    pub tol: f64,
    pub error_norm: ErrorNorm,
    pub q_policy: QPolicy,
    pub max_rank: RankLimit,
    pub max_iters: usize,
    /// Start vector seed for power-iteration error estimates.
    pub seed: u64,
    /// Bit width used to price multiplies for the automatic rank limit.
    pub bit_width: u32,
}

impl DecomposeConfig {
    pub fn new(tol: f64) -> Self {
        Self {
            theta: AngleThreshold::default(),
            tol,
            error_norm: ErrorNorm::default(),
            q_policy: QPolicy::default(),
            max_rank: RankLimit::default(),
            max_iters: 10_000,
            seed: 0,
            bit_width: DEFAULT_BIT_WIDTH,
        }
    }

    pub fn with_theta(mut self, theta: AngleThreshold) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_q(mut self, q_policy: QPolicy) -> Self {
        self.q_policy = q_policy;
        self
    }

    pub fn with_norm(mut self, error_norm: ErrorNorm) -> Self {
        self.error_norm = error_norm;
        self
    }

    pub fn with_max_rank(mut self, max_rank: RankLimit) -> Self {
        self.max_rank = max_rank;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(TsvdError::InvalidConfig("tol must lie in (0, 1)"));
        }
        match self.q_policy {
            QPolicy::Fixed(0) => {
                return Err(TsvdError::InvalidConfig("fixed q must be at least 1"))
            }
            QPolicy::Adaptive { min_iters, q_cap } if min_iters == 0 || q_cap == 0 => {
                return Err(TsvdError::InvalidConfig(
                    "adaptive q needs min_iters and q_cap >= 1",
                ))
            }
            _ => {}
        }
        if self.bit_width < 2 {
            return Err(TsvdError::InvalidConfig("bit width must be at least 2"));
        }
        Ok(())
    }

    /// Rank budget for an `m x n` target.
    pub fn rank_budget(&self, m: usize, n: usize) -> usize {
        match self.max_rank {
            RankLimit::Fixed(k) => k,
            RankLimit::Auto => {
                let k = critical_rank(m, n, self.bit_width, TYPICAL_SPARSITY);
                (libm::floor(k) as usize).max(1)
            }
        }
    }
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        Self::new(0.01)
    }
}

/// State after one iteration; iteration 0 is the starting point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub rank: usize,
    pub nnz: usize,
    /// `||R||_F / ||W||_F`.
    pub frobenius_rel: f64,
    /// `||R||_2 / ||W||_2`, both from exact SVDs.
    pub spectral_rel: f64,
    pub q_used: usize,
    pub elapsed: Option<Duration>,
}

impl IterationRecord {
    pub fn error(&self, norm: ErrorNorm) -> f64 {
        match norm {
            ErrorNorm::Spectral => self.spectral_rel,
            ErrorNorm::Frobenius => self.frobenius_rel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecomposeTrace {
    pub records: Vec<IterationRecord>,
}

impl DecomposeTrace {
    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn frobenius_non_increasing(&self, slack: f64) -> bool {
        self.records
            .windows(2)
            .all(|w| w[1].frobenius_rel <= w[0].frobenius_rel * (1.0 + slack) + slack)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    /// Rank budget reached before the tolerance: TSVD is not a win here.
    RankLimit,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Continue,
    Stopped(StopReason),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub factorization: TsvdFactorization,
    pub trace: DecomposeTrace,
    /// Relative error in the configured norm.
    pub achieved_error: f64,
    pub spectral_error: f64,
    pub frobenius_error: f64,
    pub stop: StopReason,
    pub iterations: usize,
}

impl Decomposition {
    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }

    pub fn non_compressive(&self) -> bool {
        self.stop == StopReason::RankLimit
    }
}

/// Stepwise driver of the greedy decomposition.
///
/// Each [`Pursuit::step`] either stops or performs one iteration. When a step
/// fails to ternarize, the pursuit is left at its previous state, so callers
/// can still [`Pursuit::finish`] with the partial result.
pub struct Pursuit {
    cfg: DecomposeConfig,
    target: DenseMatrix,
    target_spectral: f64,
    target_frobenius: f64,
    rank_budget: usize,
    u_cols: Vec<TernaryVector>,
    v_rows: Vec<TernaryVector>,
    u_planes: Vec<BitPlanes>,
    v_planes: Vec<BitPlanes>,
    u_support: Vec<Support>,
    v_support: Vec<Support>,
    rhs: Vec<f64>,
    chol: IncrementalCholesky,
    s: Vec<f64>,
    residual: DenseMatrix,
    svd: SortedSvd,
    trace: DecomposeTrace,
    iterations: usize,
    clock: Option<Box<dyn Fn() -> Duration + Send>>,
}

impl Pursuit {
    pub fn new(target: &DenseMatrix, cfg: &DecomposeConfig) -> Result<Self> {
        Self::warm_start(target, cfg, &[], &[])
    }

    /// Starts from existing factor directions; their singular values are
    /// re-solved against `target`.
    pub fn warm_start(
        target: &DenseMatrix,
        cfg: &DecomposeConfig,
        u_cols: &[TernaryVector],
        v_rows: &[TernaryVector],
    ) -> Result<Self> {
        cfg.validate()?;
        let (m, n) = target.shape();
        if target.is_zero() {
            return Err(TsvdError::ZeroNorm);
        }
        if u_cols.len() != v_rows.len() {
            return Err(TsvdError::DimensionMismatch {
                expected: u_cols.len(),
                found: v_rows.len(),
            });
        }
        for (u, v) in u_cols.iter().zip(v_rows) {
            if u.len() != m || v.len() != n {
                return Err(TsvdError::ShapeMismatch {
                    expected: (m, n),
                    found: (u.len(), v.len()),
                });
            }
        }
        let svd = SortedSvd::new(target);
        let mut p = Self {
            cfg: cfg.clone(),
            target: target.clone(),
            target_spectral: svd.top(),
            target_frobenius: target.frobenius_norm(),
            rank_budget: cfg.rank_budget(m, n),
            u_cols: Vec::new(),
            v_rows: Vec::new(),
            u_planes: Vec::new(),
            v_planes: Vec::new(),
            u_support: Vec::new(),
            v_support: Vec::new(),
            rhs: Vec::new(),
            chol: IncrementalCholesky::default(),
            s: Vec::new(),
            residual: target.clone(),
            svd,
            trace: DecomposeTrace::default(),
            iterations: 0,
            clock: None,
        };
        if u_cols.is_empty() {
            p.record(0);
        } else {
            for (u, v) in u_cols.iter().zip(v_rows) {
                p.push_pair(u.clone(), v.clone());
            }
            p.s = p.chol.solve(&p.rhs);
            p.refresh(0);
        }
        Ok(p)
    }

    /// Supplies a clock whose readings are stored in the trace.
    pub fn with_clock(mut self, clock: Box<dyn Fn() -> Duration + Send>) -> Self {
        self.clock = Some(clock);
        if let Some(r) = self.trace.records.last_mut() {
            r.elapsed = self.clock.as_ref().map(|c| c());
        }
        self
    }

    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn trace(&self) -> &DecomposeTrace {
        &self.trace
    }

    pub fn residual(&self) -> &DenseMatrix {
        &self.residual
    }

    /// Relative error of the current state in the configured norm.
    pub fn current_error(&self) -> f64 {
        self.trace
            .last()
            .map(|r| r.error(self.cfg.error_norm))
            .unwrap_or(1.0)
    }

    pub fn stop_reason(&self) -> Option<StopReason> {
        if self.current_error() <= self.cfg.tol {
            Some(StopReason::Converged)
        } else if self.rank() >= self.rank_budget {
            Some(StopReason::RankLimit)
        } else if self.iterations >= self.cfg.max_iters {
            Some(StopReason::IterationLimit)
        } else {
            None
        }
    }

    pub fn step(&mut self) -> Result<StepOutcome> {
        if let Some(stop) = self.stop_reason() {
            return Ok(StepOutcome::Stopped(stop));
        }
        let q = self.next_q();
        let mut batch: Vec<(TernaryVector, TernaryVector)> = Vec::with_capacity(q);
        for j in 0..q {
            let u = ternarize(&self.svd.left(j), &self.cfg.theta)?;
            let v = ternarize(&self.svd.right(j), &self.cfg.theta)?;
            if !batch.iter().any(|(bu, bv)| *bu == u && *bv == v) {
                batch.push((u, v));
            }
        }
        for (u, v) in batch {
            self.push_pair(u, v);
        }
        self.s = self.chol.solve(&self.rhs);
        self.iterations += 1;
        self.refresh(q);
        Ok(StepOutcome::Continue)
    }

    /// Runs until a stop condition holds.
    pub fn run(mut self) -> Result<Decomposition> {
        while self.step()? == StepOutcome::Continue {}
        Ok(self.finish())
    }

    /// Packages the current state, whether or not a stop condition holds.
    pub fn finish(self) -> Decomposition {
        let (m, n) = self.target.shape();
        let s = if self.chol.has_dependent() {
            // Same residual either way; the pseudo-inverse spreads weight
            // over dependent directions instead of zeroing them.
            let gram = gram_matrix(&self.u_planes, &self.v_planes);
            pinv_solve_psd(&gram, &self.rhs)
        } else {
            self.s.clone()
        };
        let u = TernaryMatrix::from_columns(m, &self.u_cols).expect("columns have length m");
        let v = TernaryMatrix::from_rows(n, &self.v_rows).expect("rows have length n");
        let factorization =
            TsvdFactorization::new(u, s, v, self.cfg.theta.theta()).expect("factor shapes agree");
        let last = *self.trace.last().expect("trace starts with a record");
        let stop = self.stop_reason().unwrap_or(StopReason::IterationLimit);
        Decomposition {
            factorization,
            achieved_error: last.error(self.cfg.error_norm),
            spectral_error: last.spectral_rel,
            frobenius_error: last.frobenius_rel,
            trace: self.trace,
            stop,
            iterations: self.iterations,
        }
    }

    fn next_q(&self) -> usize {
        let (m, n) = self.target.shape();
        let top = self.svd.top();
        let live = self
            .svd
            .sigma
            .iter()
            .take_while(|&&s| s > NULL_SPACE_CUTOFF * top)
            .count();
        let cap = m
            .min(n)
            .min(live)
            .min(self.rank_budget.saturating_sub(self.rank()));
        adaptive_q(&self.trace, &self.cfg).min(cap).max(1)
    }

    fn push_pair(&mut self, u: TernaryVector, v: TernaryVector) {
        let up = BitPlanes::new(&u);
        let vp = BitPlanes::new(&v);
        let us = Support::new(&u);
        let vs = Support::new(&v);
        let diag = (us.len() * vs.len()) as f64;
        let (u_planes, v_planes) = (&self.u_planes, &self.v_planes);
        self.chol.push(diag, |j| {
            (u_planes[j].dot(&up) * v_planes[j].dot(&vp)) as f64
        });
        self.rhs.push(bilinear(&self.target, &us, &vs));
        self.u_planes.push(up);
        self.v_planes.push(vp);
        self.u_support.push(us);
        self.v_support.push(vs);
        self.u_cols.push(u);
        self.v_rows.push(v);
    }

    fn refresh(&mut self, q_used: usize) {
        let n = self.target.cols();
        let mut r = self.target.clone();
        let data = r.data_mut();
        for ((us, vs), &s) in self.u_support.iter().zip(&self.v_support).zip(&self.s) {
            if s == 0.0 {
                continue;
            }
            for (&i, &su) in us.idx.iter().zip(&us.sign) {
                let row = &mut data[i as usize * n..(i as usize + 1) * n];
                let scale = s * su;
                for (&j, &sv) in vs.idx.iter().zip(&vs.sign) {
                    row[j as usize] -= scale * sv;
                }
            }
        }
        self.residual = r;
        self.svd = SortedSvd::new(&self.residual);
        self.record(q_used);
    }

    fn record(&mut self, q_used: usize) {
        let nnz = self
            .u_support
            .iter()
            .chain(&self.v_support)
            .map(Support::len)
            .sum();
        self.trace.records.push(IterationRecord {
            iter: self.iterations,
            rank: self.rank(),
            nnz,
            frobenius_rel: self.residual.frobenius_norm() / self.target_frobenius,
            spectral_rel: self.svd.top() / self.target_spectral,
            q_used,
            elapsed: self.clock.as_ref().map(|c| c()),
        });
    }
}

/// `u^T W v` for ternary `u`, `v` given by their supports.
fn bilinear(w: &DenseMatrix, u: &Support, v: &Support) -> f64 {
    let mut acc = 0.0;
    for (&i, &su) in u.idx.iter().zip(&u.sign) {
        let row = w.row(i as usize);
        let mut inner = 0.0;
        for (&j, &sv) in v.idx.iter().zip(&v.sign) {
            inner += sv * row[j as usize];
        }
        acc += su * inner;
    }
    acc
}

/// `(U^T U) .* (V V^T)` from bit planes.
fn gram_matrix(u: &[BitPlanes], v: &[BitPlanes]) -> DMatrix<f64> {
    let k = u.len();
    let mut g = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..=a {
            let x = (u[a].dot(&u[b]) * v[a].dot(&v[b])) as f64;
            g[(a, b)] = x;
            g[(b, a)] = x;
        }
    }
    g
}

/// Least-squares singular values `[(U^T U) .* (V V^T)]^+ diag(U^T W V^T)`,
/// the minimum-norm solution when the Gram matrix is singular.
pub fn solve_singulars(u: &TernaryMatrix, v: &TernaryMatrix, w: &DenseMatrix) -> Result<Vec<f64>> {
    if u.cols() != v.rows() {
        return Err(TsvdError::DimensionMismatch {
            expected: u.cols(),
            found: v.rows(),
        });
    }
    if w.shape() != (u.rows(), v.cols()) {
        return Err(TsvdError::ShapeMismatch {
            expected: (u.rows(), v.cols()),
            found: w.shape(),
        });
    }
    let k = u.cols();
    let mut u_planes = Vec::with_capacity(k);
    let mut v_planes = Vec::with_capacity(k);
    let mut rhs = Vec::with_capacity(k);
    for j in 0..k {
        let uc = u.column(j);
        let vr = v.row(j);
        rhs.push(bilinear(w, &Support::new(&uc), &Support::new(&vr)));
        u_planes.push(BitPlanes::new(&uc));
        v_planes.push(BitPlanes::new(&vr));
    }
    Ok(pinv_solve_psd(&gram_matrix(&u_planes, &v_planes), &rhs))
}

/// Runs the greedy pursuit to completion.
pub fn tsvd_decompose(w: &DenseMatrix, cfg: &DecomposeConfig) -> Result<Decomposition> {
    Pursuit::new(w, cfg)?.run()
}

/// `||W - W_hat|| / ||W||`; the spectral norm is estimated by power iteration.
pub fn relative_error(w: &DenseMatrix, w_hat: &DenseMatrix, norm: ErrorNorm) -> Result<f64> {
    relative_error_seeded(w, w_hat, norm, POWER_ITERATION_SEED)
}

pub fn relative_error_seeded(
    w: &DenseMatrix,
    w_hat: &DenseMatrix,
    norm: ErrorNorm,
    seed: u64,
) -> Result<f64> {
    let diff = w.sub(w_hat)?;
    let (num, den) = match norm {
        ErrorNorm::Frobenius => (diff.frobenius_norm(), w.frobenius_norm()),
        ErrorNorm::Spectral => (
            spectral_norm_power(&diff, seed),
            spectral_norm_power(w, seed),
        ),
    };
    if den == 0.0 {
        return Err(TsvdError::ZeroNorm);
    }
    Ok(num / den)
}

/// One rank-1 step that fits only the new singular value.
///
/// Returns the new residual and `||R_next||_F / ||R||_F`.
pub fn weak_policy_step(
    residual: &DenseMatrix,
    theta: &AngleThreshold,
) -> Result<(DenseMatrix, f64)> {
    let before = residual.frobenius_norm();
    if before == 0.0 {
        return Err(TsvdError::ZeroNorm);
    }
    let (u, v, s) = rank_one_fit(residual, theta)?;
    let n = residual.cols();
    let mut next = residual.clone();
    let data = next.data_mut();
    for (&i, &su) in u.idx.iter().zip(&u.sign) {
        for (&j, &sv) in v.idx.iter().zip(&v.sign) {
            data[i as usize * n + j as usize] -= s * su * sv;
        }
    }
    let ratio = next.frobenius_norm() / before;
    Ok((next, ratio))
}

/// Ternarized top singular pair of `r` with its optimal scale.
pub(crate) fn rank_one_fit(
    r: &DenseMatrix,
    theta: &AngleThreshold,
) -> Result<(Support, Support, f64)> {
    let svd = SortedSvd::new(r);
    let u = Support::new(&ternarize(&svd.left(0), theta)?);
    let v = Support::new(&ternarize(&svd.right(0), theta)?);
    let s = bilinear(r, &u, &v) / (u.len() * v.len()) as f64;
    Ok((u, v, s))
}

/// Contraction bound `sqrt(1 - cos^2(2 theta) / min(m, n))` of a weak step.
pub fn weak_policy_bound(theta: f64, m: usize, n: usize) -> f64 {
    let c = libm::cos(2.0 * theta);
    libm::sqrt(1.0 - c * c / m.min(n) as f64)
}

/// Pairs per iteration for the configured policy given the trace so far.
pub fn adaptive_q(trace: &DecomposeTrace, cfg: &DecomposeConfig) -> usize {
    match cfg.q_policy {
        QPolicy::Fixed(q) => q.max(1),
        QPolicy::Adaptive { min_iters, q_cap } => {
            if trace.records.len() < 2 {
                return 1;
            }
            let k_est = estimate_final_rank(trace, cfg.tol, cfg.error_norm);
            q_from_estimate(k_est, min_iters, q_cap)
        }
    }
}

/// `clamp(ceil(k_est / min_iters), 1, q_cap)`.
pub fn q_from_estimate(k_est: f64, min_iters: usize, q_cap: usize) -> usize {
    let q = libm::ceil(k_est / min_iters as f64);
    if q.is_nan() || q < 1.0 {
        1
    } else if q >= q_cap as f64 {
        q_cap
    } else {
        q as usize
    }
}

/// Extrapolates the Frobenius residual, assumed log-linear in the rank, to
/// the rank at which the target tolerance is met.
///
/// The tolerance is mapped to a Frobenius target through the current ratio
/// of the two error measures. The decay rate comes from the last two records,
/// or from the origin when those show no decrease.
pub fn estimate_final_rank(trace: &DecomposeTrace, tol: f64, norm: ErrorNorm) -> f64 {
    let n = trace.records.len();
    let Some(last) = trace.records.last() else {
        return 0.0;
    };
    let err = last.error(norm);
    if err <= tol || last.frobenius_rel <= 0.0 {
        return last.rank as f64;
    }
    let target = tol * last.frobenius_rel / err;
    let log_last = libm::log(last.frobenius_rel);
    let mut rate = f64::NAN;
    if n >= 2 {
        let prev = &trace.records[n - 2];
        if last.rank > prev.rank && prev.frobenius_rel > 0.0 {
            rate = (log_last - libm::log(prev.frobenius_rel)) / (last.rank - prev.rank) as f64;
        }
    }
    if (rate.is_nan() || rate >= 0.0) && last.rank > 0 {
        rate = log_last / last.rank as f64;
    }
    if rate.is_nan() || rate >= 0.0 {
        return f64::INFINITY;
    }
    last.rank as f64 + (libm::log(target) - log_last) / rate
}
