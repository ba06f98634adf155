//! Quantization-aware training of a linear regression with a TSVD weight.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};
use serde::Serialize;
use tsvd_core::qat::{LinearRegression, QatState, DEFAULT_ETA};
use tsvd_core::{AngleThreshold, DecomposeConfig, DenseMatrix, Result};

use crate::sampling::Distribution;

#[derive(Debug, Clone, PartialEq)]
pub struct QatDemoConfig {
    pub outputs: usize,
    pub inputs: usize,
    pub samples: usize,
    pub steps: usize,
    pub eta: f64,
    /// Step size; `None` uses the inverse Lipschitz constant of the loss.
    pub lr: Option<f64>,
    /// Standard deviation of the target noise.
    pub noise: f64,
    pub tol: f64,
    pub theta: AngleThreshold,
    pub seed: u64,
}

impl Default for QatDemoConfig {
    fn default() -> Self {
        Self {
            outputs: 16,
            inputs: 8,
            samples: 64,
            steps: 200,
            eta: DEFAULT_ETA,
            lr: None,
            noise: 0.5,
            tol: 0.02,
            // Every vector of length at most 55 has a ternary match within 45
            // degrees, so the small demo cannot stall on ternarization.
            theta: AngleThreshold::from_degrees(45.0).expect("45 degrees is in range"),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepLog {
    pub step: usize,
    pub loss: f64,
    pub rank: usize,
    pub kept: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QatDemoReport {
    pub lr: f64,
    pub optimum_loss: f64,
    pub final_loss: f64,
    /// `final_loss / optimum_loss`.
    pub ratio: f64,
    pub log: Vec<StepLog>,
}

/// Trains from a small random start with straight-through gradients and
/// compares the final loss against the closed-form least-squares weight.
pub fn run_qat_demo(cfg: &QatDemoConfig) -> Result<QatDemoReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let inputs = DenseMatrix::from_fn(cfg.inputs, cfg.samples, |_, _| normal.sample(&mut rng))?;
    let truth = Distribution::default().matrix(cfg.outputs, cfg.inputs, cfg.seed);
    let clean = truth.matmul(&inputs)?;
    let targets = DenseMatrix::from_fn(cfg.outputs, cfg.samples, |i, j| {
        clean.get(i, j) + cfg.noise * normal.sample(&mut rng)
    })?;
    let problem = LinearRegression::new(inputs, targets)?;
    let optimum_loss = problem.loss(&problem.least_squares()?)?;
    let lr = cfg.lr.unwrap_or_else(|| 1.0 / problem.lipschitz());

    let start = DenseMatrix::from_fn(cfg.outputs, cfg.inputs, |_, _| {
        0.1 * normal.sample(&mut rng)
    })?;
    let dcfg = DecomposeConfig::new(cfg.tol).with_theta(cfg.theta);
    let mut state = QatState::new(start, cfg.eta, dcfg)?;
    let mut log = Vec::with_capacity(cfg.steps + 1);
    log.push(StepLog {
        step: 0,
        loss: problem.loss(&state.effective_weight())?,
        rank: state.factorization.rank(),
        kept: 0,
    });
    for step in 1..=cfg.steps {
        let grad = problem.grad(&state.effective_weight())?;
        let (next, report) = state.ste_step(&grad, lr)?;
        state = next;
        log.push(StepLog {
            step,
            loss: problem.loss(&state.effective_weight())?,
            rank: state.factorization.rank(),
            kept: report.kept(),
        });
    }
    let final_loss = log.last().map_or(f64::NAN, |l| l.loss);
    Ok(QatDemoReport {
        lr,
        optimum_loss,
        final_loss,
        ratio: final_loss / optimum_loss,
        log,
    })
}
