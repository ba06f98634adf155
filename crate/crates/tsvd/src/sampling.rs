//! Seeded random matrices.
//!
//! All generators draw from `ChaCha8Rng::seed_from_u64(seed)` in row-major
//! order, so a `(seed, shape)` pair fixes the matrix on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use tsvd_core::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Distribution {
    Laplace { loc: f64, scale: f64 },
    Gaussian { mean: f64, std: f64 },
}

impl Default for Distribution {
    fn default() -> Self {
        Self::Laplace {
            loc: 0.0,
            scale: 1.0,
        }
    }
}

impl Distribution {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Laplace { .. } => "laplace",
            Self::Gaussian { .. } => "gaussian",
        }
    }

    pub fn sample_vec(&self, len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| self.draw(&mut rng)).collect()
    }

    pub fn matrix(&self, rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        DenseMatrix::new(rows, cols, self.sample_vec(rows * cols, seed))
            .expect("samples are finite")
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Self::Laplace { loc, scale } => {
                // Inverse CDF on u in (-1/2, 1/2); u = -1/2 is redrawn.
                let u = loop {
                    let r: f64 = rng.random();
                    if r > 0.0 {
                        break r - 0.5;
                    }
                };
                loc - scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            Self::Gaussian { mean, std } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + std * z
            }
        }
    }
}

pub fn laplace(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    Distribution::default().matrix(rows, cols, seed)
}

pub fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    Distribution::Gaussian {
        mean: 0.0,
        std: 1.0,
    }
    .matrix(rows, cols, seed)
}
