//! Desk-scale experiments on random matrices and convolution kernels.
//!
//! Every study is a pure function of its [`StudyConfig`]: jobs run in
//! parallel but rows come back in job order, so repeated runs emit identical
//! tables.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use tsvd_core::conv::{reshape_kernel, unfold_tile};
use tsvd_core::cost::{baseline_cost, sparse_aware_rate, tsvd_cost, WinogradReference};
use tsvd_core::{
    AngleThreshold, BaselineSpec, ConvSpec, DecomposeConfig, DenseMatrix, FormType, Kernel4,
    Pursuit, QPolicy, RankLimit, StepOutcome, TsvdError,
};

use crate::baselines::{prune, quantize, spectral_error, svd_rank_for_error, truncated_svd_errors};
use crate::sampling::Distribution;

/// Environment variable capping the worker threads of a study.
pub const THREADS_ENV: &str = "TSVD_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 128 x 64 matrices, small grids.
    Quick,
    /// 512 x 256 matrices.
    Paper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrid {
    pub kernels: Vec<usize>,
    pub tiles: Vec<usize>,
    pub strides: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Trajectories stop once the modeled rate exceeds this.
    pub max_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub shape: (usize, usize),
    pub distribution: Distribution,
    pub seeds: Vec<u64>,
    /// TSVD tolerances of the tradeoff study.
    pub tolerances: Vec<f64>,
    pub prune_keeps: Vec<f64>,
    pub quant_bits: Vec<u32>,
    pub theta_degrees: Vec<f64>,
    pub theta_tolerances: Vec<f64>,
    pub bit_width: u32,
    pub conv: ConvGrid,
}

impl StudyConfig {
    pub fn preset(preset: Preset) -> Self {
        let (shape, seeds, thetas) = match preset {
            Preset::Quick => (
                (128, 64),
                vec![0, 1, 2],
                (5..=20).map(|i| 3.0 * i as f64).collect(),
            ),
            Preset::Paper => (
                (512, 256),
                vec![0],
                (5..=20).map(|i| 3.0 * i as f64).collect(),
            ),
        };
        Self {
            shape,
            distribution: Distribution::default(),
            seeds,
            tolerances: vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5],
            prune_keeps: (1..=20).map(|i| i as f64 * 0.05).collect(),
            quant_bits: vec![2, 3, 4, 5, 6, 7, 8, 32],
            theta_degrees: thetas,
            theta_tolerances: vec![0.01],
            bit_width: 32,
            conv: ConvGrid {
                kernels: vec![3, 5, 7],
                tiles: vec![1, 2, 3],
                strides: vec![1, 2],
                seeds: match preset {
                    Preset::Quick => (0..4).collect(),
                    Preset::Paper => (0..16).collect(),
                },
                max_rate: 1.5,
            },
        }
    }

    pub fn matrix(&self, seed: u64) -> DenseMatrix {
        self.distribution.matrix(self.shape.0, self.shape.1, seed)
    }
}

/// Runs `f` on a pool limited by `TSVD_THREADS` when that is set.
pub fn with_thread_limit<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let limit = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    match limit {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .unwrap_or_else(|_| panic!("cannot build a thread pool of {n} workers")),
        _ => f(),
    }
}

fn status_of(err: &TsvdError) -> &'static str {
    match err {
        TsvdError::NoTernaryWithinTheta { .. } => "no_ternary",
        _ => "error",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffRow {
    pub seed: u64,
    pub method: &'static str,
    pub parameter: f64,
    pub compression_rate: f64,
    pub spectral_error: f64,
    pub rank: Option<usize>,
    pub sparsity: Option<f64>,
    pub status: &'static str,
}

/// Rate/error points of SVD, pruning, quantization and TSVD, sorted by rate.
pub fn tradeoff_study(cfg: &StudyConfig) -> Vec<TradeoffRow> {
    let (m, n) = cfg.shape;
    let d = cfg.bit_width;
    let mut rows: Vec<TradeoffRow> = with_thread_limit(|| {
        cfg.seeds
            .par_iter()
            .flat_map_iter(|&seed| {
                let w = cfg.matrix(seed);
                let mut rows = Vec::new();
                let svd_errors = truncated_svd_errors(&w);
                for (k, &e) in svd_errors.iter().enumerate().skip(1) {
                    rows.push(TradeoffRow {
                        seed,
                        method: "svd",
                        parameter: k as f64,
                        compression_rate: baseline_cost(BaselineSpec::Svd { rank: k }, m, n, d)
                            .compression_rate,
                        spectral_error: e,
                        rank: Some(k),
                        sparsity: None,
                        status: "ok",
                    });
                }
                let pruned: Vec<TradeoffRow> = cfg
                    .prune_keeps
                    .par_iter()
                    .map(|&keep| TradeoffRow {
                        seed,
                        method: "prune",
                        parameter: keep,
                        compression_rate: baseline_cost(BaselineSpec::Prune { keep }, m, n, d)
                            .compression_rate,
                        spectral_error: spectral_error(&w, &prune(&w, keep)),
                        rank: None,
                        sparsity: Some(keep),
                        status: "ok",
                    })
                    .collect();
                rows.extend(pruned);
                let quant: Vec<TradeoffRow> = cfg
                    .quant_bits
                    .par_iter()
                    .map(|&bits| TradeoffRow {
                        seed,
                        method: "quant",
                        parameter: f64::from(bits),
                        compression_rate: baseline_cost(BaselineSpec::Quant { bits }, m, n, d)
                            .compression_rate,
                        spectral_error: spectral_error(&w, &quantize(&w, bits, d)),
                        rank: None,
                        sparsity: None,
                        status: "ok",
                    })
                    .collect();
                rows.extend(quant);
                let tsvd: Vec<TradeoffRow> = cfg
                    .tolerances
                    .par_iter()
                    .map(|&tol| tsvd_row(&w, seed, tol, d))
                    .collect();
                rows.extend(tsvd);
                rows
            })
            .collect()
    });
    rows.sort_by(|a, b| {
        a.compression_rate
            .total_cmp(&b.compression_rate)
            .then(a.seed.cmp(&b.seed))
            .then(a.method.cmp(b.method))
            .then(a.parameter.total_cmp(&b.parameter))
    });
    rows
}

fn tsvd_row(w: &DenseMatrix, seed: u64, tol: f64, bit_width: u32) -> TradeoffRow {
    let (m, n) = w.shape();
    let mut cfg = DecomposeConfig::new(tol);
    cfg.bit_width = bit_width;
    match tsvd_core::tsvd_decompose(w, &cfg) {
        Ok(d) => {
            let f = &d.factorization;
            TradeoffRow {
                seed,
                method: "tsvd",
                parameter: tol,
                compression_rate: tsvd_cost(m, n, f.rank(), f.sparsity(), bit_width)
                    .compression_rate,
                spectral_error: d.spectral_error,
                rank: Some(f.rank()),
                sparsity: Some(f.sparsity()),
                status: if d.converged() {
                    "ok"
                } else {
                    "non_compressive"
                },
            }
        }
        Err(e) => TradeoffRow {
            seed,
            method: "tsvd",
            parameter: tol,
            compression_rate: f64::NAN,
            spectral_error: f64::NAN,
            rank: None,
            sparsity: None,
            status: status_of(&e),
        },
    }
}

/// Comparison of one TSVD point against the baselines at its achieved error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedComparison {
    pub tol: f64,
    pub tsvd_rate: f64,
    pub tsvd_error: f64,
    /// Truncated SVD rate at the smallest rank reaching the same error.
    pub svd_rate: f64,
    /// Rate of the narrowest quantizer reaching the same error, if any does.
    pub quant_rate: Option<f64>,
}

/// Matches each TSVD row of one seed to the baselines at its achieved error.
pub fn matched_comparisons(
    w: &DenseMatrix,
    rows: &[TradeoffRow],
    bit_width: u32,
) -> Vec<MatchedComparison> {
    let (m, n) = w.shape();
    let errors = truncated_svd_errors(w);
    let mut quant: Vec<&TradeoffRow> = rows.iter().filter(|r| r.method == "quant").collect();
    quant.sort_by(|a, b| a.parameter.total_cmp(&b.parameter));
    rows.iter()
        .filter(|r| r.method == "tsvd" && r.status == "ok")
        .map(|r| {
            let k = svd_rank_for_error(&errors, r.spectral_error);
            MatchedComparison {
                tol: r.parameter,
                tsvd_rate: r.compression_rate,
                tsvd_error: r.spectral_error,
                svd_rate: baseline_cost(BaselineSpec::Svd { rank: k }, m, n, bit_width)
                    .compression_rate,
                quant_rate: quant
                    .iter()
                    .find(|q| q.spectral_error <= r.spectral_error)
                    .map(|q| q.compression_rate),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaRow {
    pub seed: u64,
    pub theta_deg: f64,
    pub theta_rad: f64,
    pub tol: f64,
    pub status: &'static str,
    pub compression_rate: f64,
    pub sparsity: f64,
    pub rank: usize,
    pub achieved_error: f64,
    pub iterations: usize,
}

/// Modeled compression and measured sparsity across angle thresholds.
pub fn theta_sweep(cfg: &StudyConfig) -> Vec<ThetaRow> {
    let (m, n) = cfg.shape;
    let jobs: Vec<(u64, f64, f64)> = cfg
        .seeds
        .iter()
        .flat_map(|&s| {
            cfg.theta_degrees
                .iter()
                .flat_map(move |&t| cfg.theta_tolerances.iter().map(move |&tol| (s, t, tol)))
        })
        .collect();
    with_thread_limit(|| {
        jobs.par_iter()
            .map(|&(seed, deg, tol)| {
                let w = cfg.matrix(seed);
                let theta = AngleThreshold::from_degrees(deg).expect("grid angles lie in (0, 90)");
                let mut dcfg = DecomposeConfig::new(tol).with_theta(theta);
                dcfg.bit_width = cfg.bit_width;
                let mut row = ThetaRow {
                    seed,
                    theta_deg: deg,
                    theta_rad: theta.theta(),
                    tol,
                    status: "ok",
                    compression_rate: f64::NAN,
                    sparsity: f64::NAN,
                    rank: 0,
                    achieved_error: f64::NAN,
                    iterations: 0,
                };
                match tsvd_core::tsvd_decompose(&w, &dcfg) {
                    Ok(d) => {
                        let f = &d.factorization;
                        row.compression_rate =
                            tsvd_cost(m, n, f.rank(), f.sparsity(), cfg.bit_width).compression_rate;
                        row.sparsity = f.sparsity();
                        row.rank = f.rank();
                        row.achieved_error = d.achieved_error;
                        row.iterations = d.iterations;
                        if !d.converged() {
                            row.status = "non_compressive";
                        }
                    }
                    Err(e) => row.status = status_of(&e),
                }
                row
            })
            .collect()
    })
}

/// Angle with the lowest mean compression at `tol`, among angles where every
/// seed converged.
pub fn best_theta(rows: &[ThetaRow], tol: f64) -> Option<(f64, f64)> {
    let mut thetas: Vec<f64> = rows
        .iter()
        .filter(|r| r.tol == tol)
        .map(|r| r.theta_deg)
        .collect();
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();
    thetas
        .into_iter()
        .filter_map(|t| {
            let group: Vec<&ThetaRow> = rows
                .iter()
                .filter(|r| r.tol == tol && r.theta_deg == t)
                .collect();
            if group.iter().all(|r| r.status == "ok") {
                let mean =
                    group.iter().map(|r| r.compression_rate).sum::<f64>() / group.len() as f64;
                Some((t, mean))
            } else {
                None
            }
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvRow {
    pub seed: u64,
    pub kernel: usize,
    pub stride: usize,
    pub tile: usize,
    /// `form0`..`form3` for unit tiles, `unfold` for larger tiles, or
    /// `winograd` for the reference point.
    pub layout: String,
    pub iteration: usize,
    pub rank: usize,
    pub nnz: usize,
    pub dense_fraction: f64,
    pub compression_rate: f64,
    pub error: f64,
    pub status: &'static str,
}

/// Rate/error trajectories of single-channel convolutions per tile size.
///
/// Unit tiles are factored in all four layouts; larger tiles factor the
/// unfolded tile matrix, priced against its own nonzero fraction. Each
/// trajectory adds one rank per iteration and keeps every intermediate point,
/// including those before a ternarization failure.
pub fn conv_tile_study(cfg: &StudyConfig) -> Vec<ConvRow> {
    let grid = &cfg.conv;
    let mut jobs = Vec::new();
    for &seed in &grid.seeds {
        for &kernel in &grid.kernels {
            for &stride in &grid.strides {
                for &tile in &grid.tiles {
                    if tile == 1 {
                        for form in FormType::ALL {
                            jobs.push((seed, kernel, stride, tile, Some(form)));
                        }
                    } else {
                        jobs.push((seed, kernel, stride, tile, None));
                    }
                }
            }
        }
    }
    let mut rows: Vec<ConvRow> = with_thread_limit(|| {
        jobs.par_iter()
            .flat_map_iter(|&(seed, kernel, stride, tile, form)| {
                conv_trajectory(cfg, seed, kernel, stride, tile, form)
            })
            .collect()
    });
    if grid.kernels.contains(&3) && grid.tiles.contains(&2) {
        rows.push(ConvRow {
            seed: 0,
            kernel: 3,
            stride: 1,
            tile: 2,
            layout: "winograd".into(),
            iteration: 0,
            rank: WinogradReference::RANK,
            nnz: WinogradReference::NNZ_U + WinogradReference::NNZ_V,
            dense_fraction: WinogradReference::dense_fraction(),
            compression_rate: WinogradReference::rate(cfg.bit_width),
            error: 0.0,
            status: "reference",
        });
    }
    rows
}

/// Seeded single-channel `k x k` kernel; each (seed, size) gets its own draw.
pub fn conv_kernel(cfg: &StudyConfig, seed: u64, kernel: usize) -> Kernel4 {
    let data = cfg.distribution.sample_vec(
        kernel * kernel,
        seed.wrapping_mul(1000).wrapping_add(kernel as u64),
    );
    Kernel4::new(1, 1, kernel, kernel, data).expect("sizes agree")
}

fn conv_trajectory(
    cfg: &StudyConfig,
    seed: u64,
    kernel: usize,
    stride: usize,
    tile: usize,
    form: Option<FormType>,
) -> Vec<ConvRow> {
    let weights = conv_kernel(cfg, seed, kernel);
    let mut spec = ConvSpec::new(1, 1, (kernel, kernel));
    spec.stride = (stride, stride);
    let (matrix, dense_fraction, layout) = match form {
        Some(f) => (
            reshape_kernel(&weights, f),
            1.0,
            format!("form{}", f.index()),
        ),
        None => {
            let (m, r) = unfold_tile(&spec, &weights, tsvd_core::TileSpec::new(tile, tile))
                .expect("valid geometry");
            (m, r, "unfold".to_owned())
        }
    };
    let (m, n) = matrix.shape();
    let dcfg = DecomposeConfig::new(1e-6)
        .with_q(QPolicy::Fixed(1))
        .with_max_rank(RankLimit::Fixed(usize::MAX));
    let row =
        |iteration: usize, rank: usize, nnz: usize, error: f64, status: &'static str| ConvRow {
            seed,
            kernel,
            stride,
            tile,
            layout: layout.clone(),
            iteration,
            rank,
            nnz,
            dense_fraction,
            compression_rate: rate_of(rank, nnz, m, n, cfg.bit_width, dense_fraction),
            error,
            status,
        };
    let mut pursuit = Pursuit::new(&matrix, &dcfg).expect("random kernels are nonzero");
    let mut out = Vec::new();
    loop {
        let rec = *pursuit.trace().last().expect("trace starts with a record");
        if rate_of(rec.rank, rec.nnz, m, n, cfg.bit_width, dense_fraction) > cfg.conv.max_rate {
            break;
        }
        out.push(row(rec.iter, rec.rank, rec.nnz, rec.spectral_rel, "ok"));
        match pursuit.step() {
            Ok(StepOutcome::Continue) => {}
            Ok(StepOutcome::Stopped(_)) => {
                let rec = *pursuit.trace().last().expect("trace starts with a record");
                if rec.rank > out.last().map_or(0, |r: &ConvRow| r.rank) {
                    out.push(row(rec.iter, rec.rank, rec.nnz, rec.spectral_rel, "ok"));
                }
                break;
            }
            Err(e) => {
                if let Some(last) = out.last_mut() {
                    last.status = status_of(&e);
                }
                break;
            }
        }
    }
    out
}

fn rate_of(
    rank: usize,
    nnz: usize,
    m: usize,
    n: usize,
    bit_width: u32,
    dense_fraction: f64,
) -> f64 {
    if rank == 0 {
        return 0.0;
    }
    let sparsity = nnz as f64 / (rank * (m + n)) as f64;
    sparse_aware_rate(rank, sparsity, bit_width, m, n, dense_fraction)
}

/// Lowest rate among points with error at most `err`.
pub fn envelope_rate<'a>(points: impl IntoIterator<Item = &'a ConvRow>, err: f64) -> Option<f64> {
    points
        .into_iter()
        .filter(|p| p.error <= err)
        .map(|p| p.compression_rate)
        .min_by(f64::total_cmp)
}

/// Lowest error among points with rate at most `rate`.
pub fn envelope_error<'a>(points: impl IntoIterator<Item = &'a ConvRow>, rate: f64) -> Option<f64> {
    points
        .into_iter()
        .filter(|p| p.compression_rate <= rate)
        .map(|p| p.error)
        .min_by(f64::total_cmp)
}

/// Mean envelope rates of two tile sizes at `err` over the seeds where both
/// reach it, with the number of such seeds.
pub fn mean_envelope_rates(
    rows: &[ConvRow],
    kernel: usize,
    stride: usize,
    tiles: (usize, usize),
    err: f64,
) -> Option<(f64, f64, usize)> {
    let mut seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    let select = |seed: u64, tile: usize| {
        rows.iter().filter(move |r| {
            r.seed == seed
                && r.kernel == kernel
                && r.stride == stride
                && r.tile == tile
                && r.layout != "winograd"
        })
    };
    let (mut a, mut b, mut count) = (0.0, 0.0, 0);
    for seed in seeds {
        if let (Some(x), Some(y)) = (
            envelope_rate(select(seed, tiles.0), err),
            envelope_rate(select(seed, tiles.1), err),
        ) {
            a += x;
            b += y;
            count += 1;
        }
    }
    (count > 0).then(|| (a / count as f64, b / count as f64, count))
}

/// Mean over seeds of the lowest unit-tile error at or below `rate`.
pub fn mean_envelope_error(
    rows: &[ConvRow],
    kernel: usize,
    stride: usize,
    rate: f64,
) -> Option<f64> {
    let mut seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    let errs: Vec<f64> = seeds
        .into_iter()
        .filter_map(|seed| {
            envelope_error(
                rows.iter().filter(|r| {
                    r.seed == seed
                        && r.kernel == kernel
                        && r.stride == stride
                        && r.tile == 1
                        && r.layout != "winograd"
                }),
                rate,
            )
        })
        .collect();
    (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64)
}

pub fn write_csv<T: Serialize>(out: impl Write, rows: &[T]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_jsonl<T: Serialize>(mut out: impl Write, rows: &[T]) -> std::io::Result<()> {
    for r in rows {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
