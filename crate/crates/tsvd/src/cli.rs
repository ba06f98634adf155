//! Command-line front end. Commands return a JSON summary for stdout or a
//! [`Failure`] carrying the process exit code.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::Serialize;
use serde_json::{json, Value};
use tsvd_core::cost::{selfconsistency_check, tsvd_cost, WinogradReference};
use tsvd_core::decompose::POWER_ITERATION_SEED;
use tsvd_core::ternarize::{gamma_bound, DEFAULT_THETA};
use tsvd_core::{AngleThreshold, CostReport, DecomposeConfig, ErrorNorm, RankLimit, TsvdError};

use crate::demo::{run_qat_demo, QatDemoConfig};
use crate::format::{read_fmat, read_tsvd, write_tsvd, FormatError, TsvdFile};
use crate::studies::{
    best_theta, conv_tile_study, matched_comparisons, mean_envelope_error, mean_envelope_rates,
    theta_sweep, tradeoff_study, write_csv, write_jsonl, Preset, StudyConfig,
};

pub const EXIT_IO: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NON_COMPRESSIVE: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "tsvd",
    version,
    about = "Ternary SVD factorization and cost modeling"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factor a .fmat matrix into a .tsvd file.
    Decompose(DecomposeArgs),
    /// Measure a .tsvd factorization against its source matrix.
    Eval(EvalArgs),
    /// Run one of the random-matrix or convolution studies.
    Study(StudyArgs),
    /// Tabulate the worst-case ternary cosine bound.
    Gamma(GammaArgs),
    /// Train a small linear regression through a TSVD weight.
    QatDemo(QatDemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Spectral,
    Frobenius,
}

impl From<NormArg> for ErrorNorm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Spectral => ErrorNorm::Spectral,
            NormArg::Frobenius => ErrorNorm::Frobenius,
        }
    }
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Relative error target.
    #[arg(long, default_value_t = 0.01)]
    pub tol: f64,
    /// Angle threshold in radians.
    #[arg(long, default_value_t = DEFAULT_THETA)]
    pub theta: f64,
    #[arg(long, value_enum, default_value_t = NormArg::Spectral)]
    pub norm: NormArg,
    /// Rank cap; defaults to the break-even rank.
    #[arg(long)]
    pub max_rank: Option<usize>,
    /// Seed of the power-iteration start vector.
    #[arg(long, default_value_t = POWER_ITERATION_SEED)]
    pub seed: u64,
    /// Exit with status 3 when the result does not compress.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub fact: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Bit width of the dense reference.
    #[arg(long = "d", default_value_t = 32)]
    pub bit_width: u32,
    /// Random probe vectors used to count operations.
    #[arg(long, default_value_t = 4)]
    pub probes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StudyKind {
    Tradeoff,
    Theta,
    Conv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Quick,
    Paper,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[arg(long, value_enum)]
    pub study: StudyKind,
    #[arg(long, value_enum, default_value_t = PresetArg::Quick)]
    pub preset: PresetArg,
    /// CSV output path.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional JSON-lines copy of the rows.
    #[arg(long)]
    pub jsonl: Option<PathBuf>,
    /// Comma-separated seeds replacing the preset's.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
}

#[derive(Debug, Args)]
pub struct GammaArgs {
    #[arg(long, default_value_t = 60, value_parser = clap::value_parser!(u64).range(1..))]
    pub n_max: u64,
    /// Emit JSON instead of a text table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct QatDemoArgs {
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, default_value_t = tsvd_core::qat::DEFAULT_ETA)]
    pub eta: f64,
    /// Step size; defaults to the inverse Lipschitz constant.
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.02)]
    pub tol: f64,
    /// Angle threshold in radians; defaults to 45 degrees.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Print a loss row every this many steps.
    #[arg(long, default_value_t = 10)]
    pub every: usize,
    #[arg(long)]
    pub json: bool,
}

/// A failed command: exit status plus a message for stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Self::new(EXIT_IO, e.to_string())
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::new(EXIT_IO, format!("{}: {e}", path.display()))
}

fn input_failure(e: TsvdError) -> Failure {
    Failure::new(EXIT_INPUT, e.to_string())
}

/// What a command produced: text for stdout, optional text for stderr and
/// the exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

impl Outcome {
    fn json(value: &impl Serialize, stderr: String) -> Self {
        Self {
            stdout: serde_json::to_string_pretty(value).expect("plain data serializes") + "\n",
            stderr,
            code: 0,
        }
    }
}

pub fn run(cli: Cli) -> Result<Outcome, Failure> {
    match cli.command {
        Command::Decompose(a) => cmd_decompose(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Study(a) => cmd_study(&a),
        Command::Gamma(a) => Ok(cmd_gamma(&a)),
        Command::QatDemo(a) => cmd_qat_demo(&a),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecomposeSummary {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub sparsity: f64,
    pub achieved_error: f64,
    pub error_norm: &'static str,
    pub compression_rate: f64,
    pub acceleration_rate: f64,
    pub iterations: usize,
    pub flagged_non_compressive: bool,
}

pub fn cmd_decompose(a: &DecomposeArgs) -> Result<Outcome, Failure> {
    let w = read_fmat(&a.input)?;
    let theta = AngleThreshold::new(a.theta).map_err(input_failure)?;
    let mut cfg = DecomposeConfig::new(a.tol)
        .with_theta(theta)
        .with_norm(a.norm.into());
    cfg.seed = a.seed;
    if let Some(k) = a.max_rank {
        cfg = cfg.with_max_rank(RankLimit::Fixed(k));
    }
    let d = tsvd_core::tsvd_decompose(&w, &cfg).map_err(input_failure)?;
    let f = &d.factorization;
    let (m, n) = f.shape();
    let cost = tsvd_cost(m, n, f.rank(), f.sparsity(), 32);
    let summary = DecomposeSummary {
        m,
        n,
        k: f.rank(),
        sparsity: f.sparsity(),
        achieved_error: d.achieved_error,
        error_norm: cfg.error_norm.name(),
        compression_rate: cost.compression_rate,
        acceleration_rate: cost.acceleration_rate,
        iterations: d.iterations,
        flagged_non_compressive: d.non_compressive(),
    };
    let file = TsvdFile::new(f.clone(), d.achieved_error, cfg.error_norm.name(), None);
    write_tsvd(&a.out, &file)?;
    let note = format!(
        "rank {} sparsity {:.4} {} error {:.5} compression {:.4} after {} iterations\n",
        summary.k,
        summary.sparsity,
        summary.error_norm,
        summary.achieved_error,
        summary.compression_rate,
        summary.iterations
    );
    let mut out = Outcome::json(&summary, note);
    if a.strict && summary.flagged_non_compressive {
        out.stderr.push_str("not compressive at this tolerance\n");
        out.code = EXIT_NON_COMPRESSIVE;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    pub adds: f64,
    pub muls: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub spectral_error: f64,
    pub frobenius_error: f64,
    pub recorded_error: f64,
    pub recorded_norm: String,
    pub within_recorded: bool,
    pub measured: CountReport,
    pub modeled: CostSummary,
    pub counts_match: bool,
    pub selfconsistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostSummary {
    pub bit_width: u32,
    pub adds: f64,
    pub muls: f64,
    pub equivalent_adds: f64,
    pub reference_adds: f64,
    pub compression_rate: f64,
    pub acceleration_rate: f64,
}

impl From<CostReport> for CostSummary {
    fn from(c: CostReport) -> Self {
        Self {
            bit_width: c.bit_width,
            adds: c.adds,
            muls: c.muls,
            equivalent_adds: c.equivalent_adds,
            reference_adds: c.reference_adds,
            compression_rate: c.compression_rate,
            acceleration_rate: c.acceleration_rate,
        }
    }
}

pub fn cmd_eval(a: &EvalArgs) -> Result<Outcome, Failure> {
    let file = read_tsvd(&a.fact)?;
    let w = read_fmat(&a.input)?;
    let f = &file.factorization;
    if w.shape() != f.shape() {
        return Err(Failure::new(
            EXIT_INPUT,
            format!(
                "matrix is {:?} but the factorization is {:?}",
                w.shape(),
                f.shape()
            ),
        ));
    }
    if a.bit_width < 2 {
        return Err(Failure::new(EXIT_INPUT, "bit width must be at least 2"));
    }
    let (m, n) = f.shape();
    let approx = f.reconstruct();
    let diff = w.sub(&approx).map_err(input_failure)?;
    let top = tsvd_core::singular_values(&w)
        .first()
        .copied()
        .unwrap_or(0.0);
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    let spectral_error = ratio(
        tsvd_core::singular_values(&diff)
            .first()
            .copied()
            .unwrap_or(0.0),
        top,
    );
    let frobenius_error = ratio(diff.frobenius_norm(), w.frobenius_norm());

    let modeled = tsvd_cost(m, n, f.rank(), f.sparsity(), a.bit_width);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut measured = CountReport {
        adds: 0.0,
        muls: 0.0,
    };
    let mut counts_match = true;
    for _ in 0..a.probes.max(1) {
        let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let (_, c) = f.apply(&x, a.bit_width).map_err(input_failure)?;
        counts_match &= c.adds == modeled.adds.round() && c.muls == modeled.muls;
        measured = CountReport {
            adds: c.adds,
            muls: c.muls,
        };
    }
    let recorded = match file.header.error_norm.as_str() {
        "frobenius" => frobenius_error,
        _ => spectral_error,
    };
    // The stored singular values are rounded to f32.
    let within_recorded = recorded <= file.header.tol_achieved * (1.0 + 1e-4) + 1e-6;
    let report = EvalReport {
        m,
        n,
        k: f.rank(),
        spectral_error,
        frobenius_error,
        recorded_error: file.header.tol_achieved,
        recorded_norm: file.header.error_norm.clone(),
        within_recorded,
        measured,
        modeled: modeled.into(),
        counts_match,
        selfconsistent: selfconsistency_check(m, n, f.rank(), f.sparsity(), a.bit_width),
    };
    let note = format!(
        "spectral error {:.5}, frobenius error {:.5}, acceleration {:.3}x at d={}\n",
        spectral_error, frobenius_error, modeled.acceleration_rate, a.bit_width
    );
    Ok(Outcome::json(&report, note))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_failure(path, e))
}

fn emit<T: Serialize>(a: &StudyArgs, rows: &[T]) -> Result<(), Failure> {
    let mut out = create(&a.out)?;
    write_csv(&mut out, rows).map_err(|e| io_failure(&a.out, e))?;
    out.flush().map_err(|e| io_failure(&a.out, e))?;
    if let Some(path) = &a.jsonl {
        let mut out = create(path)?;
        write_jsonl(&mut out, rows).map_err(|e| io_failure(path, e))?;
        out.flush().map_err(|e| io_failure(path, e))?;
    }
    Ok(())
}

pub fn cmd_study(a: &StudyArgs) -> Result<Outcome, Failure> {
    let mut cfg = StudyConfig::preset(match a.preset {
        PresetArg::Quick => Preset::Quick,
        PresetArg::Paper => Preset::Paper,
    });
    if let Some(seeds) = &a.seeds {
        if seeds.is_empty() {
            return Err(Failure::new(EXIT_INPUT, "seed list is empty"));
        }
        cfg.seeds = seeds.clone();
        cfg.conv.seeds = seeds.clone();
    }
    let (rows, summary) = match a.study {
        StudyKind::Tradeoff => {
            let rows = tradeoff_study(&cfg);
            emit(a, &rows)?;
            let per_seed: Vec<Value> = cfg
                .seeds
                .iter()
                .map(|&seed| {
                    let own: Vec<_> = rows.iter().filter(|r| r.seed == seed).cloned().collect();
                    json!({ "seed": seed, "matched": matched_comparisons(&cfg.matrix(seed), &own, cfg.bit_width) })
                })
                .collect();
            (rows.len(), json!({ "per_seed": per_seed }))
        }
        StudyKind::Theta => {
            let rows = theta_sweep(&cfg);
            emit(a, &rows)?;
            let best: Vec<Value> = cfg
                .theta_tolerances
                .iter()
                .map(|&tol| {
                    let b = best_theta(&rows, tol);
                    json!({ "tol": tol, "theta_deg": b.map(|x| x.0), "compression_rate": b.map(|x| x.1) })
                })
                .collect();
            (rows.len(), json!({ "best": best }))
        }
        StudyKind::Conv => {
            let rows = conv_tile_study(&cfg);
            emit(a, &rows)?;
            let errors = [0.04, 0.06, 0.08, 0.1, 0.15, 0.2];
            let tiles: Vec<Value> = errors
                .iter()
                .map(|&e| {
                    let r = mean_envelope_rates(&rows, 3, 1, (1, 2), e);
                    json!({ "error": e, "tile1": r.map(|x| x.0), "tile2": r.map(|x| x.1), "seeds": r.map(|x| x.2) })
                })
                .collect();
            let wino = WinogradReference::rate(cfg.bit_width);
            (
                rows.len(),
                json!({
                    "kernel3_tile1_vs_tile2": tiles,
                    "winograd_rate": wino,
                    "kernel3_error_at_winograd_rate": mean_envelope_error(&rows, 3, 1, wino),
                }),
            )
        }
    };
    let value = json!({
        "study": format!("{:?}", a.study).to_lowercase(),
        "rows": rows,
        "out": a.out.display().to_string(),
        "summary": summary,
    });
    Ok(Outcome::json(
        &value,
        format!("wrote {rows} rows to {}\n", a.out.display()),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaRow {
    pub n: usize,
    pub gamma: f64,
    pub at_least_cos_45: bool,
}

pub fn gamma_table(n_max: usize) -> Vec<GammaRow> {
    let c = std::f64::consts::FRAC_1_SQRT_2;
    (1..=n_max)
        .map(|n| {
            let gamma = gamma_bound(n);
            GammaRow {
                n,
                gamma,
                at_least_cos_45: gamma >= c,
            }
        })
        .collect()
}

pub fn cmd_gamma(a: &GammaArgs) -> Outcome {
    let rows = gamma_table(a.n_max as usize);
    // Marked only when the table reaches the first length that falls short.
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let boundary = rows
        .iter()
        .find(|r| r.at_least_cos_45 && gamma_bound(r.n + 1) < c)
        .map(|r| r.n);
    if a.json {
        return Outcome::json(
            &json!({ "rows": rows, "last_at_least_cos_45": boundary }),
            String::new(),
        );
    }
    let mut out = String::from("n\tgamma\n");
    for r in &rows {
        let mark = if Some(r.n) == boundary {
            "\t<- last with gamma >= cos(pi/4)"
        } else {
            ""
        };
        out.push_str(&format!("{}\t{:.10}{}\n", r.n, r.gamma, mark));
    }
    Outcome {
        stdout: out,
        stderr: String::new(),
        code: 0,
    }
}

pub fn cmd_qat_demo(a: &QatDemoArgs) -> Result<Outcome, Failure> {
    let mut cfg = QatDemoConfig {
        steps: a.steps,
        eta: a.eta,
        lr: a.lr,
        noise: a.noise,
        tol: a.tol,
        seed: a.seed,
        ..QatDemoConfig::default()
    };
    if let Some(t) = a.theta {
        cfg.theta = AngleThreshold::new(t).map_err(input_failure)?;
    }
    let report = run_qat_demo(&cfg).map_err(input_failure)?;
    let note = format!(
        "final loss {:.6} vs least squares {:.6} (ratio {:.4})\n",
        report.final_loss, report.optimum_loss, report.ratio
    );
    if a.json {
        return Ok(Outcome::json(&report, note));
    }
    let every = a.every.max(1);
    let mut out = String::from("step\tloss\trank\tkept\n");
    for l in report
        .log
        .iter()
        .filter(|l| l.step % every == 0 || l.step == a.steps)
    {
        out.push_str(&format!(
            "{}\t{:.6}\t{}\t{}\n",
            l.step, l.loss, l.rank, l.kept
        ));
    }
    out.push_str(&format!(
        "optimum\t{:.6}\nratio\t{:.6}\n",
        report.optimum_loss, report.ratio
    ));
    Ok(Outcome {
        stdout: out,
        stderr: note,
        code: 0,
    })
}
