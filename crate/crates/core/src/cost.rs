//! Instruction accounting in equivalent additions.
//!
//! One `d`-bit multiply is priced as `d - 2` additions, so a dense
//! multiply-accumulate costs `d - 1`. Rates compare a method's equivalent
//! additions against the dense `(d - 1) M N` of the original layer.

/// Bit width used by the random-matrix studies (float32).
pub const DEFAULT_BIT_WIDTH: u32 = 32;

/// Empirical pooled sparsity of TSVD factors at the default angle.
pub const TYPICAL_SPARSITY: f64 = 0.29;

/// Counted or modeled cost of one matrix-vector product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostReport {
    pub muls: f64,
    pub adds: f64,
    pub equivalent_adds: f64,
    /// Equivalent additions of the dense reference, `(d - 1) M N`.
    pub reference_adds: f64,
    pub compression_rate: f64,
    pub acceleration_rate: f64,
    pub bit_width: u32,
    pub sparsity: f64,
    pub rank: usize,
}

impl CostReport {
    /// Builds a report from raw counts against an `m x n` dense reference.
    pub fn from_counts(
        adds: f64,
        muls: f64,
        m: usize,
        n: usize,
        bit_width: u32,
        sparsity: f64,
        rank: usize,
    ) -> Self {
        let equivalent_adds = adds + muls * mul_price(bit_width);
        let reference_adds = dense_adds(m, n, bit_width);
        Self::with_reference(
            adds,
            muls,
            equivalent_adds,
            reference_adds,
            bit_width,
            sparsity,
            rank,
        )
    }

    fn with_reference(
        adds: f64,
        muls: f64,
        equivalent_adds: f64,
        reference_adds: f64,
        bit_width: u32,
        sparsity: f64,
        rank: usize,
    ) -> Self {
        let compression_rate = equivalent_adds / reference_adds;
        Self {
            muls,
            adds,
            equivalent_adds,
            reference_adds,
            compression_rate,
            acceleration_rate: 1.0 / compression_rate,
            bit_width,
            sparsity,
            rank,
        }
    }
}

fn mul_price(bit_width: u32) -> f64 {
    f64::from(bit_width) - 2.0
}

fn dense_adds(m: usize, n: usize, bit_width: u32) -> f64 {
    (f64::from(bit_width) - 1.0) * m as f64 * n as f64
}

/// Modeled cost of a rank-`rank` TSVD with pooled sparsity `sparsity`:
/// `rank (d - 2) + sparsity * rank * (m + n)` equivalent additions.
pub fn tsvd_cost(m: usize, n: usize, rank: usize, sparsity: f64, bit_width: u32) -> CostReport {
    let adds = sparsity * rank as f64 * (m + n) as f64;
    CostReport::from_counts(adds, rank as f64, m, n, bit_width, sparsity, rank)
}

/// Break-even rank `(d - 1) M N / (d + r (M + N) - 2)` at which TSVD costs as
/// much as the dense product.
pub fn critical_rank(m: usize, n: usize, bit_width: u32, sparsity: f64) -> f64 {
    let d = f64::from(bit_width);
    (d - 1.0) * m as f64 * n as f64 / (d + sparsity * (m + n) as f64 - 2.0)
}

/// A compression method with its parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineSpec {
    Origin,
    /// Truncated SVD of the given rank.
    Svd {
        rank: usize,
    },
    /// Magnitude pruning keeping the given fraction of weights.
    Prune {
        keep: f64,
    },
    /// Uniform weight quantization to the given bit width.
    Quant {
        bits: u32,
    },
    Tsvd {
        rank: usize,
        sparsity: f64,
    },
}

impl BaselineSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Origin => "origin",
            Self::Svd { .. } => "svd",
            Self::Prune { .. } => "prune",
            Self::Quant { .. } => "quant",
            Self::Tsvd { .. } => "tsvd",
        }
    }
}

/// Cost translation of each method into equivalent additions.
///
/// Multiply-accumulates of origin, SVD and pruning are counted as one add
/// plus one multiply; a `b`-bit quantized product is priced at `b - 1`
/// additions with no multiply.
pub fn baseline_cost(spec: BaselineSpec, m: usize, n: usize, bit_width: u32) -> CostReport {
    let mn = m as f64 * n as f64;
    match spec {
        BaselineSpec::Origin => CostReport::from_counts(mn, mn, m, n, bit_width, 1.0, 0),
        BaselineSpec::Svd { rank } => {
            let macs = rank as f64 * (m + n) as f64;
            CostReport::from_counts(macs, macs, m, n, bit_width, 1.0, rank)
        }
        BaselineSpec::Prune { keep } => {
            let macs = keep * mn;
            CostReport::from_counts(macs, macs, m, n, bit_width, keep, 0)
        }
        BaselineSpec::Quant { bits } => {
            let adds = (f64::from(bits) - 1.0) * mn;
            CostReport::from_counts(adds, 0.0, m, n, bit_width, 1.0, 0)
        }
        BaselineSpec::Tsvd { rank, sparsity } => tsvd_cost(m, n, rank, sparsity, bit_width),
    }
}

/// Compression rate against a reference that already has only a fraction
/// `dense_fraction` of nonzeros, as for unfolded convolution tiles.
pub fn sparse_aware_rate(
    rank: usize,
    sparsity: f64,
    bit_width: u32,
    m: usize,
    n: usize,
    dense_fraction: f64,
) -> f64 {
    let cost = tsvd_cost(m, n, rank, sparsity, bit_width);
    cost.equivalent_adds / (dense_fraction * cost.reference_adds)
}

/// Checks that TSVD's cost equals 2-bit quantization of its pruned factors
/// (`M K + K N` weights kept at rate `sparsity`) plus `K` full multiplies.
pub fn selfconsistency_check(
    m: usize,
    n: usize,
    rank: usize,
    sparsity: f64,
    bit_width: u32,
) -> bool {
    let factor_weights = rank * (m + n);
    // Quantize-after-prune on a 1 x (MK + KN) layer: keep fraction times (2 - 1).
    let pruned = baseline_cost(BaselineSpec::Prune { keep: sparsity }, 1, factor_weights, 2);
    let ternary_adds = pruned.adds * (2.0 - 1.0);
    let scaling = rank as f64 * mul_price(bit_width);
    let direct = tsvd_cost(m, n, rank, sparsity, bit_width).equivalent_adds;
    let composed = ternary_adds + scaling;
    (direct - composed).abs() <= 1e-12 * direct.abs().max(1.0)
}

/// Winograd F(2x2, 3x3) read as a lossless TSVD of the 2x2-output tile.
///
/// The unfolded tile is `M = 4` outputs by `N = 16` inputs with 36 structural
/// nonzeros. Winograd factors it as `(A^T (x) A^T) diag(.) (B^T (x) B^T)`:
/// rank 16, `nnz(U) = 36`, `nnz(V) = 64`. Counting one add per nonzero, as
/// for every TSVD point, gives 100 adds and 16 multiplies.
///
/// The conventional hand count of the transforms is lower: the input
/// transform takes 8 one-dimensional `B^T` passes of 4 adds (32), the output
/// transform 4 + 2 passes of `A^T` at 4 adds (24), so 56 adds and 16
/// multiplies. [`WinogradReference::hand_count_rate`] reports that variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WinogradReference;

impl WinogradReference {
    pub const OUTPUTS: usize = 4;
    pub const INPUTS: usize = 16;
    pub const RANK: usize = 16;
    pub const NNZ_U: usize = 36;
    pub const NNZ_V: usize = 64;
    pub const HAND_COUNT_ADDS: usize = 56;
    pub const TILE_NNZ: usize = 36;

    pub fn sparsity() -> f64 {
        (Self::NNZ_U + Self::NNZ_V) as f64 / (Self::RANK * (Self::OUTPUTS + Self::INPUTS)) as f64
    }

    pub fn dense_fraction() -> f64 {
        Self::TILE_NNZ as f64 / (Self::OUTPUTS * Self::INPUTS) as f64
    }

    /// Sparse-aware rate with one add per factor nonzero.
    pub fn rate(bit_width: u32) -> f64 {
        sparse_aware_rate(
            Self::RANK,
            Self::sparsity(),
            bit_width,
            Self::OUTPUTS,
            Self::INPUTS,
            Self::dense_fraction(),
        )
    }

    /// Sparse-aware rate with the hand-counted transform additions.
    pub fn hand_count_rate(bit_width: u32) -> f64 {
        let eq = Self::HAND_COUNT_ADDS as f64 + Self::RANK as f64 * mul_price(bit_width);
        eq / (Self::dense_fraction() * dense_adds(Self::OUTPUTS, Self::INPUTS, bit_width))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_hand_case() {
        let c = tsvd_cost(4, 4, 2, 0.5, 32);
        assert_eq!(c.adds, 8.0);
        assert_eq!(c.muls, 2.0);
        assert_eq!(c.equivalent_adds, 68.0);
        assert_eq!(c.reference_adds, 496.0);
        assert!((c.acceleration_rate - 496.0 / 68.0).abs() < 1e-12);
        assert!((c.acceleration_rate - 7.29).abs() < 0.005);
    }

    #[test]
    fn critical_rank_values() {
        assert_eq!(critical_rank(6, 3, 2, 1.0), 2.0);
        assert!((critical_rank(512, 256, 32, 0.29) - 16077.9994).abs() < 1e-4);
        let k = critical_rank(100, 100, 32, 0.0);
        assert!((k - 31.0 * 10000.0 / 30.0).abs() < 1e-9);
    }

    #[test]
    fn two_bit_width_drops_multiplies() {
        let c = tsvd_cost(10, 20, 3, 0.4, 2);
        assert!((c.compression_rate - 0.4 * 3.0 * 30.0 / 200.0).abs() < 1e-15);
    }

    #[test]
    fn baseline_rows() {
        let q = baseline_cost(BaselineSpec::Quant { bits: 2 }, 64, 32, 32);
        assert!((q.compression_rate - 1.0 / 31.0).abs() < 1e-15);
        let p = baseline_cost(BaselineSpec::Prune { keep: 0.5 }, 64, 32, 32);
        assert!((p.acceleration_rate - 2.0).abs() < 1e-12);
        let s = baseline_cost(BaselineSpec::Svd { rank: 4 }, 12, 6, 32);
        assert!((s.compression_rate - 1.0).abs() < 1e-15);
        let o = baseline_cost(BaselineSpec::Origin, 7, 9, 16);
        assert_eq!(o.compression_rate, 1.0);
        assert_eq!(o.equivalent_adds, o.adds + o.muls * 14.0);
    }

    #[test]
    fn winograd_reference_point() {
        assert!((WinogradReference::sparsity() - 100.0 / 320.0).abs() < 1e-15);
        assert!((WinogradReference::dense_fraction() - 0.5625).abs() < 1e-15);
        assert!((WinogradReference::rate(32) - 580.0 / 1116.0).abs() < 1e-12);
        assert!((WinogradReference::hand_count_rate(32) - 536.0 / 1116.0).abs() < 1e-12);
    }

    #[test]
    fn sparse_rate_reduces_to_plain_rate() {
        let plain = tsvd_cost(8, 9, 5, 0.3, 32).compression_rate;
        assert_eq!(sparse_aware_rate(5, 0.3, 32, 8, 9, 1.0), plain);
        let r = sparse_aware_rate(5, 0.3, 32, 8, 9, 0.75);
        assert!((r - plain * 4.0 / 3.0).abs() < 1e-12);
    }
}
