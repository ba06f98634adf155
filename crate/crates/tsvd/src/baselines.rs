//! Reference compression methods: truncated SVD, magnitude pruning and
//! uniform weight quantization.

use tsvd_core::{singular_values, DenseMatrix};

/// Relative spectral error of every truncation rank at once.
///
/// Entry `k` is `sigma_{k+1} / sigma_1`, the error of the best rank-`k`
/// approximation; the last entry (full rank) is zero.
pub fn truncated_svd_errors(w: &DenseMatrix) -> Vec<f64> {
    let s = singular_values(w);
    let top = s.first().copied().unwrap_or(0.0);
    let mut out: Vec<f64> = s
        .iter()
        .map(|x| if top > 0.0 { x / top } else { 0.0 })
        .collect();
    out.push(0.0);
    out
}

/// Smallest rank whose truncation error is at most `err`.
pub fn svd_rank_for_error(errors: &[f64], err: f64) -> usize {
    errors
        .iter()
        .position(|&e| e <= err)
        .unwrap_or(errors.len() - 1)
}

/// Keeps the `round(keep * len)` largest-magnitude entries; ties resolved by
/// position so the result is deterministic.
pub fn prune(w: &DenseMatrix, keep: f64) -> DenseMatrix {
    let data = w.as_slice();
    let count = ((keep.clamp(0.0, 1.0) * data.len() as f64).round() as usize).min(data.len());
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| data[b].abs().total_cmp(&data[a].abs()).then(a.cmp(&b)));
    let mut out = vec![0.0; data.len()];
    for &i in &order[..count] {
        out[i] = data[i];
    }
    DenseMatrix::new(w.rows(), w.cols(), out).expect("finite input")
}

/// Symmetric uniform quantization to `bits` bits: levels `-L..=L` times a
/// step, `L = 2^(bits-1) - 1`, with the step chosen to minimize squared
/// error. Widths at or above `full_width` return the input unchanged.
pub fn quantize(w: &DenseMatrix, bits: u32, full_width: u32) -> DenseMatrix {
    if bits >= full_width {
        return w.clone();
    }
    let levels = quant_levels(bits);
    let step = optimal_step(w.as_slice(), levels);
    let data = w
        .as_slice()
        .iter()
        .map(|&x| quantize_one(x, step, levels))
        .collect();
    DenseMatrix::new(w.rows(), w.cols(), data).expect("finite input")
}

fn quant_levels(bits: u32) -> f64 {
    assert!(bits >= 2, "quantization needs at least 2 bits");
    (2f64.powi(bits as i32 - 1) - 1.0).max(1.0)
}

fn quantize_one(x: f64, step: f64, levels: f64) -> f64 {
    if step == 0.0 {
        return 0.0;
    }
    (x / step).round().clamp(-levels, levels) * step
}

fn squared_error(data: &[f64], step: f64, levels: f64) -> f64 {
    data.iter()
        .map(|&x| (x - quantize_one(x, step, levels)).powi(2))
        .sum()
}

/// Grid search over the clipping point followed by Lloyd refinement.
fn optimal_step(data: &[f64], levels: f64) -> f64 {
    let max_abs = data.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if max_abs == 0.0 {
        return 0.0;
    }
    let mut best = (f64::INFINITY, max_abs / levels);
    for i in 1..=200 {
        let step = max_abs / levels * i as f64 / 200.0;
        let e = squared_error(data, step, levels);
        if e < best.0 {
            best = (e, step);
        }
    }
    let mut step = best.1;
    for _ in 0..50 {
        // Least-squares step for the current level assignment.
        let (mut num, mut den) = (0.0, 0.0);
        for &x in data {
            let q = (x / step).round().clamp(-levels, levels);
            num += x * q;
            den += q * q;
        }
        if den == 0.0 {
            break;
        }
        let next = num / den;
        if squared_error(data, next, levels) >= squared_error(data, step, levels) {
            break;
        }
        step = next;
    }
    step
}

/// Relative spectral error `||W - W_hat||_2 / ||W||_2` from exact SVDs.
pub fn spectral_error(w: &DenseMatrix, w_hat: &DenseMatrix) -> f64 {
    let diff = w.sub(w_hat).expect("same shape");
    let num = singular_values(&diff).first().copied().unwrap_or(0.0);
    let den = singular_values(w).first().copied().unwrap_or(0.0);
    num / den
}
