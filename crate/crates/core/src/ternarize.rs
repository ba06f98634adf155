//! Angle-constrained ternarization of real vectors.
//!
//! The sparsest ternary vector within angle `theta` of `x` is sign-matched
//! to `x` and supported on the largest magnitudes of `x`, so only the `N`
//! magnitude prefixes need to be tested instead of all `3^N` candidates.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::error::{Result, TsvdError};
use crate::ternary::TernaryVector;

/// Default angle threshold in radians (about 33 degrees).
pub const DEFAULT_THETA: f64 = 0.576;

/// An angle in `(0, pi/2)` together with its cosine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleThreshold {
    theta: f64,
    cos_theta: f64,
}

impl AngleThreshold {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < FRAC_PI_2) {
            return Err(TsvdError::InvalidConfig("theta must lie in (0, pi/2)"));
        }
        Ok(Self {
            theta,
            cos_theta: libm::cos(theta),
        })
    }

    pub fn from_degrees(degrees: f64) -> Result<Self> {
        Self::new(degrees.to_radians())
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn cos_theta(&self) -> f64 {
        self.cos_theta
    }
}

impl Default for AngleThreshold {
    fn default() -> Self {
        Self::new(DEFAULT_THETA).expect("default theta is in range")
    }
}

/// Normalized prefix sums `c[k-1] = (sum of the k largest |x_i|) / (||x|| sqrt(k))`.
///
/// Entry `k-1` is the cosine between `x` and the sign-matched ternary vector
/// supported on the top-`k` magnitudes.
pub fn prefix_cosines(x: &[f64]) -> Vec<f64> {
    let norm = libm::sqrt(x.iter().map(|v| v * v).sum::<f64>());
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    mags.iter()
        .enumerate()
        .map(|(i, m)| {
            acc += m;
            acc / (norm * libm::sqrt((i + 1) as f64))
        })
        .collect()
}

/// Ternarizes `x` to the sparsest sign-matched ternary vector whose angle to
/// `x` is at most `theta`.
///
/// The smallest prefix `k` with `c[k-1] >= cos(theta)` fixes the cut
/// magnitude `o[k-1]`; every entry with `|x_i| >= o[k-1]` is kept, so ties
/// at the cut are all retained. Zero entries of `x` map to `+1` if kept.
pub fn ternarize(x: &[f64], theta: &AngleThreshold) -> Result<TernaryVector> {
    if let Some(index) = x.iter().position(|v| !v.is_finite()) {
        return Err(TsvdError::NonFinite { index });
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(TsvdError::ZeroVector);
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let cosines = prefix_cosines(x);
    let cos_theta = theta.cos_theta();
    let Some(cut) = cosines.iter().position(|&c| c >= cos_theta) else {
        let best_cos = cosines.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return Err(TsvdError::NoTernaryWithinTheta {
            len: x.len(),
            best_cos,
            cos_theta,
        });
    };
    let threshold = mags[cut];
    let entries = x
        .iter()
        .map(|&v| match (v.abs() < threshold, v >= 0.0) {
            (true, _) => 0,
            (false, true) => 1,
            (false, false) => -1,
        })
        .collect();
    Ok(TernaryVector::from_trusted(entries))
}

/// Cosine between a real vector and a ternary vector.
pub fn cosine_to(x: &[f64], t: &TernaryVector) -> f64 {
    let norm = libm::sqrt(x.iter().map(|v| v * v).sum::<f64>());
    t.dot(x) / (norm * t.norm())
}

/// Lower bound on the best cosine between any unit vector of length `n` and
/// a ternary vector: `1 / sqrt(sum_{k=1..n} (sqrt(k) - sqrt(k-1))^2)`.
///
/// Returns `+inf` for `n == 0`.
pub fn gamma_bound(n: usize) -> f64 {
    let mut sum = 0.0;
    let mut prev = 0.0;
    for k in 1..=n {
        let cur = libm::sqrt(k as f64);
        let d = cur - prev;
        sum += d * d;
        prev = cur;
    }
    1.0 / libm::sqrt(sum)
}

/// Largest `n <= n_max` with `gamma_bound(n) >= c`, if any.
pub fn largest_n_with_gamma_at_least(c: f64, n_max: usize) -> Option<usize> {
    // gamma_bound is strictly decreasing, so scan until it drops below c.
    let mut sum = 0.0;
    let mut prev = 0.0;
    let mut last = None;
    for k in 1..=n_max {
        let cur = libm::sqrt(k as f64);
        let d = cur - prev;
        sum += d * d;
        prev = cur;
        if 1.0 / libm::sqrt(sum) >= c {
            last = Some(k);
        } else {
            break;
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::FRAC_PI_4;

    fn deg33() -> AngleThreshold {
        AngleThreshold::from_degrees(33.0).unwrap()
    }

    #[test]
    fn axis_vector() {
        let t = ternarize(&[1.0, 0.0, 0.0], &deg33()).unwrap();
        assert_eq!(t.as_slice(), &[1, 0, 0]);
    }

    #[test]
    fn first_prefix_passes() {
        let t = ternarize(&[0.9, -0.43589], &deg33()).unwrap();
        assert_eq!(t.as_slice(), &[1, 0]);
        let c = prefix_cosines(&[0.9, -0.43589]);
        assert!((c[0] - 0.9).abs() < 1e-5);
        assert!((c[1] - 0.94462).abs() < 1e-5);
    }

    #[test]
    fn second_prefix_passes() {
        let t = ternarize(&[0.8, 0.6], &deg33()).unwrap();
        assert_eq!(t.as_slice(), &[1, 1]);
        let c = prefix_cosines(&[0.8, 0.6]);
        assert!((c[0] - 0.8).abs() < 1e-12);
        assert!((c[1] - 0.98995).abs() < 1e-5);
    }

    #[test]
    fn tight_threshold_has_no_solution() {
        let theta = AngleThreshold::from_degrees(10.0).unwrap();
        assert!((theta.cos_theta() - 0.98481).abs() < 1e-5);
        match ternarize(&[0.9, -0.43589], &theta) {
            Err(TsvdError::NoTernaryWithinTheta { len: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ties_at_cut_are_kept() {
        // k = 2 passes; the tied third magnitude is kept as well.
        let x = [0.6, 0.6, -0.6, 0.1];
        let t = ternarize(&x, &AngleThreshold::from_degrees(40.0).unwrap()).unwrap();
        assert_eq!(t.as_slice(), &[1, 1, -1, 0]);
    }

    #[test]
    fn zero_entries_are_never_kept() {
        let flat = [1.0, 0.0];
        let t = ternarize(&flat, &AngleThreshold::from_degrees(80.0).unwrap()).unwrap();
        assert_eq!(t.as_slice(), &[1, 0]);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert_eq!(
            ternarize(&[0.0, 0.0], &deg33()).unwrap_err(),
            TsvdError::ZeroVector
        );
        assert_eq!(
            ternarize(&[1.0, f64::INFINITY], &deg33()).unwrap_err(),
            TsvdError::NonFinite { index: 1 }
        );
        assert!(AngleThreshold::new(0.0).is_err());
        assert!(AngleThreshold::new(FRAC_PI_2).is_err());
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma_bound(1), 1.0);
        let closed = 1.0 / libm::sqrt(4.0 - 2.0 * core::f64::consts::SQRT_2);
        assert!((gamma_bound(2) - closed).abs() < 1e-12);
        assert!((gamma_bound(2) - libm::cos(core::f64::consts::PI / 8.0)).abs() < 1e-12);
        let g: vec::Vec<f64> = (1..200).map(gamma_bound).collect();
        assert!(g.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn gamma_boundary_at_55() {
        let c = libm::cos(FRAC_PI_4);
        assert!(gamma_bound(55) >= c);
        assert!(gamma_bound(56) < c);
        assert_eq!(largest_n_with_gamma_at_least(c, 1000), Some(55));
    }
}
