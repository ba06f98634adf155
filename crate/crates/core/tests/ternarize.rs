use proptest::prelude::*;
use tsvd_core::ternarize::{cosine_to, gamma_bound, largest_n_with_gamma_at_least, prefix_cosines};
use tsvd_core::{ternarize, AngleThreshold, TernaryVector, TsvdError};

/// Smallest support size of any ternary vector within the angle, by
/// enumerating all `3^N` candidates.
fn brute_force_min_nnz(x: &[f64], cos_theta: f64) -> Option<usize> {
    let n = x.len();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut best: Option<usize> = None;
    let mut code = vec![0i8; n];
    for mut idx in 0..3usize.pow(n as u32) {
        let mut nnz = 0;
        let mut dot = 0.0;
        for (c, &xi) in code.iter_mut().zip(x) {
            *c = (idx % 3) as i8 - 1;
            idx /= 3;
            if *c != 0 {
                nnz += 1;
                dot += f64::from(*c) * xi;
            }
        }
        if nnz == 0 {
            continue;
        }
        let cos = dot / (norm * (nnz as f64).sqrt());
        if cos >= cos_theta && best.is_none_or(|b| nnz < b) {
            best = Some(nnz);
        }
    }
    best
}

fn small_vector() -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![
        prop::collection::vec(-10.0f64..10.0, 1..=8),
        // Small integers produce magnitude ties at the cut.
        prop::collection::vec((-3i32..=3).prop_map(f64::from), 1..=8),
    ]
    .prop_filter("nonzero", |x| x.iter().any(|&v| v != 0.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn matches_exhaustive_search(x in small_vector(), degrees in 5.0f64..85.0) {
        let theta = AngleThreshold::from_degrees(degrees).unwrap();
        let oracle = brute_force_min_nnz(&x, theta.cos_theta());
        match ternarize(&x, &theta) {
            Ok(t) => {
                let k = oracle.expect("oracle finds a vector whenever the algorithm does");
                prop_assert!(cosine_to(&x, &t) >= theta.cos_theta() - 1e-12);
                // Sign-matched and supported on the top magnitudes.
                let cut = {
                    let mut m: Vec<f64> = x.iter().map(|v| v.abs()).collect();
                    m.sort_by(|a, b| b.total_cmp(a));
                    m[k - 1]
                };
                for (&xi, &ti) in x.iter().zip(t.as_slice()) {
                    if xi.abs() >= cut {
                        prop_assert_eq!(ti, if xi >= 0.0 { 1 } else { -1 });
                    } else {
                        prop_assert_eq!(ti, 0);
                    }
                }
                // Strictly larger than the optimum only through ties at the cut.
                let above = x.iter().filter(|v| v.abs() > cut).count();
                prop_assert!(above < k && k <= t.nnz());
            }
            Err(TsvdError::NoTernaryWithinTheta { .. }) => prop_assert_eq!(oracle, None),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn scale_invariant(x in prop::collection::vec(-5.0f64..5.0, 1..40), scale in 1e-3f64..1e3) {
        prop_assume!(x.iter().any(|&v| v != 0.0));
        let theta = AngleThreshold::from_degrees(45.0).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| v * scale).collect();
        prop_assert_eq!(ternarize(&x, &theta).unwrap(), ternarize(&scaled, &theta).unwrap());
        let flipped: Vec<f64> = x.iter().map(|v| -v).collect();
        let t = ternarize(&x, &theta).unwrap();
        let neg: Vec<i8> = t.as_slice().iter().map(|v| -v).collect();
        // Negation flips signs except where a kept zero maps to +1.
        if x.iter().all(|&v| v != 0.0) {
            prop_assert_eq!(ternarize(&flipped, &theta).unwrap(), TernaryVector::new(neg).unwrap());
        }
    }

    #[test]
    fn gamma_guarantees_existence(x in prop::collection::vec(-1.0f64..1.0, 1..=55)) {
        prop_assume!(x.iter().any(|&v| v != 0.0));
        let theta = AngleThreshold::from_degrees(45.0).unwrap();
        let t = ternarize(&x, &theta).unwrap();
        prop_assert!(cosine_to(&x, &t) >= theta.cos_theta() - 1e-12);
        let best = prefix_cosines(&x).into_iter().fold(0.0, f64::max);
        prop_assert!(best >= gamma_bound(x.len()) - 1e-12);
    }
}

#[test]
fn gamma_table_landmarks() {
    assert_eq!(gamma_bound(1), 1.0);
    let closed = 1.0 / (1.0 + (2f64.sqrt() - 1.0).powi(2)).sqrt();
    assert!((gamma_bound(2) - closed).abs() < 1e-12);
    assert!((gamma_bound(2) - 0.923_879_532_5).abs() < 1e-9);
    assert_eq!(
        largest_n_with_gamma_at_least(std::f64::consts::FRAC_1_SQRT_2, 1000),
        Some(55)
    );
    assert!((1..200).all(|n| gamma_bound(n + 1) < gamma_bound(n)));
}

#[test]
fn zero_and_non_finite_inputs() {
    let theta = AngleThreshold::default();
    assert!(matches!(
        ternarize(&[0.0, 0.0], &theta),
        Err(TsvdError::ZeroVector)
    ));
    assert!(matches!(
        ternarize(&[1.0, f64::NAN], &theta),
        Err(TsvdError::NonFinite { index: 1 })
    ));
}

#[test]
fn hand_cases() {
    let theta = AngleThreshold::from_degrees(45.0).unwrap();
    assert_eq!(
        ternarize(&[3.0, -0.1, 0.2], &theta).unwrap().as_slice(),
        &[1, 0, 0]
    );
    assert_eq!(
        ternarize(&[1.0, -1.0, 1.0, -1.0], &theta)
            .unwrap()
            .as_slice(),
        &[1, -1, 1, -1]
    );
}
