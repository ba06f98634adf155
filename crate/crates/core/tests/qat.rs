use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tsvd_core::qat::{qat_recompute, QatState};
use tsvd_core::{tsvd_decompose, AngleThreshold, DecomposeConfig, DenseMatrix, TernaryMatrix};

fn cfg(tol: f64) -> DecomposeConfig {
    DecomposeConfig::new(tol).with_theta(AngleThreshold::from_degrees(45.0).unwrap())
}

fn random(rng: &mut StdRng, m: usize, n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(m, n, |_, _| rng.random::<f64>() * 2.0 - 1.0).unwrap()
}

#[test]
fn infinite_eta_is_a_cold_start() {
    let mut rng = StdRng::seed_from_u64(1);
    for _ in 0..20 {
        let w = random(&mut rng, 12, 8);
        let old = tsvd_decompose(&w, &cfg(0.1)).unwrap().factorization;
        let w_new = w.add_scaled(0.1, &random(&mut rng, 12, 8)).unwrap();
        let report = qat_recompute(&w_new, old.u(), old.v(), f64::INFINITY, &cfg(0.1)).unwrap();
        assert_eq!(report.kept(), 0);
        let cold = tsvd_decompose(&w_new, &cfg(0.1)).unwrap();
        assert_eq!(report.decomposition.factorization, cold.factorization);
        assert!((report.decomposition.achieved_error - cold.achieved_error).abs() <= 0.1);
    }
}

#[test]
fn mask_follows_weights_and_reference() {
    let mut rng = StdRng::seed_from_u64(2);
    for eta in [0.0, 0.5, 1.0, 2.0] {
        let w = random(&mut rng, 10, 10);
        let old = tsvd_decompose(&w, &cfg(0.2)).unwrap().factorization;
        let w_new = w.add_scaled(0.2, &random(&mut rng, 10, 10)).unwrap();
        let r = qat_recompute(&w_new, old.u(), old.v(), eta, &cfg(0.2)).unwrap();
        assert_eq!(r.keep.len(), old.rank());
        for (k, &kept) in r.keep.iter().enumerate() {
            let weight = r.refit_s[k].abs()
                * ((old.u().column(k).nnz() * old.v().row(k).nnz()) as f64).sqrt();
            assert!((weight - r.weights[k]).abs() <= 1e-12 * weight.max(1.0));
            assert_eq!(kept, weight > eta * r.reference);
        }
        assert!(r.decomposition.achieved_error <= 0.2 || !r.decomposition.converged());
    }
}

#[test]
fn zero_step_keeps_the_factorization() {
    let mut rng = StdRng::seed_from_u64(3);
    let w = random(&mut rng, 8, 6);
    let state = QatState::new(w.clone(), 1.0, cfg(0.05)).unwrap();
    let (next, report) = state.ste_step(&DenseMatrix::zeros(8, 6), 0.1).unwrap();
    assert_eq!(next.weight, w);
    assert_eq!(report.keep.len(), state.factorization.rank());
    assert!(next.factorization.rank() >= report.kept());
    assert!(report.decomposition.achieved_error <= 0.05);
}

#[test]
fn empty_factors_start_from_scratch() {
    let mut rng = StdRng::seed_from_u64(4);
    let w = random(&mut rng, 6, 6);
    let r = qat_recompute(
        &w,
        &TernaryMatrix::zeros(6, 0),
        &TernaryMatrix::zeros(0, 6),
        1.0,
        &cfg(0.1),
    )
    .unwrap();
    assert_eq!(r.kept(), 0);
    assert_eq!(
        r.decomposition.factorization,
        tsvd_decompose(&w, &cfg(0.1)).unwrap().factorization
    );
}
