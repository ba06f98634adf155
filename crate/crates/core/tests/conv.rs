use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tsvd_core::conv::{conv2d, factor_kernel, select_form};
use tsvd_core::{
    AngleThreshold, ConvFactorization, ConvSpec, DecomposeConfig, FormType, Kernel4, Tensor3,
    TernaryMatrix, TsvdFactorization,
};

fn uniform(rng: &mut StdRng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()
}

fn random_trits(rng: &mut StdRng, len: usize) -> Vec<i8> {
    (0..len).map(|_| rng.random_range(-1..=1)).collect()
}

/// Random factors of the right shape for every group.
fn random_factorization(rng: &mut StdRng, spec: ConvSpec, form: FormType) -> ConvFactorization {
    let (m, n) = form.matrix_shape(
        spec.out_per_group(),
        spec.in_per_group(),
        spec.kernel.0,
        spec.kernel.1,
    );
    let groups = (0..spec.groups)
        .map(|_| {
            let k = rng.random_range(1..5);
            let u = TernaryMatrix::from_trits(m, k, &random_trits(rng, m * k)).unwrap();
            let v = TernaryMatrix::from_trits(k, n, &random_trits(rng, k * n)).unwrap();
            TsvdFactorization::new(u, uniform(rng, k), v, 0.5).unwrap()
        })
        .collect();
    ConvFactorization::new(spec, form, groups).unwrap()
}

fn relative_gap(a: &Tensor3, b: &Tensor3) -> f64 {
    let num: f64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).powi(2))
        .sum();
    let den: f64 = b.data.iter().map(|y| y * y).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

fn check(rng: &mut StdRng, spec: ConvSpec, form: FormType, height: usize, width: usize) {
    let f = random_factorization(rng, spec, form);
    let input = Tensor3::new(
        spec.c_in,
        height,
        width,
        uniform(rng, spec.c_in * height * width),
    )
    .unwrap();
    let direct = conv2d(&spec, &f.reconstruct_kernel().unwrap(), &input).unwrap();
    let factored = f.apply(&input).unwrap();
    assert_eq!(
        (factored.channels, factored.height, factored.width),
        (direct.channels, direct.height, direct.width)
    );
    let gap = relative_gap(&factored, &direct);
    assert!(gap <= 1e-4, "{spec:?} {form:?}: {gap}");
}

#[test]
fn factored_matches_direct_on_random_geometries() {
    let mut rng = StdRng::seed_from_u64(8);
    for case in 0..200 {
        let groups = [1, 1, 2, 3][rng.random_range(0..4)];
        let mut spec = ConvSpec::new(
            groups * rng.random_range(1..4),
            groups * rng.random_range(1..4),
            (rng.random_range(1..5), rng.random_range(1..5)),
        );
        spec.groups = groups;
        spec.stride = (
            [1, 2, 4][rng.random_range(0..3)],
            [1, 2, 4][rng.random_range(0..3)],
        );
        spec.dilation = (rng.random_range(1..3), rng.random_range(1..3));
        spec.padding = (rng.random_range(0..3), rng.random_range(0..3));
        let reach = |k: usize, d: usize| d * (k - 1) + 1;
        let height = reach(spec.kernel.0, spec.dilation.0) + rng.random_range(0..6);
        let width = reach(spec.kernel.1, spec.dilation.1) + rng.random_range(0..6);
        check(&mut rng, spec, FormType::ALL[case % 4], height, width);
    }
}

#[test]
fn stem_and_depthwise_cases() {
    let mut rng = StdRng::seed_from_u64(9);
    let mut stem = ConvSpec::new(8, 3, (4, 4));
    stem.stride = (4, 4);
    let mut depthwise = ConvSpec::new(4, 4, (7, 7));
    depthwise.groups = 4;
    depthwise.padding = (3, 3);
    for form in FormType::ALL {
        check(&mut rng, stem, form, 16, 16);
        check(&mut rng, depthwise, form, 9, 9);
    }
}

#[test]
fn decomposed_kernels_run_in_every_form() {
    let mut rng = StdRng::seed_from_u64(10);
    let mut spec = ConvSpec::new(4, 3, (3, 3));
    spec.padding = (1, 1);
    let kernel = Kernel4::new(4, 3, 3, 3, uniform(&mut rng, 108)).unwrap();
    let cfg = DecomposeConfig::new(0.05).with_theta(AngleThreshold::from_degrees(45.0).unwrap());
    let input = Tensor3::new(3, 6, 6, uniform(&mut rng, 108)).unwrap();
    for form in FormType::ALL {
        let f = factor_kernel(&spec, &kernel, form, &cfg).unwrap();
        let direct = conv2d(&spec, &f.reconstruct_kernel().unwrap(), &input).unwrap();
        assert!(relative_gap(&f.apply(&input).unwrap(), &direct) <= 1e-9);
        // The approximation itself stays near the original operator.
        let exact = conv2d(&spec, &kernel, &input).unwrap();
        assert!(relative_gap(&direct, &exact) < 0.3);
    }
}

#[test]
fn selected_form_is_cheapest() {
    let mut rng = StdRng::seed_from_u64(12);
    let cfg = DecomposeConfig::new(0.1).with_theta(AngleThreshold::from_degrees(45.0).unwrap());
    for (c_out, c_in, k) in [(6, 2, 3), (2, 6, 3), (3, 3, 5), (8, 1, 2)] {
        let spec = ConvSpec::new(c_out, c_in, (k, k));
        let kernel =
            Kernel4::new(c_out, c_in, k, k, uniform(&mut rng, c_out * c_in * k * k)).unwrap();
        let best = select_form(&spec, &kernel, &cfg).unwrap();
        let best_rate = best.cost(32).compression_rate;
        for form in FormType::ALL {
            if let Ok(f) = factor_kernel(&spec, &kernel, form, &cfg) {
                let rate = f.cost(32).compression_rate;
                assert!(best_rate <= rate);
                if rate == best_rate {
                    // Ties go to the earlier form.
                    assert!(best.form.index() <= form.index());
                }
            }
        }
    }
}
