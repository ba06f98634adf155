use proptest::prelude::*;
use tsvd_core::{TernaryMatrix, TsvdError};

fn trit_matrix() -> impl Strategy<Value = (usize, usize, Vec<i8>)> {
    (0usize..9, 0usize..13)
        .prop_flat_map(|(r, c)| (Just(r), Just(c), prop::collection::vec(-1i8..=1, r * c)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn payload_round_trip((rows, cols, trits) in trit_matrix()) {
        let m = TernaryMatrix::from_trits(rows, cols, &trits).unwrap();
        prop_assert_eq!(m.payload().len(), rows * cols.div_ceil(4));
        let back = TernaryMatrix::from_payload(rows, cols, m.payload()).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(back.to_trits(), trits.clone());
        prop_assert_eq!(m.nnz(), trits.iter().filter(|&&t| t != 0).count());
        prop_assert_eq!(m.transpose().transpose(), m);
    }

    #[test]
    fn forbidden_code_is_rejected((rows, cols, trits) in trit_matrix(), pick in any::<prop::sample::Index>()) {
        prop_assume!(rows * cols > 0);
        let m = TernaryMatrix::from_trits(rows, cols, &trits).unwrap();
        let at = pick.index(rows * cols);
        let (i, j) = (at / cols, at % cols);
        let mut payload = m.payload().to_vec();
        payload[i * cols.div_ceil(4) + j / 4] |= 0b11 << (2 * (j % 4));
        let err = TernaryMatrix::from_payload(rows, cols, &payload).unwrap_err();
        prop_assert_eq!(err, TsvdError::ForbiddenCode { index: at });
    }
}

#[test]
fn dirty_padding_is_rejected() {
    let m = TernaryMatrix::from_trits(2, 3, &[1, 0, -1, 0, 1, 1]).unwrap();
    let mut payload = m.payload().to_vec();
    payload[1] |= 0b01 << 6;
    assert_eq!(
        TernaryMatrix::from_payload(2, 3, &payload).unwrap_err(),
        TsvdError::NonZeroPadding { row: 1 }
    );
    assert!(matches!(
        TernaryMatrix::from_payload(2, 3, &payload[..1]),
        Err(TsvdError::PayloadLength {
            expected: 2,
            found: 1
        })
    ));
}
