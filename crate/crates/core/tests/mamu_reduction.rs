use proptest::prelude::*;
use tsp_core::choi::{apply_map, tensor_power_decomposition, MapDecomposition};
use tsp_core::mamu::{
    apply_power_to_mamu, apply_power_to_mamu_dense, bounded_positive_mpo, bounded_tsp_mamu, index_to_tuple,
    mamu_projector, mamu_vector, random_mpo, reduce_mpo_to_map, reshuffle, tau_n, tuple_to_index, verify_reduction,
    LoopVerdict, MpoTensor, RatMatrix, DEFAULT_MAX_TUPLES,
};
use tsp_core::{EpsRational, Rational};

/// Trace of an explicit product, one multiplication at a time.
fn trace_of_product(c: &MpoTensor, tuple: &[usize]) -> Rational {
    let mut m = RatMatrix::identity(c.s());
    for &i in tuple {
        m = m.matmul(&c.matrices()[i]);
    }
    m.trace()
}

#[test]
fn tau_two_matches_all_pairs() {
    let c = random_mpo(11, 4, 9, 3);
    let tau = tau_n(&c, 2, DEFAULT_MAX_TUPLES).unwrap();
    assert_eq!(tau.values.len(), 81);
    for i in 0..9 {
        for j in 0..9 {
            let want = trace_of_product(&c, &[i, j]);
            assert_eq!(tau.values[i * 9 + j], EpsRational::from_rational(&want), "pair ({i}, {j})");
        }
    }
}

#[test]
fn trace_nonnegative_but_square_negative() {
    // Z = diag(1, -1) and J = [[0, 1], [-1, 0]] are traceless; tr(J²) = -2
    let c = MpoTensor::new(vec![
        RatMatrix::from_ints(&[&[1, 0], &[0, -1]]).unwrap(),
        RatMatrix::from_ints(&[&[0, 1], &[-1, 0]]).unwrap(),
    ])
    .unwrap();
    let tau1 = tau_n(&c, 1, DEFAULT_MAX_TUPLES).unwrap();
    assert!(tau1.values.iter().all(|v| !v.is_negative()));
    match bounded_positive_mpo(&c, 3).unwrap() {
        LoopVerdict::Violation { n, tuple, value, .. } => {
            assert_eq!(n, 2);
            assert_eq!(tuple.unwrap(), vec![2, 2]);
            assert_eq!(value.unwrap(), EpsRational::from_int(-2));
        }
        v => panic!("expected a violation, got {v:?}"),
    }
}

#[test]
fn negative_identity_fails_at_first_level() {
    let c = MpoTensor::new(vec![RatMatrix::from_ints(&[&[-1, 0, 0, 0], &[0, -1, 0, 0], &[0, 0, -1, 0], &[0, 0, 0, -1]]).unwrap()]).unwrap();
    match bounded_positive_mpo(&c, 3).unwrap() {
        LoopVerdict::Violation { n, value, .. } => {
            assert_eq!(n, 1);
            assert_eq!(value.unwrap(), EpsRational::from_int(-4));
        }
        v => panic!("expected a violation, got {v:?}"),
    }
    let p = reduce_mpo_to_map(&c).unwrap();
    assert!(bounded_tsp_mamu(&p, 3, 2000).unwrap().0.is_violation());
}

#[test]
fn identity_map_fixes_the_mamu_projector() {
    let id = MapDecomposition::identity(4);
    for n in 1..=2 {
        let img = apply_power_to_mamu(&id, n, 2000, DEFAULT_MAX_TUPLES).unwrap();
        assert_eq!(img.to_dense(), mamu_projector(2, n, 2000).unwrap());
    }
}

#[test]
fn mamu_vector_layout() {
    // n = 2, d = 2: |i1 i2⟩|i2 i1⟩ has ones at positions 0, 6, 9, 15
    let v = mamu_vector(2, 2, 2000).unwrap();
    let ones: Vec<usize> = v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(k, _)| k).collect();
    assert_eq!(ones, vec![0, 6, 9, 15]);
    assert_eq!(index_to_tuple(5, 2, 3), vec![1, 0, 1]);
    assert_eq!(tuple_to_index(&[1, 0, 1], 2), 5);
}

#[test]
fn reduction_needs_square_dimension() {
    let c = random_mpo(1, 3, 2, 2);
    assert!(matches!(reduce_mpo_to_map(&c), Err(tsp_core::Error::NotPerfectSquare(3))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tau_three_matches_products(seed in any::<u64>()) {
        let c = random_mpo(seed, 4, 3, 2);
        let tau = tau_n(&c, 3, DEFAULT_MAX_TUPLES).unwrap();
        for idx in 0..27 {
            let t = tau.tuple(idx);
            prop_assert_eq!(&tau.values[idx], &EpsRational::from_rational(&trace_of_product(&c, &t)));
        }
    }

    #[test]
    fn reduction_identity_holds(seed in any::<u64>(), t in 1usize..=3) {
        let c = random_mpo(seed, 4, t, 2);
        let r = verify_reduction(&c, 3, 2000).unwrap();
        prop_assert!(r.holds, "{:?}", r.first_discrepancy);
    }

    #[test]
    fn dense_mamu_route_agrees_with_direct_application(seed in any::<u64>()) {
        // applying P⊗P to χ₂χ₂† term by term, independently of the ring contraction
        let c = random_mpo(seed, 4, 2, 2);
        let p = reduce_mpo_to_map(&c).unwrap();
        let p2 = tensor_power_decomposition(&p, 2, 1 << 10).unwrap();
        let direct = apply_map(&p2, &mamu_projector(2, 2, 2000).unwrap()).unwrap();
        prop_assert_eq!(&direct, &apply_power_to_mamu_dense(&p, 2, 2000).unwrap());
        prop_assert_eq!(direct, apply_power_to_mamu(&p, 2, 2000, DEFAULT_MAX_TUPLES).unwrap().to_dense());
    }

    #[test]
    fn positivity_transfers(seed in any::<u64>()) {
        let c = random_mpo(seed, 4, 2, 2);
        let p = reduce_mpo_to_map(&c).unwrap();
        let first = |v: &LoopVerdict| match v {
            LoopVerdict::Violation { n, .. } => Some(*n),
            LoopVerdict::NoViolationUpTo { .. } => None,
        };
        let a = bounded_positive_mpo(&c, 3).unwrap();
        let (b, _) = bounded_tsp_mamu(&p, 3, 2000).unwrap();
        prop_assert_eq!(first(&a), first(&b));
    }

    #[test]
    fn reshuffle_is_an_involution(seed in any::<u64>()) {
        let c = random_mpo(seed, 9, 1, 4);
        let m = &c.matrices()[0];
        prop_assert_eq!(&reshuffle(&reshuffle(m, 3), 3), m);
    }
}
