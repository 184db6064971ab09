use proptest::prelude::*;
use tsp_core::hypermat::{basis_vector, flip_operator, kron_vec, max_ent_projector, psd_check};
use tsp_core::random;
use tsp_core::{BipartiteDims, EpsComplex, EpsMatrix, EpsRational};

/// Laplace expansion, kept separate from the elimination code under test.
fn det(m: &EpsMatrix, idx: &[usize]) -> EpsComplex {
    if idx.is_empty() {
        return EpsComplex::one();
    }
    let r = idx[0];
    let mut acc = EpsComplex::zero();
    for (k, &c) in idx.iter().enumerate() {
        let rest: Vec<usize> = idx.iter().copied().filter(|&x| x != c).collect();
        let rows: Vec<usize> = idx[1..].to_vec();
        let minor = EpsMatrix::from_fn(rest.len(), rest.len(), |i, j| m[(rows[i], rest[j])].clone());
        let all: Vec<usize> = (0..rest.len()).collect();
        let term = m[(r, c)].mul_ref(&det(&minor, &all));
        acc = if k % 2 == 0 { acc.add_ref(&term) } else { acc.sub_ref(&term) };
    }
    acc
}

/// Hermitian matrices are PSD iff every principal minor is nonnegative.
fn psd_by_minors(m: &EpsMatrix) -> bool {
    let n = m.rows();
    (1u32..(1 << n)).all(|mask| {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        !det(m, &idx).re.is_negative()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn psd_agrees_with_minors(seed in any::<u64>(), d in 1usize..=3, complex in any::<bool>()) {
        let mut rng = random::rng(seed);
        let m = random::hermitian_eps(&mut rng, d, complex);
        let v = psd_check(&m).unwrap();
        prop_assert_eq!(v.is_psd(), psd_by_minors(&m));
        if !v.is_psd() {
            prop_assert!(v.recheck(&m));
        }
    }

    #[test]
    fn gram_matrices_are_psd(seed in any::<u64>(), d in 1usize..=4, k in 1usize..=3, complex in any::<bool>()) {
        let mut rng = random::rng(seed);
        let b = random::gaussian_int_matrix(&mut rng, k, d, 3, complex);
        let g = b.dagger().matmul(&b).unwrap();
        prop_assert!(psd_check(&g).unwrap().is_psd());
        // shifting down by e·1 breaks it exactly when g has a kernel
        let shifted = g.sub(&EpsMatrix::identity(d).scale_eps(&EpsRational::eps())).unwrap();
        prop_assert_eq!(psd_check(&shifted).unwrap().is_psd(), g.rank() == d);
    }

    #[test]
    fn rank_nullity(seed in any::<u64>(), r in 1usize..=4, c in 1usize..=4) {
        let mut rng = random::rng(seed);
        let m = random::rational_matrix(&mut rng, r, c, 2, 2);
        let ker = m.kernel_basis();
        prop_assert_eq!(m.rank() + ker.len(), c);
        for v in &ker {
            prop_assert!(m.mat_vec(v).unwrap().iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn partial_transpose_involution(seed in any::<u64>(), da in 1usize..=3, db in 1usize..=3) {
        let mut rng = random::rng(seed);
        let m = random::hermitian_eps(&mut rng, da * db, true);
        let dims = BipartiteDims::new(da, db);
        let tb = m.partial_transpose(dims).unwrap();
        prop_assert_eq!(tb.partial_transpose(dims).unwrap(), m.clone());
        // T_A ∘ T_B is the full transpose
        prop_assert_eq!(tb.partial_transpose_a(dims).unwrap(), m.transpose());
        prop_assert_eq!(m.partial_trace_a(dims).unwrap().trace(), m.trace());
    }

    #[test]
    fn kron_mixed_product(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let a = random::rational_matrix(&mut rng, 2, 2, 3, 2);
        let b = random::rational_matrix(&mut rng, 2, 2, 3, 2);
        let c = random::rational_matrix(&mut rng, 2, 2, 3, 2);
        let d = random::rational_matrix(&mut rng, 2, 2, 3, 2);
        let lhs = a.kron(&b).matmul(&c.kron(&d)).unwrap();
        let rhs = a.matmul(&c).unwrap().kron(&b.matmul(&d).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), d in 1usize..=3) {
        let mut rng = random::rng(seed);
        let m = random::hermitian_eps(&mut rng, d, true);
        let js = serde_json::to_string(&m).unwrap();
        let back: EpsMatrix = serde_json::from_str(&js).unwrap();
        prop_assert_eq!(back, m);
    }
}

#[test]
fn kron_of_diagonals() {
    let a = EpsMatrix::diag_ints(&[1, 2]);
    let b = EpsMatrix::diag_ints(&[3, 5]);
    assert_eq!(a.kron(&b), EpsMatrix::diag_ints(&[3, 5, 6, 10]));
}

#[test]
fn flip_partial_transpose_is_scaled_projector() {
    for d in 2..=4 {
        let f = flip_operator(d);
        let tb = f.partial_transpose(BipartiteDims::new(d, d)).unwrap();
        let omega = max_ent_projector(d).scale_rational(&tsp_core::Rational::from_integer((d as i64).into()));
        assert_eq!(tb, omega);
        // F has eigenvalue -1 on antisymmetric vectors
        let e01 = kron_vec(&basis_vector(d, 0), &basis_vector(d, 1));
        let e10 = kron_vec(&basis_vector(d, 1), &basis_vector(d, 0));
        let anti: Vec<EpsComplex> = e01.iter().zip(&e10).map(|(x, y)| x.sub_ref(y)).collect();
        assert_eq!(f.quad_form(&anti).unwrap().re, EpsRational::from_int(-2));
    }
}

#[test]
fn infinitesimal_negative_entry() {
    let m = EpsMatrix::diag(&[EpsComplex::one(), EpsComplex::real(-EpsRational::eps())]);
    let v = psd_check(&m).unwrap();
    assert!(!v.is_psd());
    assert!(v.recheck(&m));
    assert_eq!(v.value.unwrap(), -EpsRational::eps());
}

#[test]
fn one_minus_eps_times_identity_is_psd() {
    let m = EpsMatrix::identity(3).scale_eps(&(EpsRational::one() - EpsRational::eps()));
    assert!(psd_check(&m).unwrap().is_psd());
}

#[test]
fn non_hermitian_rejected() {
    let m = EpsMatrix::from_int_rows(&[&[1, 2], &[0, 1]]);
    assert!(matches!(psd_check(&m), Err(tsp_core::Error::NotHermitian { .. })));
}
