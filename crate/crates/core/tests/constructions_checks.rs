use proptest::prelude::*;
use tsp_core::choi::{eb_witness_check, EbStatus, MapDecomposition};
use tsp_core::constructions::{
    alpha_beta, closed_form_thresholds, counterexample_map, filter_matrix, gamma_map, id_tensor_on_max_ent,
    local_filter, mu16_choi, mu16_separable_witness, check_separable_witness, perturbed_choi, rho_closed_form,
    rho_eta_pipeline, star_convexity_test, statement2_check, u_twirl, verify_p_properties,
};
use tsp_core::hypermat::{flip_operator, psd_check};
use tsp_core::mamu::{bounded_tsp_mamu, LoopVerdict};
use tsp_core::random;
use tsp_core::{BipartiteDims, EpsComplex, EpsMatrix, EpsRational, Rational};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn kernel_vector() -> Vec<EpsComplex> {
    let mut v = vec![EpsComplex::zero(); 9];
    v[0] = EpsComplex::from_int(-1);
    v[4] = EpsComplex::one();
    v
}

#[test]
fn mu16_shape() {
    let c = mu16_choi(3, 3).unwrap();
    assert_eq!(c.matrix.trace(), EpsComplex::from_int(9));
    assert_eq!(c.matrix.rank(), 8);
    let ker = c.matrix.mat_vec(&kernel_vector()).unwrap();
    assert!(ker.iter().all(EpsComplex::is_zero));
    assert!(psd_check(&c.matrix).unwrap().is_psd());
    assert!(psd_check(&c.partial_transpose()).unwrap().is_psd());
    let w = mu16_separable_witness(3, 3).unwrap();
    assert!(check_separable_witness(&c, &w).unwrap());
}

#[test]
fn perturbation_entries() {
    let c = perturbed_choi(&mu16_choi(3, 3).unwrap());
    let one_minus_e = EpsRational::one() - EpsRational::eps();
    assert_eq!(c.matrix[(1, 1)].re, one_minus_e);
    assert_eq!(c.matrix.trace().re, EpsRational::from_int(9) - EpsRational::from_int(9) * EpsRational::eps());
    // ⟨v|(C − ε1)|v⟩ = 0 − ε·‖v‖² on the kernel vector
    let val = c.matrix.quad_form(&kernel_vector()).unwrap();
    assert_eq!(val.re, EpsRational::from_int(-2) * EpsRational::eps());
}

#[test]
fn statement_two_failure_is_certified() {
    let c = mu16_choi(3, 3).unwrap();
    let (first, second) = statement2_check(&c).unwrap();
    assert!(!first.is_psd());
    assert!(first.recheck(&perturbed_choi(&c).matrix));
    let ptb = c.partial_transpose().sub(&EpsMatrix::identity(9).scale_eps(&EpsRational::eps())).unwrap();
    assert_eq!(second.is_psd(), psd_check(&ptb).unwrap().is_psd());
}

#[test]
fn p_properties() {
    let c = mu16_choi(3, 3).unwrap();
    let w = mu16_separable_witness(3, 3).unwrap();
    let r = verify_p_properties(&c, Some(&w)).unwrap();
    assert!(r.p2.deficient);
    assert_eq!(r.p2.rank, 8);
    assert!(r.p3.holds);
}

#[test]
fn alpha_beta_from_the_stated_expressions() {
    let eta = EpsRational::eps();
    let a = EpsRational::parse("(1/8)*(1 + e/(6*(1-e)))").unwrap();
    let b = EpsRational::parse("(1/8)*(1/3 + e/(2*(1-e)))").unwrap();
    let (ca, cb) = alpha_beta(&eta).unwrap();
    assert_eq!(ca, a);
    assert_eq!(cb, b);
    let rho = rho_closed_form(&eta).unwrap();
    assert_eq!(rho.trace(), EpsComplex::one());
    // symmetric and antisymmetric eigenvalues α − β and α + β
    let sym = rho[(0, 0)].re.clone();
    assert_eq!(sym, &a - &b);
    assert_eq!(rho[(1, 1)].re, a);
    assert_eq!(rho[(1, 3)].re, -b);
}

#[test]
fn closed_form_psd_region() {
    // α ± β ≥ 0 evaluated directly at sample points
    let r = closed_form_thresholds().unwrap();
    for (t, expect) in [(q(1, 2), true), (q(2, 3), true), (q(3, 4), false), (q(3, 2), false), (q(2, 1), true), (q(5, 1), true)] {
        let a = EpsRational::parse("(1/8)*(1 + e/(6*(1-e)))").unwrap().eval_at(&t).unwrap();
        let b = EpsRational::parse("(1/8)*(1/3 + e/(2*(1-e)))").unwrap().eval_at(&t).unwrap();
        let ok = &a - &b >= Rational::from_integer(0.into()) && &a + &b >= Rational::from_integer(0.into());
        assert_eq!(ok, expect, "t = {t}");
        assert_eq!(r.psd_set.contains(&t), expect, "t = {t}");
    }
    assert!(r.claimed_psd_holds);
}

#[test]
fn pipeline_state_is_normalised_and_entangled() {
    let r = rho_eta_pipeline().unwrap();
    assert!(r.trace_one);
    assert!(r.psd.is_psd());
    assert!(!r.npt.is_psd());
    assert!(r.npt.recheck(&r.rho.partial_transpose(BipartiteDims::new(3, 3)).unwrap()));
    assert!(r.matches_reparametrized);
}

#[test]
fn filter_kills_the_third_level() {
    let (a, s) = filter_matrix();
    let c = mu16_choi(3, 3).unwrap();
    let d = local_filter(&c.matrix, &a, &s).unwrap();
    for k in 6..9 {
        assert!(d.row(k).iter().all(EpsComplex::is_zero));
    }
}

#[test]
fn gamma_on_max_entangled() {
    // (id ⊗ γ)(Ω) = (Ω + F/d)/2 is not psd
    let g = gamma_map(2).unwrap();
    let m = id_tensor_on_max_ent(&g).unwrap();
    assert!(!psd_check(&m).unwrap().is_psd());
    let f = flip_operator(2).scale_rational(&q(1, 4));
    let omega = tsp_core::hypermat::max_ent_projector(2).scale_rational(&q(1, 2));
    assert_eq!(m, omega.add(&f).unwrap());
}

#[test]
fn counterexample_passes_mamu_but_is_not_positive() {
    let p = counterexample_map(2).unwrap();
    let (v, images) = bounded_tsp_mamu(&p, 3, 2000).unwrap();
    assert!(matches!(v, LoopVerdict::NoViolationUpTo { n_max: 3 }));
    for (k, img) in images.iter().enumerate() {
        let n = k as u32 + 1;
        let want = EpsRational::from_int((-1i64).pow(n) + 2i64.pow(n));
        assert_eq!(img.diagonal_value(0).re, want);
    }
}

#[test]
fn star_convexity_with_transposition() {
    let q = MapDecomposition::depolarizing(2);
    assert_eq!(eb_witness_check(&q).unwrap(), EbStatus::Witnessed);
    let t = MapDecomposition::transposition(2);
    let r = star_convexity_test(&q, &t, 2, 20, 3).unwrap();
    assert_eq!(r.violations, 0);
    assert!(star_convexity_test(&MapDecomposition::identity(2), &t, 2, 5, 3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn twirl_properties(seed in any::<u64>(), d in 2usize..=3) {
        let mut rng = random::rng(seed);
        let x = random::hermitian_eps(&mut rng, d * d, false);
        let tw = u_twirl(&x, d).unwrap();
        prop_assert_eq!(tw.trace(), x.trace());
        prop_assert_eq!(u_twirl(&tw, d).unwrap(), tw.clone());
        let f = flip_operator(d);
        prop_assert_eq!(tw.matmul(&f).unwrap().trace(), x.matmul(&f).unwrap().trace());
        // invariant under P ⊗ P for the cyclic shift P
        let p = EpsMatrix::from_fn(d, d, |r, c| if (c + 1) % d == r { EpsComplex::one() } else { EpsComplex::zero() });
        let pp = p.kron(&p);
        let moved = pp.matmul(&x).unwrap().matmul(&pp.dagger()).unwrap();
        prop_assert_eq!(u_twirl(&moved, d).unwrap(), tw);
    }
}
