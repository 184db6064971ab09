//! Concrete objects: the rank-deficient separable Choi matrix and its
//! perturbation, the filtered and twirled state `ρ(η)`, the symmetrisation
//! map `γ`, star convexity around entanglement-breaking maps, and the
//! single-term map that is positive on the MaMu projector without being
//! positive.

pub mod thresholds;

use serde::Serialize;

use crate::choi::{
    apply_map, choi_from_decomposition, eb_witness_check, tensor_power_decomposition, ChoiMatrix,
    EbStatus, MapDecomposition,
};
use crate::epsfield::{EpsComplex, EpsRational};
use crate::error::{Error, Result};
use crate::hypermat::{
    flip_operator, is_product_vector, kron_vec, max_ent_projector, psd_check, BipartiteDims,
    EpsMatrix, EpsVector, PsdVerdict,
};
use crate::random;
use crate::Rational;

pub use thresholds::RealSet;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name,
        source: Box::new(e),
    })
}

/// The separable, rank-deficient Choi matrix on `M_d1 ⊗ M_d2` (0-based
/// labels):
///
/// `(|00⟩+|11⟩)(⟨00|+⟨11|) + |01⟩⟨01| + |10⟩⟨10| + Σ_{i>1 or j>1} |ij⟩⟨ij|`
pub fn mu16_choi(d1: usize, d2: usize) -> Result<ChoiMatrix> {
    if d1 <= 2 || d2 <= 2 {
        return Err(Error::DimensionTooSmall(format!(
            "need d1, d2 > 2, got {d1}, {d2}"
        )));
    }
    let dim = d1 * d2;
    let idx = |i: usize, j: usize| i * d2 + j;
    let mut m = EpsMatrix::identity(dim);
    m[(idx(0, 0), idx(1, 1))] = EpsComplex::one();
    m[(idx(1, 1), idx(0, 0))] = EpsComplex::one();
    ChoiMatrix::new(m, BipartiteDims::new(d1, d2))
}

/// Explicit separable decomposition of [`mu16_choi`] as psd product terms.
///
/// The `{0,1} × {0,1}` corner is `¼ Σ_k |a_k⟩⟨a_k| ⊗ |b_k⟩⟨b_k|` with
/// `a_k = |0⟩ + i^k |1⟩`, `b_k = |0⟩ + (-i)^k |1⟩`; the rest is diagonal.
pub fn mu16_separable_witness(d1: usize, d2: usize) -> Result<Vec<(EpsMatrix, EpsMatrix)>> {
    mu16_choi(d1, d2)?;
    let powers = [
        EpsComplex::one(),
        EpsComplex::i(),
        EpsComplex::from_int(-1),
        EpsComplex::i().neg_ref(),
    ];
    let quarter = EpsComplex::from_frac(1, 4);
    let mut terms = Vec::new();
    for k in 0..4 {
        let mut a = vec![EpsComplex::zero(); d1];
        a[0] = EpsComplex::one();
        a[1] = powers[k].clone();
        let mut b = vec![EpsComplex::zero(); d2];
        b[0] = EpsComplex::one();
        b[1] = powers[k].conj();
        terms.push((EpsMatrix::outer(&a, &a).scale(&quarter), EpsMatrix::outer(&b, &b)));
    }
    for i in 0..d1 {
        for j in 0..d2 {
            if i > 1 || j > 1 {
                terms.push((EpsMatrix::unit(d1, i, i), EpsMatrix::unit(d2, j, j)));
            }
        }
    }
    Ok(terms)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum P1Status {
    #[serde(rename = "asserted-PPT-consistent")]
    AssertedPptConsistent,
    #[serde(rename = "witnessed")]
    Witnessed,
    #[serde(rename = "failed")]
    Failed,
}

#[derive(Clone, Debug, Serialize)]
pub struct P2Report {
    pub rank: usize,
    pub deficient: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum P3Method {
    /// One-dimensional kernel: exact reshape-rank test of its generator.
    ExactSingleVector,
    /// Product vector exhibited exactly.
    ExactCounterexample,
    /// Larger kernel and no product vector among the candidates tried.
    BoundedSearch,
}

#[derive(Clone, Debug, Serialize)]
pub struct P3Report {
    pub holds: bool,
    pub offending_vector: Option<EpsVector>,
    pub method: P3Method,
}

#[derive(Clone, Debug, Serialize)]
pub struct PPropertiesReport {
    pub p1: P1Status,
    pub p1_note: Option<String>,
    pub p2: P2Report,
    pub p3: P3Report,
    pub kernel: Vec<EpsVector>,
    pub ppt: PsdVerdict,
}

/// Candidate factor vectors: basis vectors and `e_i ± e_j`, `e_i ± i e_j`.
fn candidate_factors(d: usize) -> Vec<EpsVector> {
    let mut out = Vec::new();
    for i in 0..d {
        let mut v = vec![EpsComplex::zero(); d];
        v[i] = EpsComplex::one();
        out.push(v);
    }
    let phases = [
        EpsComplex::one(),
        EpsComplex::from_int(-1),
        EpsComplex::i(),
        EpsComplex::i().neg_ref(),
    ];
    for i in 0..d {
        for j in i + 1..d {
            for ph in &phases {
                let mut v = vec![EpsComplex::zero(); d];
                v[i] = EpsComplex::one();
                v[j] = ph.clone();
                out.push(v);
            }
        }
    }
    out
}

/// Checks a separable decomposition `C = Σ A_k ⊗ B_k` with all factors psd.
pub fn check_separable_witness(c: &ChoiMatrix, terms: &[(EpsMatrix, EpsMatrix)]) -> Result<bool> {
    let mut sum = EpsMatrix::zeros(c.matrix.rows(), c.matrix.cols());
    for (a, b) in terms {
        if !a.is_hermitian() || !b.is_hermitian() {
            return Ok(false);
        }
        if !psd_check(a)?.is_psd() || !psd_check(b)?.is_psd() {
            return Ok(false);
        }
        sum = sum.add(&a.kron(b))?;
    }
    Ok(sum == c.matrix)
}

/// (P1) separable, (P2) rank deficient, (P3) no product vector in the kernel.
pub fn verify_p_properties(
    c: &ChoiMatrix,
    witness: Option<&[(EpsMatrix, EpsMatrix)]>,
) -> Result<PPropertiesReport> {
    c.matrix.check_hermitian()?;
    let dims = c.dims;
    let total = dims.total();
    let rank = c.matrix.rank();
    let kernel = c.matrix.kernel_basis();

    let p3 = if kernel.is_empty() {
        P3Report {
            holds: true,
            offending_vector: None,
            method: P3Method::ExactSingleVector,
        }
    } else if kernel.len() == 1 {
        let product = is_product_vector(&kernel[0], dims)?;
        P3Report {
            holds: !product,
            offending_vector: product.then(|| kernel[0].clone()),
            method: P3Method::ExactSingleVector,
        }
    } else {
        let mut found = None;
        'outer: for a in candidate_factors(dims.da) {
            for b in candidate_factors(dims.db) {
                let v = kron_vec(&a, &b);
                if c.matrix.mat_vec(&v)?.iter().all(EpsComplex::is_zero) {
                    found = Some(v);
                    break 'outer;
                }
            }
        }
        match found {
            Some(v) => P3Report {
                holds: false,
                offending_vector: Some(v),
                method: P3Method::ExactCounterexample,
            },
            None => P3Report {
                holds: true,
                offending_vector: None,
                method: P3Method::BoundedSearch,
            },
        }
    };

    let ppt = psd_check(&c.partial_transpose())?;
    let (p1, p1_note) = if !ppt.is_psd() {
        (P1Status::Failed, Some("partial transpose is not psd".to_string()))
    } else {
        match witness {
            Some(w) if check_separable_witness(c, w)? => (P1Status::Witnessed, None),
            Some(_) => (
                P1Status::AssertedPptConsistent,
                Some("supplied decomposition did not check out".to_string()),
            ),
            None => (P1Status::AssertedPptConsistent, None),
        }
    };

    Ok(PPropertiesReport {
        p1,
        p1_note,
        p2: P2Report {
            rank,
            deficient: rank < total,
        },
        p3,
        kernel,
        ppt,
    })
}

/// `C − η·1`.
pub fn perturbed_choi_by(c: &ChoiMatrix, eta: &EpsRational) -> ChoiMatrix {
    let n = c.matrix.rows();
    let m = c
        .matrix
        .sub(&EpsMatrix::identity(n).scale_eps(eta))
        .expect("same shape");
    ChoiMatrix { matrix: m, dims: c.dims }
}

/// `C − ε·1` with the canonical infinitesimal.
pub fn perturbed_choi(c: &ChoiMatrix) -> ChoiMatrix {
    perturbed_choi_by(c, &EpsRational::eps())
}

/// Psd verdicts for `C − ε·1` and `C^{T_B} − ε·1`.
pub fn statement2_check(c: &ChoiMatrix) -> Result<(PsdVerdict, PsdVerdict)> {
    let n = c.matrix.rows();
    let e1 = EpsMatrix::identity(n).scale_eps(&EpsRational::eps());
    let first = psd_check(&c.matrix.sub(&e1)?)?;
    let second = psd_check(&c.partial_transpose().sub(&e1)?)?;
    Ok((first, second))
}

/// The filter `A = (1/√2)·[[0,1,0],[-1,0,0],[0,0,0]]`, returned as the
/// integer matrix and the square of its scalar.
pub fn filter_matrix() -> (EpsMatrix, Rational) {
    let a = EpsMatrix::from_int_rows(&[&[0, 1, 0], &[-1, 0, 0], &[0, 0, 0]]);
    (a, q(1, 2))
}

/// `D = s·(A† ⊗ 1)(C)(A ⊗ 1)` where `s` is the square of `A`'s scalar.
pub fn local_filter(c: &EpsMatrix, a: &EpsMatrix, square_scale: &Rational) -> Result<EpsMatrix> {
    if !a.is_square() || c.rows() % a.rows() != 0 || !c.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "filter {}x{} on a {}x{} matrix",
            a.rows(),
            a.cols(),
            c.rows(),
            c.cols()
        )));
    }
    let rest = EpsMatrix::identity(c.rows() / a.rows());
    let left = a.dagger().kron(&rest);
    let right = a.kron(&rest);
    Ok(left.matmul(c)?.matmul(&right)?.scale_rational(square_scale))
}

/// Twirl onto span{1, F}: `((d·trD − trDF)·1 + (d·trDF − trD)·F) / (d(d²−1))`.
/// For `d = 3` the coefficients are `trD/8 − trDF/24` and
/// `−(trD/24 − trDF/8)`.
pub fn u_twirl(dm: &EpsMatrix, d: usize) -> Result<EpsMatrix> {
    if d < 2 || !dm.is_square() || dm.rows() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "twirl of a {}x{} matrix with d = {d}",
            dm.rows(),
            dm.cols()
        )));
    }
    let f = flip_operator(d);
    let t = dm.trace();
    let tf = dm.matmul(&f)?.trace();
    let dd = EpsComplex::from_int(d as i64);
    let norm = EpsComplex::from_int((d * (d * d - 1)) as i64);
    let a = dd.mul_ref(&t).sub_ref(&tf).checked_div(&norm)?;
    let b = dd.mul_ref(&tf).sub_ref(&t).checked_div(&norm)?;
    EpsMatrix::identity(d * d).scale(&a).add(&f.scale(&b))
}

/// `α = (1/8)(1 + η/(6(1−η)))`, `β = (1/8)(1/3 + η/(2(1−η)))`.
pub fn alpha_beta(eta: &EpsRational) -> Result<(EpsRational, EpsRational)> {
    let one = EpsRational::one();
    let om = one.sub_ref(eta);
    let alpha = EpsRational::from_frac(1, 8)
        .mul_ref(&one.add_ref(&eta.checked_div(&om.scale(&q(6, 1)))?));
    let beta = EpsRational::from_frac(1, 8).mul_ref(
        &EpsRational::from_frac(1, 3).add_ref(&eta.checked_div(&om.scale(&q(2, 1)))?),
    );
    Ok((alpha, beta))
}

/// `α·1 − β·F₃`, the closed-form state.
pub fn rho_closed_form(eta: &EpsRational) -> Result<EpsMatrix> {
    let (a, b) = alpha_beta(eta)?;
    werner(&a, &b)
}

fn werner(alpha: &EpsRational, beta: &EpsRational) -> Result<EpsMatrix> {
    EpsMatrix::identity(9)
        .scale_eps(alpha)
        .sub(&flip_operator(3).scale_eps(beta))
}

/// Inverts `α(η)`: `η = (48α − 6)/(48α − 5)`.
pub fn eta_from_alpha(alpha: &EpsRational) -> Result<EpsRational> {
    let a48 = alpha.scale(&q(48, 1));
    a48.sub_ref(&EpsRational::from_int(6))
        .checked_div(&a48.sub_ref(&EpsRational::from_int(5)))
}

#[derive(Clone, Debug, Serialize)]
pub struct EntryMismatch {
    pub row: usize,
    pub col: usize,
    pub computed: String,
    pub closed_form: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RhoPipelineReport {
    pub eta: EpsRational,
    #[serde(rename = "D")]
    pub d: EpsMatrix,
    pub trace_d: EpsRational,
    pub trace_df: EpsRational,
    /// `⟨Ω| D^{T_B} |Ω⟩` with the normalised maximally entangled state.
    pub omega_d_tb_omega: EpsRational,
    pub rho: EpsMatrix,
    pub alpha: EpsRational,
    pub beta: EpsRational,
    pub closed_form_alpha: EpsRational,
    pub closed_form_beta: EpsRational,
    pub matches_closed_form: bool,
    pub first_mismatch: Option<EntryMismatch>,
    /// Parameter at which the closed form reproduces the computed state.
    pub equivalent_eta: Option<EpsRational>,
    pub matches_reparametrized: bool,
    pub trace_one: bool,
    pub psd: PsdVerdict,
    pub npt: PsdVerdict,
    pub shadow_ppt: PsdVerdict,
}

/// Builds the filtered, twirled, normalised state at parameter `eta` and runs
/// the closed-form comparison and the positivity checks.
pub fn rho_pipeline_at(eta: &EpsRational) -> Result<RhoPipelineReport> {
    let c = stage("mu16", mu16_choi(3, 3))?;
    let cp = perturbed_choi_by(&c, eta);
    let (a, s) = filter_matrix();
    let d = stage("filter", local_filter(&cp.matrix, &a, &s))?;
    let dims = BipartiteDims::new(3, 3);
    let trace_d = d.trace().re;
    let trace_df = stage("twirl", d.matmul(&flip_operator(3)))?.trace().re;
    let omega_d_tb_omega = {
        let dtb = stage("filter", d.partial_transpose(dims))?;
        stage("filter", dtb.matmul(&max_ent_projector(3)))?.trace().re
    };
    let twirled = stage("twirl", u_twirl(&d, 3))?;
    let rho = stage(
        "normalize",
        trace_d.recip().map(|inv| twirled.scale_eps(&inv)),
    )?;

    let alpha = rho[(1, 1)].re.clone();
    let beta = rho[(1, 3)].re.neg_ref();
    let (ca, cb) = stage("closed-form", alpha_beta(eta))?;
    let closed = stage("closed-form", werner(&ca, &cb))?;
    let first_mismatch = (0..81).find_map(|k| {
        let (r, col) = (k / 9, k % 9);
        (rho[(r, col)] != closed[(r, col)]).then(|| EntryMismatch {
            row: r,
            col,
            computed: rho[(r, col)].to_string(),
            closed_form: closed[(r, col)].to_string(),
        })
    });
    let matches_closed_form = first_mismatch.is_none();

    let equivalent_eta = eta_from_alpha(&alpha).ok();
    let matches_reparametrized = match &equivalent_eta {
        Some(e2) => rho_closed_form(e2).is_ok_and(|m| m == rho),
        None => false,
    };

    let trace_one = rho.trace() == EpsComplex::one();
    let psd = stage("checks", psd_check(&rho))?;
    let npt = stage("checks", psd_check(&rho.partial_transpose(dims)?))?;
    let sh = stage("checks", rho.shadow())?;
    let shadow_ppt = stage("checks", psd_check(&sh.partial_transpose(dims)?))?;

    Ok(RhoPipelineReport {
        eta: eta.clone(),
        d,
        trace_d,
        trace_df,
        omega_d_tb_omega,
        rho,
        alpha,
        beta,
        closed_form_alpha: ca,
        closed_form_beta: cb,
        matches_closed_form,
        first_mismatch,
        equivalent_eta,
        matches_reparametrized,
        trace_one,
        psd,
        npt,
        shadow_ppt,
    })
}

/// The pipeline at the canonical infinitesimal `η = ε`.
pub fn rho_eta_pipeline() -> Result<RhoPipelineReport> {
    rho_pipeline_at(&EpsRational::eps())
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdReport {
    pub family: String,
    /// `{η > 0 : ρ(η) psd}`
    pub psd_set: RealSet,
    /// `{η > 0 : ρ(η)^{T_B} not psd}`
    pub npt_set: RealSet,
    pub claimed_psd: String,
    pub claimed_npt: String,
    /// `(0, 1/2] ⊆ psd_set`
    pub claimed_psd_holds: bool,
    /// `(0, 3/2) ⊆ npt_set`
    pub claimed_npt_holds: bool,
    /// Breakpoints that fall inside the claimed NPT window.
    pub npt_exceptions: Vec<String>,
}

/// Exact psd / NPT regions of a family `α(η)·1 − β(η)·F₃` in `η > 0`.
///
/// Breakpoints come from the spectra (`α ± β` on ρ, `α` and `α − 3β` on the
/// partial transpose); membership on each region is decided by an exact psd
/// check of the evaluated matrix.
pub fn thresholds_for(
    family: &str,
    alpha: &EpsRational,
    beta: &EpsRational,
) -> Result<ThresholdReport> {
    let three = q(3, 1);
    let funcs = [
        alpha.sub_ref(beta),
        alpha.add_ref(beta),
        alpha.clone(),
        alpha.sub_ref(&beta.scale(&three)),
    ];
    let pts = thresholds::breakpoints(&funcs)?;
    let dims = BipartiteDims::new(3, 3);
    let at = |t: &Rational| -> Option<EpsMatrix> {
        let a = EpsRational::from_rational(&alpha.eval_at(t).ok()?);
        let b = EpsRational::from_rational(&beta.eval_at(t).ok()?);
        werner(&a, &b).ok()
    };
    let psd_set = thresholds::solve_on_positive_reals(&pts, |t| {
        at(t).is_some_and(|m| psd_check(&m).is_ok_and(|v| v.is_psd()))
    });
    let npt_set = thresholds::solve_on_positive_reals(&pts, |t| {
        at(t).is_some_and(|m| {
            m.partial_transpose(dims)
                .ok()
                .and_then(|p| psd_check(&p).ok())
                .is_some_and(|v| !v.is_psd())
        })
    });
    let half = q(1, 2);
    let claimed_psd_holds = match psd_set.initial_segment_end() {
        Some((end, closed)) => end > half || (end == half && closed),
        None => false,
    };
    let three_halves = q(3, 2);
    let npt_exceptions: Vec<String> = pts
        .iter()
        .filter(|p| **p < three_halves && !npt_set.contains(p))
        .map(|p| format!("{p}"))
        .collect();
    let claimed_npt_holds = match npt_set.initial_segment_end() {
        Some((end, _)) => end >= three_halves && npt_exceptions.is_empty(),
        None => false,
    };
    Ok(ThresholdReport {
        family: family.to_string(),
        psd_set,
        npt_set,
        claimed_psd: "η ≤ 1/2".into(),
        claimed_npt: "0 < η < 3/2".into(),
        claimed_psd_holds,
        claimed_npt_holds,
        npt_exceptions,
    })
}

/// Thresholds of the closed form `α(η), β(η)`.
pub fn closed_form_thresholds() -> Result<ThresholdReport> {
    let (a, b) = alpha_beta(&EpsRational::eps())?;
    thresholds_for("closed form", &a, &b)
}

/// Thresholds of the state the pipeline actually produces, as a function of
/// the perturbation parameter.
pub fn pipeline_thresholds() -> Result<ThresholdReport> {
    let r = rho_eta_pipeline()?;
    thresholds_for("pipeline", &r.alpha, &r.beta)
}

/// `γ(X) = ½(X + Xᵀ)`.
pub fn gamma_map(d: usize) -> Result<MapDecomposition> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(format!("gamma needs d >= 2, got {d}")));
    }
    let half = EpsRational::from_frac(1, 2);
    MapDecomposition::identity(d)
        .scale(&half)
        .sum(&MapDecomposition::transposition(d).scale(&half))
}

/// `(id ⊗ P)(|Ω⟩⟨Ω|) = (1/d) Σ_ij E_ij ⊗ P(E_ij)`, computed by applying the
/// map rather than through the Choi formula.
pub fn id_tensor_on_max_ent(p: &MapDecomposition) -> Result<EpsMatrix> {
    let d = p.d_in();
    let mut out = EpsMatrix::zeros(d * p.d_out(), d * p.d_out());
    for i in 0..d {
        for j in 0..d {
            let img = apply_map(p, &EpsMatrix::unit(d, i, j))?;
            out = out.add(&EpsMatrix::unit(d, i, j).kron(&img))?;
        }
    }
    Ok(out.scale_rational(&q(1, d as i64)))
}

#[derive(Clone, Debug, Serialize)]
pub struct StarConvexityReport {
    pub n: u32,
    pub samples: usize,
    pub violations: usize,
    pub first_violation: Option<usize>,
    pub exact: bool,
}

/// Applies `(Q + T)^{⊗n}` to seeded rational psd inputs and checks each
/// output exactly.
pub fn star_convexity_test(
    qmap: &MapDecomposition,
    tmap: &MapDecomposition,
    n: u32,
    samples: usize,
    seed: u64,
) -> Result<StarConvexityReport> {
    if eb_witness_check(qmap)? != EbStatus::Witnessed {
        return Err(Error::NotEbWitnessed);
    }
    let sum = qmap.sum(tmap)?;
    let power = tensor_power_decomposition(&sum, n, 1 << 16)?;
    let mut rng = random::rng(seed);
    let dim = power.d_in();
    let mut violations = 0;
    let mut first = None;
    for k in 0..samples {
        let rank = 1 + (k % dim);
        let x = random::psd_rational(&mut rng, dim, rank);
        let y = apply_map(&power, &x)?;
        if !psd_check(&y)?.is_psd() {
            violations += 1;
            first.get_or_insert(k);
        }
    }
    Ok(StarConvexityReport {
        n,
        samples,
        violations,
        first_violation: first,
        exact: power.is_rational(),
    })
}

/// `B − eps·Q` by term concatenation.
pub fn boundary_form(
    b: &MapDecomposition,
    qmap: &MapDecomposition,
    eps: &EpsRational,
) -> Result<MapDecomposition> {
    if eps.is_zero() {
        return Ok(b.clone());
    }
    b.sum(&qmap.scale(&eps.neg_ref()))
}

/// `A = 1_{d²}`, `B = diag(−1, 0, …, 0, 2)`: not positive, yet every tensor
/// power maps the MaMu projector to `((−1)ⁿ + 2ⁿ)·1`.
pub fn counterexample_map(d: usize) -> Result<MapDecomposition> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(format!("need d >= 2, got {d}")));
    }
    let n = d * d;
    let mut diag = vec![0; n];
    diag[0] = -1;
    diag[n - 1] = 2;
    MapDecomposition::from_pairs(n, n, vec![(EpsMatrix::identity(n), EpsMatrix::diag_ints(&diag))])
}

/// Choi matrix of a map given as a separable decomposition, for reporting.
pub fn choi_of(p: &MapDecomposition) -> ChoiMatrix {
    choi_from_decomposition(p)
}
