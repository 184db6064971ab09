use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use tsp_core::choi::{
    choi_from_decomposition, eb_witness_check, is_cocp, is_cp, ChoiMatrix, EbStatus, MapDecomposition,
};
use tsp_core::claims::{run_claim, ClaimConfig, ClaimReport, ClaimVerdict, CLAIMS};
use tsp_core::constructions::{
    closed_form_thresholds, counterexample_map, gamma_map, mu16_choi, pipeline_thresholds, rho_pipeline_at,
    statement2_check, verify_p_properties,
};
use tsp_core::layers::{
    inner_product_counterexample, l2_tsp_witness, magnitude, seq_sign, LayeredScalar,
};
use tsp_core::mamu::{bounded_positive_mpo, bounded_tsp_mamu, random_mpo, verify_reduction, LoopVerdict, MamuImage, MpoTensor};
use tsp_core::positivity::{positive_map_search, SearchBudget};
use tsp_core::{EpsMatrix, EpsRational, Error, PsdVerdict, DEFAULT_MAX_DIM};

#[derive(Parser)]
#[command(name = "tsp", version, about = "Exact checks for tensor-stable positivity")]
struct Cli {
    /// Seed for every randomised search.
    #[arg(long, global = true, env = "TSP_SEED", default_value_t = 0)]
    seed: u64,
    /// Cap on dense matrix dimensions.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_DIM)]
    max_dim: usize,
    /// Emit JSON (the default).
    #[arg(long, global = true, conflicts_with = "human")]
    json: bool,
    /// Emit plain text.
    #[arg(long, global = true)]
    human: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every acceptance claim and stream one JSON report per line.
    VerifyPaper(VerifyArgs),
    /// Exact psd check of a matrix file.
    Psd {
        #[arg(long)]
        file: PathBuf,
    },
    /// Choi matrix and CP / coCP / EB status of a map file.
    Choi {
        #[arg(long)]
        map: PathBuf,
        /// Also search for a positivity violation.
        #[arg(long)]
        search: bool,
        #[arg(long, default_value_t = 200)]
        budget: usize,
    },
    #[command(subcommand)]
    Mamu(MamuCmd),
    #[command(subcommand)]
    Mpo(MpoCmd),
    #[command(subcommand)]
    Construct(ConstructCmd),
    #[command(subcommand)]
    Layers(LayersCmd),
}

#[derive(Args)]
struct VerifyArgs {
    /// Restarts for the ordinary searches.
    #[arg(long, default_value_t = 200)]
    budget: usize,
    /// Restarts for the block-positivity claim (at least 1000 by default).
    #[arg(long, default_value_t = 1000)]
    heavy_restarts: usize,
    #[arg(long, default_value_t = 3)]
    n_max: u32,
    /// Append the JSON lines to this file as well.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run only these claims.
    #[arg(long = "claim")]
    claims: Vec<String>,
}

#[derive(Subcommand)]
enum MamuCmd {
    /// Bounded check of P^{⊗n}(χ_n) >= 0 for n = 1..=n-max.
    Decide {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value_t = 3)]
        n_max: u32,
    },
    /// Checks τ_n(C) = P^{⊗n}(χ_n) on a given or seeded random MPO.
    VerifyReduction {
        #[arg(long)]
        mpo: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        n_max: u32,
        /// Bond dimension s of random instances (a perfect square).
        #[arg(long, default_value_t = 9)]
        s: usize,
        /// Number of matrices t of random instances.
        #[arg(long, default_value_t = 9)]
        t: usize,
        /// Random instances to check, seeded consecutively.
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
}

#[derive(Subcommand)]
enum MpoCmd {
    /// Bounded check that every tr(C_{i1} ⋯ C_{in}) is nonnegative.
    Decide {
        #[arg(long)]
        mpo: PathBuf,
        #[arg(long, default_value_t = 3)]
        n_max: u32,
    },
}

#[derive(Subcommand)]
enum ConstructCmd {
    /// Choi matrix of the rank-deficient separable example.
    Mu16 {
        #[arg(long, default_value_t = 3)]
        d1: usize,
        #[arg(long, default_value_t = 3)]
        d2: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also report rank, kernel, PPT and the ε-perturbation verdicts.
        #[arg(long)]
        check: bool,
    },
    /// Filter, twirl and normalise; compare with the closed form.
    RhoEta {
        /// Parameter as text in e, e.g. "e" or "1/10".
        #[arg(long, default_value = "e")]
        eta: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact psd and NPT regions of the closed form and the computed family.
    Thresholds,
    /// γ(X) = (X + Xᵀ)/2.
    Gamma {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Non-positive map whose MaMu images are all psd.
    Counterexample {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum LayersCmd {
    /// Cofinite sign of a layered scalar file.
    Sign {
        #[arg(long)]
        file: PathBuf,
    },
    /// Standard vs layerwise inner product of x ± εy.
    InnerProduct {
        #[arg(long, default_value = "1/10")]
        eps: String,
        #[arg(long, default_value_t = 10_000)]
        cutoff: u64,
    },
    /// Layered l²-tsp witness over a window of layers.
    L2Witness {
        #[arg(long, default_value_t = 2)]
        m_max: u32,
        #[arg(long, default_value_t = 2)]
        lo: u64,
        #[arg(long, default_value_t = 5)]
        hi: u64,
        #[arg(long, default_value_t = 200)]
        budget: usize,
    },
}

enum Fail {
    /// Bad flags or input: exit 3.
    Input(String),
    /// Computation error: exit 1, or 2 for resource caps.
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::Json(_)
            | Error::InvalidArgument(_)
            | Error::DimensionMismatch(_)
            | Error::DimensionTooSmall(_)
            | Error::NotHermitian { .. }
            | Error::NotPerfectSquare(_) => Fail::Input(e.to_string()),
            other => Fail::Core(other),
        }
    }
}

type Res<T> = Result<T, Fail>;

/// What a command produced: its exit code, the JSON report, and a text
/// rendering for `--human`.
struct Report {
    code: u8,
    json: Value,
    human: String,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Res<T> {
    let text = fs::read_to_string(path).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Fail::Input(format!(
            "{}:{}:{}: {}",
            path.display(),
            e.line(),
            e.column(),
            e
        ))
    })
}

fn write_json(path: &Path, v: &impl serde::Serialize) -> Res<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Fail::Core(e.into()))?;
    fs::write(path, text + "\n").map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

fn parse_eps(flag: &str, s: &str) -> Res<EpsRational> {
    EpsRational::parse(s).map_err(|e| Fail::Input(format!("--{flag} {s:?}: {e}")))
}

fn to_value(v: &impl serde::Serialize) -> Value {
    serde_json::to_value(v).expect("reports serialise")
}

fn psd_text(v: &PsdVerdict) -> String {
    match (&v.witness, &v.value) {
        (Some(w), Some(x)) => {
            let w: Vec<String> = w.iter().map(|z| z.to_string()).collect();
            format!("NotPSD\nwitness: [{}]\n<v|M|v> = {x}", w.join(", "))
        }
        _ => "PSD".into(),
    }
}

fn cmd_psd(file: &Path) -> Res<Report> {
    // a Choi file wraps the matrix with its dims; parse the concrete shape
    // from the text so errors keep their position
    let raw: Value = read_json(file)?;
    let m = if raw.get("matrix").is_some() {
        read_json::<ChoiMatrix>(file)?.matrix
    } else {
        read_json::<EpsMatrix>(file)?
    };
    let v = m.psd_check()?;
    Ok(Report {
        code: if v.is_psd() { 0 } else { 1 },
        json: to_value(&v),
        human: psd_text(&v),
    })
}

fn cmd_choi(map: &Path, search: bool, budget: usize, seed: u64) -> Res<Report> {
    let p: MapDecomposition = read_json(map)?;
    let c = choi_from_decomposition(&p);
    let cp = is_cp(&p)?;
    let cocp = is_cocp(&p)?;
    let eb = eb_witness_check(&p)?;
    let positivity = if search {
        let b = SearchBudget::default().with_restarts(budget).with_seed(seed);
        Some(positive_map_search(&p, &b)?)
    } else {
        None
    };
    let mut human = format!(
        "Choi matrix {}x{} (out {} | in {})\nCP: {}\ncoCP: {}\nEB: {}",
        c.matrix.rows(),
        c.matrix.cols(),
        c.dims.da,
        c.dims.db,
        if cp.is_psd() { "yes" } else { "no" },
        if cocp.is_psd() { "yes" } else { "no" },
        if eb == EbStatus::Witnessed { "witnessed" } else { "not witnessed" },
    );
    if let Some(v) = &positivity {
        human += &format!("\npositivity search: {:?} (best {:?})", v.status, v.value);
    }
    Ok(Report {
        code: 0,
        json: json!({"choi": c, "cp": cp, "cocp": cocp, "eb": eb, "positivity_search": positivity}),
        human,
    })
}

fn verdict_text(v: &LoopVerdict) -> String {
    match v {
        LoopVerdict::NoViolationUpTo { n_max } => format!("NoViolation up to n = {n_max}"),
        LoopVerdict::Violation { n, tuple, value, .. } => {
            let mut s = format!("Violation at n = {n}");
            if let Some(t) = tuple {
                let t: Vec<String> = t.iter().map(|x| x.to_string()).collect();
                s += &format!(", tuple ({})", t.join(","));
            }
            if let Some(x) = value {
                s += &format!(", value {x}");
            }
            s
        }
    }
}

fn image_summary(n: usize, img: &MamuImage) -> Value {
    match img {
        MamuImage::Scalar { value, dim } => json!({"n": n, "form": "scalar", "value": value, "dim": dim}),
        MamuImage::Diagonal(d) if d.values.len() <= 64 => json!({"n": n, "form": "diagonal", "values": d.values}),
        MamuImage::Diagonal(d) => json!({"n": n, "form": "diagonal", "dim": d.values.len()}),
        MamuImage::Dense(m) => json!({"n": n, "form": "dense", "dim": m.rows()}),
    }
}

fn cmd_mamu_decide(map: &Path, n_max: u32, max_dim: usize) -> Res<Report> {
    let p: MapDecomposition = read_json(map)?;
    let (v, images) = bounded_tsp_mamu(&p, n_max, max_dim)?;
    let levels: Vec<Value> = images.iter().enumerate().map(|(k, i)| image_summary(k + 1, i)).collect();
    Ok(Report {
        code: if v.is_violation() { 1 } else { 0 },
        human: verdict_text(&v),
        json: json!({"result": v, "levels": levels}),
    })
}

fn cmd_verify_reduction(
    mpo: Option<&Path>,
    n_max: u32,
    (s, t, count): (usize, usize, u64),
    seed: u64,
    max_dim: usize,
) -> Res<Report> {
    let instances: Vec<(Option<u64>, MpoTensor)> = match mpo {
        Some(path) => vec![(None, read_json(path)?)],
        None => (0..count)
            .map(|k| {
                let sd = seed.wrapping_add(k);
                (Some(sd), random_mpo(sd, s, t, 3))
            })
            .collect(),
    };
    let mut runs = Vec::new();
    let mut human = Vec::new();
    let mut holds = true;
    for (sd, c) in &instances {
        let r = verify_reduction(c, n_max, max_dim)?;
        holds &= r.holds;
        human.push(match &r.first_discrepancy {
            None => format!("holds for n <= {n_max} (dense cross-check at n in {:?})", r.dense_checked),
            Some(d) => format!("fails at n = {}, tuple {:?}: tau {} vs mamu {}", d.n, d.tuple, d.tau, d.mamu),
        });
        runs.push(json!({"seed": sd, "report": r}));
    }
    Ok(Report {
        code: if holds { 0 } else { 1 },
        json: json!({"holds": holds, "n_max": n_max, "runs": runs}),
        human: human.join("\n"),
    })
}

fn cmd_mpo_decide(mpo: &Path, n_max: u32) -> Res<Report> {
    let c: MpoTensor = read_json(mpo)?;
    let v = bounded_positive_mpo(&c, n_max)?;
    Ok(Report {
        code: if v.is_violation() { 1 } else { 0 },
        human: verdict_text(&v),
        json: to_value(&v),
    })
}

fn emit_or_write(out: Option<&Path>, v: &impl serde::Serialize, what: &str) -> Res<Report> {
    match out {
        Some(p) => {
            write_json(p, v)?;
            Ok(Report {
                code: 0,
                json: json!({"wrote": p.display().to_string(), "object": what}),
                human: format!("wrote {what} to {}", p.display()),
            })
        }
        None => Ok(Report {
            code: 0,
            json: to_value(v),
            human: serde_json::to_string_pretty(v).expect("serialisable"),
        }),
    }
}

fn cmd_construct(cmd: &ConstructCmd) -> Res<Report> {
    match cmd {
        ConstructCmd::Mu16 { d1, d2, out, check } => {
            let c = mu16_choi(*d1, *d2)?;
            if !check {
                return emit_or_write(out.as_deref(), &c, "mu16 Choi matrix");
            }
            if let Some(p) = out {
                write_json(p, &c)?;
            }
            let props = verify_p_properties(&c, None)?;
            let (shifted, shifted_tb) = statement2_check(&c)?;
            Ok(Report {
                code: 0,
                human: format!(
                    "rank {} of {}\nPPT: {}\nC - e1: {}\nC^TB - e1: {}",
                    props.p2.rank,
                    c.matrix.rows(),
                    if props.ppt.is_psd() { "yes" } else { "no" },
                    psd_text(&shifted),
                    psd_text(&shifted_tb)
                ),
                json: json!({"properties": props, "shifted": shifted, "shifted_tb": shifted_tb}),
            })
        }
        ConstructCmd::RhoEta { eta, out } => {
            let eta = parse_eps("eta", eta)?;
            let r = rho_pipeline_at(&eta)?;
            if let Some(p) = out {
                write_json(p, &r.rho)?;
            }
            let human = format!(
                "alpha = {}\nbeta = {}\nclosed form: alpha = {}, beta = {}\nmatches closed form: {}\nequivalent eta: {}\ntrace one: {}\npsd: {}\nNPT: {}\nshadow PPT: {}",
                r.alpha,
                r.beta,
                r.closed_form_alpha,
                r.closed_form_beta,
                r.matches_closed_form,
                r.equivalent_eta.as_ref().map_or("-".into(), |e| e.to_string()),
                r.trace_one,
                r.psd.is_psd(),
                !r.npt.is_psd(),
                r.shadow_ppt.is_psd(),
            );
            Ok(Report {
                code: if r.matches_closed_form { 0 } else { 1 },
                json: to_value(&r),
                human,
            })
        }
        ConstructCmd::Thresholds => {
            let a = closed_form_thresholds()?;
            let b = pipeline_thresholds()?;
            let line = |r: &tsp_core::constructions::ThresholdReport| {
                format!("{}: psd on {}, NPT on {}", r.family, r.psd_set, r.npt_set)
            };
            Ok(Report {
                code: 0,
                human: format!("{}\n{}", line(&a), line(&b)),
                json: json!([a, b]),
            })
        }
        ConstructCmd::Gamma { d, out } => emit_or_write(out.as_deref(), &gamma_map(*d)?, "gamma map"),
        ConstructCmd::Counterexample { d, out } => {
            emit_or_write(out.as_deref(), &counterexample_map(*d)?, "counterexample map")
        }
    }
}

fn cmd_layers(cmd: &LayersCmd, seed: u64, max_dim: usize) -> Res<Report> {
    match cmd {
        LayersCmd::Sign { file } => {
            let x: LayeredScalar = read_json(file)?;
            let v = seq_sign(&x);
            let m = magnitude(&x);
            Ok(Report {
                code: match v.status {
                    tsp_core::layers::FilterStatus::HoldsOnCofinite => 0,
                    tsp_core::layers::FilterStatus::FailsOnCofinite => 1,
                    tsp_core::layers::FilterStatus::Undetermined => 2,
                },
                human: format!("{}: {:?} (from layer {:?}); magnitude {:?}", v.predicate, v.status, v.from, m),
                json: json!({"verdict": v, "magnitude": m}),
            })
        }
        LayersCmd::InnerProduct { eps, cutoff } => {
            let e = parse_eps("eps", eps)?
                .as_rational()
                .ok_or_else(|| Fail::Input(format!("--eps {eps:?} must be rational")))?;
            let r = inner_product_counterexample(&e, *cutoff)?;
            Ok(Report {
                code: 0,
                human: format!(
                    "standard: {:.6} in [{}, {}]\nlayerwise: {:?}\ndisagreement: {}",
                    r.standard_value,
                    r.standard_lower,
                    r.standard_upper,
                    r.sequence_verdict.status,
                    r.disagreement
                ),
                json: to_value(&r),
            })
        }
        LayersCmd::L2Witness { m_max, lo, hi, budget } => {
            let b = SearchBudget::default().with_restarts(*budget).with_seed(seed);
            let r = l2_tsp_witness(*m_max, (*lo, *hi), &b, max_dim)?;
            Ok(Report {
                code: if r.passes() { 0 } else { 1 },
                human: format!(
                    "essential on every layer: {}\nno m-tsp violation found: {} ({} searches)",
                    r.essential,
                    r.m_tsp_evidence,
                    r.checks.len()
                ),
                json: to_value(&r),
            })
        }
    }
}

fn claim_line(r: &ClaimReport) -> String {
    let tag = match r.verdict {
        ClaimVerdict::Pass => "PASS",
        ClaimVerdict::Fail => "FAIL",
        ClaimVerdict::Inconclusive => "INCONCLUSIVE",
    };
    format!("{tag:<12} {:<24} {:>8} ms  {}", r.claim_id, r.runtime_ms, r.paper_anchor)
}

fn cmd_verify_paper(a: &VerifyArgs, seed: u64, max_dim: usize, human: bool) -> Res<u8> {
    for id in &a.claims {
        if !CLAIMS.iter().any(|(c, _)| c == id) {
            let known: Vec<&str> = CLAIMS.iter().map(|(c, _)| *c).collect();
            return Err(Fail::Input(format!("unknown claim {id:?}; known: {}", known.join(", "))));
        }
    }
    let cfg = ClaimConfig {
        seed,
        budget: SearchBudget::default().with_restarts(a.budget).with_seed(seed),
        heavy_restarts: a.heavy_restarts,
        n_max: a.n_max,
        max_dim,
    };
    let mut sink = match &a.out {
        Some(p) => Some(
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(|e| Fail::Input(format!("{}: {e}", p.display())))?,
        ),
        None => None,
    };
    let (mut failed, mut inconclusive) = (false, false);
    for (id, _) in CLAIMS.iter().filter(|(c, _)| a.claims.is_empty() || a.claims.iter().any(|x| x == c)) {
        let r = run_claim(id, &cfg)?;
        let line = serde_json::to_string(&r).expect("reports serialise");
        if human {
            println!("{}", claim_line(&r));
        } else {
            println!("{line}");
        }
        if let Some(f) = sink.as_mut() {
            writeln!(f, "{line}").map_err(|e| Fail::Input(e.to_string()))?;
        }
        failed |= r.verdict == ClaimVerdict::Fail;
        inconclusive |= r.verdict == ClaimVerdict::Inconclusive;
    }
    Ok(if failed {
        1
    } else if inconclusive {
        2
    } else {
        0
    })
}

fn run(cli: &Cli) -> Res<u8> {
    let human = cli.human;
    let report = match &cli.cmd {
        Cmd::VerifyPaper(a) => return cmd_verify_paper(a, cli.seed, cli.max_dim, human),
        Cmd::Psd { file } => cmd_psd(file)?,
        Cmd::Choi { map, search, budget } => cmd_choi(map, *search, *budget, cli.seed)?,
        Cmd::Mamu(MamuCmd::Decide { map, n_max }) => cmd_mamu_decide(map, *n_max, cli.max_dim)?,
        Cmd::Mamu(MamuCmd::VerifyReduction { mpo, n_max, s, t, count }) => {
            cmd_verify_reduction(mpo.as_deref(), *n_max, (*s, *t, *count), cli.seed, cli.max_dim)?
        }
        Cmd::Mpo(MpoCmd::Decide { mpo, n_max }) => cmd_mpo_decide(mpo, *n_max)?,
        Cmd::Construct(c) => cmd_construct(c)?,
        Cmd::Layers(c) => cmd_layers(c, cli.seed, cli.max_dim)?,
    };
    if human {
        println!("{}", report.human);
    } else {
        println!("{}", report.json);
    }
    Ok(report.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Fail::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Fail::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::ResourceLimit { .. }) { 2 } else { 1 })
        }
    }
}
