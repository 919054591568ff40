use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use qvar::analyticity::{self, AnalyticityOptions, NumericalRangeCheck, RittEstimate};
use qvar::experiments::{
    self, BlockSpec, ConvergenceMode, ExperimentConfig, FamilyKind, Kernel, NormMode, OperatorFamilySpec, Telescoping,
    TelescopingResult, TransferenceResult,
};
use qvar::lp::{self, OperatorFlags};
use qvar::semigroup::{self, AnalyticProfile, SubordinationMethod, SubordinationSpec};
use qvar::variation::{self, vq_prefix_norms};
use qvar::{io, Error, LpVector, NormEstimate, Result, VariationExponent};

use crate::args::*;
use crate::source::{load_base, load_generator, load_operator};

type Table = (Vec<&'static str>, Vec<Vec<f64>>);

/// JSON to `--output` or stdout; the table to `--csv` when asked for.
fn emit<T: Serialize>(out: &Output, report: &T, table: Option<Table>) -> Result<()> {
    match &out.output {
        Some(path) => io::write_json(path, report)?,
        None => print!("{}", io::to_json(report)?),
    }
    write_table(out.csv.as_deref(), table)
}

fn write_table(path: Option<&Path>, table: Option<Table>) -> Result<()> {
    match (path, table) {
        (None, _) => Ok(()),
        (Some(p), Some((header, rows))) => io::write_csv(p, &header, &rows),
        (Some(_), None) => Err(Error::Input("--csv is not available for this command".into())),
    }
}

fn parse_blocks(s: &str) -> Result<BlockSpec> {
    match s.trim() {
        "singletons" => Ok(BlockSpec::Singletons),
        "dyadic" => Ok(BlockSpec::Dyadic),
        list => list
            .split(',')
            .map(|b| b.trim().parse::<usize>().map_err(|_| Error::Input(format!("bad block boundary {b:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(BlockSpec::Explicit),
    }
}

#[derive(Serialize)]
struct ScalarReport {
    input: String,
    length: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    blocks: Option<Vec<usize>>,
    value: f64,
}

/// Scalar commands print the value; the JSON record only goes to `--output`.
fn emit_scalar(out: &Output, report: &ScalarReport, table: Option<Table>) -> Result<()> {
    println!("{}", report.value);
    if let Some(path) = &out.output {
        io::write_json(path, report)?;
    }
    write_table(out.csv.as_deref(), table)
}

pub fn vnorm(a: &VnormArgs) -> Result<()> {
    let seq = io::read_sequence(&a.input)?;
    let q = VariationExponent::new(a.q)?;
    let prefix = vq_prefix_norms(seq.samples(), q);
    let value = *prefix.last().expect("sequences are nonempty");
    let rows = prefix.iter().enumerate().map(|(i, v)| vec![i as f64, *v]).collect();
    let report = ScalarReport {
        input: a.input.display().to_string(),
        length: seq.len(),
        q: Some(a.q),
        tau: None,
        blocks: None,
        value,
    };
    emit_scalar(&a.out, &report, Some((vec!["m", "vq_prefix"], rows)))
}

pub fn onorm(a: &OnormArgs) -> Result<()> {
    let seq = io::read_sequence(&a.input)?;
    let blocks = parse_blocks(&a.blocks)?.partition(seq.len() - 1)?;
    let value = variation::oscillation_norm(&seq, &blocks)?;
    let report = ScalarReport {
        input: a.input.display().to_string(),
        length: seq.len(),
        q: None,
        tau: None,
        blocks: Some(blocks.boundaries().to_vec()),
        value,
    };
    emit_scalar(&a.out, &report, None)
}

pub fn jumps(a: &JumpsArgs) -> Result<()> {
    let seq = io::read_sequence(&a.input)?;
    let n = variation::jump_count(&seq, a.tau)?;
    let report = ScalarReport {
        input: a.input.display().to_string(),
        length: seq.len(),
        q: None,
        tau: Some(a.tau),
        blocks: None,
        value: n as f64,
    };
    emit_scalar(&a.out, &report, None)
}

#[derive(Serialize)]
struct OpnormReport {
    operator_id: String,
    dim: usize,
    p: f64,
    norm: NormEstimate,
    regular_norm: NormEstimate,
    flags: OperatorFlags,
}

pub fn opnorm(a: &OpnormArgs) -> Result<()> {
    let (t, id) = load_operator(&a.source)?;
    let report = OpnormReport {
        operator_id: id,
        dim: t.dim(),
        p: a.p,
        norm: lp::operator_pnorm(&t, a.p)?,
        regular_norm: lp::regular_norm(&t, a.p)?,
        flags: t.flags(),
    };
    emit(&a.out, &report, None)
}

pub fn analytic(a: &AnalyticArgs) -> Result<()> {
    let (t, id) = load_operator(&a.source)?;
    let n_max = match (a.n_max, a.source.op.is_some(), a.source.n) {
        (Some(n), _, _) => n,
        (None, true, Some(n)) => n,
        _ => AnalyticityOptions::default().n_max,
    };
    let opts = AnalyticityOptions { p: a.p, n_max, ritt_radii: a.radii.clone(), angles_per_radius: a.angles };
    let report = analyticity::analyze(&t, &id, &opts)?;
    let rows = report
        .diff_profile
        .iter()
        .zip(&report.diff_profile_lower)
        .enumerate()
        .map(|(i, (u, l))| vec![(i + 1) as f64, *l, *u])
        .collect();
    emit(&a.out, &report, Some((vec!["n", "lower", "upper"], rows)))
}

#[derive(Serialize)]
struct RittReport {
    operator_id: String,
    p: f64,
    #[serde(flatten)]
    ritt: RittEstimate,
}

pub fn ritt(a: &RittArgs) -> Result<()> {
    let (t, id) = load_operator(&a.source)?;
    let ritt = analyticity::ritt_resolvent_sup(&t, a.p, &a.radii, a.angles)?;
    emit(&a.out, &RittReport { operator_id: id, p: a.p, ritt }, None)
}

#[derive(Serialize)]
struct NrangeReport {
    operator_id: String,
    gamma: f64,
    #[serde(flatten)]
    check: NumericalRangeCheck,
    /// Smallest Stolz constant of the spectrum; absent if the eigenproblem was refused.
    #[serde(with = "qvar::serde_ext::extended_opt")]
    stolz_k: Option<f64>,
    gamma_min: Option<f64>,
}

pub fn nrange(a: &NrangeArgs) -> Result<()> {
    let (t, id) = load_operator(&a.source)?;
    let check = analyticity::numerical_range_check(&t, a.gamma)?;
    let stolz = match analyticity::stolz_spectrum_check(&t) {
        Ok(s) => Some(s),
        Err(Error::Degeneracy(_)) => None,
        Err(e) => return Err(e),
    };
    let report = NrangeReport {
        operator_id: id,
        gamma: a.gamma,
        check,
        stolz_k: stolz.as_ref().map(|s| s.k_min),
        gamma_min: stolz.and_then(|s| s.gamma_min),
    };
    emit(&a.out, &report, None)
}

#[derive(Serialize)]
struct SemigroupReport {
    operator_id: String,
    p: f64,
    markov: bool,
    #[serde(flatten)]
    profile: AnalyticProfile,
}

pub fn semigroup(a: &SemigroupArgs) -> Result<()> {
    if a.per_decade == 0 || a.hi_exp < a.lo_exp {
        return Err(Error::Parameter("time grid needs lo-exp <= hi-exp and per-decade >= 1".into()));
    }
    let (g, id) = load_generator(&a.source)?;
    let grid = semigroup::log_grid(a.lo_exp, a.hi_exp, a.per_decade);
    let profile = semigroup::analytic_profile(&g, a.p, &grid)?;
    emit(&a.out, &SemigroupReport { operator_id: id, p: a.p, markov: g.is_markov(), profile }, None)
}

#[derive(Serialize)]
struct SubordinateReport {
    operator_id: String,
    alpha: f64,
    t: f64,
    method: SubordinationMethod,
    nodes_used: usize,
    tail_mass: f64,
    weight_sum: f64,
    quadrature_error: f64,
    p: f64,
    regular_norm: NormEstimate,
    matrix: Vec<Vec<Complex64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<AnalyticProfile>,
}

pub fn subordinate(a: &SubordinateArgs) -> Result<()> {
    let (g, id) = load_generator(&a.source)?;
    let method = match a.method {
        Method::Spectral => SubordinationMethod::Spectral,
        Method::Quadrature => SubordinationMethod::Quadrature,
    };
    let mut spec = SubordinationSpec::new(a.alpha, a.t, method)?;
    spec.quadrature_nodes = a.nodes;
    let s = semigroup::subordinate(&g, &spec)?;
    let profile = if a.profile {
        let f = semigroup::fractional_generator(&g, a.alpha)?;
        Some(semigroup::analytic_profile(&f, a.p, &semigroup::default_time_grid())?)
    } else {
        None
    };
    let m = s.operator.matrix();
    let report = SubordinateReport {
        operator_id: id,
        alpha: a.alpha,
        t: a.t,
        method,
        nodes_used: s.nodes_used,
        tail_mass: s.tail_mass,
        weight_sum: s.weight_sum,
        quadrature_error: s.quadrature_error,
        p: a.p,
        regular_norm: lp::regular_norm(&s.operator, a.p)?,
        matrix: (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect(),
        profile,
    };
    emit(&a.out, &report, None)
}

fn family_kind(th: Theorem, m: u32) -> FamilyKind {
    match th {
        Theorem::Averages | Theorem::Oscillation | Theorem::Jumps => FamilyKind::ErgodicAverages,
        Theorem::Powers => FamilyKind::Powers,
        Theorem::Differences => FamilyKind::Differences { m },
        Theorem::ContinuousAverages => FamilyKind::ContinuousAverages,
        Theorem::ContinuousPowers => FamilyKind::ContinuousPowers,
    }
}

fn build_family(th: Theorem, src: &GeneratorSource, s: &SearchArgs) -> Result<OperatorFamilySpec> {
    let kind = family_kind(th, s.m);
    let (base, id) = load_base(src, kind.is_continuous())?;
    let fam = OperatorFamilySpec::new(kind, base, id)?;
    if kind.is_continuous() {
        fam.with_time_step(s.dt)
    } else {
        Ok(fam)
    }
}

fn config(s: &SearchArgs, norm: NormMode, truncations: Vec<usize>) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(s.p, norm, truncations, s.seed);
    cfg.sample_budget = s.budget;
    cfg.ascent_steps = s.ascent_steps;
    cfg
}

pub fn verify(a: &VerifyArgs) -> Result<()> {
    let fam = build_family(a.theorem, &a.source, &a.search)?;
    let norm = match a.theorem {
        Theorem::Oscillation => NormMode::Oscillation { partition: parse_blocks(&a.search.blocks)? },
        _ => NormMode::Variation { q: a.q },
    };
    let cfg = config(&a.search, norm, a.truncations.clone());
    let report = experiments::empirical_constant(&fam, &cfg)?;
    let rows = cfg.truncations.iter().zip(&report.constants).map(|(m, c)| vec![*m as f64, *c]).collect();
    emit(&a.out, &report, Some((vec!["truncation", "constant"], rows)))
}

pub fn sweep(a: &SweepArgs) -> Result<()> {
    if matches!(a.theorem, Theorem::Oscillation | Theorem::Jumps) {
        return Err(Error::Input("sweep needs a family preset: averages, powers, differences, continuous-*".into()));
    }
    let fam = build_family(a.theorem, &a.source, &a.search)?;
    let q0 = a.qs.first().copied().ok_or_else(|| Error::Input("--qs must be nonempty".into()))?;
    let cfg = config(&a.search, NormMode::Variation { q: q0 }, vec![a.truncation]);
    let o2 = if a.o2 { Some(parse_blocks(&a.search.blocks)?) } else { None };
    let report = experiments::q_sweep(&fam, &cfg, &a.qs, o2)?;
    let rows = report.rows.iter().map(|r| vec![r.q, r.constant]).collect();
    emit(&a.out, &report, Some((vec!["q", "constant"], rows)))
}

#[derive(Serialize)]
struct ConvergenceReport {
    operator_id: String,
    mode: ConvergenceMode,
    schedule: Vec<f64>,
    distances: Vec<f64>,
}

pub fn convergence(a: &ConvergenceArgs) -> Result<()> {
    let mode = match a.mode {
        ConvergenceModeArg::Powers => ConvergenceMode::Powers,
        ConvergenceModeArg::Averages => ConvergenceMode::Averages,
        ConvergenceModeArg::ContinuousPowers => ConvergenceMode::ContinuousPowers,
        ConvergenceModeArg::ContinuousAverages => ConvergenceMode::ContinuousAverages,
        ConvergenceModeArg::TToZero => ConvergenceMode::TToZero,
    };
    let continuous = !matches!(mode, ConvergenceMode::Powers | ConvergenceMode::Averages);
    let (base, id) = load_base(&a.source, continuous)?;
    let space = match &base {
        experiments::FamilyBase::Discrete(t) => t.space().clone(),
        experiments::FamilyBase::Continuous(g) => g.space().clone(),
    };
    let x = match &a.input {
        Some(path) => LpVector::new(io::read_sequence(path)?.samples().to_vec(), space)?,
        None => {
            let mut e = vec![0.0; space.size()];
            e[0] = 1.0;
            LpVector::from_real(&e, space)?
        }
    };
    let schedule = match &a.schedule {
        Some(s) => s.clone(),
        None if mode == ConvergenceMode::TToZero => {
            experiments::dyadic_schedule(a.k_max).into_iter().map(|s| 1.0 / s).collect()
        }
        None => experiments::dyadic_schedule(a.k_max),
    };
    let distances = experiments::pointwise_convergence(&base, &x, mode, &schedule)?;
    let rows = schedule.iter().zip(&distances).map(|(s, d)| vec![*s, *d]).collect();
    let report = ConvergenceReport { operator_id: id, mode, schedule, distances };
    emit(&a.out, &report, Some((vec!["schedule", "distance"], rows)))
}

/// Relative defect accepted for the telescoping identities.
const IDENTITY_TOL: f64 = 1e-10;

#[derive(Serialize)]
#[serde(untagged)]
enum IdentityReport {
    Telescoping {
        operator_id: String,
        #[serde(flatten)]
        identity: Telescoping,
        #[serde(flatten)]
        result: TelescopingResult,
        relative_defect: f64,
        ok: bool,
    },
    Transference {
        identity: &'static str,
        n: usize,
        kernel: Kernel,
        #[serde(flatten)]
        result: TransferenceResult,
    },
}

pub fn identity_check(a: &IdentityArgs) -> Result<()> {
    let report = match a.identity {
        IdentityName::Transference => {
            let n = a.source.n.ok_or_else(|| Error::Input("transference needs --N".into()))?;
            let offsets = a.offsets.clone().ok_or_else(|| Error::Input("transference needs --offsets".into()))?;
            let values = a.values.clone().ok_or_else(|| Error::Input("transference needs --values".into()))?;
            let kernel = Kernel::new(offsets, values)?;
            let result = experiments::transference_check_p2(&kernel, n)?;
            IdentityReport::Transference { identity: "transference", n, kernel, result }
        }
        which => {
            let (t, id) = load_operator(&a.source)?;
            let identity = if which == IdentityName::TelescopingSum {
                Telescoping::Sum { n: a.small_n, big_n: a.big_n, m: a.m }
            } else {
                Telescoping::Weighted { n: a.small_n, m: a.m }
            };
            let result = experiments::telescoping_check(&t, identity)?;
            let rel = result.relative();
            IdentityReport::Telescoping { operator_id: id, identity, result, relative_defect: rel, ok: rel <= IDENTITY_TOL }
        }
    };
    emit(&a.out, &report, None)
}
