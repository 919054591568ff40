//! Empirical lower estimates of `sup_x ‖(F_n x)_n‖_{L^p(v^q)} / ‖x‖_p` over truncations.

use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, real, CMat, ZERO};
use crate::lp::{lp_norm_of_moduli, lp_norm_raw, MatrixOperator};
use crate::par;
use crate::semigroup::GeneratorModel;
use crate::variation::{jump_count_unchecked, oscillation_unchecked, vq_prefix_norms, BlockPartition, VariationExponent};

pub const DEFAULT_TIME_STEP: f64 = 0.25;
pub const FD_STEP: f64 = 1e-4;
pub const MIN_RELATIVE_GAIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// `M_n(T)`
    ErgodicAverages,
    /// `T^n`
    Powers,
    /// `n^m T^n (T − I)^m`
    Differences { m: u32 },
    /// `M_t` on the grid `t_k = k·dt`
    ContinuousAverages,
    /// `T_t` on the grid `t_k = k·dt`
    ContinuousPowers,
    /// `t^m A^m T_t` on the grid `t_k = k·dt`
    DerivativeFamily { m: u32 },
}

impl FamilyKind {
    pub fn is_continuous(self) -> bool {
        matches!(self, FamilyKind::ContinuousAverages | FamilyKind::ContinuousPowers | FamilyKind::DerivativeFamily { .. })
    }
}

#[derive(Debug, Clone)]
pub enum FamilyBase {
    Discrete(MatrixOperator),
    Continuous(GeneratorModel),
}

impl FamilyBase {
    pub fn weights(&self) -> &[f64] {
        match self {
            FamilyBase::Discrete(t) => t.space().weights(),
            FamilyBase::Continuous(g) => g.space().weights(),
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            FamilyBase::Discrete(t) => t.is_real(),
            FamilyBase::Continuous(g) => g.is_real(),
        }
    }

    pub fn dim(&self) -> usize {
        self.weights().len()
    }
}

#[derive(Debug, Clone)]
pub struct OperatorFamilySpec {
    pub kind: FamilyKind,
    pub base: FamilyBase,
    pub operator_id: String,
    /// Grid spacing for continuous kinds.
    pub time_step: f64,
}

impl OperatorFamilySpec {
    pub fn new(kind: FamilyKind, base: FamilyBase, operator_id: impl Into<String>) -> Result<Self> {
        match (&base, kind.is_continuous()) {
            (FamilyBase::Discrete(_), true) => {
                return Err(Error::Input(format!("{kind:?} needs a generator, got a matrix operator")))
            }
            (FamilyBase::Continuous(_), false) => {
                return Err(Error::Input(format!("{kind:?} needs a matrix operator, got a generator")))
            }
            _ => {}
        }
        Ok(Self { kind, base, operator_id: operator_id.into(), time_step: DEFAULT_TIME_STEP })
    }

    pub fn with_time_step(mut self, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
        }
        self.time_step = dt;
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "blocks", content = "boundaries", rename_all = "snake_case")]
pub enum BlockSpec {
    Singletons,
    Dyadic,
    Explicit(Vec<usize>),
}

impl BlockSpec {
    pub fn partition(&self, last: usize) -> Result<BlockPartition> {
        match self {
            BlockSpec::Singletons => Ok(BlockPartition::singletons(last)),
            BlockSpec::Dyadic => Ok(BlockPartition::dyadic(last)),
            BlockSpec::Explicit(b) => BlockPartition::new(b.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NormMode {
    Variation { q: f64 },
    Oscillation { partition: BlockSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub p: f64,
    pub norm: NormMode,
    pub truncations: Vec<usize>,
    pub sample_budget: usize,
    pub ascent_steps: usize,
    pub seed: u64,
    /// Relative drift below which the verdict is `stable`.
    pub stable_threshold: f64,
    /// Relative drift above which the verdict is `growing`.
    pub growing_threshold: f64,
}

impl ExperimentConfig {
    pub fn new(p: f64, norm: NormMode, truncations: Vec<usize>, seed: u64) -> Self {
        Self {
            p,
            norm,
            truncations,
            sample_budget: 500,
            ascent_steps: 20,
            seed,
            stable_threshold: 0.05,
            growing_threshold: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(Error::Parameter(format!("p must lie in (1, ∞), got {}", self.p)));
        }
        if let NormMode::Variation { q } = self.norm {
            if !(q.is_finite() && q > 2.0) {
                return Err(Error::Parameter(format!("v^q mode needs 2 < q < ∞, got {q}; use the o² mode for q = 2")));
            }
        }
        if self.truncations.is_empty() || self.truncations.iter().any(|&m| m < 2) {
            return Err(Error::Parameter("truncations must be nonempty and each >= 2".into()));
        }
        if self.truncations.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("truncations must be strictly increasing".into()));
        }
        if self.sample_budget == 0 {
            return Err(Error::Parameter("sample budget must be positive".into()));
        }
        if !(self.stable_threshold >= 0.0 && self.growing_threshold >= self.stable_threshold) {
            return Err(Error::Parameter("need 0 <= stable_threshold <= growing_threshold".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityVerdict {
    Stable,
    Growing,
    Inconclusive,
}

/// Pointwise jump bound `τ^q N(τ) ≤ ‖·‖_{v^q}^q` on the reported witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpCheck {
    pub taus: Vec<f64>,
    /// Largest `τ^q N / (v^q)^q` over atoms and τ.
    pub max_ratio: f64,
    /// `‖N^{1/q}‖_p ≤ C ‖x‖_p / τ` for every τ.
    pub lp_bound_holds: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub operator_id: String,
    pub family: FamilyKind,
    pub time_step: Option<f64>,
    pub config: ExperimentConfig,
    pub constants: Vec<f64>,
    pub drift: f64,
    pub verdict: StabilityVerdict,
    /// Maximizer at the largest truncation, normalized in `L^p`.
    pub witness: Vec<Complex64>,
    pub jump_check: Option<JumpCheck>,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, Copy)]
enum Averaging {
    None,
    Discrete,
    Continuous,
}

/// Produces `(F_n x)_{n ≤ len}` by repeated application of one step matrix.
struct Propagator {
    step: CMat,
    pre: Option<CMat>,
    averaging: Averaging,
    /// `n ↦ (n·scale)^m` weight, `None` for unit weights.
    weight: Option<(u32, f64)>,
}

impl Propagator {
    fn new(family: &OperatorFamilySpec) -> Self {
        let dt = family.time_step;
        match (&family.base, family.kind) {
            (FamilyBase::Discrete(t), kind) => {
                let m = t.matrix().clone();
                let dim = t.dim();
                match kind {
                    FamilyKind::ErgodicAverages => Self { step: m, pre: None, averaging: Averaging::Discrete, weight: None },
                    FamilyKind::Differences { m: order } => {
                        let shifted = &m - linalg::identity(dim);
                        let mut pre = linalg::identity(dim);
                        for _ in 0..order {
                            pre = &shifted * pre;
                        }
                        Self { step: m, pre: Some(pre), averaging: Averaging::None, weight: Some((order, 1.0)) }
                    }
                    _ => Self { step: m, pre: None, averaging: Averaging::None, weight: None },
                }
            }
            (FamilyBase::Continuous(g), kind) => {
                let a = g.matrix();
                let step = linalg::expm(&(a * real(dt)));
                match kind {
                    FamilyKind::ContinuousAverages => Self {
                        step,
                        pre: Some(linalg::phi1(&(a * real(dt)))),
                        averaging: Averaging::Continuous,
                        weight: None,
                    },
                    FamilyKind::DerivativeFamily { m: order } => {
                        let mut pre = linalg::identity(g.dim());
                        for _ in 0..order {
                            pre = a * pre;
                        }
                        Self { step, pre: Some(pre), averaging: Averaging::None, weight: Some((order, dt)) }
                    }
                    _ => Self { step, pre: None, averaging: Averaging::None, weight: None },
                }
            }
        }
    }

    /// Trajectory laid out per atom: `out[λ][n] = (F_n x)(λ)`, `n = 0..len`.
    fn trajectory(&self, x: &[Complex64], len: usize) -> Vec<Vec<Complex64>> {
        let dim = x.len();
        let mut out = vec![Vec::with_capacity(len); dim];
        let x0 = DVector::from_column_slice(x);
        let mut y = match &self.pre {
            Some(p) => p * &x0,
            None => x0.clone(),
        };
        let mut acc = DVector::from_element(dim, ZERO);
        let push = |out: &mut Vec<Vec<Complex64>>, v: &DVector<Complex64>, s: f64| {
            for (row, z) in out.iter_mut().zip(v.iter()) {
                row.push(z * s);
            }
        };
        for n in 0..len {
            if n > 0 {
                y = &self.step * &y;
            }
            match self.averaging {
                Averaging::None => {
                    let s = match self.weight {
                        Some((m, scale)) => (n as f64 * scale).powi(m as i32),
                        None => 1.0,
                    };
                    push(&mut out, &y, s);
                }
                Averaging::Discrete => {
                    acc += &y;
                    push(&mut out, &acc, 1.0 / (n as f64 + 1.0));
                }
                Averaging::Continuous => {
                    // M_{k dt} x = k^{-1} Σ_{j<k} T_dt^j φ(dt A) x, and M_0 = I
                    if n == 0 {
                        push(&mut out, &x0, 1.0);
                    } else {
                        push(&mut out, &acc, 1.0 / n as f64);
                    }
                }
            }
            if let Averaging::Continuous = self.averaging {
                acc += &y;
            }
        }
        out
    }
}

/// Evaluates the ratio for one input at every truncation at once.
struct Objective<'a> {
    prop: Propagator,
    weights: &'a [f64],
    p: f64,
    norm: &'a NormMode,
    truncations: &'a [usize],
    blocks: Option<BlockPartition>,
}

impl<'a> Objective<'a> {
    fn new(family: &'a OperatorFamilySpec, cfg: &'a ExperimentConfig) -> Result<Self> {
        let last = *cfg.truncations.last().expect("validated");
        let blocks = match &cfg.norm {
            NormMode::Oscillation { partition } => Some(partition.partition(last)?),
            NormMode::Variation { .. } => None,
        };
        Ok(Self {
            prop: Propagator::new(family),
            weights: family.base.weights(),
            p: cfg.p,
            norm: &cfg.norm,
            truncations: &cfg.truncations,
            blocks,
        })
    }

    fn len(&self) -> usize {
        self.truncations.last().expect("validated") + 1
    }

    fn pointwise(&self, traj: &[Vec<Complex64>]) -> Vec<Vec<f64>> {
        // per truncation, per atom
        let mut out = vec![Vec::with_capacity(traj.len()); self.truncations.len()];
        for row in traj {
            match self.norm {
                NormMode::Variation { q } => {
                    let pref = vq_prefix_norms(row, exponent(*q));
                    for (k, &m) in self.truncations.iter().enumerate() {
                        out[k].push(pref[m]);
                    }
                }
                NormMode::Oscillation { .. } => {
                    let blocks = self.blocks.as_ref().expect("set in o² mode");
                    for (k, &m) in self.truncations.iter().enumerate() {
                        out[k].push(oscillation_unchecked(&row[..=m], blocks));
                    }
                }
            }
        }
        out
    }

    fn eval(&self, x: &[Complex64]) -> Vec<f64> {
        let nx = lp_norm_raw(x, self.weights, self.p);
        if nx == 0.0 {
            return vec![0.0; self.truncations.len()];
        }
        let traj = self.prop.trajectory(x, self.len());
        self.pointwise(&traj)
            .into_iter()
            .map(|v| lp_norm_of_moduli(v.into_iter(), self.weights, self.p) / nx)
            .collect()
    }
}

fn exponent(q: f64) -> VariationExponent {
    VariationExponent::new(q).expect("validated exponent")
}

fn sample(rng: &mut ChaCha8Rng, dim: usize, complex: bool) -> Vec<Complex64> {
    (0..dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = if complex { rng.sample(StandardNormal) } else { 0.0 };
            Complex64::new(re, im)
        })
        .collect()
}

fn normalize(x: &mut [Complex64], weights: &[f64], p: f64) {
    let n = lp_norm_raw(x, weights, p);
    if n > 0.0 {
        for z in x.iter_mut() {
            *z /= n;
        }
    }
}

/// Finite-difference gradient ascent on the `L^p` unit sphere, with backtracking.
fn ascend(obj: &Objective, start: &[Complex64], target: usize, steps: usize, complex: bool) -> (Vec<Complex64>, Vec<f64>) {
    let w = obj.weights;
    let p = obj.p;
    let mut x = start.to_vec();
    normalize(&mut x, w, p);
    let mut vals = obj.eval(&x);
    let dim = x.len();
    let coords = if complex { 2 * dim } else { dim };
    let mut eta = 0.5;
    for _ in 0..steps {
        let f0 = vals[target];
        let mut grad = vec![0.0; coords];
        for (c, g) in grad.iter_mut().enumerate() {
            let mut xp = x.clone();
            if c < dim {
                xp[c].re += FD_STEP;
            } else {
                xp[c - dim].im += FD_STEP;
            }
            *g = (obj.eval(&xp)[target] - f0) / FD_STEP;
        }
        let gn = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if !(gn > 0.0 && gn.is_finite()) {
            break;
        }
        let mut improved = false;
        eta = (eta * 2.0f64).min(1.0);
        while eta > 1e-10 {
            let mut cand = x.clone();
            for (c, g) in grad.iter().enumerate() {
                let d = eta * g / gn;
                if c < dim {
                    cand[c].re += d;
                } else {
                    cand[c - dim].im += d;
                }
            }
            normalize(&mut cand, w, p);
            let cv = obj.eval(&cand);
            if cv[target] > f0 {
                let gain = (cv[target] - f0) / f0.max(f64::MIN_POSITIVE);
                x = cand;
                vals = cv;
                improved = gain >= MIN_RELATIVE_GAIN;
                break;
            }
            eta *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (x, vals)
}

fn verdict(constants: &[f64], cfg: &ExperimentConfig) -> (f64, StabilityVerdict) {
    let first = constants[0];
    let last = *constants.last().expect("nonempty");
    if constants.len() < 2 {
        return (0.0, StabilityVerdict::Inconclusive);
    }
    let drift = if first > 0.0 {
        last / first - 1.0
    } else if last > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let v = if drift < cfg.stable_threshold {
        StabilityVerdict::Stable
    } else if drift > cfg.growing_threshold {
        StabilityVerdict::Growing
    } else {
        StabilityVerdict::Inconclusive
    };
    (drift, v)
}

fn jump_check(obj: &Objective, x: &[Complex64], q: f64, constant: f64) -> JumpCheck {
    let traj = obj.prop.trajectory(x, obj.len());
    let vq: Vec<f64> = traj.iter().map(|row| *vq_prefix_norms(row, exponent(q)).last().unwrap()).collect();
    let top = vq.iter().copied().fold(0.0, f64::max);
    let taus: Vec<f64> = if top > 0.0 { [1.0, 0.5, 0.25, 0.1, 0.05, 0.01].iter().map(|f| f * top).collect() } else { Vec::new() };
    let nx = lp_norm_raw(x, obj.weights, obj.p);
    let mut max_ratio = 0.0f64;
    let mut holds = true;
    let mut lp_bound_holds = true;
    for &tau in &taus {
        let counts: Vec<usize> = traj.iter().map(|row| jump_count_unchecked(row, tau)).collect();
        for (&n, &v) in counts.iter().zip(&vq) {
            let lhs = tau.powf(q) * n as f64;
            let rhs = v.powf(q);
            if lhs > 0.0 {
                max_ratio = max_ratio.max(lhs / rhs);
            }
            holds &= lhs <= rhs * (1.0 + 1e-10);
        }
        let lhs = lp_norm_of_moduli(counts.iter().map(|&n| (n as f64).powf(1.0 / q)), obj.weights, obj.p);
        lp_bound_holds &= lhs <= constant * nx / tau * (1.0 + 1e-10);
    }
    JumpCheck { taus, max_ratio, lp_bound_holds, holds: holds && lp_bound_holds }
}

struct Search {
    constants: Vec<f64>,
    witness: Vec<Complex64>,
    /// Every witness the search produced with its values.
    pool: Vec<(Vec<Complex64>, Vec<f64>)>,
}

fn search(obj: &Objective, dim: usize, complex: bool, cfg: &ExperimentConfig) -> Search {
    let ids: Vec<u64> = (0..cfg.sample_budget as u64).collect();
    let mut pool: Vec<(Vec<Complex64>, Vec<f64>)> = par::map(&ids, |&i| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i + 1);
        let mut x = sample(&mut rng, dim, complex);
        normalize(&mut x, obj.weights, obj.p);
        let v = obj.eval(&x);
        (x, v)
    });
    let k = cfg.truncations.len();
    let starts: Vec<usize> = (0..k)
        .map(|t| {
            let mut best = 0;
            for (i, (_, v)) in pool.iter().enumerate() {
                if v[t] > pool[best].1[t] {
                    best = i;
                }
            }
            best
        })
        .collect();
    if cfg.ascent_steps > 0 {
        let targets: Vec<usize> = (0..k).collect();
        let ascended = par::map(&targets, |&t| ascend(obj, &pool[starts[t]].0, t, cfg.ascent_steps, complex));
        pool.extend(ascended);
    }
    let mut constants = vec![0.0f64; k];
    let mut witness_idx = 0;
    for (i, (_, v)) in pool.iter().enumerate() {
        for t in 0..k {
            constants[t] = constants[t].max(v[t]);
        }
        if v[k - 1] > pool[witness_idx].1[k - 1] {
            witness_idx = i;
        }
    }
    Search { constants, witness: pool[witness_idx].0.clone(), pool }
}

/// Estimates the family's constant at each truncation and classifies its growth.
pub fn empirical_constant(family: &OperatorFamilySpec, cfg: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    cfg.validate()?;
    let obj = Objective::new(family, cfg)?;
    let complex = !family.base.is_real();
    let found = search(&obj, family.base.dim(), complex, cfg);
    let (drift, verdict) = verdict(&found.constants, cfg);
    let last = *found.constants.last().expect("nonempty");
    let jump = match cfg.norm {
        NormMode::Variation { q } => Some(jump_check(&obj, &found.witness, q, last)),
        NormMode::Oscillation { .. } => None,
    };
    Ok(Report {
        operator_id: family.operator_id.clone(),
        family: family.kind,
        time_step: family.kind.is_continuous().then_some(family.time_step),
        config: cfg.clone(),
        constants: found.constants,
        drift,
        verdict,
        witness: found.witness,
        jump_check: jump,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// `2` for the o² row.
    pub q: f64,
    pub mode: String,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub operator_id: String,
    pub family: FamilyKind,
    pub truncation: usize,
    pub rows: Vec<SweepRow>,
    /// Constants nondecreasing along the `v^q` rows.
    pub monotone: bool,
    pub runtime_seconds: f64,
}

/// Constants at the largest truncation of `cfg` for each `q` in a strictly decreasing list.
///
/// Every witness found for any `q` is re-evaluated at every `q`, which makes
/// the table monotone by construction.
pub fn q_sweep(family: &OperatorFamilySpec, cfg: &ExperimentConfig, qs: &[f64], o2: Option<BlockSpec>) -> Result<SweepReport> {
    let start = Instant::now();
    if qs.is_empty() && o2.is_none() {
        return Err(Error::Parameter("q list is empty".into()));
    }
    if qs.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::Parameter("q list must be strictly decreasing".into()));
    }
    if let Some(q) = qs.iter().find(|q| !(q.is_finite() && **q > 2.0)) {
        return Err(Error::Parameter(format!("v^q mode needs q > 2, got {q}")));
    }
    let truncation = *cfg.truncations.iter().max().ok_or_else(|| Error::Parameter("no truncation given".into()))?;
    let complex = !family.base.is_real();
    let dim = family.base.dim();
    let cfgs: Vec<ExperimentConfig> = qs
        .iter()
        .map(|&q| ExperimentConfig { norm: NormMode::Variation { q }, truncations: vec![truncation], ..cfg.clone() })
        .collect();
    for c in &cfgs {
        c.validate()?;
    }
    let mut witnesses = Vec::new();
    for c in &cfgs {
        let obj = Objective::new(family, c)?;
        let found = search(&obj, dim, complex, c);
        // keep only the best few per q so the cross-evaluation stays cheap
        let mut pool = found.pool;
        pool.sort_by(|a, b| b.1[0].total_cmp(&a.1[0]));
        witnesses.extend(pool.into_iter().take(8).map(|(x, _)| x));
        witnesses.push(found.witness);
    }
    let mut rows = Vec::new();
    for c in &cfgs {
        let obj = Objective::new(family, c)?;
        let vals = par::map(&witnesses, |x| obj.eval(x)[0]);
        let constant = vals.into_iter().fold(0.0, f64::max);
        let NormMode::Variation { q } = c.norm else { unreachable!() };
        rows.push(SweepRow { q, mode: "vq".into(), constant });
    }
    let monotone = rows.windows(2).all(|w| w[1].constant >= w[0].constant);
    if let Some(blocks) = o2 {
        let c = ExperimentConfig { norm: NormMode::Oscillation { partition: blocks }, truncations: vec![truncation], ..cfg.clone() };
        c.validate()?;
        let obj = Objective::new(family, &c)?;
        let found = search(&obj, dim, complex, &c);
        rows.push(SweepRow { q: 2.0, mode: "o2".into(), constant: found.constants[0] });
    }
    Ok(SweepReport {
        operator_id: family.operator_id.clone(),
        family: family.kind,
        truncation,
        rows,
        monotone,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Value of the experiment ratio for one explicit input, at each truncation.
pub fn evaluate_witness(family: &OperatorFamilySpec, cfg: &ExperimentConfig, x: &[Complex64]) -> Result<Vec<f64>> {
    cfg.validate()?;
    if x.len() != family.base.dim() {
        return Err(Error::Input(format!("witness has {} entries, expected {}", x.len(), family.base.dim())));
    }
    Ok(Objective::new(family, cfg)?.eval(x))
}
