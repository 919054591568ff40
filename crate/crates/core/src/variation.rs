//! Sequence seminorms: strong q-variation, oscillation, and τ-jump counts.
//!
//! All routines work on finite sample lists. A finite tuple `(a_0, …, a_m)` is
//! identified with its constant extension, which contributes no increments,
//! so the truncated norm `v^q_m` is just [`vq_norm`] of the tuple.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest length accepted by [`vq_norm_bruteforce`].
pub const BRUTEFORCE_MAX_LEN: usize = 20;

/// Upper bound on the number of grid points [`dyadic_vq_profile`] will sample.
pub const DYADIC_MAX_POINTS: usize = 1 << 20;

/// A nonempty finite list of finite complex samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarSequence {
    samples: Vec<Complex64>,
}

impl ScalarSequence {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Input("sequence must contain at least one sample".into()));
        }
        if let Some(i) = samples.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Input(format!("sample {i} is not finite")));
        }
        Ok(Self { samples })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_real(&self) -> bool {
        self.samples.iter().all(|z| z.im == 0.0)
    }
}

/// Exponent `q ≥ 1` of a variation norm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct VariationExponent(f64);

impl VariationExponent {
    pub fn new(q: f64) -> Result<Self> {
        if !q.is_finite() || q < 1.0 {
            return Err(Error::Parameter(format!("variation exponent must be finite and >= 1, got {q}")));
        }
        Ok(Self(q))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    #[inline]
    pub(crate) fn pow(self, x: f64) -> f64 {
        let q = self.0;
        if q == 1.0 {
            x
        } else if q == 2.0 {
            x * x
        } else if q == 3.0 {
            x * x * x
        } else {
            x.powf(q)
        }
    }
}

/// Block boundaries `0 = n_0 < n_1 < …` used by the oscillation norm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    boundaries: Vec<usize>,
}

impl BlockPartition {
    pub fn new(boundaries: Vec<usize>) -> Result<Self> {
        if boundaries.first() != Some(&0) {
            return Err(Error::Input("block partition must start at index 0".into()));
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Input("block boundaries must be strictly increasing".into()));
        }
        Ok(Self { boundaries })
    }

    /// `0, 1, 2, …, last`: every block is a single step.
    pub fn singletons(last: usize) -> Self {
        Self { boundaries: (0..=last).collect() }
    }

    /// `0, 1, 2, 4, 8, …` up to `last`.
    pub fn dyadic(last: usize) -> Self {
        let mut b = vec![0];
        let mut k = 1;
        while k <= last {
            b.push(k);
            k *= 2;
        }
        Self { boundaries: b }
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// Boundaries that fall inside a sequence of `len` samples.
    pub(crate) fn restricted(&self, len: usize) -> impl Iterator<Item = usize> + '_ {
        self.boundaries.iter().copied().take_while(move |&b| b < len)
    }
}

/// Indices that may appear in an optimal chain. For real data an interior
/// point strictly inside a monotone run can always be moved to an end of the
/// run without decreasing the sum, since `y ↦ |c - y|^q` is convex.
fn chain_candidates(a: &[Complex64], real: bool) -> Vec<usize> {
    let m = a.len();
    if !real || m <= 2 {
        return (0..m).collect();
    }
    let mut k = vec![0];
    for i in 1..m - 1 {
        let left = a[i].re - a[i - 1].re;
        let right = a[i + 1].re - a[i].re;
        if left * right <= 0.0 {
            k.push(i);
        }
    }
    k
}

/// Candidates are grouped in blocks of this size for pruning.
const DP_BLOCK: usize = 32;

/// Summary of a block of finalized chain endpoints.
#[derive(Clone, Copy)]
struct BlockBound {
    emax: f64,
    re: (f64, f64),
    im: (f64, f64),
}

impl BlockBound {
    fn new(e: f64, z: Complex64) -> Self {
        Self { emax: e, re: (z.re, z.re), im: (z.im, z.im) }
    }

    fn add(&mut self, e: f64, z: Complex64) {
        self.emax = self.emax.max(e);
        self.re = (self.re.0.min(z.re), self.re.1.max(z.re));
        self.im = (self.im.0.min(z.im), self.im.1.max(z.im));
    }

    /// Upper bound on `E[i] + |z − a_i|^q` over the block.
    fn bound(&self, z: Complex64, q: VariationExponent) -> f64 {
        let dr = (z.re - self.re.0).max(self.re.1 - z.re);
        let di = (z.im - self.im.0).max(self.im.1 - z.im);
        self.emax + q.pow(dr.hypot(di))
    }
}

/// Strong q-variation of every prefix: entry `j` is `‖(a_0, …, a_j)‖_{v^q}`.
///
/// Dynamic program over chain endpoints with candidate compression for real
/// data; blocks of endpoints whose bound cannot beat the current best are skipped.
pub fn vq_prefix_norms(a: &[Complex64], q: VariationExponent) -> Vec<f64> {
    let m = a.len();
    if m == 0 {
        return Vec::new();
    }
    let real = a.iter().all(|z| z.im == 0.0);
    let cands = chain_candidates(a, real);
    let mut e_cand: Vec<f64> = Vec::with_capacity(cands.len());
    let mut blocks: Vec<BlockBound> = Vec::with_capacity(cands.len() / DP_BLOCK + 1);

    let anchor = q.pow(a[0].norm());
    let mut out = Vec::with_capacity(m);
    let mut best_overall = 0.0f64;
    let mut filled = 0usize;
    for j in 0..m {
        let mut best = 0.0f64;
        if j > 0 {
            let aj = a[j];
            for b in (0..blocks.len()).rev() {
                if blocks[b].bound(aj, q) <= best {
                    continue;
                }
                let lo = b * DP_BLOCK;
                let hi = (lo + DP_BLOCK).min(filled);
                for t in (lo..hi).rev() {
                    let v = e_cand[t] + q.pow((aj - a[cands[t]]).norm());
                    if v > best {
                        best = v;
                    }
                }
            }
        }
        best_overall = best_overall.max(best);
        out.push((anchor + best_overall).powf(1.0 / q.get()));
        if filled < cands.len() && cands[filled] == j {
            e_cand.push(best);
            if filled % DP_BLOCK == 0 {
                blocks.push(BlockBound::new(best, a[j]));
            } else {
                blocks.last_mut().expect("open block").add(best, a[j]);
            }
            filled += 1;
        }
    }
    out
}

/// Exact strong q-variation `‖a‖_{v^q}` of a finite sequence.
pub fn vq_norm(seq: &ScalarSequence, q: VariationExponent) -> f64 {
    *vq_prefix_norms(seq.samples(), q).last().expect("nonempty")
}

/// Exhaustive maximum over all `2^{m}` chains through index 0.
pub fn vq_norm_bruteforce(seq: &ScalarSequence, q: VariationExponent) -> Result<f64> {
    let a = seq.samples();
    if a.len() > BRUTEFORCE_MAX_LEN {
        return Err(Error::Parameter(format!(
            "brute force limited to {BRUTEFORCE_MAX_LEN} samples, got {}",
            a.len()
        )));
    }
    let rest = a.len() - 1;
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1u32 << rest) {
        let mut sum = q.pow(a[0].norm());
        let mut prev = 0usize;
        for bit in 0..rest {
            if mask & (1 << bit) != 0 {
                let idx = bit + 1;
                sum += q.pow((a[idx] - a[prev]).norm());
                prev = idx;
            }
        }
        best = best.max(sum);
    }
    Ok(best.powf(1.0 / q.get()))
}

fn diameter(block: &[Complex64]) -> f64 {
    if block.iter().all(|z| z.im == 0.0) {
        let (lo, hi) = block
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), z| (l.min(z.re), h.max(z.re)));
        return hi - lo;
    }
    let mut d = 0.0f64;
    for (i, x) in block.iter().enumerate() {
        for y in &block[i + 1..] {
            d = d.max((x - y).norm());
        }
    }
    d
}

/// Oscillation norm relative to a block partition.
///
/// When the last boundary precedes the final sample, the remaining samples
/// form one more block, matching the constant extension of the tuple.
pub fn oscillation_norm(seq: &ScalarSequence, blocks: &BlockPartition) -> Result<f64> {
    let a = seq.samples();
    let last = *blocks.boundaries().last().expect("partition nonempty");
    if last >= a.len() {
        return Err(Error::Input(format!(
            "block boundary {last} out of range for sequence of length {}",
            a.len()
        )));
    }
    Ok(oscillation_unchecked(a, blocks))
}

pub(crate) fn oscillation_unchecked(a: &[Complex64], blocks: &BlockPartition) -> f64 {
    let mut bounds: Vec<usize> = blocks.restricted(a.len()).collect();
    if *bounds.last().expect("starts at 0") < a.len() - 1 {
        bounds.push(a.len() - 1);
    }
    let mut sum = a[0].norm_sqr();
    for w in bounds.windows(2) {
        let d = diameter(&a[w[0]..=w[1]]);
        sum += d * d;
    }
    sum.sqrt()
}

/// Number of τ-jumps, by earliest-completion greedy.
pub fn jump_count(seq: &ScalarSequence, tau: f64) -> Result<usize> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Parameter(format!("tau must be positive, got {tau}")));
    }
    Ok(jump_count_unchecked(seq.samples(), tau))
}

pub(crate) fn jump_count_unchecked(a: &[Complex64], tau: f64) -> usize {
    let real = a.iter().all(|z| z.im == 0.0);
    let mut count = 0;
    let mut start = 0;
    let mut lo = a[0].re;
    let mut hi = a[0].re;
    let mut m = start + 1;
    while m < a.len() {
        let jumped = if real {
            (a[m].re - lo) > tau || (hi - a[m].re) > tau
        } else {
            a[start..m].iter().any(|&x| (a[m] - x).norm() > tau)
        };
        if jumped {
            count += 1;
            start = m;
            lo = a[m].re;
            hi = a[m].re;
        } else {
            lo = lo.min(a[m].re);
            hi = hi.max(a[m].re);
        }
        m += 1;
    }
    count
}

/// Dyadic approximants `φ_N` of the continuous `V^q` norm, `N = 1..=n_max`.
///
/// For each level the sampler is read on `{n 2^{-N} : n ≥ 1, n 2^{-N} ≤ t_max}`
/// and the supremum over starting offsets of the suffix `v^q` norm is taken.
/// Grids are nested, so the profile is nondecreasing; a running maximum
/// absorbs last-bit rounding differences.
pub fn dyadic_vq_profile<F>(sampler: F, t_max: f64, q: VariationExponent, n_max: u32) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Complex64,
{
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::Parameter(format!("t_max must be positive, got {t_max}")));
    }
    if n_max == 0 || n_max > 20 {
        return Err(Error::Parameter(format!("dyadic level must be in 1..=20, got {n_max}")));
    }
    let mut profile = Vec::with_capacity(n_max as usize);
    let mut running = 0.0f64;
    for level in 1..=n_max {
        let h = 0.5f64.powi(level as i32);
        let count = (t_max / h).floor() as usize;
        if count > DYADIC_MAX_POINTS {
            return Err(Error::Parameter(format!("dyadic grid at level {level} has {count} points")));
        }
        if count == 0 {
            profile.push(running);
            continue;
        }
        let mut samples = Vec::with_capacity(count);
        for n in 1..=count {
            let t = n as f64 * h;
            let z = sampler(t);
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::Input(format!("sampler returned a non-finite value at t = {t}")));
            }
            samples.push(z);
        }
        running = running.max(best_suffix_norm(&samples, q));
        profile.push(running);
    }
    Ok(profile)
}

/// `max_k ‖(a_k, a_{k+1}, …)‖_{v^q}` by a backward dynamic program.
fn best_suffix_norm(a: &[Complex64], q: VariationExponent) -> f64 {
    let m = a.len();
    let real = a.iter().all(|z| z.im == 0.0);
    let cands = chain_candidates(a, real);
    // With candidates restricted, the last sample must still be allowed as a chain end.
    let mut idx = cands;
    if *idx.last().expect("nonempty") != m - 1 {
        idx.push(m - 1);
    }
    // g[t]: best forward chain sum starting at idx[t].
    let mut g = vec![0.0f64; idx.len()];
    for t in (0..idx.len()).rev() {
        let i = idx[t];
        let mut best = 0.0f64;
        for s in t + 1..idx.len() {
            let v = g[s] + q.pow((a[idx[s]] - a[i]).norm());
            best = best.max(v);
        }
        g[t] = best;
    }
    // Starting points other than candidates: the start is an endpoint, so any
    // index may start a chain. Evaluate them against candidate successors.
    let mut overall = 0.0f64;
    let mut t_next = 0usize;
    for k in 0..m {
        while t_next < idx.len() && idx[t_next] <= k {
            t_next += 1;
        }
        let start_sum = match idx.binary_search(&k) {
            Ok(t) => g[t],
            Err(_) => {
                let mut best = 0.0f64;
                for s in t_next..idx.len() {
                    best = best.max(g[s] + q.pow((a[idx[s]] - a[k]).norm()));
                }
                best
            }
        };
        overall = overall.max((q.pow(a[k].norm()) + start_sum).powf(1.0 / q.get()));
    }
    overall
}
