//! Fast Rayleigh fading with statistics-only CSIT.
//!
//! Every rate expression becomes an expectation over the six link gains, so
//! this module provides a seeded Monte Carlo engine plus a closed-form
//! oracle for the single-Gaussian case, `E[C(|H|^2 P)] =
//! e^{1/(s^2 P)} E1(1/(s^2 P)) / ln 2`, used for cross-checks but never on
//! the solver path for correlated terms.
//!
//! Without phase knowledge the SU cannot precode against the PU
//! interference: linear-assignment Gel'fand-Pinsker precoding collapses to
//! treating interference as noise ([`la_gpc_rate`], [`la_gpc_objective`]),
//! which is what the fading CT/JV rates use. The fading CTR keeps its MAC
//! decoder, and its optimal relay ratio sits exactly at coexistence
//! equality, so the solver finds `alpha1` by bisection on the constraint
//! under common random numbers.

use crate::ct::CtParams;
use crate::ctr::BindingBranch;
use crate::model::{pos_part, FadingStats, PowerBudget};
use crate::numerics::{bisect_root, golden_refine, BisectError};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

const LN2: f64 = std::f64::consts::LN_2;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const BATCH: usize = 8192;

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// The exponential integral `E1(x)` for `x > 0`.
///
/// Power series below 1, modified Lentz continued fraction above; relative
/// error stays below 1e-12 across the range.
pub fn exp1(x: f64) -> f64 {
    assert!(
        x.is_finite() && x > 0.0,
        "exp1: argument must be positive, got {x}"
    );
    if x <= 1.0 {
        exp1_series(x)
    } else {
        exp1_cf_scaled(x) * (-x).exp()
    }
}

fn exp1_series(x: f64) -> f64 {
    // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..=60 {
        term *= -x / k as f64;
        let add = -term / k as f64;
        sum += add;
        if add.abs() < 1e-18 * sum.abs().max(1.0) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() + sum
}

/// `e^x E1(x)` via continued fraction, valid for `x > 1`. Keeping the
/// exponential factor out avoids overflow when callers need the scaled
/// product directly (tiny average SNR).
fn exp1_cf_scaled(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..200 {
        let a = -(i as f64) * (i as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-15 {
            break;
        }
    }
    h
}

/// Closed form for `E[C(|H|^2 p)]` when `|H|^2` is exponential with mean
/// `sigma_sq`. Returns 0 when `sigma_sq * p` is zero (no signal).
pub fn ergodic_cap_exponential(sigma_sq: f64, p: f64) -> f64 {
    let sp = sigma_sq * p;
    assert!(sp >= 0.0 && sp.is_finite());
    if sp == 0.0 {
        return 0.0;
    }
    let z = 1.0 / sp;
    if z > 1.0 {
        exp1_cf_scaled(z) / LN2
    } else {
        z.exp() * exp1_series(z) / LN2
    }
}

// ---------------------------------------------------------------------------
// Monte Carlo engine
// ---------------------------------------------------------------------------

/// Monte Carlo settings: sample count per expectation and the stream seed.
#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            seed: 7,
        }
    }
}

/// One joint draw of the six link gains.
#[derive(Debug, Clone, Copy)]
pub struct LinkSample {
    pub h14: Complex64,
    pub h24: Complex64,
    pub h34: Complex64,
    pub h13: Complex64,
    pub h23: Complex64,
    pub h12: Complex64,
}

/// A seeded stream of link draws. Draws are generated in fixed-size batches
/// with per-batch derived seeds, so the stream is identical for any worker
/// count, and any prefix of it is itself a valid common-random-number
/// stream.
pub struct LinkDraws {
    samples: Vec<LinkSample>,
    pub seed: u64,
}

/// Estimated mean of an integrand over the fading distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgodicEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn batch_seed(seed: u64, batch: usize) -> u64 {
    splitmix64(seed ^ splitmix64(batch as u64 + 1))
}

/// Draw `n` i.i.d. samples of the six links, each circularly-symmetric
/// complex Gaussian with its configured variance. Deterministic in `seed`.
pub fn sample_links(stats: &FadingStats, n: usize, seed: u64) -> LinkDraws {
    assert!(n >= 1);
    let dev = [
        (stats.var14 / 2.0).sqrt(),
        (stats.var24 / 2.0).sqrt(),
        (stats.var34 / 2.0).sqrt(),
        (stats.var13 / 2.0).sqrt(),
        (stats.var23 / 2.0).sqrt(),
        (stats.var12 / 2.0).sqrt(),
    ];
    let zero = Complex64::new(0.0, 0.0);
    let mut samples = vec![
        LinkSample {
            h14: zero,
            h24: zero,
            h34: zero,
            h13: zero,
            h23: zero,
            h12: zero,
        };
        n
    ];
    samples
        .par_chunks_mut(BATCH)
        .enumerate()
        .for_each(|(b, chunk)| {
            let mut rng = ChaCha8Rng::seed_from_u64(batch_seed(seed, b));
            let mut gain = |d: f64| -> Complex64 {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re * d, im * d)
            };
            for s in chunk.iter_mut() {
                *s = LinkSample {
                    h14: gain(dev[0]),
                    h24: gain(dev[1]),
                    h34: gain(dev[2]),
                    h13: gain(dev[3]),
                    h23: gain(dev[4]),
                    h12: gain(dev[5]),
                };
            }
        });
    LinkDraws { samples, seed }
}

impl LinkDraws {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[LinkSample] {
        &self.samples
    }

    /// Sample mean and standard error of `f` over the first `n` draws.
    pub fn estimate_prefix<F>(&self, n: usize, f: F) -> ErgodicEstimate
    where
        F: Fn(&LinkSample) -> f64,
    {
        let n = n.min(self.samples.len()).max(1);
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for chunk in self.samples[..n].chunks(BATCH) {
            let (mut s, mut s2) = (0.0, 0.0);
            for x in chunk {
                let v = f(x);
                s += v;
                s2 += v * v;
            }
            sum += s;
            sumsq += s2;
        }
        finish_estimate(sum, sumsq, n, self.seed)
    }

    pub fn estimate<F>(&self, f: F) -> ErgodicEstimate
    where
        F: Fn(&LinkSample) -> f64,
    {
        self.estimate_prefix(self.samples.len(), f)
    }
}

fn finish_estimate(sum: f64, sumsq: f64, n: usize, seed: u64) -> ErgodicEstimate {
    let mean = sum / n as f64;
    let var = if n > 1 {
        ((sumsq - n as f64 * mean * mean) / (n as f64 - 1.0)).max(0.0)
    } else {
        0.0
    };
    ErgodicEstimate {
        mean,
        stderr: (var / n as f64).sqrt(),
        n_samples: n,
        seed,
    }
}

/// Sample mean and standard error of `integrand` over `n` fresh draws.
pub fn ergodic_mc<F>(integrand: F, stats: &FadingStats, n: usize, seed: u64) -> ErgodicEstimate
where
    F: Fn(&LinkSample) -> f64,
{
    sample_links(stats, n, seed).estimate(integrand)
}

// ---------------------------------------------------------------------------
// Per-draw tables backing the solver hot loops
// ---------------------------------------------------------------------------

#[inline]
fn lg1p(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    (1.0 + x).log2()
}

#[inline]
fn relay_amp(alpha: f64, p2: f64, p1: f64) -> f64 {
    if p1 > 0.0 {
        (alpha.max(0.0) * p2 / p1).sqrt()
    } else {
        0.0
    }
}

#[inline]
fn amp_ratio(p_num: f64, p1: f64) -> f64 {
    if p1 > 0.0 {
        (p_num / p1).sqrt()
    } else {
        0.0
    }
}

/// Squared magnitudes and real cross terms per draw; every ergodic-rate
/// expectation used here reduces to a cheap function of these columns.
struct Tables {
    m14: Vec<f64>,
    m24: Vec<f64>,
    m34: Vec<f64>,
    m13: Vec<f64>,
    m23: Vec<f64>,
    m12: Vec<f64>,
    x14_24: Vec<f64>,
    x14_34: Vec<f64>,
    x24_34: Vec<f64>,
    x13_23: Vec<f64>,
    seed: u64,
}

impl Tables {
    fn build(draws: &LinkDraws) -> Self {
        let n = draws.len();
        let mut t = Tables {
            m14: Vec::with_capacity(n),
            m24: Vec::with_capacity(n),
            m34: Vec::with_capacity(n),
            m13: Vec::with_capacity(n),
            m23: Vec::with_capacity(n),
            m12: Vec::with_capacity(n),
            x14_24: Vec::with_capacity(n),
            x14_34: Vec::with_capacity(n),
            x24_34: Vec::with_capacity(n),
            x13_23: Vec::with_capacity(n),
            seed: draws.seed,
        };
        for s in draws.samples() {
            t.m14.push(s.h14.norm_sqr());
            t.m24.push(s.h24.norm_sqr());
            t.m34.push(s.h34.norm_sqr());
            t.m13.push(s.h13.norm_sqr());
            t.m23.push(s.h23.norm_sqr());
            t.m12.push(s.h12.norm_sqr());
            t.x14_24.push((s.h14 * s.h24.conj()).re);
            t.x14_34.push((s.h14 * s.h34.conj()).re);
            t.x24_34.push((s.h24 * s.h34.conj()).re);
            t.x13_23.push((s.h13 * s.h23.conj()).re);
        }
        t
    }

    fn len(&self) -> usize {
        self.m14.len()
    }

    fn mean<F: Fn(usize) -> f64>(&self, n: usize, f: F) -> f64 {
        let n = n.min(self.len()).max(1);
        let mut sum = 0.0;
        let mut i = 0;
        while i < n {
            let end = (i + BATCH).min(n);
            let mut s = 0.0;
            for k in i..end {
                s += f(k);
            }
            sum += s;
            i = end;
        }
        sum / n as f64
    }

    fn estimate<F: Fn(usize) -> f64>(&self, n: usize, f: F) -> ErgodicEstimate {
        let n = n.min(self.len()).max(1);
        let (mut sum, mut sumsq) = (0.0, 0.0);
        let mut i = 0;
        while i < n {
            let end = (i + BATCH).min(n);
            let (mut s, mut s2) = (0.0, 0.0);
            for k in i..end {
                let v = f(k);
                s += v;
                s2 += v * v;
            }
            sum += s;
            sumsq += s2;
            i = end;
        }
        finish_estimate(sum, sumsq, n, self.seed)
    }

    /// `C(|H14 + c H24|^2 p1 / (1 + |H24|^2 (1-alpha) p2))`.
    fn phase2(&self, p1: f64, p2: f64, alpha: f64) -> impl Fn(usize) -> f64 + '_ {
        let c = relay_amp(alpha, p2, p1);
        let resid = (1.0 - alpha).max(0.0) * p2;
        move |i| {
            let gain = (self.m14[i] + c * c * self.m24[i] + 2.0 * c * self.x14_24[i]).max(0.0);
            lg1p(gain * p1 / (1.0 + self.m24[i] * resid))
        }
    }

    /// `C(|H14 + g2 H24 + g3 H34|^2 p1)`.
    fn phase3(&self, p1: f64, g2: f64, g3: f64) -> impl Fn(usize) -> f64 + '_ {
        move |i| {
            let gain = (self.m14[i]
                + g2 * g2 * self.m24[i]
                + g3 * g3 * self.m34[i]
                + 2.0 * g2 * self.x14_24[i]
                + 2.0 * g3 * self.x14_34[i]
                + 2.0 * g2 * g3 * self.x24_34[i])
                .max(0.0);
            lg1p(gain * p1)
        }
    }

    /// `C(|H23|^2 (1-alpha) p2)` — the private-message branch.
    fn private(&self, p2: f64, alpha: f64) -> impl Fn(usize) -> f64 + '_ {
        let resid = (1.0 - alpha).max(0.0) * p2;
        move |i| lg1p(self.m23[i] * resid)
    }

    #[inline]
    fn common_gain(&self, i: usize, c: f64) -> f64 {
        (self.m13[i] + c * c * self.m23[i] + 2.0 * c * self.x13_23[i]).max(0.0)
    }

    /// `C(|H13 + c H23|^2 p1)` — common-message rate at node 3.
    fn common3(&self, p1: f64, p2: f64, alpha: f64) -> impl Fn(usize) -> f64 + '_ {
        let c = relay_amp(alpha, p2, p1);
        move |i| lg1p(self.common_gain(i, c) * p1)
    }

    /// `C(|H13 + c H23|^2 p1 + |H23|^2 (1-alpha) p2)` — the MAC sum branch.
    fn sum3(&self, p1: f64, p2: f64, alpha: f64) -> impl Fn(usize) -> f64 + '_ {
        let c = relay_amp(alpha, p2, p1);
        let resid = (1.0 - alpha).max(0.0) * p2;
        move |i| lg1p(self.common_gain(i, c) * p1 + self.m23[i] * resid)
    }

    /// `C(|H23|^2 (1-alpha) p2 / (1 + |H13 + c H23|^2 p1))` — what the
    /// fading CT/JV achieve in Phase 2 (interference treated as noise).
    fn tin(&self, p1: f64, p2: f64, alpha: f64) -> impl Fn(usize) -> f64 + '_ {
        let c = relay_amp(alpha, p2, p1);
        let resid = (1.0 - alpha).max(0.0) * p2;
        move |i| lg1p(self.m23[i] * resid / (1.0 + self.common_gain(i, c) * p1))
    }

    fn cap_link<'a>(m: &'a [f64], p: f64) -> impl Fn(usize) -> f64 + 'a {
        move |i| lg1p(m[i] * p)
    }
}

// ---------------------------------------------------------------------------
// Fading CTR operating points
// ---------------------------------------------------------------------------

/// Fading CTR operating point. Same power identities as the full-CSIT CTR;
/// no relaying phase exists because the channel phases are unknown at the
/// transmitters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingCtrParams {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub alpha1: f64,
    pub p1: f64,
    pub p2: f64,
    pub p2_phase3: f64,
    pub p3: f64,
}

fn coexistence_estimate(t: &Tables, n: usize, p: &FadingCtrParams) -> ErgodicEstimate {
    let ph2 = t.phase2(p.p1, p.p2, p.alpha1);
    let ph3 = t.phase3(p.p1, amp_ratio(p.p2_phase3, p.p1), amp_ratio(p.p3, p.p1));
    let (t1, t2, t3, p1) = (p.t1, p.t2, p.t3, p.p1);
    let m14 = &t.m14;
    t.estimate(n, move |i| {
        t1 * lg1p(m14[i] * p1) + t2 * ph2(i) + t3 * ph3(i)
    })
}

fn coexistence_mean(t: &Tables, n: usize, p: &FadingCtrParams) -> f64 {
    let ph2 = t.phase2(p.p1, p.p2, p.alpha1);
    let ph3 = t.phase3(p.p1, amp_ratio(p.p2_phase3, p.p1), amp_ratio(p.p3, p.p1));
    let (t1, t2, t3, p1) = (p.t1, p.t2, p.t3, p.p1);
    let m14 = &t.m14;
    t.mean(n, move |i| {
        t1 * lg1p(m14[i] * p1) + t2 * ph2(i) + t3 * ph3(i)
    })
}

/// Ergodic coexistence RHS of the fading CTR (three-term Monte Carlo sum).
pub fn ctr_fading_coexistence_rhs(
    stats: &FadingStats,
    p: &FadingCtrParams,
    mc: &McConfig,
) -> ErgodicEstimate {
    let draws = sample_links(stats, mc.n_samples, mc.seed);
    let t = Tables::build(&draws);
    coexistence_estimate(&t, t.len(), p)
}

fn rate_estimate(
    t: &Tables,
    n: usize,
    p: &FadingCtrParams,
    rt: f64,
) -> (ErgodicEstimate, BindingBranch) {
    let b1 = t.estimate(n, t.private(p.p2, p.alpha1));
    let sum = t.estimate(n, t.sum3(p.p1, p.p2, p.alpha1));
    let common = t.estimate(n, t.common3(p.p1, p.p2, p.alpha1));
    let e13 = t.estimate(n, Tables::cap_link(&t.m13, p.p1));
    // a negative residual clamps to zero: Phase 1 already delivered the
    // common message to node 3
    let rtp = pos_part(rt - p.t1 * e13.mean);
    let (rtm, rtm_se) = if rtp <= p.t2 * common.mean {
        (rtp, if rtp > 0.0 { p.t1 * e13.stderr } else { 0.0 })
    } else {
        (p.t2 * common.mean, p.t2 * common.stderr)
    };
    let b1v = p.t2 * b1.mean;
    let b2v = p.t2 * sum.mean - rtm;
    let (mean, branch) = if b1v <= b2v {
        (b1v, BindingBranch::PrivateRate)
    } else {
        (b2v, BindingBranch::SumRateResidual)
    };
    let stderr = (p.t2 * b1.stderr).max(p.t2 * sum.stderr + rtm_se);
    (
        ErgodicEstimate {
            mean: mean.max(0.0),
            stderr,
            n_samples: b1.n_samples,
            seed: t.seed,
        },
        branch,
    )
}

fn rate_mean(t: &Tables, n: usize, p: &FadingCtrParams, rt: f64) -> f64 {
    let b1 = t.mean(n, t.private(p.p2, p.alpha1));
    let sum = t.mean(n, t.sum3(p.p1, p.p2, p.alpha1));
    let common = t.mean(n, t.common3(p.p1, p.p2, p.alpha1));
    let e13 = t.mean(n, Tables::cap_link(&t.m13, p.p1));
    let rtp = pos_part(rt - p.t1 * e13);
    let rtm = rtp.min(p.t2 * common);
    (p.t2 * b1).min(p.t2 * sum - rtm).max(0.0)
}

/// Ergodic SU rate of the fading CTR operating point: the minimum of the
/// private branch and the sum-rate branch minus `R_T^m`, floored at zero.
/// Both branches are estimated on a common random-number stream; the
/// reported standard error is the larger of the two.
pub fn ctr_fading_rate(
    stats: &FadingStats,
    p: &FadingCtrParams,
    rt: f64,
    mc: &McConfig,
) -> ErgodicEstimate {
    let draws = sample_links(stats, mc.n_samples, mc.seed);
    let t = Tables::build(&draws);
    rate_estimate(&t, t.len(), p, rt).0
}

/// Both min-branch estimates (private first, sum-rate-minus-residual
/// second) on a common stream, for monotonicity checks in `alpha1`.
pub fn ctr_fading_rate_branches(
    stats: &FadingStats,
    p: &FadingCtrParams,
    rt: f64,
    mc: &McConfig,
) -> (ErgodicEstimate, ErgodicEstimate) {
    let draws = sample_links(stats, mc.n_samples, mc.seed);
    let t = Tables::build(&draws);
    let n = t.len();
    let b1 = t.estimate(n, t.private(p.p2, p.alpha1));
    let sum = t.estimate(n, t.sum3(p.p1, p.p2, p.alpha1));
    let common = t.estimate(n, t.common3(p.p1, p.p2, p.alpha1));
    let e13 = t.estimate(n, Tables::cap_link(&t.m13, p.p1));
    let rtp = pos_part(rt - p.t1 * e13.mean);
    let rtm = rtp.min(p.t2 * common.mean);
    (
        ErgodicEstimate {
            mean: p.t2 * b1.mean,
            stderr: p.t2 * b1.stderr,
            n_samples: b1.n_samples,
            seed: mc.seed,
        },
        ErgodicEstimate {
            mean: p.t2 * sum.mean - rtm,
            stderr: p.t2 * (sum.stderr + common.stderr),
            n_samples: sum.n_samples,
            seed: mc.seed,
        },
    )
}

// ---------------------------------------------------------------------------
// Fading CTR solver
// ---------------------------------------------------------------------------

/// Grid sizes for the fading solvers. The `alpha1` dimension is never
/// gridded: it comes from bisection on coexistence equality. The coarse
/// sample count drives the grid stage; winners are re-evaluated on the full
/// stream.
#[derive(Debug, Clone, Copy)]
pub struct FadingSearchConfig {
    pub t2_points: usize,
    /// Phase-2 share grid for P̄2; 1 keeps node-2 power equal across
    /// Phases 2 and 3 (the reference convention).
    pub rho_points: usize,
    pub t3_points: usize,
    pub t3_floor: f64,
    pub coarse_samples: usize,
    pub refine_rounds: usize,
    pub refine_points: usize,
}

impl Default for FadingSearchConfig {
    fn default() -> Self {
        Self {
            t2_points: 21,
            rho_points: 1,
            t3_points: 25,
            t3_floor: 0.01,
            coarse_samples: 20_000,
            refine_rounds: 2,
            refine_points: 5,
        }
    }
}

impl FadingSearchConfig {
    pub fn with_resolution(points: usize) -> Self {
        let p = points.max(5);
        Self {
            t2_points: p,
            t3_points: (2 * p).min(99) | 1,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FadingCtrSolution {
    pub params: FadingCtrParams,
    pub rate: ErgodicEstimate,
    pub u_tx: bool,
    pub u_rx: bool,
    pub coex_slack: f64,
    pub binding_branch: BindingBranch,
}

#[derive(Clone, Copy)]
struct FadingCandidate {
    params: FadingCtrParams,
    rate: f64,
    u_tx: bool,
    u_rx: bool,
    slack: f64,
}

struct FadingCtx<'a> {
    t: &'a Tables,
    budget: &'a PowerBudget,
    rt: f64,
    bisect_tol: f64,
}

impl FadingCtx<'_> {
    fn e13(&self, n: usize) -> f64 {
        self.t
            .mean(n, Tables::cap_link(&self.t.m13, self.budget.p1_bar))
    }

    /// Minimum relay ratio meeting coexistence for fixed powers, by
    /// bisection (the constraint RHS is monotone increasing in `alpha1`).
    fn alpha_for_coexistence(&self, n: usize, base: &FadingCtrParams) -> Option<f64> {
        let g = |alpha: f64| {
            let p = FadingCtrParams {
                alpha1: alpha,
                ..*base
            };
            coexistence_mean(self.t, n, &p) - self.rt
        };
        match bisect_root(g, 0.0, 1.0, self.bisect_tol) {
            Ok(root) => Some(root),
            Err(BisectError::PositiveAtLower) => Some(0.0),
            Err(BisectError::NegativeAtUpper) => None,
        }
    }

    /// Minimum relay ratio that lets node 3 decode the common message
    /// (validates `u_rx`), starting the bracket at `lo`.
    fn alpha_for_urx(&self, n: usize, base: &FadingCtrParams, rtp: f64, lo: f64) -> Option<f64> {
        let p1 = self.budget.p1_bar;
        let h = |alpha: f64| self.t.mean(n, self.t.common3(p1, base.p2, alpha)) * base.t2 - rtp;
        match bisect_root(h, lo, 1.0, self.bisect_tol) {
            Ok(root) => Some(root),
            Err(BisectError::PositiveAtLower) => Some(lo),
            Err(BisectError::NegativeAtUpper) => None,
        }
    }

    /// Evaluate a `u_tx = 1` grid point given `(t2, rho)` at prefix `n`.
    fn eval_tx(&self, n: usize, t1: f64, t2: f64, rho: f64) -> Option<FadingCandidate> {
        let span = 1.0 - t1;
        if t2 <= 0.0 || t2 > span + 1e-15 || !(0.0..=1.0).contains(&rho) {
            return None;
        }
        let t2 = t2.min(span);
        let t3 = span - t2;
        let t3 = if t3 < 1e-12 { 0.0 } else { t3 };
        let p2_bar = self.budget.p2_bar;
        let (p2, p2_phase3, p3_full) = if t3 > 0.0 {
            (
                rho * p2_bar / t2,
                (1.0 - rho) * p2_bar / t3,
                self.budget.p3_bar / t3,
            )
        } else {
            if rho < 1.0 - 1e-9 {
                return None;
            }
            (p2_bar / t2, 0.0, 0.0)
        };
        let rtp = self.rt - t1 * self.e13(n);
        // node-3 relaying only changes anything when Phase 3 exists and
        // node 3 has power to spend
        let relay_payoff = t3 > 0.0 && self.budget.p3_bar > 0.0;
        let base = FadingCtrParams {
            t1,
            t2,
            t3,
            alpha1: 0.0,
            p1: self.budget.p1_bar,
            p2,
            p2_phase3,
            p3: if relay_payoff { p3_full } else { 0.0 },
        };
        let urx_at =
            |alpha: f64| t2 * self.t.mean(n, self.t.common3(base.p1, p2, alpha)) >= rtp - 1e-12;

        // Case A: node 3 relays when it can. If the constraint-equality
        // ratio leaves node 3 unable to decode, the ratio is pushed up to
        // the decoding threshold (more common relaying, less SU rate).
        let mut natural_urx = true;
        let cand_a = self.alpha_for_coexistence(n, &base).and_then(|alpha_a| {
            natural_urx = urx_at(alpha_a);
            let alpha = if natural_urx || !relay_payoff {
                Some(alpha_a)
            } else {
                self.alpha_for_urx(n, &base, rtp, alpha_a)
            };
            alpha.and_then(|alpha| {
                let u_rx = urx_at(alpha);
                let params = FadingCtrParams {
                    alpha1: alpha,
                    p3: if u_rx && relay_payoff { p3_full } else { 0.0 },
                    ..base
                };
                self.candidate(n, params, true, u_rx)
            })
        });

        // Case B: node 3 stays silent in Phase 3. Only worth evaluating
        // when case A had to force the relay ratio up (or failed).
        let cand_b = if relay_payoff && !(natural_urx && cand_a.is_some()) {
            let base_b = FadingCtrParams { p3: 0.0, ..base };
            self.alpha_for_coexistence(n, &base_b).and_then(|alpha_b| {
                if urx_at(alpha_b) {
                    None // u_rx actually holds here; case A covers it
                } else {
                    self.candidate(
                        n,
                        FadingCtrParams {
                            alpha1: alpha_b,
                            ..base_b
                        },
                        true,
                        false,
                    )
                }
            })
        } else {
            None
        };

        match (cand_a, cand_b) {
            (Some(x), Some(y)) => Some(if x.rate >= y.rate { x } else { y }),
            (x, y) => x.or(y),
        }
    }

    fn candidate(
        &self,
        n: usize,
        params: FadingCtrParams,
        u_tx: bool,
        u_rx: bool,
    ) -> Option<FadingCandidate> {
        let slack = coexistence_mean(self.t, n, &params) - self.rt;
        if slack < -1e-9 {
            return None;
        }
        Some(FadingCandidate {
            params,
            rate: rate_mean(self.t, n, &params, self.rt),
            u_tx,
            u_rx,
            slack,
        })
    }

    /// Pure receiver relaying (`u_tx = 0`): `t1 = alpha1 = p2_phase3 = 0`.
    fn eval_rx(&self, n: usize, t3: f64) -> Option<FadingCandidate> {
        if t3 <= 0.0 || t3 >= 1.0 {
            return None;
        }
        let t2 = 1.0 - t3;
        let p2 = self.budget.p2_bar / t2;
        let rtp = self.rt; // t1 = 0
        let u_rx = t2 * self.t.mean(n, self.t.common3(self.budget.p1_bar, p2, 0.0)) >= rtp;
        let params = FadingCtrParams {
            t1: 0.0,
            t2,
            t3,
            alpha1: 0.0,
            p1: self.budget.p1_bar,
            p2,
            p2_phase3: 0.0,
            p3: if u_rx { self.budget.p3_bar / t3 } else { 0.0 },
        };
        let slack = coexistence_mean(self.t, n, &params) - self.rt;
        if slack < -1e-9 {
            return None;
        }
        Some(FadingCandidate {
            params,
            rate: rate_mean(self.t, n, &params, self.rt),
            u_tx: false,
            u_rx,
            slack,
        })
    }
}

fn equal_power_rho(t2: f64, span: f64) -> f64 {
    if span > 0.0 {
        (t2 / span).clamp(0.0, 1.0)
    } else {
        1.0
    }
}

fn fading_rho_grid(n: usize, t2: f64, span: f64) -> Vec<f64> {
    if n <= 1 {
        return vec![equal_power_rho(t2, span)];
    }
    let mut g: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    g.push(equal_power_rho(t2, span));
    g
}

fn better(best: &mut Option<FadingCandidate>, cand: Option<FadingCandidate>) {
    if let Some(c) = cand {
        if c.rate.is_finite() && best.is_none_or(|b| c.rate > b.rate) {
            *best = Some(c);
        }
    }
}

/// Maximize the fading CTR rate over `(t2, alpha1)` plus the Phase-3 power
/// split, per the fixed-`t1` convention. The relay ratio always comes from
/// bisection on coexistence equality under common random numbers; the grid
/// stage runs on a stream prefix and winners are re-solved on the full
/// stream.
pub fn solve_ctr_fading(
    stats: &FadingStats,
    budget: &PowerBudget,
    rt: f64,
    scfg: &FadingSearchConfig,
    mc: &McConfig,
) -> FadingCtrSolution {
    let draws = sample_links(stats, mc.n_samples.max(1), mc.seed);
    let t = Tables::build(&draws);
    let nf = t.len();
    let nc = scfg.coarse_samples.clamp(1, nf);
    let ctx = FadingCtx {
        t: &t,
        budget,
        rt,
        bisect_tol: 1e-9,
    };

    let e12_full = t.mean(nf, Tables::cap_link(&t.m12, budget.p1_bar));
    let t1 = if rt == 0.0 {
        Some(0.0)
    } else if e12_full > 0.0 && rt / e12_full < 1.0 {
        Some(rt / e12_full)
    } else {
        None
    };

    // coarse grid stage, tracking (t2, rho) cells worth polishing
    let mut coarse: Vec<(f64, f64, f64)> = Vec::new(); // (rate, t2, rho)
    if let Some(t1) = t1 {
        let span = 1.0 - t1;
        let nt2 = scfg.t2_points.max(2) - 1;
        let t2_grid: Vec<f64> = (1..=nt2).map(|k| span * k as f64 / nt2 as f64).collect();
        let rows: Vec<Vec<(f64, f64, f64)>> = t2_grid
            .par_iter()
            .map(|&t2| {
                fading_rho_grid(scfg.rho_points, t2, span)
                    .into_iter()
                    .filter_map(|rho| ctx.eval_tx(nc, t1, t2, rho).map(|c| (c.rate, t2, rho)))
                    .collect()
            })
            .collect();
        for row in rows {
            coarse.extend(row);
        }
    }

    // keep the three best coarse cells, re-solve them on the full stream
    coarse.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut best: Option<FadingCandidate> = None;
    if let Some(t1) = t1 {
        for &(_, t2, rho) in coarse.iter().take(3) {
            better(&mut best, ctx.eval_tx(nf, t1, t2, rho));
        }
        // zoom refinement of (t2, rho) around the full-stream best
        if let Some(b0) = best {
            let span = 1.0 - t1;
            let nt2 = scfg.t2_points.max(2) - 1;
            let mut steps = [span / nt2 as f64, 1.0 / (scfg.rho_points.max(2) - 1) as f64];
            let m = scfg.refine_points.max(3);
            let mut center = (
                b0.params.t2,
                if b0.params.t3 > 0.0 {
                    (b0.params.t2 * b0.params.p2 / budget.p2_bar).clamp(0.0, 1.0)
                } else {
                    1.0
                },
            );
            let fixed_rho = scfg.rho_points <= 1;
            let rho_steps = if fixed_rho { 1 } else { m };
            for _ in 0..scfg.refine_rounds {
                let mut zoom_best: Option<(f64, f64, f64)> = None;
                for i in 0..m {
                    let t2 = center.0 + steps[0] * (2.0 * i as f64 / (m - 1) as f64 - 1.0);
                    for j in 0..rho_steps {
                        let rho = if fixed_rho {
                            equal_power_rho(t2, span)
                        } else {
                            (center.1 + steps[1] * (2.0 * j as f64 / (m - 1) as f64 - 1.0))
                                .clamp(0.0, 1.0)
                        };
                        if let Some(c) = ctx.eval_tx(nc, t1, t2, rho) {
                            if zoom_best.is_none_or(|(r, _, _)| c.rate > r) {
                                zoom_best = Some((c.rate, t2, rho));
                            }
                        }
                    }
                }
                if let Some((_, t2, rho)) = zoom_best {
                    center = (t2, rho);
                }
                for s in &mut steps {
                    *s *= 2.0 / (m - 1) as f64;
                }
            }
            better(&mut best, ctx.eval_tx(nf, t1, center.0, center.1));
        }

        // embedded fading-CT operating point: at the equal-power share the
        // CTR sees the same coexistence constraint, and its MAC decoder can
        // only improve on treating the interference as noise
        let ct_budget = PowerBudget::new(budget.p1_bar, budget.p2_bar, 0.0);
        let ct_embed = ct_fading_solve_impl(stats, &ct_budget, rt, scfg, mc, false);
        if ct_embed.feasible && ct_embed.params.t1 < 1.0 {
            let span = 1.0 - ct_embed.params.t1;
            better(
                &mut best,
                ctx.eval_tx(
                    nf,
                    ct_embed.params.t1,
                    ct_embed.params.t2,
                    equal_power_rho(ct_embed.params.t2, span),
                ),
            );
        }
    }

    // pure receiver relaying regime
    let nt3 = scfg.t3_points.max(2);
    let hi = 1.0 - scfg.t3_floor;
    let t3_grid: Vec<f64> = (0..nt3)
        .map(|k| scfg.t3_floor + (hi - scfg.t3_floor) * k as f64 / (nt3 - 1) as f64)
        .collect();
    let rx_rates: Vec<Option<f64>> = t3_grid
        .par_iter()
        .map(|&t3| ctx.eval_rx(nc, t3).map(|c| c.rate))
        .collect();
    let mut rx_best_t3: Option<(f64, f64)> = None;
    for (i, r) in rx_rates.iter().enumerate() {
        if let Some(r) = r {
            if rx_best_t3.is_none_or(|(rb, _)| *r > rb) {
                rx_best_t3 = Some((*r, t3_grid[i]));
            }
        }
    }
    if let Some((_, t3g)) = rx_best_t3 {
        let step = (hi - scfg.t3_floor) / (nt3 - 1) as f64;
        let (t3r, _) = golden_refine(
            |t3| ctx.eval_rx(nc, t3).map_or(f64::NEG_INFINITY, |c| c.rate),
            ((t3g - step).max(scfg.t3_floor), (t3g + step).min(hi)),
            40,
        );
        better(&mut best, ctx.eval_rx(nf, t3g));
        better(&mut best, ctx.eval_rx(nf, t3r));
    }

    match best {
        Some(b) => {
            let (rate, branch) = rate_estimate(&t, nf, &b.params, rt);
            FadingCtrSolution {
                params: b.params,
                rate,
                u_tx: b.u_tx,
                u_rx: b.u_rx,
                coex_slack: b.slack,
                binding_branch: branch,
            }
        }
        None => silent_fading_solution(&t, budget, rt),
    }
}

fn silent_fading_solution(t: &Tables, budget: &PowerBudget, rt: f64) -> FadingCtrSolution {
    let params = FadingCtrParams {
        t1: 0.0,
        t2: 1.0,
        t3: 0.0,
        alpha1: 0.0,
        p1: budget.p1_bar,
        p2: 0.0,
        p2_phase3: 0.0,
        p3: 0.0,
    };
    let n = t.len();
    let slack = coexistence_mean(t, n, &params) - rt;
    FadingCtrSolution {
        params,
        rate: ErgodicEstimate {
            mean: 0.0,
            stderr: 0.0,
            n_samples: n,
            seed: t.seed,
        },
        u_tx: rt == 0.0,
        u_rx: t.mean(n, Tables::cap_link(&t.m13, budget.p1_bar)) >= rt,
        coex_slack: slack,
        binding_branch: BindingBranch::PrivateRate,
    }
}

/// One point of an `alpha1` sweep at fixed `(t1, t2, rho)` taken from a
/// solved operating point, with the `u_rx` indicator re-evaluated at each
/// ratio. Infeasible ratios report `feasible = false` (their rate is not
/// achievable under the coexistence constraint).
#[derive(Debug, Clone, Copy)]
pub struct AlphaSweepPoint {
    pub alpha1: f64,
    pub rate: ErgodicEstimate,
    pub branch_private: ErgodicEstimate,
    pub branch_sum: ErgodicEstimate,
    pub coex_slack: f64,
    pub feasible: bool,
}

/// Evaluate the fading CTR at a fixed operating point for each relay ratio
/// in `alphas`, under one common random-number stream.
pub fn ctr_fading_alpha_sweep(
    stats: &FadingStats,
    budget: &PowerBudget,
    rt: f64,
    base: &FadingCtrParams,
    alphas: &[f64],
    mc: &McConfig,
) -> Vec<AlphaSweepPoint> {
    let draws = sample_links(stats, mc.n_samples.max(1), mc.seed);
    let t = Tables::build(&draws);
    let n = t.len();
    let e13 = t.mean(n, Tables::cap_link(&t.m13, base.p1));
    let rtp = rt - base.t1 * e13;
    let p3_full = if base.t3 > 0.0 {
        budget.p3_bar / base.t3
    } else {
        0.0
    };
    alphas
        .iter()
        .map(|&alpha| {
            let u_rx = base.t2 * t.mean(n, t.common3(base.p1, base.p2, alpha)) >= rtp;
            let params = FadingCtrParams {
                alpha1: alpha,
                p3: if u_rx { p3_full } else { 0.0 },
                ..*base
            };
            let slack = coexistence_mean(&t, n, &params) - rt;
            let (rate, _) = rate_estimate(&t, n, &params, rt);
            let b1 = t.estimate(n, t.private(params.p2, alpha));
            let sum = t.estimate(n, t.sum3(params.p1, params.p2, alpha));
            let common = t.estimate(n, t.common3(params.p1, params.p2, alpha));
            let rtm = pos_part(rtp).min(params.t2 * common.mean);
            AlphaSweepPoint {
                alpha1: alpha,
                rate,
                branch_private: ErgodicEstimate {
                    mean: params.t2 * b1.mean,
                    stderr: params.t2 * b1.stderr,
                    n_samples: n,
                    seed: mc.seed,
                },
                branch_sum: ErgodicEstimate {
                    mean: params.t2 * sum.mean - rtm,
                    stderr: params.t2 * (sum.stderr + common.stderr),
                    n_samples: n,
                    seed: mc.seed,
                },
                coex_slack: slack,
                feasible: slack >= -1e-6,
            }
        })
        .collect()
}

/// One point of a fading CT/JV `alpha1` sweep.
#[derive(Debug, Clone, Copy)]
pub struct CtAlphaSweepPoint {
    pub alpha1: f64,
    pub rate: ErgodicEstimate,
    pub coex_slack: f64,
    pub feasible: bool,
}

/// Evaluate the fading CT at a fixed `(t1, t2)` for each relay ratio in
/// `alphas`, under one common random-number stream.
pub fn ct_fading_alpha_sweep(
    stats: &FadingStats,
    rt: f64,
    base: &CtParams,
    alphas: &[f64],
    mc: &McConfig,
) -> Vec<CtAlphaSweepPoint> {
    let draws = sample_links(stats, mc.n_samples.max(1), mc.seed);
    let t = Tables::build(&draws);
    let n = t.len();
    alphas
        .iter()
        .map(|&alpha| {
            let params = CtParams {
                alpha1: alpha,
                ..*base
            };
            let slack = ct_fading_coexistence_mean(&t, n, &params) - rt;
            let est = t.estimate(n, t.tin(params.p1, params.p2, alpha));
            CtAlphaSweepPoint {
                alpha1: alpha,
                rate: ErgodicEstimate {
                    mean: params.t2 * est.mean,
                    stderr: params.t2 * est.stderr,
                    n_samples: n,
                    seed: mc.seed,
                },
                coex_slack: slack,
                feasible: slack >= -1e-6,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Fading CT / JV (precoding collapses to interference-as-noise)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct FadingCtSolution {
    pub params: CtParams,
    pub rate: ErgodicEstimate,
    pub feasible: bool,
    pub coex_slack: f64,
}

/// Coexistence constraint of the fading CT at a given relay ratio: the
/// Phase-3 relay uses the full Phase-2 power level (`g2 = sqrt(p2/p1)`).
fn ct_fading_coexistence_mean(t: &Tables, n: usize, p: &CtParams) -> f64 {
    let ph2 = t.phase2(p.p1, p.p2, p.alpha1);
    let ph3 = t.phase3(p.p1, amp_ratio(p.p2, p.p1), 0.0);
    let (t1, t2, t3, p1) = (p.t1, p.t2, p.t3, p.p1);
    let m14 = &t.m14;
    t.mean(n, move |i| {
        t1 * lg1p(m14[i] * p1) + t2 * ph2(i) + t3 * ph3(i)
    })
}

fn ct_fading_solve_impl(
    stats: &FadingStats,
    budget: &PowerBudget,
    rt: f64,
    scfg: &FadingSearchConfig,
    mc: &McConfig,
    two_phase_only: bool,
) -> FadingCtSolution {
    let draws = sample_links(stats, mc.n_samples.max(1), mc.seed);
    let t = Tables::build(&draws);
    let nf = t.len();
    let nc = scfg.coarse_samples.clamp(1, nf);
    let e12 = t.mean(nf, Tables::cap_link(&t.m12, budget.p1_bar));
    let t1 = if rt == 0.0 {
        0.0
    } else if e12 > 0.0 {
        rt / e12
    } else {
        f64::INFINITY
    };
    if t1 >= 1.0 {
        let params = CtParams {
            t1: 1.0,
            t2: 0.0,
            t3: 0.0,
            alpha1: 0.0,
            p1: budget.p1_bar,
            p2: 0.0,
        };
        return FadingCtSolution {
            params,
            rate: ErgodicEstimate {
                mean: 0.0,
                stderr: 0.0,
                n_samples: nf,
                seed: mc.seed,
            },
            feasible: false,
            coex_slack: t.mean(nf, Tables::cap_link(&t.m14, budget.p1_bar)) - rt,
        };
    }
    let span = 1.0 - t1;
    let p2 = budget.p2_bar / span;

    // minimum relay ratio for coexistence at a given t2, on a given prefix
    let alpha_at = |n: usize, t2: f64| -> Option<f64> {
        let g = |alpha: f64| {
            let p = CtParams::new(t1, t2, alpha, budget);
            ct_fading_coexistence_mean(&t, n, &p) - rt
        };
        match bisect_root(g, 0.0, 1.0, 1e-9) {
            Ok(root) => Some(root),
            Err(BisectError::PositiveAtLower) => Some(0.0),
            Err(BisectError::NegativeAtUpper) => None,
        }
    };
    let rate_at =
        |n: usize, t2: f64, alpha: f64| -> f64 { t2 * t.mean(n, t.tin(budget.p1_bar, p2, alpha)) };

    let best_t2 = if two_phase_only {
        span
    } else {
        let nt2 = scfg.t2_points.max(2) - 1;
        let grid: Vec<f64> = (1..=nt2).map(|k| span * k as f64 / nt2 as f64).collect();
        let rates: Vec<Option<f64>> = grid
            .par_iter()
            .map(|&t2| alpha_at(nc, t2).map(|a| rate_at(nc, t2, a)))
            .collect();
        let mut best: Option<(f64, f64)> = None;
        for (i, r) in rates.iter().enumerate() {
            if let Some(r) = r {
                if best.is_none_or(|(rb, _)| *r > rb) {
                    best = Some((*r, grid[i]));
                }
            }
        }
        match best {
            None => span,
            Some((_, t2g)) => {
                let step = span / nt2 as f64;
                let (t2r, rr) = golden_refine(
                    |t2| {
                        if t2 <= 0.0 || t2 > span {
                            return f64::NEG_INFINITY;
                        }
                        alpha_at(nc, t2).map_or(f64::NEG_INFINITY, |a| rate_at(nc, t2, a))
                    },
                    ((t2g - step).max(step * 1e-3), (t2g + step).min(span)),
                    40,
                );
                let rg = alpha_at(nc, t2g).map_or(f64::NEG_INFINITY, |a| rate_at(nc, t2g, a));
                if rr > rg {
                    t2r
                } else {
                    t2g
                }
            }
        }
    };

    match alpha_at(nf, best_t2) {
        Some(alpha) => {
            let params = CtParams::new(t1, best_t2, alpha, budget);
            let slack = ct_fading_coexistence_mean(&t, nf, &params) - rt;
            let est = t.estimate(nf, t.tin(budget.p1_bar, p2, alpha));
            FadingCtSolution {
                params,
                rate: ErgodicEstimate {
                    mean: best_t2 * est.mean,
                    stderr: best_t2 * est.stderr,
                    n_samples: nf,
                    seed: mc.seed,
                },
                feasible: slack >= -1e-9,
                coex_slack: slack,
            }
        }
        None => {
            let params = CtParams::new(t1, best_t2, 1.0, budget);
            let slack = ct_fading_coexistence_mean(&t, nf, &params) - rt;
            FadingCtSolution {
                params,
                rate: ErgodicEstimate {
                    mean: 0.0,
                    stderr: 0.0,
                    n_samples: nf,
                    seed: mc.seed,
                },
                feasible: false,
                coex_slack: slack,
            }
        }
    }
}

/// Fading CT: three phases, Phase-2 SU rate with interference treated as
/// noise (what the precoded scheme collapses to without phase CSIT), relay
/// ratio from bisection on coexistence equality, `t2` by line search.
pub fn solve_ct_fading(
    stats: &FadingStats,
    budget: &PowerBudget,
    rt: f64,
    scfg: &FadingSearchConfig,
    mc: &McConfig,
) -> FadingCtSolution {
    ct_fading_solve_impl(stats, budget, rt, scfg, mc, false)
}

/// Fading JV baseline: the CT restricted to `t3 = 0`.
pub fn solve_jv_fading(
    stats: &FadingStats,
    budget: &PowerBudget,
    rt: f64,
    scfg: &FadingSearchConfig,
    mc: &McConfig,
) -> FadingCtSolution {
    ct_fading_solve_impl(stats, budget, rt, scfg, mc, true)
}

/// Ergodic SU rate achieved by the fading CT (see [`solve_ct_fading`]).
pub fn ct_fading_rate(
    stats: &FadingStats,
    budget: &PowerBudget,
    rt: f64,
    scfg: &FadingSearchConfig,
    mc: &McConfig,
) -> ErgodicEstimate {
    solve_ct_fading(stats, budget, rt, scfg, mc).rate
}

// ---------------------------------------------------------------------------
// LA-GPC collapse
// ---------------------------------------------------------------------------

/// Query for the precoder objective `f(beta)`.
#[derive(Debug, Clone, Copy)]
pub struct LaGpcQuery {
    pub beta: Complex64,
    pub p1_bar: f64,
    pub p2_bar: f64,
    pub var13: f64,
    pub var23: f64,
}

/// Best rate of precoded transmission over the fading interference channel
/// at node 3, which equals treating the interference as noise:
/// `E[C(|H23|^2 P2 / (1 + |H13|^2 P1))]`.
pub fn la_gpc_rate(stats: &FadingStats, budget: &PowerBudget, mc: &McConfig) -> ErgodicEstimate {
    let (p1, p2) = (budget.p1_bar, budget.p2_bar);
    ergodic_mc(
        move |s| lg1p(s.h23.norm_sqr() * p2 / (1.0 + s.h13.norm_sqr() * p1)),
        stats,
        mc.n_samples,
        mc.seed,
    )
}

/// The precoder objective
/// `f(beta) = E[log2(P1 P2 |H13 - beta H23|^2 + P2 + |beta|^2 P1)]`;
/// minimizing it over `beta` maximizes the precoded rate, and `beta = 0` is
/// optimal in Rayleigh fading. Estimates with the same `mc.seed` share one
/// random-number stream, so values at different `beta` are comparable.
pub fn la_gpc_objective(q: &LaGpcQuery, mc: &McConfig) -> ErgodicEstimate {
    let stats = FadingStats::new(1.0, 1.0, 1.0, q.var13, q.var23, 1.0);
    let (p1, p2, beta) = (q.p1_bar, q.p2_bar, q.beta);
    ergodic_mc(
        move |s| {
            let diff = s.h13 - beta * s.h23;
            (p1 * p2 * diff.norm_sqr() + p2 + beta.norm_sqr() * p1).log2()
        },
        &stats,
        mc.n_samples,
        mc.seed,
    )
}

// ---------------------------------------------------------------------------
// Fading multiplexing gain
// ---------------------------------------------------------------------------

/// Achievable SU multiplexing gain of the fading CTR, mirroring the full
/// CSIT expression with ergodic capacities (all via the closed form).
pub fn fading_mux_gain(stats: &FadingStats, budget: &PowerBudget, t3_floor: f64) -> f64 {
    assert!(t3_floor > 0.0 && t3_floor < 1.0);
    let e14 = ergodic_cap_exponential(stats.var14, budget.p1_bar);
    let e13 = ergodic_cap_exponential(stats.var13, budget.p1_bar);
    let e12 = ergodic_cap_exponential(stats.var12, budget.p1_bar);
    let receiver = if e14 < e13 && t3_floor <= 1.0 - e14 / e13 {
        1.0 - t3_floor
    } else {
        0.0
    };
    let transmitter = if e14 <= 0.0 {
        1.0
    } else if e12 <= 0.0 {
        0.0
    } else {
        pos_part(1.0 - e14 / e12)
    };
    receiver.max(transmitter)
}
