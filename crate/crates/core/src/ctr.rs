//! Clean transmitter-receiver relaying (CTR) with full CSIT.
//!
//! After Phase 1 the PU message is a common message for both users, so in
//! Phase 2 the SU receiver (node 3) faces an asymmetric multiple-access
//! channel: node 2 superimposes a fresh private codeword on a relay of the
//! PU signal with ratio `alpha1` and phase `theta1`. In Phase 3 both node 2
//! and node 3 relay the PU signal cleanly. Whether each relay path is
//! usable is tracked by the `u_tx`/`u_rx` indicators: `u_tx = 0` forces
//! `t1 = alpha1 = p2_phase3 = 0`, and `u_rx = 0` forces `p3 = 0`.
//!
//! The rate optimization is non-convex even for fixed `t2`, so the solver
//! enumerates a deterministic grid over `(t2, alpha1, theta1)` plus the
//! Phase-3 power split, then zooms in around the best point.

use crate::ct;
use crate::model::{cap, FullCsitChannel, PowerBudget};
use crate::numerics::golden_refine;
use rayon::prelude::*;
use std::f64::consts::TAU;

/// Operating point of the CTR scheme.
///
/// Power policy: `p1 = P̄1`, `t2*p2 + t3*p2_phase3 = P̄2`, `t3*p3 = P̄3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtrParams {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    /// Common-message relaying ratio of node 2 in Phase 2.
    pub alpha1: f64,
    /// Common-message relaying phase in `[0, 2π)`.
    pub theta1: f64,
    pub p1: f64,
    /// Node-2 power in Phase 2.
    pub p2: f64,
    /// Node-2 power in Phase 3.
    pub p2_phase3: f64,
    /// Node-3 power in Phase 3.
    pub p3: f64,
}

/// Which argument of the rate minimum binds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingBranch {
    /// The private-message constraint `t2 C(|h23|^2 (1-alpha1) p2)`.
    PrivateRate,
    /// The sum-rate constraint minus the residual common-message rate.
    SumRateResidual,
}

#[derive(Debug, Clone, Copy)]
pub struct CtrSolution {
    pub params: CtrParams,
    pub su_rate: f64,
    pub u_tx: bool,
    pub u_rx: bool,
    pub coex_slack: f64,
    pub binding_branch: BindingBranch,
}

/// Grid sizes of the CTR solver. `theta_points` span `[0, 2π)`; a coherent
/// phase candidate and closed-form relay-ratio candidates are always added
/// on top of the uniform grids.
#[derive(Debug, Clone, Copy)]
pub struct CtrSearchConfig {
    pub t2_points: usize,
    pub alpha_points: usize,
    pub theta_points: usize,
    /// Grid for the fraction of P̄2 spent in Phase 2. With the default of 1
    /// node 2 transmits at the same power in Phases 2 and 3 (the convention
    /// behind the reference curves); larger values search the split.
    pub rho_points: usize,
    /// Grid for `t3` in the pure receiver-relaying regime.
    pub t3_points: usize,
    /// Smallest nonzero `t3` considered.
    pub t3_floor: f64,
    pub refine_rounds: usize,
    pub refine_points: usize,
}

impl Default for CtrSearchConfig {
    fn default() -> Self {
        Self {
            t2_points: 33,
            alpha_points: 33,
            theta_points: 64,
            rho_points: 1,
            t3_points: 49,
            t3_floor: 0.01,
            refine_rounds: 3,
            refine_points: 9,
        }
    }
}

impl CtrSearchConfig {
    /// Scale the movable grids from a single resolution knob.
    pub fn with_resolution(points: usize) -> Self {
        let p = points.max(5);
        Self {
            t2_points: p,
            alpha_points: p,
            t3_points: (2 * p).min(99) | 1,
            ..Self::default()
        }
    }
}

/// Residual common-message rate node 3 still needs after Phase 1:
/// `R'_T = R_T - t1 C(|h13|^2 P1)`. May be negative.
pub fn residual_rate(ch: &FullCsitChannel, budget: &PowerBudget, rt: f64, t1: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&t1));
    rt - t1 * cap(ch.h13.magnitude().powi(2) * budget.p1_bar)
}

fn relay_scale(alpha1: f64, p2: f64, p1: f64) -> f64 {
    if p1 > 0.0 {
        (alpha1 * p2 / p1).sqrt()
    } else {
        0.0
    }
}

/// Combined common-message gain at node 3 in Phase 2:
/// `|h23 sqrt(alpha1 p2/p1) e^{j theta1} + h13|^2`.
fn common_gain_at_node3(ch: &FullCsitChannel, p: &CtrParams) -> f64 {
    let c = relay_scale(p.alpha1, p.p2, p.p1);
    let (m13, m23) = (ch.h13.magnitude(), ch.h23.magnitude());
    m13 * m13
        + c * c * m23 * m23
        + 2.0 * c * m13 * m23 * (ch.h23.phase() + p.theta1 - ch.h13.phase()).cos()
}

/// The effective common-message target of the Phase-2 MAC:
/// `R_T^m = min{R'_T, t2 C(|h23 sqrt(alpha1 p2/p1) e^{j theta1} + h13|^2 p1)}`.
pub fn rt_m(ch: &FullCsitChannel, p: &CtrParams, rt: f64) -> f64 {
    let rtp = rt - p.t1 * cap(ch.h13.magnitude().powi(2) * p.p1);
    rtp.min(p.t2 * cap(common_gain_at_node3(ch, p) * p.p1))
}

/// Achievable SU rate of the operating point (floored at zero).
pub fn ctr_rate(ch: &FullCsitChannel, p: &CtrParams, rt: f64) -> f64 {
    ctr_rate_detailed(ch, p, rt).0
}

/// As [`ctr_rate`], also reporting which minimum argument binds.
pub fn ctr_rate_detailed(ch: &FullCsitChannel, p: &CtrParams, rt: f64) -> (f64, BindingBranch) {
    debug_assert!((p.t1 + p.t2 + p.t3 - 1.0).abs() < 1e-9);
    let private = ch.h23.magnitude().powi(2) * (1.0 - p.alpha1).max(0.0) * p.p2;
    let b1 = p.t2 * cap(private);
    let b2 = p.t2 * cap(common_gain_at_node3(ch, p) * p.p1 + private) - rt_m(ch, p, rt);
    if b1 <= b2 {
        (b1.max(0.0), BindingBranch::PrivateRate)
    } else {
        (b2.max(0.0), BindingBranch::SumRateResidual)
    }
}

/// Achievable PU rate under the CTR operating point (coexistence RHS).
/// Phase 3 adds the three relay amplitudes coherently at node 4.
pub fn ctr_coexistence_rhs(ch: &FullCsitChannel, p: &CtrParams) -> f64 {
    debug_assert!((p.t1 + p.t2 + p.t3 - 1.0).abs() < 1e-9);
    let (m14, m24, m34) = (ch.h14.magnitude(), ch.h24.magnitude(), ch.h34.magnitude());
    let c = relay_scale(p.alpha1, p.p2, p.p1);
    let phase2_gain = m14 * m14
        + c * c * m24 * m24
        + 2.0 * c * m14 * m24 * (ch.h24.phase() + p.theta1 - ch.h14.phase()).cos();
    let phase2 = phase2_gain * p.p1 / (1.0 + m24 * m24 * (1.0 - p.alpha1).max(0.0) * p.p2);
    let phase3 = (m14 * p.p1.sqrt() + m24 * p.p2_phase3.sqrt() + m34 * p.p3.sqrt()).powi(2);
    p.t1 * cap(m14 * m14 * p.p1) + p.t2 * cap(phase2) + p.t3 * cap(phase3)
}

/// Relaying-availability indicators. `u_tx` is true when Phase 1 suffices
/// for node 2 to decode the PU message (the boundary
/// `t1 = R_T / C(|h12|^2 P1)` counts as decodable); `u_rx` is true when
/// node 3 can decode it by the end of Phase 2.
pub fn indicators(
    ch: &FullCsitChannel,
    budget: &PowerBudget,
    rt: f64,
    p: &CtrParams,
) -> (bool, bool) {
    let u_tx = p.t1 * cap(ch.h12.magnitude().powi(2) * budget.p1_bar) >= rt;
    let rtp = residual_rate(ch, budget, rt, p.t1);
    let u_rx = p.t2 * cap(common_gain_at_node3(ch, p) * p.p1) >= rtp;
    (u_tx, u_rx)
}

/// Generalized multiplexing gain at finite SNR: `rate / log2(pc_bar)` where
/// `pc_bar` is the total average SU power (P̄2 for CT/JV, P̄2 + P̄3 for CTR).
///
/// Panics when `pc_bar <= 1` (the pre-log normalization is undefined).
pub fn gmg(su_rate: f64, pc_bar: f64) -> f64 {
    assert!(pc_bar > 1.0, "gmg: pc_bar must exceed 1, got {pc_bar}");
    su_rate / pc_bar.log2()
}

/// Achievable SU multiplexing gain of the CTR: the better of pure receiver
/// relaying with `t3` at the floor and pure transmitter relaying.
pub fn ctr_mux_gain(ch: &FullCsitChannel, budget: &PowerBudget, t3_floor: f64) -> f64 {
    assert!(t3_floor > 0.0 && t3_floor < 1.0);
    let (m14, m13) = (ch.h14.magnitude(), ch.h13.magnitude());
    let c14 = cap(m14 * m14 * budget.p1_bar);
    let c13 = cap(m13 * m13 * budget.p1_bar);
    let receiver = if m14 < m13 && c13 > 0.0 && t3_floor <= 1.0 - c14 / c13 {
        1.0 - t3_floor
    } else {
        0.0
    };
    receiver.max(ct::ct_mux_bound(ch, budget))
}

/// The phase that aligns the relayed component with the direct PU path at
/// node 4, maximizing the Phase-2 coexistence term for fixed magnitudes.
pub fn coherent_theta(ch: &FullCsitChannel) -> f64 {
    (ch.h14.phase() - ch.h24.phase()).rem_euclid(TAU)
}

#[derive(Clone, Copy)]
struct Candidate {
    rate: f64,
    relayed_energy: f64,
    params: CtrParams,
    u_tx: bool,
    u_rx: bool,
    slack: f64,
    branch: BindingBranch,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        self.rate > other.rate
            || (self.rate == other.rate && self.relayed_energy < other.relayed_energy)
    }
}

fn fold_best(best: &mut Option<Candidate>, cand: Option<Candidate>) {
    if let Some(c) = cand {
        if best.is_none_or(|b| c.better_than(&b)) {
            *best = Some(c);
        }
    }
}

struct Ctx<'a> {
    ch: &'a FullCsitChannel,
    budget: &'a PowerBudget,
    rt: f64,
}

impl Ctx<'_> {
    /// Evaluate one operating point. `p3_full` is the Phase-3 node-3 power
    /// the point would use if node 3 can relay; the `u_rx` indicator decides
    /// whether it actually does. `None` when coexistence fails.
    #[allow(clippy::too_many_arguments)]
    fn eval(
        &self,
        u_tx: bool,
        t1: f64,
        t2: f64,
        alpha1: f64,
        theta1: f64,
        p2: f64,
        p2_phase3: f64,
        p3_full: f64,
    ) -> Option<Candidate> {
        let t3 = 1.0 - t1 - t2;
        let t3 = if t3 < 1e-12 { 0.0 } else { t3 };
        let mut params = CtrParams {
            t1,
            t2,
            t3,
            alpha1,
            theta1,
            p1: self.budget.p1_bar,
            p2,
            p2_phase3: if t3 > 0.0 { p2_phase3 } else { 0.0 },
            p3: 0.0,
        };
        let rtp = residual_rate(self.ch, self.budget, self.rt, t1);
        let u_rx = t2 * cap(common_gain_at_node3(self.ch, &params) * params.p1) >= rtp;
        if u_rx && t3 > 0.0 {
            params.p3 = p3_full;
        }
        let rhs = ctr_coexistence_rhs(self.ch, &params);
        let slack = rhs - self.rt;
        if slack < -1e-9 {
            return None;
        }
        let (rate, branch) = ctr_rate_detailed(self.ch, &params, self.rt);
        let relayed_energy = t2 * alpha1 * p2 + t3 * (params.p2_phase3 + params.p3);
        Some(Candidate {
            rate,
            relayed_energy,
            params,
            u_tx,
            u_rx,
            slack,
            branch,
        })
    }
}

/// The Phase-2 share of P̄2 that gives node 2 equal power in Phases 2 and 3.
fn equal_power_rho(t2: f64, span: f64) -> f64 {
    if span > 0.0 {
        (t2 / span).clamp(0.0, 1.0)
    } else {
        1.0
    }
}

/// Phase-3 split grid: `rho` is the fraction of P̄2 spent in Phase 2. With
/// one point only the equal-power convention (`p2 = p2_phase3`, matching
/// the CT power policy) is used; a larger grid always includes it too.
fn rho_grid(n: usize, t2: f64, span: f64) -> Vec<f64> {
    if n <= 1 {
        return vec![equal_power_rho(t2, span)];
    }
    let mut g: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    g.push(equal_power_rho(t2, span));
    g
}

fn theta_grid(n: usize, ch: &FullCsitChannel) -> Vec<f64> {
    let n = n.max(1);
    let mut g: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
    g.push(coherent_theta(ch));
    g
}

/// Best feasible CTR operating point for the given budget and PU target.
///
/// Covers the `u_tx = 1` grid (with the `u_rx` indicator applied pointwise),
/// pure receiver relaying (`u_tx = 0` over a `t3` grid), the embedded CT
/// operating point, and the all-silent fallback. Ties break toward the
/// candidate with the smaller total relayed energy.
pub fn solve_ctr(
    ch: &FullCsitChannel,
    budget: &PowerBudget,
    rt: f64,
    cfg: &CtrSearchConfig,
) -> CtrSolution {
    let ctx = Ctx { ch, budget, rt };
    let mut best: Option<Candidate> = None;

    // u_tx = 1: transmitter relaying available
    if let Some(t1) = ct::decode_time_fraction(ch, budget, rt) {
        let span = 1.0 - t1;
        let nt2 = cfg.t2_points.max(2) - 1;
        let t2_grid: Vec<f64> = (1..=nt2).map(|k| span * k as f64 / nt2 as f64).collect();
        let locals: Vec<Option<Candidate>> = t2_grid
            .par_iter()
            .map(|&t2| {
                let mut local = None;
                for rho in rho_grid(cfg.rho_points, t2, span) {
                    sweep_alpha_theta(&ctx, t1, span, t2, rho, cfg, &mut local);
                }
                local
            })
            .collect();
        for l in locals {
            fold_best(&mut best, l);
        }
    }

    // u_tx = 0: pure receiver relaying over a t3 grid
    let nt3 = cfg.t3_points.max(2);
    let t3_hi = 1.0 - cfg.t3_floor;
    let t3_grid: Vec<f64> = (0..nt3)
        .map(|k| cfg.t3_floor + (t3_hi - cfg.t3_floor) * k as f64 / (nt3 - 1) as f64)
        .collect();
    let rx_locals: Vec<Option<Candidate>> = t3_grid
        .par_iter()
        .map(|&t3| eval_rx_point(&ctx, t3))
        .collect();
    let mut rx_best: Option<Candidate> = None;
    for l in rx_locals {
        fold_best(&mut rx_best, l);
    }
    if let Some(b) = rx_best {
        let step = (t3_hi - cfg.t3_floor) / (nt3 - 1) as f64;
        let lo = (b.params.t3 - step).max(cfg.t3_floor);
        let hi = (b.params.t3 + step).min(t3_hi);
        let (t3r, _) = golden_refine(
            |t3| eval_rx_point(&ctx, t3).map_or(f64::NEG_INFINITY, |c| c.rate),
            (lo, hi),
            48,
        );
        fold_best(&mut rx_best, eval_rx_point(&ctx, t3r));
    }
    fold_best(&mut best, rx_best);

    // Embedded CT operating point: with theta1 coherent, p3 = 0 and the CT
    // power policy, the CTR constraint set contains the CT optimum.
    let ct_sol = ct::solve_ct(ch, budget, rt, &Default::default());
    if ct_sol.feasible && ct_sol.params.t1 < 1.0 {
        let cp = ct_sol.params;
        let span = 1.0 - cp.t1;
        let rho = if cp.t3 > 0.0 { cp.t2 / span } else { 1.0 };
        fold_best(
            &mut best,
            eval_split_point(&ctx, cp.t1, span, cp.t2, rho, cp.alpha1, coherent_theta(ch)),
        );
    }

    if best.is_some_and(|b| b.u_tx) {
        refine_tx(&ctx, cfg, &mut best);
    }

    match best {
        Some(b) => CtrSolution {
            params: b.params,
            su_rate: b.rate,
            u_tx: b.u_tx,
            u_rx: b.u_rx,
            coex_slack: b.slack,
            binding_branch: b.branch,
        },
        None => silent_solution(ch, budget, rt),
    }
}

/// Evaluate a `u_tx = 1` point given the Phase-2 power fraction `rho`.
fn eval_split_point(
    ctx: &Ctx,
    t1: f64,
    span: f64,
    t2: f64,
    rho: f64,
    alpha1: f64,
    theta1: f64,
) -> Option<Candidate> {
    if t2 <= 0.0
        || t2 > span + 1e-15
        || !(0.0..=1.0).contains(&alpha1)
        || !(0.0..=1.0).contains(&rho)
    {
        return None;
    }
    let t2 = t2.min(span);
    let t3 = span - t2;
    let p2_bar = ctx.budget.p2_bar;
    if t3 <= 1e-12 {
        if rho < 1.0 - 1e-9 {
            return None; // no Phase 3 to spend the remaining budget in
        }
        return ctx.eval(true, t1, t2, alpha1, theta1, p2_bar / t2, 0.0, 0.0);
    }
    let p2 = rho * p2_bar / t2;
    let p2_phase3 = (1.0 - rho) * p2_bar / t3;
    let p3_full = ctx.budget.p3_bar / t3;
    ctx.eval(true, t1, t2, alpha1, theta1, p2, p2_phase3, p3_full)
}

fn sweep_alpha_theta(
    ctx: &Ctx,
    t1: f64,
    span: f64,
    t2: f64,
    rho: f64,
    cfg: &CtrSearchConfig,
    local: &mut Option<Candidate>,
) {
    let na = cfg.alpha_points.max(2);
    for theta in theta_grid(cfg.theta_points, ctx.ch) {
        for ia in 0..na {
            let alpha = ia as f64 / (na - 1) as f64;
            fold_best(
                local,
                eval_split_point(ctx, t1, span, t2, rho, alpha, theta),
            );
        }
    }
    // closed-form relay ratios that put coexistence at equality under the
    // coherent phase, one per Phase-3 node-3 power assumption
    let theta_c = coherent_theta(ctx.ch);
    let t3 = span - t2;
    let (p2, p2_phase3) = if t3 > 1e-12 {
        (
            rho * ctx.budget.p2_bar / t2,
            (1.0 - rho) * ctx.budget.p2_bar / t3,
        )
    } else {
        (ctx.budget.p2_bar / t2, 0.0)
    };
    let (m14, m24, m34) = (
        ctx.ch.h14.magnitude(),
        ctx.ch.h24.magnitude(),
        ctx.ch.h34.magnitude(),
    );
    let p1 = ctx.budget.p1_bar;
    let a = m14 * p1.sqrt();
    let b = m24 * p2.sqrt();
    let cap14 = cap(m14 * m14 * p1);
    let p3_cases = [
        0.0,
        if t3 > 1e-12 {
            ctx.budget.p3_bar / t3
        } else {
            0.0
        },
    ];
    for p3 in p3_cases {
        let phase3 = (m14 * p1.sqrt() + m24 * p2_phase3.sqrt() + m34 * p3.sqrt()).powi(2);
        let k = ((ctx.rt - t1 * cap14 - t3 * cap(phase3)) / t2).exp2() - 1.0;
        if let Some(alpha) = ct::alpha_for_sinr_target(a, b, k) {
            fold_best(
                local,
                eval_split_point(ctx, t1, span, t2, rho, alpha, theta_c),
            );
        }
    }
}

/// Pure receiver relaying: `t1 = alpha1 = p2_phase3 = 0`, `t2 = 1 - t3`.
fn eval_rx_point(ctx: &Ctx, t3: f64) -> Option<Candidate> {
    if t3 <= 0.0 || t3 >= 1.0 {
        return None;
    }
    let t2 = 1.0 - t3;
    ctx.eval(
        false,
        0.0,
        t2,
        0.0,
        0.0,
        ctx.budget.p2_bar / t2,
        0.0,
        ctx.budget.p3_bar / t3,
    )
}

/// Zoom refinement of `(t2, rho, alpha1, theta1)` around the current best
/// `u_tx = 1` candidate.
fn refine_tx(ctx: &Ctx, cfg: &CtrSearchConfig, best: &mut Option<Candidate>) {
    let Some(b0) = *best else { return };
    let t1 = b0.params.t1;
    let span = 1.0 - t1;
    if span <= 0.0 {
        return;
    }
    let n = cfg.refine_points.max(3);
    let fixed_rho = cfg.rho_points <= 1;
    let rho_steps = if fixed_rho { 1 } else { n };
    let mut steps = [
        span / (cfg.t2_points.max(2) - 1) as f64,
        1.0 / (cfg.rho_points.max(2) - 1) as f64,
        1.0 / (cfg.alpha_points.max(2) - 1) as f64,
        TAU / cfg.theta_points.max(1) as f64,
    ];
    for _ in 0..cfg.refine_rounds {
        let c = best.unwrap();
        let center = [
            c.params.t2,
            if c.params.t3 > 0.0 && ctx.budget.p2_bar > 0.0 {
                (c.params.t2 * c.params.p2 / ctx.budget.p2_bar).clamp(0.0, 1.0)
            } else {
                1.0
            },
            c.params.alpha1,
            c.params.theta1,
        ];
        let offset = |i: usize, s: f64, v: f64| v + s * (2.0 * i as f64 / (n - 1) as f64 - 1.0);
        for i2 in 0..n {
            let t2 = offset(i2, steps[0], center[0]);
            for ir in 0..rho_steps {
                let rho = if fixed_rho {
                    equal_power_rho(t2, span)
                } else {
                    offset(ir, steps[1], center[1]).clamp(0.0, 1.0)
                };
                for ia in 0..n {
                    let alpha = offset(ia, steps[2], center[2]).clamp(0.0, 1.0);
                    for it in 0..n {
                        let theta = offset(it, steps[3], center[3]).rem_euclid(TAU);
                        fold_best(best, eval_split_point(ctx, t1, span, t2, rho, alpha, theta));
                    }
                }
            }
        }
        for s in &mut steps {
            *s *= 2.0 / (n - 1) as f64;
        }
    }
}

/// All-silent fallback: the SU transmits nothing and achieves rate zero.
fn silent_solution(ch: &FullCsitChannel, budget: &PowerBudget, rt: f64) -> CtrSolution {
    let params = CtrParams {
        t1: 0.0,
        t2: 1.0,
        t3: 0.0,
        alpha1: 0.0,
        theta1: 0.0,
        p1: budget.p1_bar,
        p2: 0.0,
        p2_phase3: 0.0,
        p3: 0.0,
    };
    let rhs = ctr_coexistence_rhs(ch, &params);
    let (u_tx, u_rx) = indicators(ch, budget, rt, &params);
    CtrSolution {
        params,
        su_rate: 0.0,
        u_tx,
        u_rx,
        coex_slack: rhs - rt,
        binding_branch: BindingBranch::PrivateRate,
    }
}
