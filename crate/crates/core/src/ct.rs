//! Clean transmitter relaying (CT) with full CSIT.
//!
//! The scheme runs in three phases: the SU transmitter (node 2) first listens
//! until it can decode the PU message, then superimposes its own precoded
//! signal on a scaled relay of the PU signal, and finally relays the PU
//! signal cleanly, with no SU data, for the rest of the codeword. The PU's
//! target rate is protected by the coexistence constraint and the SU rate is
//! what dirty-paper precoding delivers in Phase 2.
//!
//! The `JV` baseline is the same scheme restricted to a zero-length third
//! phase, so it falls out of the solver as a special case.

use crate::model::{cap, pos_part, FullCsitChannel, PowerBudget};
use crate::numerics::{bisect_root, golden_refine, BisectError, SearchConfig};

/// Operating point of the CT scheme.
///
/// `p1` is the PU power (all phases); node 2 transmits with power `p2` in
/// Phases 2 and 3, so the average-power policy is `(1 - t1) * p2 = P̄2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtParams {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    /// Fraction of the Phase-2 SU power spent relaying the PU signal.
    pub alpha1: f64,
    pub p1: f64,
    pub p2: f64,
}

impl CtParams {
    /// Parameters under the standard power policy; `t3` is implied.
    pub fn new(t1: f64, t2: f64, alpha1: f64, budget: &PowerBudget) -> Self {
        let t3 = (1.0 - t1 - t2).max(0.0);
        let p2 = if t1 < 1.0 {
            budget.p2_bar / (1.0 - t1)
        } else {
            0.0
        };
        Self {
            t1,
            t2,
            t3,
            alpha1,
            p1: budget.p1_bar,
            p2,
        }
    }
}

/// Solver output: the chosen operating point and the SU rate it achieves.
#[derive(Debug, Clone, Copy)]
pub struct CtSolution {
    pub params: CtParams,
    pub su_rate: f64,
    pub feasible: bool,
    /// Coexistence RHS minus the PU target rate (nonnegative when feasible).
    pub coex_slack: f64,
}

/// Phase-1 duration needed for node 2 to decode the PU message:
/// `rt / C(|h12|^2 P1)`. `None` when the decode link cannot support the
/// target inside one codeword (fraction ≥ 1, or a dead link).
pub fn decode_time_fraction(ch: &FullCsitChannel, budget: &PowerBudget, rt: f64) -> Option<f64> {
    assert!(rt >= 0.0 && rt.is_finite());
    let c12 = cap(ch.h12.magnitude().powi(2) * budget.p1_bar);
    if rt == 0.0 {
        return Some(0.0);
    }
    if c12 <= 0.0 {
        return None;
    }
    let t1 = rt / c12;
    (t1 < 1.0).then_some(t1)
}

fn phase_gains(ch: &FullCsitChannel, p: &CtParams) -> (f64, f64) {
    // amplitude of the PU signal path and of the relay path at node 4
    let a = ch.h14.magnitude() * p.p1.sqrt();
    let b = ch.h24.magnitude() * p.p2.sqrt();
    (a, b)
}

/// Achievable PU rate under the CT operating point (the coexistence RHS):
/// sum of the three per-phase rates seen by the PU's single-user decoder.
pub fn ct_coexistence_rhs(ch: &FullCsitChannel, p: &CtParams) -> f64 {
    debug_assert!((p.t1 + p.t2 + p.t3 - 1.0).abs() < 1e-9);
    debug_assert!((0.0..=1.0 + 1e-12).contains(&p.alpha1));
    let (a, b) = phase_gains(ch, p);
    let phase2 = (a + b * p.alpha1.sqrt()).powi(2) / (1.0 + b * b * (1.0 - p.alpha1));
    p.t1 * cap(a * a) + p.t2 * cap(phase2) + p.t3 * cap((a + b).powi(2))
}

/// The Phase-2 SINR the relay ratio must reach for coexistence equality,
/// expressed as `K(t2) = 2^{(R_T - t1 C1 - t3 C3)/t2} - 1` where `C1`/`C3`
/// are the Phase-1/Phase-3 PU rates. May be negative (no relaying needed)
/// or infinite (target unattainable at this `t2`).
pub fn k_factor(ch: &FullCsitChannel, budget: &PowerBudget, rt: f64, t1: f64, t2: f64) -> f64 {
    assert!(t2 > 0.0, "k_factor: t2 must be positive");
    assert!(t1 >= 0.0 && t1 + t2 <= 1.0 + 1e-12);
    let p = CtParams::new(t1, t2, 0.0, budget);
    let (a, b) = phase_gains(ch, &p);
    let t3 = 1.0 - t1 - t2;
    let exponent = (rt - t1 * cap(a * a) - t3 * cap((a + b).powi(2))) / t2;
    exponent.exp2() - 1.0
}

/// Smallest relay ratio whose Phase-2 SINR reaches `k`, where the SINR is
/// `(a + b sqrt(alpha))^2 / (1 + b^2 (1 - alpha))`. Returns 0 when the
/// target is met without relaying and `None` when even full relaying falls
/// short.
pub(crate) fn alpha_for_sinr_target(a: f64, b: f64, k: f64) -> Option<f64> {
    if !k.is_finite() {
        return None;
    }
    let (a2, b2) = (a * a, b * b);
    // SINR at alpha = 0; the tolerance keeps exact-boundary targets (slack
    // identically zero) from flipping to "infeasible" through rounding
    let k0 = a2 / (1.0 + b2);
    if k <= k0 * (1.0 + 1e-12) + 1e-15 {
        return Some(0.0);
    }
    if b2 <= 0.0 {
        return None;
    }
    let disc = ((1.0 - a2 + b2) * k + (1.0 + b2) * k * k).max(0.0);
    let x = (-a + disc.sqrt()) / (b * (1.0 + k));
    if x > 1.0 + 1e-12 {
        None
    } else {
        Some((x * x).clamp(0.0, 1.0))
    }
}

/// Closed-form optimal relay ratio for a given `t2`: the unique
/// `alpha1 ∈ [0, 1]` putting the coexistence constraint at equality, or 0
/// when the constraint is slack at `alpha1 = 0`. `None` means the target
/// rate is out of reach at this `t2`.
pub fn optimal_alpha_closed_form(
    ch: &FullCsitChannel,
    budget: &PowerBudget,
    rt: f64,
    t1: f64,
    t2: f64,
) -> Option<f64> {
    let p = CtParams::new(t1, t2, 0.0, budget);
    let (a, b) = phase_gains(ch, &p);
    alpha_for_sinr_target(a, b, k_factor(ch, budget, rt, t1, t2))
}

/// SU rate of the CT operating point: `t2 C(|h23|^2 (1 - alpha1) p2)`.
pub fn ct_rate(ch: &FullCsitChannel, p: &CtParams) -> f64 {
    debug_assert!((0.0..=1.0 + 1e-12).contains(&p.alpha1));
    let g = ch.h23.magnitude().powi(2) * (1.0 - p.alpha1).max(0.0) * p.p2;
    p.t2 * cap(g)
}

/// Upper bound on the SU multiplexing gain of the CT: the Phase-1 decode
/// time caps the pre-log at `(1 - C(|h14|^2 P1)/C(|h12|^2 P1))^+`.
pub fn ct_mux_bound(ch: &FullCsitChannel, budget: &PowerBudget) -> f64 {
    assert!(budget.p1_bar > 0.0);
    let c14 = cap(ch.h14.magnitude().powi(2) * budget.p1_bar);
    let c12 = cap(ch.h12.magnitude().powi(2) * budget.p1_bar);
    if c14 <= 0.0 {
        return 1.0;
    }
    if c12 <= 0.0 {
        return 0.0;
    }
    pos_part(1.0 - c14 / c12)
}

/// Maximize the SU rate over `t2` with `t1` pinned at the decode boundary.
///
/// Line search: uniform grid over `t2 ∈ (0, 1 - t1]` followed by
/// golden-section refinement around the best grid point. Infeasibility is
/// encoded in the result, never raised.
pub fn solve_ct(
    ch: &FullCsitChannel,
    budget: &PowerBudget,
    rt: f64,
    cfg: &SearchConfig,
) -> CtSolution {
    solve_impl(ch, budget, rt, cfg, false)
}

/// The two-phase baseline: CT with `t3 = 0` (`t2` forced to `1 - t1`).
pub fn solve_jv(
    ch: &FullCsitChannel,
    budget: &PowerBudget,
    rt: f64,
    cfg: &SearchConfig,
) -> CtSolution {
    solve_impl(ch, budget, rt, cfg, true)
}

fn solve_impl(
    ch: &FullCsitChannel,
    budget: &PowerBudget,
    rt: f64,
    cfg: &SearchConfig,
    two_phase_only: bool,
) -> CtSolution {
    let Some(t1) = decode_time_fraction(ch, budget, rt) else {
        return decode_infeasible_solution(ch, budget, rt);
    };
    let span = 1.0 - t1;
    let eval = |t2: f64| -> Option<(f64, f64)> {
        if t2 <= 0.0 || t2 > span + 1e-15 {
            return None;
        }
        let t2 = t2.min(span);
        optimal_alpha_closed_form(ch, budget, rt, t1, t2).map(|alpha| {
            let p = CtParams::new(t1, t2, alpha, budget);
            (ct_rate(ch, &p), alpha)
        })
    };

    let (t2_best, alpha_best, ok) = if two_phase_only {
        match eval(span) {
            Some((_, alpha)) => (span, alpha, true),
            None => (span, 0.0, false),
        }
    } else {
        let n = cfg.grid_points.max(2) - 1;
        let mut best: Option<(f64, f64, f64)> = None; // (rate, t2, alpha)
        for k in 1..=n {
            let t2 = span * k as f64 / n as f64;
            if let Some((rate, alpha)) = eval(t2) {
                if best.is_none_or(|(r, _, _)| rate > r) {
                    best = Some((rate, t2, alpha));
                }
            }
        }
        match best {
            None => (span, 0.0, false),
            Some((grid_rate, t2g, alpha_g)) => {
                let step = span / n as f64;
                let lo = (t2g - step).max(step * 1e-3);
                let hi = (t2g + step).min(span);
                let (t2r, refined_rate) = golden_refine(
                    |t2| eval(t2).map_or(f64::NEG_INFINITY, |(r, _)| r),
                    (lo, hi),
                    cfg.refine_iters,
                );
                if refined_rate > grid_rate {
                    let alpha = eval(t2r).map_or(alpha_g, |(_, a)| a);
                    (t2r, alpha, true)
                } else {
                    (t2g, alpha_g, true)
                }
            }
        }
    };

    if !ok {
        // target rate unattainable at every searched t2
        let params = CtParams::new(t1, span, 1.0, budget);
        let rhs = ct_coexistence_rhs(ch, &params);
        return CtSolution {
            params,
            su_rate: 0.0,
            feasible: false,
            coex_slack: rhs - rt,
        };
    }
    finish_solution(ch, budget, rt, t1, t2_best, alpha_best)
}

/// Assemble the solution, cross-validating the closed-form relay ratio
/// against the coexistence constraint; on disagreement the bisection root
/// is used instead.
fn finish_solution(
    ch: &FullCsitChannel,
    budget: &PowerBudget,
    rt: f64,
    t1: f64,
    t2: f64,
    alpha: f64,
) -> CtSolution {
    let mut params = CtParams::new(t1, t2, alpha, budget);
    let mut rhs = ct_coexistence_rhs(ch, &params);
    if alpha > 0.0 && (rhs - rt).abs() > 1e-6 {
        log::warn!(
            "closed-form alpha1 {alpha:.6} misses coexistence equality by {:.3e}; \
             falling back to bisection",
            rhs - rt
        );
        match bisect_root(
            |al| ct_coexistence_rhs(ch, &CtParams::new(t1, t2, al, budget)) - rt,
            0.0,
            1.0,
            1e-12,
        ) {
            Ok(root) => params.alpha1 = root,
            Err(BisectError::PositiveAtLower) => params.alpha1 = 0.0,
            Err(BisectError::NegativeAtUpper) => params.alpha1 = 1.0,
        }
        rhs = ct_coexistence_rhs(ch, &params);
    }
    let feasible = rhs >= rt - 1e-9;
    CtSolution {
        params,
        su_rate: if feasible { ct_rate(ch, &params) } else { 0.0 },
        feasible,
        coex_slack: rhs - rt,
    }
}

fn decode_infeasible_solution(ch: &FullCsitChannel, budget: &PowerBudget, rt: f64) -> CtSolution {
    // node 2 never finishes decoding: the whole codeword is Phase 1
    let params = CtParams {
        t1: 1.0,
        t2: 0.0,
        t3: 0.0,
        alpha1: 0.0,
        p1: budget.p1_bar,
        p2: 0.0,
    };
    let rhs = ct_coexistence_rhs(ch, &params);
    CtSolution {
        params,
        su_rate: 0.0,
        feasible: false,
        coex_slack: rhs - rt,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ComplexGain;

    const T1_FIG3: f64 = 0.571_208_506_411_556_5;
    const RT_FIG3: f64 = 3.803_227_036_434_927_7;
    const ALPHA_JV_FIG3: f64 = 0.858_815_105_014_644_3;

    fn fig3() -> FullCsitChannel {
        FullCsitChannel {
            h14: ComplexGain::new(0.36, 1.6),
            h24: ComplexGain::new(0.45, 1.6),
            h34: ComplexGain::new(0.96, -3.1),
            h13: ComplexGain::new(0.96, -0.69),
            h23: ComplexGain::new(0.24, -1.89),
            h12: ComplexGain::new(1.0, -2.28),
        }
    }

    fn budget_20db() -> PowerBudget {
        PowerBudget::new(100.0, 100.0, 0.0)
    }

    #[test]
    fn decode_fraction_fig3() {
        let t1 = decode_time_fraction(&fig3(), &budget_20db(), RT_FIG3).unwrap();
        assert!((t1 - T1_FIG3).abs() < 1e-12);
        assert_eq!(
            decode_time_fraction(&fig3(), &budget_20db(), 0.0),
            Some(0.0)
        );
    }

    #[test]
    fn decode_fraction_dead_link() {
        let mut ch = fig3();
        ch.h12 = ComplexGain::new(0.0, 0.0);
        assert_eq!(decode_time_fraction(&ch, &budget_20db(), 1.0), None);
    }

    #[test]
    fn decode_fraction_boundary_infeasible() {
        // rt equal to the full-codeword decode capacity leaves no data time
        let ch = fig3();
        let c12 = cap(100.0);
        assert_eq!(decode_time_fraction(&ch, &budget_20db(), c12), None);
    }

    #[test]
    fn coexistence_rhs_collapses_without_su_power() {
        let ch = fig3();
        let zero = PowerBudget::new(100.0, 0.0, 0.0);
        for (t1, t2, al) in [(0.2, 0.5, 0.3), (0.0, 1.0, 0.9), (0.5, 0.2, 0.0)] {
            let p = CtParams::new(t1, t2, al, &zero);
            assert!((ct_coexistence_rhs(&ch, &p) - RT_FIG3).abs() < 1e-12);
        }
    }

    #[test]
    fn coexistence_rhs_phase1_only() {
        let p = CtParams {
            t1: 1.0,
            t2: 0.0,
            t3: 0.0,
            alpha1: 0.0,
            p1: 100.0,
            p2: 55.0,
        };
        assert!((ct_coexistence_rhs(&fig3(), &p) - RT_FIG3).abs() < 1e-12);
    }

    #[test]
    fn coexistence_rhs_frozen_sample() {
        // independent high-precision evaluation of the three-term sum
        let p = CtParams {
            t1: 0.5712,
            t2: 0.42,
            t3: 1.0 - 0.5712 - 0.42,
            alpha1: 0.5,
            p1: 100.0,
            p2: 100.0 / (1.0 - 0.5712),
        };
        let got = ct_coexistence_rhs(&fig3(), &p);
        assert!((got - 3.057_969_440_048_111_7).abs() < 1e-11);

        // cross-check against a differently factored re-implementation
        let (h14, h24) = (0.36f64, 0.45f64);
        let (p1, p2) = (p.p1, p.p2);
        let s2 = {
            let num = (h14 * p1.sqrt() + h24 * (p.alpha1 * p2).sqrt()).powi(2);
            let den = 1.0 + h24 * h24 * (1.0 - p.alpha1) * p2;
            num / den
        };
        let alt = p.t1 * (1.0 + h14 * h14 * p1).log2()
            + p.t2 * (1.0 + s2).log2()
            + p.t3 * (1.0 + (h14 * p1.sqrt() + h24 * p2.sqrt()).powi(2)).log2();
        assert!((got - alt).abs() < 1e-12);
    }

    #[test]
    fn k_factor_two_phase_identity() {
        // with t1 = t3 = 0, K(1) = 2^{R_T} - 1 for any target
        let ch = fig3();
        let b = budget_20db();
        for rt in [0.5, 1.0, RT_FIG3] {
            let k = k_factor(&ch, &b, rt, 0.0, 1.0);
            assert!((k - (rt.exp2() - 1.0)).abs() < 1e-9);
        }
        // at the default target this equals |h14|^2 P1
        let k = k_factor(&ch, &b, RT_FIG3, 0.0, 1.0);
        assert!((k - 12.96).abs() < 1e-9);
        // and the JV operating point (t1 at the decode boundary) gives the same
        let k_jv = k_factor(&ch, &b, RT_FIG3, T1_FIG3, 1.0 - T1_FIG3);
        assert!((k_jv - 12.96).abs() < 1e-9);
    }

    #[test]
    #[should_panic(expected = "t2 must be positive")]
    fn k_factor_rejects_zero_t2() {
        k_factor(&fig3(), &budget_20db(), 1.0, 0.0, 0.0);
    }

    #[test]
    fn alpha_zero_when_constraint_slack() {
        // a tiny target is satisfied without any relaying
        let al = optimal_alpha_closed_form(&fig3(), &budget_20db(), 0.05, 0.01, 0.5).unwrap();
        assert_eq!(al, 0.0);
    }

    #[test]
    fn alpha_closed_form_matches_oracle_jv() {
        let ch = fig3();
        let b = budget_20db();
        let t2 = 1.0 - T1_FIG3;
        let al = optimal_alpha_closed_form(&ch, &b, RT_FIG3, T1_FIG3, t2).unwrap();
        assert!((al - ALPHA_JV_FIG3).abs() < 1e-12);
        // constraint equality at the closed-form ratio
        let p = CtParams::new(T1_FIG3, t2, al, &b);
        assert!((ct_coexistence_rhs(&ch, &p) - RT_FIG3).abs() < 1e-9);
    }

    #[test]
    fn alpha_closed_form_tracks_bisection_inside_three_phase_grid() {
        let ch = fig3();
        let b = budget_20db();
        let span = 1.0 - T1_FIG3;
        for k in 1..20 {
            let t2 = span * k as f64 / 20.0;
            let Some(al) = optimal_alpha_closed_form(&ch, &b, RT_FIG3, T1_FIG3, t2) else {
                continue;
            };
            if al > 0.0 && al < 1.0 {
                let p = CtParams::new(T1_FIG3, t2, al, &b);
                assert!(
                    (ct_coexistence_rhs(&ch, &p) - RT_FIG3).abs() < 1e-9,
                    "equality failed at t2 = {t2}"
                );
            }
        }
    }

    #[test]
    fn alpha_infeasible_without_relay_path() {
        let mut ch = fig3();
        ch.h24 = ComplexGain::new(0.0, 0.0);
        // a target above the interference-free rate cannot be met
        let r = optimal_alpha_closed_form(&ch, &budget_20db(), RT_FIG3 + 0.5, 0.1, 0.9);
        assert_eq!(r, None);
        // but a target at (or below) the interference-free rate needs no
        // relaying at all when h24 = 0
        let r = optimal_alpha_closed_form(&ch, &budget_20db(), RT_FIG3, 0.1, 0.9);
        assert_eq!(r, Some(0.0));
        let r = optimal_alpha_closed_form(&ch, &budget_20db(), RT_FIG3 * 0.9, 0.1, 0.9);
        assert_eq!(r, Some(0.0));
    }

    #[test]
    fn rate_examples() {
        let ch = fig3();
        let b = budget_20db();
        let full_relay = CtParams::new(0.2, 0.5, 1.0, &b);
        assert_eq!(ct_rate(&ch, &full_relay), 0.0);
        let no_time = CtParams::new(0.2, 0.0, 0.3, &b);
        assert_eq!(ct_rate(&ch, &no_time), 0.0);
        let p = CtParams::new(T1_FIG3, 0.4, 0.3, &b);
        assert!((ct_rate(&ch, &p) - 1.351_580_609_740_565_6).abs() < 1e-12);
    }

    #[test]
    fn rate_decreases_with_alpha() {
        let ch = fig3();
        let b = budget_20db();
        let mut last = f64::INFINITY;
        for i in 0..=10 {
            let p = CtParams::new(0.3, 0.5, i as f64 / 10.0, &b);
            let r = ct_rate(&ch, &p);
            assert!(r < last);
            last = r;
        }
    }

    #[test]
    fn coexistence_monotone_in_alpha() {
        let ch = fig3();
        let b = budget_20db();
        for &t2 in &[0.1, 0.25, 1.0 - T1_FIG3] {
            let mut last = f64::NEG_INFINITY;
            for i in 0..=32 {
                let p = CtParams::new(T1_FIG3, t2, i as f64 / 32.0, &b);
                let rhs = ct_coexistence_rhs(&ch, &p);
                assert!(rhs >= last - 1e-12);
                last = rhs;
            }
        }
    }

    #[test]
    fn solver_dominates_jv_and_meets_constraint() {
        let ch = fig3();
        let cfg = SearchConfig::default();
        for snr_db in [0.0, 10.0, 20.0, 30.0] {
            let b = PowerBudget::new(100.0, crate::model::snr_db_to_linear(snr_db), 0.0);
            let ct = solve_ct(&ch, &b, RT_FIG3, &cfg);
            let jv = solve_jv(&ch, &b, RT_FIG3, &cfg);
            assert!(ct.feasible && jv.feasible);
            assert!(
                ct.su_rate >= jv.su_rate - 1e-9,
                "CT below JV at {snr_db} dB"
            );
            assert!(ct.coex_slack >= -1e-9);
            assert!(jv.coex_slack >= -1e-9);
        }
    }

    #[test]
    fn solver_unconstrained_when_target_tiny() {
        let ch = fig3();
        let b = budget_20db();
        let sol = solve_ct(&ch, &b, 1e-6, &SearchConfig::default());
        // no relaying needed: all time and power go to the SU
        assert!(sol.feasible);
        assert_eq!(sol.params.alpha1, 0.0);
        let expect = (1.0 - sol.params.t1) * cap(0.24f64.powi(2) * sol.params.p2);
        assert!((sol.su_rate - expect).abs() < 1e-9);
    }

    #[test]
    fn solver_flags_decode_infeasible() {
        let mut ch = fig3();
        ch.h12 = ComplexGain::new(0.01, 0.0);
        let sol = solve_ct(&ch, &budget_20db(), RT_FIG3, &SearchConfig::default());
        assert!(!sol.feasible);
        assert_eq!(sol.su_rate, 0.0);
        assert_eq!(sol.params.t1, 1.0);
    }

    #[test]
    fn zero_su_budget() {
        let ch = fig3();
        let b = PowerBudget::new(100.0, 0.0, 0.0);
        let sol = solve_ct(&ch, &b, RT_FIG3, &SearchConfig::default());
        assert_eq!(sol.su_rate, 0.0);
        assert!(
            sol.feasible,
            "default target stays feasible with a silent SU"
        );
        let worse = solve_ct(&ch, &b, RT_FIG3 + 0.1, &SearchConfig::default());
        assert!(!worse.feasible);
    }

    #[test]
    fn mux_bound_examples() {
        let ch = fig3();
        let b = budget_20db();
        assert!((ct_mux_bound(&ch, &b) - 0.428_791_493_588_443_54).abs() < 1e-12);

        let mut sym = fig3();
        sym.h12 = ComplexGain::new(0.36, 0.0);
        assert_eq!(ct_mux_bound(&sym, &b), 0.0);

        let mut free = fig3();
        free.h14 = ComplexGain::new(0.0, 0.0);
        assert_eq!(ct_mux_bound(&free, &b), 1.0);
    }
}
