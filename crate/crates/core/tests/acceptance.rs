//! Acceptance suite: structural and numeric properties of the solvers on
//! the bundled simulation channels. Each criterion prints one PASS line
//! (visible with `--nocapture`) and enforces its runtime budget; the tests
//! share a lock so the timings are not distorted by parallel execution.

use cogrelay::ct;
use cogrelay::ctr;
use cogrelay::experiments::{
    parse_sweep_spec_str, preset, run_sweep, solve_scheme_at_pc, RunKnobs, Scheme, SweepSpec,
    SweepVariable,
};
use cogrelay::fading::{
    self, ctr_fading_alpha_sweep, ergodic_cap_exponential, ergodic_mc, exp1, LaGpcQuery, McConfig,
};
use cogrelay::model::{cap, snr_db_to_linear, CsitMode, FadingStats, FullCsitChannel, PowerBudget};
use num_complex::Complex64;
use std::sync::Mutex;
use std::time::Instant;

static GATE: Mutex<()> = Mutex::new(());

fn criterion(number: u32, name: &str, budget_secs: f64, body: impl FnOnce()) {
    let _guard = GATE.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    body();
    let elapsed = start.elapsed().as_secs_f64();
    println!("ACCEPTANCE {number} {name}: PASS ({elapsed:.1}s)");
    assert!(
        elapsed < budget_secs,
        "criterion {number} blew its runtime budget: {elapsed:.1}s > {budget_secs}s"
    );
}

fn full_channel(name: &str) -> FullCsitChannel {
    match preset(name).unwrap().csit {
        CsitMode::FullCsit(ch) => ch,
        _ => panic!("{name} is not a full-CSIT preset"),
    }
}

fn stats_of(name: &str) -> FadingStats {
    match preset(name).unwrap().csit {
        CsitMode::Statistics(s) => s,
        _ => panic!("{name} is not a statistics preset"),
    }
}

fn auto_rt_full(ch: &FullCsitChannel) -> f64 {
    cap(ch.h14.magnitude().powi(2) * 100.0)
}

#[test]
fn criterion_1_closed_form_alpha_equality() {
    criterion(1, "closed-form alpha1 coexistence equality", 1.0, || {
        for name in ["fig3", "fig4"] {
            let ch = full_channel(name);
            let rt = auto_rt_full(&ch);
            for snr_db in [0.0, 10.0, 20.0, 30.0] {
                let budget = PowerBudget::new(100.0, snr_db_to_linear(snr_db), 0.0);
                let t1 = ct::decode_time_fraction(&ch, &budget, rt)
                    .expect("decode feasible on these channels");
                let span = 1.0 - t1;
                for k in 1..=20 {
                    let t2 = span * k as f64 / 20.0;
                    let Some(alpha) = ct::optimal_alpha_closed_form(&ch, &budget, rt, t1, t2)
                    else {
                        continue;
                    };
                    if alpha <= 0.0 || alpha >= 1.0 {
                        continue;
                    }
                    let p = ct::CtParams::new(t1, t2, alpha, &budget);
                    let gap = (ct::ct_coexistence_rhs(&ch, &p) - rt).abs();
                    assert!(
                        gap <= 1e-9,
                        "{name} snr {snr_db} t2 {t2:.4}: |rhs - rt| = {gap:.2e}"
                    );
                }
            }
        }
    });
}

fn snr_sweep(name: &str, schemes: Vec<Scheme>, steps: usize) -> Vec<(f64, Vec<(Scheme, f64)>)> {
    let spec = SweepSpec {
        scenario: preset(name).unwrap(),
        scenario_name: name.into(),
        variable: SweepVariable::SuSnrDb,
        start: 0.0,
        stop: 30.0,
        steps,
        schemes,
        knobs: RunKnobs::default(),
    };
    run_sweep(&spec)
        .unwrap()
        .into_iter()
        .map(|row| {
            (
                row.sweep_value,
                row.cells.iter().map(|(s, r)| (*s, r.rate)).collect(),
            )
        })
        .collect()
}

#[test]
fn criterion_2_scheme_dominance_full_csit() {
    criterion(2, "CT dominates JV; CTR beats JV on fig3", 120.0, || {
        for name in ["fig3", "fig4"] {
            for (snr, cells) in snr_sweep(name, vec![Scheme::Jv, Scheme::Ct], 16) {
                let jv = cells[0].1;
                let ct_rate = cells[1].1;
                assert!(
                    ct_rate >= jv - 1e-9,
                    "{name}: CT {ct_rate} below JV {jv} at {snr} dB"
                );
            }
        }
        // fig5: |h24| sweep at the scenario budget
        let spec = SweepSpec {
            scenario: preset("fig5").unwrap(),
            scenario_name: "fig5".into(),
            variable: SweepVariable::H24Magnitude,
            start: 0.02,
            stop: 1.2,
            steps: 60,
            schemes: vec![Scheme::Jv, Scheme::Ct],
            knobs: RunKnobs::default(),
        };
        for row in run_sweep(&spec).unwrap() {
            let jv = row.cells[0].1.rate;
            let ct_rate = row.cells[1].1.rate;
            assert!(
                ct_rate >= jv - 1e-9,
                "fig5 |h24| = {}: CT {ct_rate} below JV {jv}",
                row.sweep_value
            );
        }
        // the visible fig3 gap at 20 dB: CTR clearly above JV
        let scenario = preset("fig3").unwrap();
        let rt = scenario.resolved_target_rate();
        let knobs = RunKnobs::default();
        let jv = solve_scheme_at_pc(&scenario, rt, 100.0, Scheme::Jv, &knobs);
        let ctr = solve_scheme_at_pc(&scenario, rt, 100.0, Scheme::Ctr, &knobs);
        assert!(
            ctr.result.rate > jv.result.rate + 0.05,
            "CTR {} vs JV {}",
            ctr.result.rate,
            jv.result.rate
        );
    });
}

#[test]
fn criterion_3_fig5_region_structure() {
    criterion(3, "fig5 three-region structure", 300.0, || {
        let spec = SweepSpec {
            scenario: preset("fig5").unwrap(),
            scenario_name: "fig5".into(),
            variable: SweepVariable::H24Magnitude,
            start: 0.02,
            stop: 1.2,
            steps: 60,
            schemes: vec![Scheme::Jv, Scheme::Ct, Scheme::Ctr],
            knobs: RunKnobs::default(),
        };
        let rows = run_sweep(&spec).unwrap();
        for row in &rows {
            let mag = row.sweep_value;
            let jv = row.cells[0].1.rate;
            let ct_rate = row.cells[1].1.rate;
            let ctr_rate = row.cells[2].1.rate;
            if mag < 0.22 - 1e-9 {
                assert!(
                    (ct_rate - jv).abs() <= 1e-3,
                    "region 1 at |h24| = {mag}: CT {ct_rate} vs JV {jv}"
                );
            }
            if mag > 0.22 + 1e-9 && mag < 0.32 - 1e-9 {
                assert!(
                    ctr_rate >= ct_rate - 1e-3,
                    "region 2 at |h24| = {mag}: CTR {ctr_rate} vs CT {ct_rate}"
                );
            }
            if mag > 0.32 + 1e-9 {
                assert!(
                    (ctr_rate - ct_rate).abs() <= 1e-3,
                    "region 3 at |h24| = {mag}: CTR {ctr_rate} vs CT {ct_rate}"
                );
            }
        }
    });
}

#[test]
fn criterion_4_precoder_collapse() {
    criterion(4, "precoder objective minimized at beta = 0", 60.0, || {
        let stats = stats_of("fig6");
        let mc = McConfig {
            n_samples: 1_000_000,
            seed: 2024,
        };
        let query = |beta: Complex64| LaGpcQuery {
            beta,
            p1_bar: 100.0,
            p2_bar: 100.0,
            var13: stats.var13,
            var23: stats.var23,
        };
        let f0 = fading::la_gpc_objective(&query(Complex64::new(0.0, 0.0)), &mc);
        for mag in [0.25, 0.5, 1.0, 2.0] {
            for k in 0..8 {
                let phase = std::f64::consts::TAU * k as f64 / 8.0;
                let beta = Complex64::from_polar(mag, phase);
                let fb = fading::la_gpc_objective(&query(beta), &mc);
                assert!(
                    f0.mean <= fb.mean + 3.0 * fb.stderr,
                    "f(0) = {} above f({beta}) = {} +/- {}",
                    f0.mean,
                    fb.mean,
                    fb.stderr
                );
            }
        }
        // variance matching: |H13 - beta H23|^2 has the law of
        // (1 + |beta|^2 s23/s13) |H13|^2
        for beta in [Complex64::new(1.0, 0.0), Complex64::from_polar(0.5, 1.0)] {
            let scale = 1.0 + beta.norm_sqr() * stats.var23 / stats.var13;
            let lhs = ergodic_mc(
                |s| (100.0 * 100.0 * scale * s.h13.norm_sqr() + 100.0).log2(),
                &stats,
                mc.n_samples,
                mc.seed,
            );
            let rhs = ergodic_mc(
                |s| (100.0 * 100.0 * (s.h13 - beta * s.h23).norm_sqr() + 100.0).log2(),
                &stats,
                mc.n_samples,
                mc.seed,
            );
            assert!(
                (lhs.mean - rhs.mean).abs() <= 3.0 * (lhs.stderr + rhs.stderr),
                "identity violated: {} vs {}",
                lhs.mean,
                rhs.mean
            );
        }
    });
}

#[test]
fn criterion_5_fading_alpha_at_constraint_equality() {
    criterion(
        5,
        "optimal fading relay ratio sits at equality",
        300.0,
        || {
            let scenario = preset("fig7").unwrap();
            let stats = stats_of("fig7");
            let rt = scenario.resolved_target_rate();
            let knobs = RunKnobs::default();
            let solved = solve_scheme_at_pc(&scenario, rt, 100.0, Scheme::Ctr, &knobs);
            let r = solved.result;
            assert!(r.rate > 0.0, "fig7 CTR solve produced no rate");
            assert!(
                r.alpha1 > 0.0,
                "fig7 at 20 dB requires common-message relaying"
            );
            let tol = 1e-6_f64.max(3.0 * r.stderr);
            assert!(
                solved.coex_slack.abs() <= tol,
                "bisection slack {} exceeds {tol}",
                solved.coex_slack
            );

            // rebuild the solved operating point and sweep the relay ratio
            let b = solved.budget;
            let params = fading::FadingCtrParams {
                t1: r.t1,
                t2: r.t2,
                t3: r.t3,
                alpha1: r.alpha1,
                p1: b.p1_bar,
                p2: if r.t3 > 1e-12 {
                    r.rho * b.p2_bar / r.t2
                } else {
                    b.p2_bar / r.t2
                },
                p2_phase3: if r.t3 > 1e-12 {
                    (1.0 - r.rho) * b.p2_bar / r.t3
                } else {
                    0.0
                },
                p3: if r.t3 > 1e-12 { b.p3_bar / r.t3 } else { 0.0 },
            };
            let alphas: Vec<f64> = (0..41).map(|i| i as f64 / 40.0).collect();
            let sweep = ctr_fading_alpha_sweep(&stats, &b, rt, &params, &alphas, &knobs.mc);

            let mut max_rate: f64 = 0.0;
            let mut max_stderr = 0.0;
            for pt in &sweep {
                let rate = if pt.feasible { pt.rate.mean } else { 0.0 };
                if rate > max_rate {
                    max_rate = rate;
                    max_stderr = pt.rate.stderr;
                }
            }
            assert!(
                r.rate >= max_rate - 3.0 * max_stderr.max(r.stderr),
                "solver rate {} below sweep max {max_rate}",
                r.rate
            );

            // both min-branch estimates are nonincreasing in alpha1
            for w in sweep.windows(2) {
                let tol1 = 3.0 * (w[0].branch_private.stderr + w[1].branch_private.stderr);
                assert!(
                    w[1].branch_private.mean <= w[0].branch_private.mean + tol1.max(1e-12),
                    "private branch not nonincreasing at alpha {}",
                    w[1].alpha1
                );
                let tol2 = 3.0 * (w[0].branch_sum.stderr + w[1].branch_sum.stderr);
                assert!(
                    w[1].branch_sum.mean <= w[0].branch_sum.mean + tol2.max(1e-12),
                    "sum branch not nonincreasing at alpha {}",
                    w[1].alpha1
                );
            }
        },
    );
}

#[test]
fn criterion_6_ergodic_oracle() {
    criterion(
        6,
        "Monte Carlo matches the exponential-integral oracle",
        30.0,
        || {
            // series oracle for E1(1): 50 alternating terms
            let series = {
                let x: f64 = 1.0;
                let mut sum = 0.0;
                let mut term = 1.0;
                for k in 1..=50 {
                    term *= -x / k as f64;
                    sum += -term / k as f64;
                }
                -0.577_215_664_901_532_9 - x.ln() + sum
            };
            assert!((exp1(1.0) - series).abs() < 1e-12);
            assert!((exp1(1.0) - 0.2193839).abs() <= 1e-6);

            let stats = FadingStats::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
            for p in [1.0, 10.0, 100.0] {
                let est = ergodic_mc(
                    |s| (1.0 + s.h14.norm_sqr() * p).log2(),
                    &stats,
                    1_000_000,
                    99,
                );
                let oracle = ergodic_cap_exponential(1.0, p);
                assert!(
                    (est.mean - oracle).abs() <= 3.0 * est.stderr,
                    "sigma^2 P = {p}: MC {} vs oracle {oracle} (stderr {})",
                    est.mean,
                    est.stderr
                );
            }
        },
    );
}

#[test]
fn criterion_7_fading_scheme_ordering() {
    criterion(
        7,
        "fading CTR dominates CT across the SNR sweep",
        600.0,
        || {
            let scenario = preset("fig6").unwrap();
            let rt = scenario.resolved_target_rate();
            let knobs = RunKnobs::default();
            let mut ct_at_0 = f64::NAN;
            let mut gap_at_0 = f64::NAN;
            let mut stderr_at_0 = 0.0;
            for snr_db in [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0] {
                let pc = snr_db_to_linear(snr_db);
                let ct_sol = solve_scheme_at_pc(&scenario, rt, pc, Scheme::Ct, &knobs);
                let ctr_sol = solve_scheme_at_pc(&scenario, rt, pc, Scheme::Ctr, &knobs);
                let (ctv, ctrv) = (ct_sol.result.rate, ctr_sol.result.rate);
                assert!(ctv >= 0.0);
                assert!(
                    ctrv >= ctv - 1e-9,
                    "CTR {ctrv} below CT {ctv} at {snr_db} dB"
                );
                if snr_db == 0.0 {
                    ct_at_0 = ctv;
                    gap_at_0 = ctrv - ctv;
                    stderr_at_0 = ctr_sol.result.stderr.max(ct_sol.result.stderr);
                }
            }
            assert!(
                ct_at_0 < 0.2,
                "CT at 0 dB SU SNR should be tiny, got {ct_at_0}"
            );
            assert!(
                gap_at_0 >= 3.0 * stderr_at_0,
                "CTR gap at 0 dB ({gap_at_0}) not significant vs stderr {stderr_at_0}"
            );
        },
    );
}

#[test]
fn criterion_8_gmg_approaches_bound() {
    criterion(
        8,
        "GMG approaches the multiplexing-gain bound",
        600.0,
        || {
            // full CSIT (fig8)
            let ch = full_channel("fig8");
            let budget = PowerBudget::new(100.0, 100.0, 0.0);
            let bound_full = ctr::ctr_mux_gain(&ch, &budget, 0.01);
            assert!((bound_full - 0.99).abs() < 1e-12);
            let spec = parse_sweep_spec_str(
            "scenario = fig8\nvariable = gmg_snr_db\nstart = 20\nstop = 100\nsteps = 9\nschemes = ctr",
        )
        .unwrap();
            let rows = run_sweep(&spec).unwrap();
            let gmgs: Vec<f64> = rows.iter().map(|r| r.cells[0].1.rate).collect();
            for (i, g) in gmgs.iter().enumerate() {
                assert!(
                    *g <= bound_full + 1e-6,
                    "fig8 GMG {g} exceeds bound at point {i}"
                );
            }
            let n = gmgs.len();
            let gaps: Vec<f64> = gmgs.iter().map(|g| bound_full - g).collect();
            assert!(
                gaps[n - 2] <= gaps[n - 3] + 1e-9 && gaps[n - 1] <= gaps[n - 2] + 1e-9,
                "fig8 GMG gap not nonincreasing at the top: {:?}",
                &gaps[n - 3..]
            );

            // statistics CSIT (fig9)
            let stats = stats_of("fig9");
            let bound_fading = fading::fading_mux_gain(&stats, &budget, 0.01);
            assert!((bound_fading - 0.99).abs() < 1e-12);
            let spec = parse_sweep_spec_str(
            "scenario = fig9\nvariable = gmg_snr_db\nstart = 20\nstop = 100\nsteps = 9\nschemes = ctr\nmc_samples = 50000",
        )
        .unwrap();
            let rows = run_sweep(&spec).unwrap();
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| (r.cells[0].1.rate, r.cells[0].1.stderr))
                .collect();
            for (i, (g, _)) in pts.iter().enumerate() {
                assert!(
                    *g <= bound_fading + 1e-6,
                    "fig9 GMG {g} exceeds bound at point {i}"
                );
            }
            let n = pts.len();
            for i in [n - 2, n - 1] {
                let tol = 3.0 * (pts[i].1 + pts[i - 1].1);
                let (prev, cur) = (bound_fading - pts[i - 1].0, bound_fading - pts[i].0);
                assert!(
                    cur <= prev + tol.max(1e-9),
                    "fig9 GMG gap grew at the top: {prev} -> {cur}"
                );
            }
        },
    );
}

#[test]
fn criterion_9_multiplexing_formulas() {
    criterion(
        9,
        "multiplexing-gain formulas match hand-derived values",
        1.0,
        || {
            let budget = PowerBudget::new(100.0, 100.0, 0.0);
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-4;

            let fig3 = full_channel("fig3");
            assert!(close(
                ct::ct_mux_bound(&fig3, &budget),
                0.428_791_493_588_443_54
            ));
            assert!(close(ctr::ctr_mux_gain(&fig3, &budget, 0.01), 0.99));

            let fig4 = full_channel("fig4");
            assert!(close(
                ct::ct_mux_bound(&fig4, &budget),
                0.617_619_780_371_851_4
            ));
            assert!(close(ctr::ctr_mux_gain(&fig4, &budget, 0.01), 0.99));

            let fig8 = full_channel("fig8");
            assert!(close(ctr::ctr_mux_gain(&fig8, &budget, 0.01), 0.99));

            for name in ["fig6", "fig7", "fig9"] {
                assert!(
                    close(
                        fading::fading_mux_gain(&stats_of(name), &budget, 0.01),
                        0.99
                    ),
                    "fading bound for {name}"
                );
            }
            // the fig9 receiver-branch condition from the closed forms
            let e14 = ergodic_cap_exponential(0.22, 100.0);
            let e13 = ergodic_cap_exponential(0.92, 100.0);
            assert!(close(1.0 - e14 / e13, 0.330_332_110_944_399_85));
        },
    );
}
