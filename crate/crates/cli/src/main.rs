//! Command-line runner for the clean-relaying cognitive-radio library:
//! solve a single scenario, run a sweep spec into a CSV file, or list the
//! bundled scenario presets.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use cogrelay::experiments::{
    emit_csv, load_scenario, load_sweep_spec, preset_names, run_sweep, solve_scheme_at_pc,
    RunKnobs, Scheme, SchemeSolve,
};
use cogrelay::model::{snr_db_to_linear, CsitMode, Scenario};

#[derive(Parser)]
#[command(
    name = "cogrelay",
    about = "Achievable SU rates for clean-relaying cognitive radio under the coexistence constraint",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and print the solution record per scheme.
    Solve(SolveArgs),
    /// Run a sweep spec file and write the results as CSV.
    Sweep(SweepArgs),
    /// List the bundled scenario presets.
    Presets,
}

#[derive(Args)]
struct SolveArgs {
    /// Preset name (see `presets`) or path to a scenario file.
    scenario: String,
    /// Scheme to solve: jv, ct, ctr or all.
    #[arg(long, default_value = "all")]
    scheme: String,
    /// Override the total SU transmit SNR in dB (otherwise the scenario's
    /// node-2 + node-3 budgets are used as the total).
    #[arg(long)]
    su_snr_db: Option<f64>,
    #[command(flatten)]
    knobs: KnobArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Path to the sweep spec file.
    spec: String,
    /// Output CSV path.
    #[arg(long, default_value = "sweep.csv")]
    out: String,
    #[command(flatten)]
    knobs: KnobArgs,
}

#[derive(Args)]
struct KnobArgs {
    /// Random-number seed for Monte Carlo estimates.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo samples per expectation.
    #[arg(long)]
    mc_samples: Option<usize>,
    /// Grid resolution knob applied to every solver.
    #[arg(long)]
    grid: Option<usize>,
    /// Points of the CTR budget-split grid.
    #[arg(long)]
    splits: Option<usize>,
}

impl KnobArgs {
    fn apply(&self, mut knobs: RunKnobs) -> RunKnobs {
        if let Some(seed) = self.seed {
            knobs.mc.seed = seed;
        }
        if let Some(n) = self.mc_samples {
            knobs.mc.n_samples = n;
        }
        if let Some(g) = self.grid {
            knobs = knobs.with_grid_points(g);
        }
        if let Some(s) = self.splits {
            knobs.splits = s.max(2);
        }
        knobs
    }
}

fn main() -> Result<()> {
    env_logger::init();
    match Cli::parse().command {
        Command::Presets => {
            for name in preset_names() {
                let s = preset_description(name);
                println!("{name:6} {s}");
            }
            Ok(())
        }
        Command::Solve(args) => solve(args),
        Command::Sweep(args) => sweep(args),
    }
}

fn preset_description(name: &str) -> String {
    match load_scenario(name) {
        Ok(s) => match s.csit {
            CsitMode::FullCsit(_) => "full CSIT channel".to_string(),
            CsitMode::Statistics(_) => "Rayleigh fading statistics".to_string(),
        },
        Err(_) => String::new(),
    }
}

fn parse_schemes(s: &str) -> Result<Vec<Scheme>> {
    match s.to_ascii_lowercase().as_str() {
        "all" => Ok(vec![Scheme::Jv, Scheme::Ct, Scheme::Ctr]),
        "jv" => Ok(vec![Scheme::Jv]),
        "ct" => Ok(vec![Scheme::Ct]),
        "ctr" => Ok(vec![Scheme::Ctr]),
        other => bail!("unknown scheme `{other}` (expected jv, ct, ctr or all)"),
    }
}

fn solve(args: SolveArgs) -> Result<()> {
    let scenario: Scenario = load_scenario(&args.scenario)
        .with_context(|| format!("loading scenario `{}`", args.scenario))?;
    let knobs = args.knobs.apply(RunKnobs::default());
    let schemes = parse_schemes(&args.scheme)?;
    let rt = scenario.resolved_target_rate();
    let pc = match args.su_snr_db {
        Some(db) => snr_db_to_linear(db),
        None => scenario.budget.p2_bar + scenario.budget.p3_bar,
    };
    println!("scenario      {}", args.scenario);
    println!("pu_target     {rt:.6} bpcu");
    println!("su_budget     {pc:.4} (linear)");
    for scheme in schemes {
        let SchemeSolve {
            result: r,
            budget,
            coex_slack,
            feasible,
        } = solve_scheme_at_pc(&scenario, rt, pc, scheme, &knobs);
        println!("--- {scheme}");
        println!("  su_rate     {:.6} bpcu", r.rate);
        if r.stderr > 0.0 {
            println!("  stderr      {:.2e}", r.stderr);
        }
        println!("  time        t1={:.4} t2={:.4} t3={:.4}", r.t1, r.t2, r.t3);
        println!(
            "  relaying    alpha1={:.4} theta1={:.4} rho={:.4}",
            r.alpha1, r.theta1, r.rho
        );
        println!(
            "  su_split    p2_bar={:.4} p3_bar={:.4}",
            budget.p2_bar, budget.p3_bar
        );
        println!("  indicators  u_tx={} u_rx={}", r.u_tx as u8, r.u_rx as u8);
        println!("  coex_slack  {coex_slack:.3e} (feasible: {feasible})");
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut spec = load_sweep_spec(&args.spec)
        .with_context(|| format!("loading sweep spec `{}`", args.spec))?;
    spec.knobs = args.knobs.apply(spec.knobs);
    let rows = run_sweep(&spec).context("running sweep")?;
    emit_csv(&rows, &args.out).with_context(|| format!("writing `{}`", args.out))?;
    println!(
        "wrote {} rows ({} schemes) to {}",
        rows.len(),
        spec.schemes.len(),
        args.out
    );
    Ok(())
}
