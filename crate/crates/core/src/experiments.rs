//! Scenario presets, scenario/sweep-spec file parsing, the sweep runner and
//! CSV output. This is the layer the `cogrelay` binary drives.
//!
//! Scenario files are flat `key = value` text: channel links as
//! `magnitude phase` pairs (full CSIT) or per-link variances (statistics
//! CSIT), budgets in dB, and `target_rate = auto` for the interference-free
//! default. Sweep specs reference a preset or scenario file, pick a sweep
//! variable and range, and list the schemes to solve.
//!
//! Fairness rule: at every sweep point the CT/JV budget equals the CTR's
//! total SU budget `P̄c`; the CTR splits `P̄c` between its two transmitting
//! nodes over a grid (`splits` points) and keeps the best split.

use crate::ct::{self, CtParams, CtSolution};
use crate::ctr::{self, CtrSearchConfig, CtrSolution};
use crate::fading::{self, FadingSearchConfig, McConfig};
use crate::model::{
    snr_db_to_linear, ComplexGain, CsitMode, FadingStats, FullCsitChannel, PowerBudget, Scenario,
    TargetRate,
};
use crate::numerics::SearchConfig;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

// ---------------------------------------------------------------------------
// Presets (simulation channel tables)
// ---------------------------------------------------------------------------

const PRESET_NAMES: [&str; 7] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"];

/// Names of the bundled scenarios.
pub fn preset_names() -> &'static [&'static str] {
    &PRESET_NAMES
}

/// A bundled scenario. PU SNR is 20 dB and the SU budget defaults to
/// 20 dB at node 2; sweeps override the SU budget per point. The `fig5`
/// preset's `|h24|` is a placeholder (0.5) meant to be swept.
pub fn preset(name: &str) -> Option<Scenario> {
    let g = ComplexGain::new;
    let full = |h14, h24, h34, h13, h23, h12| {
        CsitMode::FullCsit(FullCsitChannel {
            h14,
            h24,
            h34,
            h13,
            h23,
            h12,
        })
    };
    let csit = match name {
        "fig3" => full(
            g(0.36, 1.6),
            g(0.45, 1.6),
            g(0.96, -3.1),
            g(0.96, -0.69),
            g(0.24, -1.89),
            g(1.0, -2.28),
        ),
        "fig4" => full(
            g(0.22, -1.6),
            g(0.92, 0.45),
            g(0.74, 1.19),
            g(0.25, -0.69),
            g(0.32, -1.89),
            g(1.0, 1.4),
        ),
        "fig5" => full(
            g(0.22, -0.26),
            g(0.5, PI / 4.0),
            g(0.32, -2.16),
            g(0.52, -0.95),
            g(0.19, 0.22),
            g(1.0, 0.96),
        ),
        "fig8" => full(
            g(0.36, -0.78),
            g(0.95, 1.95),
            g(2.86, 2.09),
            g(0.96, 0.87),
            g(0.24, 1.84),
            g(1.0, -0.965),
        ),
        "fig6" => CsitMode::Statistics(FadingStats::new(0.4, 0.21, 0.91, 0.82, 0.88, 1.0)),
        "fig7" => CsitMode::Statistics(FadingStats::new(0.4, 0.89, 0.2, 0.95, 0.88, 1.0)),
        "fig9" => CsitMode::Statistics(FadingStats::new(0.22, 0.12, 0.87, 0.92, 0.96, 1.0)),
        _ => return None,
    };
    Some(Scenario {
        csit,
        budget: PowerBudget::new(100.0, 100.0, 0.0),
        target_rate: TargetRate::Auto,
    })
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum ExperimentsError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("`{0}` is neither a bundled preset nor a readable scenario file")]
    UnknownScenario(String),
    #[error("{0}")]
    Invalid(String),
}

type Result<T> = std::result::Result<T, ExperimentsError>;

fn perr(line: usize, msg: impl Into<String>) -> ExperimentsError {
    ExperimentsError::Parse {
        line,
        msg: msg.into(),
    }
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

fn parse_kv(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let stripped = raw.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            continue;
        }
        let Some((k, v)) = stripped.split_once('=') else {
            return Err(perr(
                line,
                format!("expected `key = value`, got `{stripped}`"),
            ));
        };
        let key = k.trim().to_ascii_lowercase();
        let val = v.trim().to_string();
        if key.is_empty() || val.is_empty() {
            return Err(perr(line, "empty key or value"));
        }
        out.push((line, key, val));
    }
    Ok(out)
}

fn parse_f64(line: usize, key: &str, val: &str) -> Result<f64> {
    val.parse::<f64>()
        .map_err(|_| perr(line, format!("field `{key}`: `{val}` is not a number")))
}

/// Parse scenario text. Full-CSIT scenarios give all six `hXY` links as
/// `magnitude phase` (comma or whitespace separated); statistics scenarios
/// give all six `varXY` variances. Budgets come as `p1_db`/`p2_db`/`p3_db`
/// (defaults 20, 20 and "no node-3 budget").
pub fn parse_scenario_str(text: &str) -> Result<Scenario> {
    let kvs = parse_kv(text)?;
    if kvs.is_empty() {
        return Err(perr(0, "empty scenario: no `key = value` lines found"));
    }
    scenario_from_kvs(&kvs)
}

const LINK_KEYS: [&str; 6] = ["h14", "h24", "h34", "h13", "h23", "h12"];
const VAR_KEYS: [&str; 6] = ["var14", "var24", "var34", "var13", "var23", "var12"];

fn scenario_from_kvs(kvs: &[(usize, String, String)]) -> Result<Scenario> {
    let mut links: [Option<ComplexGain>; 6] = [None; 6];
    let mut vars: [Option<f64>; 6] = [None; 6];
    let mut csit_kind: Option<(usize, String)> = None;
    let mut p_db = [20.0, 20.0, f64::NEG_INFINITY];
    let mut target = TargetRate::Auto;

    for (line, key, val) in kvs {
        let (line, key, val) = (*line, key.as_str(), val.as_str());
        if let Some(idx) = LINK_KEYS.iter().position(|k| *k == key) {
            let parts: Vec<&str> = val
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if parts.len() != 2 {
                return Err(perr(
                    line,
                    format!("field `{key}`: expected `magnitude phase`, got `{val}`"),
                ));
            }
            let mag = parse_f64(line, key, parts[0])?;
            let phase = parse_f64(line, key, parts[1])?;
            if !(mag.is_finite() && mag >= 0.0) {
                return Err(perr(line, format!("field `{key}`: magnitude must be >= 0")));
            }
            links[idx] = Some(ComplexGain::new(mag, phase));
        } else if let Some(idx) = VAR_KEYS.iter().position(|k| *k == key) {
            let v = parse_f64(line, key, val)?;
            if !(v.is_finite() && v > 0.0) {
                return Err(perr(line, format!("field `{key}`: variance must be > 0")));
            }
            vars[idx] = Some(v);
        } else {
            match key {
                "csit" => csit_kind = Some((line, val.to_ascii_lowercase())),
                "p1_db" => p_db[0] = parse_f64(line, key, val)?,
                "p2_db" => p_db[1] = parse_f64(line, key, val)?,
                "p3_db" => p_db[2] = parse_f64(line, key, val)?,
                "target_rate" => {
                    target = if val.eq_ignore_ascii_case("auto") {
                        TargetRate::Auto
                    } else {
                        let r = parse_f64(line, key, val)?;
                        if r <= 0.0 {
                            return Err(perr(line, "field `target_rate`: must be positive"));
                        }
                        TargetRate::Fixed(r)
                    };
                }
                // sweep-spec keys may share the file; ignore them here
                "scenario" | "variable" | "start" | "stop" | "steps" | "schemes" | "seed"
                | "mc_samples" | "grid_points" | "splits" => {}
                _ => return Err(perr(line, format!("unknown field `{key}`"))),
            }
        }
    }

    let n_links = links.iter().flatten().count();
    let n_vars = vars.iter().flatten().count();
    let want_full = match csit_kind {
        Some((line, kind)) => match kind.as_str() {
            "full" => true,
            "stats" | "statistics" => false,
            other => return Err(perr(line, format!("field `csit`: unknown mode `{other}`"))),
        },
        None => {
            if n_links > 0 && n_vars == 0 {
                true
            } else if n_vars > 0 && n_links == 0 {
                false
            } else {
                return Err(perr(
                    0,
                    "cannot infer CSIT mode: give `csit = full|stats` or a consistent link set",
                ));
            }
        }
    };

    let csit = if want_full {
        let mut ch = [ComplexGain::new(0.0, 0.0); 6];
        for (i, key) in LINK_KEYS.iter().enumerate() {
            ch[i] = links[i].ok_or_else(|| perr(0, format!("missing link `{key}`")))?;
        }
        CsitMode::FullCsit(FullCsitChannel {
            h14: ch[0],
            h24: ch[1],
            h34: ch[2],
            h13: ch[3],
            h23: ch[4],
            h12: ch[5],
        })
    } else {
        let mut vv = [0.0; 6];
        for (i, key) in VAR_KEYS.iter().enumerate() {
            vv[i] = vars[i].ok_or_else(|| perr(0, format!("missing link variance `{key}`")))?;
        }
        CsitMode::Statistics(FadingStats::new(vv[0], vv[1], vv[2], vv[3], vv[4], vv[5]))
    };

    let lin = |db: f64| {
        if db == f64::NEG_INFINITY {
            0.0
        } else {
            snr_db_to_linear(db)
        }
    };
    Ok(Scenario {
        csit,
        budget: PowerBudget::new(lin(p_db[0]), lin(p_db[1]), lin(p_db[2])),
        target_rate: target,
    })
}

/// Resolve a preset name or scenario file path.
pub fn load_scenario(name_or_path: &str) -> Result<Scenario> {
    if let Some(s) = preset(name_or_path) {
        return Ok(s);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(ExperimentsError::UnknownScenario(name_or_path.to_string()));
    }
    let text = fs::read_to_string(path).map_err(|source| ExperimentsError::Io {
        path: name_or_path.to_string(),
        source,
    })?;
    parse_scenario_str(&text)
}

// ---------------------------------------------------------------------------
// Sweep specs
// ---------------------------------------------------------------------------

/// The transmission schemes the runner can solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Jv,
    Ct,
    Ctr,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Jv => "jv",
            Scheme::Ct => "ct",
            Scheme::Ctr => "ctr",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// SU total transmit SNR in dB; rows report rates.
    SuSnrDb,
    /// `|h24|` magnitude (full CSIT only); budget from the scenario.
    H24Magnitude,
    /// Common-message relaying ratio at the solved operating point.
    Alpha1,
    /// SU total transmit SNR in dB; rows report the generalized
    /// multiplexing gain `rate / log2(Pc)`.
    GmgSnrDb,
}

impl SweepVariable {
    fn parse(line: usize, s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "su_snr_db" => Ok(Self::SuSnrDb),
            "h24_magnitude" => Ok(Self::H24Magnitude),
            "alpha1" => Ok(Self::Alpha1),
            "gmg_snr_db" => Ok(Self::GmgSnrDb),
            other => Err(perr(
                line,
                format!("unknown sweep variable `{other}` (expected su_snr_db, h24_magnitude, alpha1 or gmg_snr_db)"),
            )),
        }
    }
}

/// Solver and sampling knobs shared by the runner and the CLI.
#[derive(Debug, Clone, Copy)]
pub struct RunKnobs {
    pub mc: McConfig,
    pub search: SearchConfig,
    pub ctr: CtrSearchConfig,
    pub fading: FadingSearchConfig,
    /// Points of the CTR budget-split grid (P̄2 share of P̄c).
    pub splits: usize,
}

impl Default for RunKnobs {
    fn default() -> Self {
        Self {
            mc: McConfig::default(),
            search: SearchConfig::default(),
            ctr: CtrSearchConfig::default(),
            fading: FadingSearchConfig::default(),
            splits: 11,
        }
    }
}

impl RunKnobs {
    /// Apply a single grid-resolution knob to every solver.
    pub fn with_grid_points(mut self, g: usize) -> Self {
        self.search = self.search.with_grid_points(g.max(2));
        self.ctr = CtrSearchConfig::with_resolution(g.min(101));
        self.fading = FadingSearchConfig::with_resolution(g.min(101));
        self
    }
}

/// A parsed sweep specification.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub scenario: Scenario,
    pub scenario_name: String,
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub schemes: Vec<Scheme>,
    pub knobs: RunKnobs,
}

/// Parse a sweep spec. The scenario may be referenced by `scenario =
/// <preset-or-path>` or given inline in the same file.
pub fn parse_sweep_spec_str(text: &str) -> Result<SweepSpec> {
    let kvs = parse_kv(text)?;
    let mut scenario_ref: Option<String> = None;
    let mut variable: Option<SweepVariable> = None;
    let (mut start, mut stop, mut steps) = (None, None, None);
    let mut schemes: Vec<Scheme> = Vec::new();
    let mut knobs = RunKnobs::default();

    for (line, key, val) in &kvs {
        let (line, val) = (*line, val.as_str());
        match key.as_str() {
            "scenario" => scenario_ref = Some(val.to_string()),
            "variable" => variable = Some(SweepVariable::parse(line, val)?),
            "start" => start = Some(parse_f64(line, "start", val)?),
            "stop" => stop = Some(parse_f64(line, "stop", val)?),
            "steps" => {
                steps = Some(val.parse::<usize>().map_err(|_| {
                    perr(
                        line,
                        format!("field `steps`: `{val}` is not a positive integer"),
                    )
                })?)
            }
            "schemes" => {
                for tok in val
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                {
                    let s = match tok.to_ascii_lowercase().as_str() {
                        "jv" => Scheme::Jv,
                        "ct" => Scheme::Ct,
                        "ctr" => Scheme::Ctr,
                        other => return Err(perr(line, format!("unknown scheme `{other}`"))),
                    };
                    if !schemes.contains(&s) {
                        schemes.push(s);
                    }
                }
            }
            "seed" => {
                knobs.mc.seed = val
                    .parse::<u64>()
                    .map_err(|_| perr(line, format!("field `seed`: `{val}` is not an integer")))?
            }
            "mc_samples" => {
                knobs.mc.n_samples = val.parse::<usize>().map_err(|_| {
                    perr(
                        line,
                        format!("field `mc_samples`: `{val}` is not an integer"),
                    )
                })?
            }
            "grid_points" => {
                let g = val.parse::<usize>().map_err(|_| {
                    perr(
                        line,
                        format!("field `grid_points`: `{val}` is not an integer"),
                    )
                })?;
                knobs = knobs.with_grid_points(g);
            }
            "splits" => {
                knobs.splits = val
                    .parse::<usize>()
                    .map_err(|_| perr(line, format!("field `splits`: `{val}` is not an integer")))?
            }
            _ => {} // scenario fields, validated below
        }
    }

    let (scenario, scenario_name) = match scenario_ref {
        Some(name) => (load_scenario(&name)?, name),
        None => (scenario_from_kvs(&kvs)?, "inline".to_string()),
    };
    let variable = variable.ok_or_else(|| perr(0, "missing `variable`"))?;
    let start = start.ok_or_else(|| perr(0, "missing `start`"))?;
    let stop = stop.ok_or_else(|| perr(0, "missing `stop`"))?;
    let steps = steps.ok_or_else(|| perr(0, "missing `steps`"))?;
    if schemes.is_empty() {
        schemes = vec![Scheme::Jv, Scheme::Ct, Scheme::Ctr];
    }

    let spec = SweepSpec {
        scenario,
        scenario_name,
        variable,
        start,
        stop,
        steps,
        schemes,
        knobs,
    };
    validate_spec(&spec)?;
    Ok(spec)
}

pub fn load_sweep_spec(path: &str) -> Result<SweepSpec> {
    let text = fs::read_to_string(path).map_err(|source| ExperimentsError::Io {
        path: path.to_string(),
        source,
    })?;
    parse_sweep_spec_str(&text)
}

fn validate_spec(spec: &SweepSpec) -> Result<()> {
    if spec.steps < 2 {
        return Err(ExperimentsError::Invalid("steps must be at least 2".into()));
    }
    if spec.start >= spec.stop || !(spec.start.is_finite() && spec.stop.is_finite()) {
        return Err(ExperimentsError::Invalid(
            "range start must be below stop".into(),
        ));
    }
    let is_stats = matches!(spec.scenario.csit, CsitMode::Statistics(_));
    match spec.variable {
        SweepVariable::H24Magnitude => {
            if is_stats {
                return Err(ExperimentsError::Invalid(
                    "h24_magnitude sweeps need a full-CSIT scenario".into(),
                ));
            }
            if spec.start < 0.0 {
                return Err(ExperimentsError::Invalid(
                    "|h24| must be nonnegative".into(),
                ));
            }
        }
        SweepVariable::Alpha1 => {
            if spec.start < 0.0 || spec.stop > 1.0 {
                return Err(ExperimentsError::Invalid(
                    "alpha1 sweeps must stay inside [0, 1]".into(),
                ));
            }
        }
        SweepVariable::GmgSnrDb => {
            if spec.start <= 0.0 {
                return Err(ExperimentsError::Invalid(
                    "gmg_snr_db sweeps need start > 0 dB (the pre-log is undefined at Pc <= 1)"
                        .into(),
                ));
            }
        }
        SweepVariable::SuSnrDb => {}
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Running sweeps
// ---------------------------------------------------------------------------

/// Per-scheme solution summary carried into the CSV.
#[derive(Debug, Clone, Copy)]
pub struct SchemeResult {
    pub rate: f64,
    pub stderr: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub alpha1: f64,
    pub theta1: f64,
    /// Fraction of the node-2 budget spent in Phase 2.
    pub rho: f64,
    pub u_tx: bool,
    pub u_rx: bool,
}

/// One sweep point: the swept value and the per-scheme results, in the
/// order the sweep requested.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub cells: Vec<(Scheme, SchemeResult)>,
}

fn phase2_share(t2: f64, p2: f64, p2_bar: f64) -> f64 {
    if p2_bar > 0.0 {
        (t2 * p2 / p2_bar).clamp(0.0, 1.0)
    } else {
        1.0
    }
}

fn from_ct_solution(sol: &CtSolution, ch: &FullCsitChannel, p2_bar: f64) -> SchemeResult {
    SchemeResult {
        rate: sol.su_rate,
        stderr: 0.0,
        t1: sol.params.t1,
        t2: sol.params.t2,
        t3: sol.params.t3,
        alpha1: sol.params.alpha1,
        // the CT relays coherently by construction
        theta1: ctr::coherent_theta(ch),
        rho: phase2_share(sol.params.t2, sol.params.p2, p2_bar),
        u_tx: sol.params.t1 < 1.0,
        u_rx: false,
    }
}

fn from_ctr_solution(sol: &CtrSolution, p2_bar: f64) -> SchemeResult {
    SchemeResult {
        rate: sol.su_rate,
        stderr: 0.0,
        t1: sol.params.t1,
        t2: sol.params.t2,
        t3: sol.params.t3,
        alpha1: sol.params.alpha1,
        theta1: sol.params.theta1,
        rho: phase2_share(sol.params.t2, sol.params.p2, p2_bar),
        u_tx: sol.u_tx,
        u_rx: sol.u_rx,
    }
}

/// A solved scheme plus the budget it actually used (for the CTR this is
/// the winning split of `pc`) and its coexistence slack.
#[derive(Debug, Clone, Copy)]
pub struct SchemeSolve {
    pub result: SchemeResult,
    pub budget: PowerBudget,
    pub coex_slack: f64,
    pub feasible: bool,
}

/// Solve one scheme at total SU budget `pc` under the fairness rule.
pub fn solve_scheme_at_pc(
    scenario: &Scenario,
    rt: f64,
    pc: f64,
    scheme: Scheme,
    knobs: &RunKnobs,
) -> SchemeSolve {
    let p1 = scenario.budget.p1_bar;
    match (&scenario.csit, scheme) {
        (CsitMode::FullCsit(ch), Scheme::Jv) => {
            let b = PowerBudget::new(p1, pc, 0.0);
            let sol = ct::solve_jv(ch, &b, rt, &knobs.search);
            SchemeSolve {
                result: from_ct_solution(&sol, ch, pc),
                budget: b,
                coex_slack: sol.coex_slack,
                feasible: sol.feasible,
            }
        }
        (CsitMode::FullCsit(ch), Scheme::Ct) => {
            let b = PowerBudget::new(p1, pc, 0.0);
            let sol = ct::solve_ct(ch, &b, rt, &knobs.search);
            SchemeSolve {
                result: from_ct_solution(&sol, ch, pc),
                budget: b,
                coex_slack: sol.coex_slack,
                feasible: sol.feasible,
            }
        }
        (CsitMode::FullCsit(ch), Scheme::Ctr) => {
            let splits = ctr_split_grid(&scenario.csit, knobs.splits);
            let mut best: Option<(CtrSolution, PowerBudget)> = None;
            for w in splits {
                let b = PowerBudget::new(p1, w * pc, (1.0 - w) * pc);
                let sol = ctr::solve_ctr(ch, &b, rt, &knobs.ctr);
                if best
                    .as_ref()
                    .is_none_or(|(bst, _)| sol.su_rate > bst.su_rate)
                {
                    best = Some((sol, b));
                }
            }
            let (sol, b) = best.expect("split grid is never empty");
            SchemeSolve {
                result: from_ctr_solution(&sol, b.p2_bar),
                budget: b,
                coex_slack: sol.coex_slack,
                feasible: sol.coex_slack >= -1e-9,
            }
        }
        (CsitMode::Statistics(stats), Scheme::Jv) => {
            let b = PowerBudget::new(p1, pc, 0.0);
            let sol = fading::solve_jv_fading(stats, &b, rt, &knobs.fading, &knobs.mc);
            SchemeSolve {
                result: fading_ct_result(&sol, pc),
                budget: b,
                coex_slack: sol.coex_slack,
                feasible: sol.feasible,
            }
        }
        (CsitMode::Statistics(stats), Scheme::Ct) => {
            let b = PowerBudget::new(p1, pc, 0.0);
            let sol = fading::solve_ct_fading(stats, &b, rt, &knobs.fading, &knobs.mc);
            SchemeSolve {
                result: fading_ct_result(&sol, pc),
                budget: b,
                coex_slack: sol.coex_slack,
                feasible: sol.feasible,
            }
        }
        (CsitMode::Statistics(stats), Scheme::Ctr) => {
            let splits = ctr_split_grid(&scenario.csit, knobs.splits);
            let mut best: Option<(fading::FadingCtrSolution, PowerBudget)> = None;
            for w in splits {
                let b = PowerBudget::new(p1, w * pc, (1.0 - w) * pc);
                if b.p2_bar == 0.0 {
                    continue; // no SU data power, rate is zero
                }
                let sol = fading::solve_ctr_fading(stats, &b, rt, &knobs.fading, &knobs.mc);
                if best
                    .as_ref()
                    .is_none_or(|(bst, _)| sol.rate.mean > bst.rate.mean)
                {
                    best = Some((sol, b));
                }
            }
            match best {
                Some((sol, b)) => SchemeSolve {
                    result: SchemeResult {
                        rate: sol.rate.mean,
                        stderr: sol.rate.stderr,
                        t1: sol.params.t1,
                        t2: sol.params.t2,
                        t3: sol.params.t3,
                        alpha1: sol.params.alpha1,
                        theta1: 0.0,
                        rho: phase2_share(sol.params.t2, sol.params.p2, b.p2_bar),
                        u_tx: sol.u_tx,
                        u_rx: sol.u_rx,
                    },
                    budget: b,
                    coex_slack: sol.coex_slack,
                    feasible: sol.coex_slack >= -1e-6,
                },
                None => SchemeSolve {
                    result: zero_result(),
                    budget: PowerBudget::new(p1, 0.0, pc),
                    coex_slack: 0.0,
                    feasible: true,
                },
            }
        }
    }
}

fn split_grid(n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Budget-split grid for the CTR under the fairness rule. Node 3 is only
/// given a budget share when its relay link to the PU receiver is at least
/// as strong as node 2's; otherwise the CTR relays from node 2 alone (its
/// preferred allocation in such channels) and the whole budget is data
/// power.
fn ctr_split_grid(csit: &CsitMode, splits: usize) -> Vec<f64> {
    let node3_competitive = match csit {
        CsitMode::FullCsit(ch) => ch.h34.magnitude() >= ch.h24.magnitude(),
        CsitMode::Statistics(st) => st.var34 >= st.var24,
    };
    if node3_competitive {
        split_grid(splits)
    } else {
        vec![1.0]
    }
}

fn fading_ct_result(sol: &fading::FadingCtSolution, p2_bar: f64) -> SchemeResult {
    SchemeResult {
        rate: sol.rate.mean,
        stderr: sol.rate.stderr,
        t1: sol.params.t1,
        t2: sol.params.t2,
        t3: sol.params.t3,
        alpha1: sol.params.alpha1,
        theta1: 0.0,
        rho: phase2_share(sol.params.t2, sol.params.p2, p2_bar),
        u_tx: sol.params.t1 < 1.0,
        u_rx: false,
    }
}

fn zero_result() -> SchemeResult {
    SchemeResult {
        rate: 0.0,
        stderr: 0.0,
        t1: 0.0,
        t2: 1.0,
        t3: 0.0,
        alpha1: 0.0,
        theta1: 0.0,
        rho: 1.0,
        u_tx: false,
        u_rx: false,
    }
}

/// Run a sweep. Rows come back in sweep order; points are independent and
/// solved concurrently with one shared random-number seed, so two runs of
/// the same spec are identical.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    validate_spec(spec)?;
    let rt = spec.scenario.resolved_target_rate();
    let values: Vec<f64> = (0..spec.steps)
        .map(|i| spec.start + (spec.stop - spec.start) * i as f64 / (spec.steps - 1) as f64)
        .collect();

    match spec.variable {
        SweepVariable::SuSnrDb | SweepVariable::GmgSnrDb => {
            let gmg_mode = spec.variable == SweepVariable::GmgSnrDb;
            Ok(values
                .par_iter()
                .map(|&db| {
                    let pc = snr_db_to_linear(db);
                    let cells = spec
                        .schemes
                        .iter()
                        .map(|&s| {
                            let mut r =
                                solve_scheme_at_pc(&spec.scenario, rt, pc, s, &spec.knobs).result;
                            if gmg_mode {
                                r.rate = ctr::gmg(r.rate, pc);
                                r.stderr /= pc.log2();
                            }
                            (s, r)
                        })
                        .collect();
                    ResultRow {
                        sweep_value: db,
                        cells,
                    }
                })
                .collect())
        }
        SweepVariable::H24Magnitude => {
            let CsitMode::FullCsit(base) = spec.scenario.csit else {
                unreachable!("validated above")
            };
            let pc = spec.scenario.budget.p2_bar + spec.scenario.budget.p3_bar;
            Ok(values
                .par_iter()
                .map(|&mag| {
                    let mut ch = base;
                    ch.h24 = ComplexGain::new(mag, base.h24.phase());
                    let sc = Scenario {
                        csit: CsitMode::FullCsit(ch),
                        ..spec.scenario
                    };
                    // the PU target does not depend on h24
                    let cells = spec
                        .schemes
                        .iter()
                        .map(|&s| (s, solve_scheme_at_pc(&sc, rt, pc, s, &spec.knobs).result))
                        .collect();
                    ResultRow {
                        sweep_value: mag,
                        cells,
                    }
                })
                .collect())
        }
        SweepVariable::Alpha1 => run_alpha_sweep(spec, rt, &values),
    }
}

/// Rebuild full-CSIT CTR params from a result row and its budget.
fn ctr_params_from(r: &SchemeResult, b: &PowerBudget) -> ctr::CtrParams {
    let (p2, p2_phase3, p3) = if r.t3 > 1e-12 {
        (
            r.rho * b.p2_bar / r.t2,
            (1.0 - r.rho) * b.p2_bar / r.t3,
            b.p3_bar / r.t3,
        )
    } else {
        (b.p2_bar / r.t2.max(1e-12), 0.0, 0.0)
    };
    ctr::CtrParams {
        t1: r.t1,
        t2: r.t2,
        t3: r.t3,
        alpha1: r.alpha1,
        theta1: r.theta1,
        p1: b.p1_bar,
        p2,
        p2_phase3,
        p3,
    }
}

/// Rebuild fading CTR params from a result row and its budget.
fn fading_params_from(r: &SchemeResult, b: &PowerBudget) -> fading::FadingCtrParams {
    let (p2, p2_phase3, p3) = if r.t3 > 1e-12 {
        (
            r.rho * b.p2_bar / r.t2,
            (1.0 - r.rho) * b.p2_bar / r.t3,
            b.p3_bar / r.t3,
        )
    } else {
        (b.p2_bar / r.t2.max(1e-12), 0.0, 0.0)
    };
    fading::FadingCtrParams {
        t1: r.t1,
        t2: r.t2,
        t3: r.t3,
        alpha1: r.alpha1,
        p1: b.p1_bar,
        p2,
        p2_phase3,
        p3,
    }
}

/// Alpha sweeps freeze each scheme at its solved operating point and vary
/// only the relay ratio; ratios that break coexistence report rate zero.
fn run_alpha_sweep(spec: &SweepSpec, rt: f64, alphas: &[f64]) -> Result<Vec<ResultRow>> {
    let pc = spec.scenario.budget.p2_bar + spec.scenario.budget.p3_bar;
    let p1 = spec.scenario.budget.p1_bar;
    let mut per_scheme: Vec<(Scheme, Vec<SchemeResult>)> = Vec::new();

    for &scheme in &spec.schemes {
        let solved = solve_scheme_at_pc(&spec.scenario, rt, pc, scheme, &spec.knobs);
        let base = solved.result;
        let results: Vec<SchemeResult> = match (&spec.scenario.csit, scheme) {
            (CsitMode::FullCsit(ch), Scheme::Jv | Scheme::Ct) => {
                let budget = PowerBudget::new(p1, pc, 0.0);
                alphas
                    .iter()
                    .map(|&alpha| {
                        let p = CtParams::new(base.t1, base.t2, alpha, &budget);
                        let feasible = ct::ct_coexistence_rhs(ch, &p) >= rt - 1e-9;
                        SchemeResult {
                            rate: if feasible { ct::ct_rate(ch, &p) } else { 0.0 },
                            alpha1: alpha,
                            ..base
                        }
                    })
                    .collect()
            }
            (CsitMode::FullCsit(ch), Scheme::Ctr) => {
                let budget = solved.budget;
                alphas
                    .iter()
                    .map(|&alpha| {
                        // a transmitter that never decoded the message
                        // cannot relay any of it
                        if !base.u_tx && alpha > 0.0 {
                            return SchemeResult {
                                rate: 0.0,
                                alpha1: alpha,
                                ..base
                            };
                        }
                        let mut p = ctr_params_from(&base, &budget);
                        p.alpha1 = alpha;
                        let (_, u_rx) = ctr::indicators(ch, &budget, rt, &p);
                        if !(u_rx && p.t3 > 0.0) {
                            p.p3 = 0.0;
                        }
                        let feasible = ctr::ctr_coexistence_rhs(ch, &p) >= rt - 1e-9;
                        SchemeResult {
                            rate: if feasible {
                                ctr::ctr_rate(ch, &p, rt)
                            } else {
                                0.0
                            },
                            alpha1: alpha,
                            u_rx,
                            ..base
                        }
                    })
                    .collect()
            }
            (CsitMode::Statistics(stats), Scheme::Jv | Scheme::Ct) => {
                let budget = PowerBudget::new(p1, pc, 0.0);
                let params = CtParams::new(base.t1, base.t2, 0.0, &budget);
                fading::ct_fading_alpha_sweep(stats, rt, &params, alphas, &spec.knobs.mc)
                    .into_iter()
                    .map(|pt| SchemeResult {
                        rate: if pt.feasible { pt.rate.mean } else { 0.0 },
                        stderr: pt.rate.stderr,
                        alpha1: pt.alpha1,
                        ..base
                    })
                    .collect()
            }
            (CsitMode::Statistics(stats), Scheme::Ctr) => {
                let budget = solved.budget;
                let params = fading_params_from(&base, &budget);
                fading::ctr_fading_alpha_sweep(stats, &budget, rt, &params, alphas, &spec.knobs.mc)
                    .into_iter()
                    .map(|pt| SchemeResult {
                        rate: if pt.feasible && (base.u_tx || pt.alpha1 == 0.0) {
                            pt.rate.mean
                        } else {
                            0.0
                        },
                        stderr: pt.rate.stderr,
                        alpha1: pt.alpha1,
                        ..base
                    })
                    .collect()
            }
        };
        per_scheme.push((scheme, results));
    }

    Ok(alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| ResultRow {
            sweep_value: alpha,
            cells: per_scheme.iter().map(|(s, rs)| (*s, rs[i])).collect(),
        })
        .collect())
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

/// Format with six significant digits, plain notation where reasonable.
fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let dec = (5 - exp).max(0) as usize;
        let s = format!("{x:.prec$}", prec = dec);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    }
}

/// Write rows as CSV: a header naming every column, then one line per
/// sweep point (UTF-8, comma separators, LF endings, six significant
/// digits). Errors on an empty row set.
pub fn write_csv<W: Write>(rows: &[ResultRow], mut out: W) -> Result<()> {
    let Some(first) = rows.first() else {
        return Err(ExperimentsError::Invalid("no rows to write".into()));
    };
    let mut header = vec!["sweep_value".to_string()];
    for (scheme, _) in &first.cells {
        for col in [
            "rate", "stderr", "t1", "t2", "t3", "alpha1", "theta1", "rho", "u_tx", "u_rx",
        ] {
            header.push(format!("{scheme}_{col}"));
        }
    }
    let io_err = |source: std::io::Error| ExperimentsError::Io {
        path: "<writer>".into(),
        source,
    };
    out.write_all(header.join(",").as_bytes()).map_err(io_err)?;
    out.write_all(b"\n").map_err(io_err)?;
    for row in rows {
        let mut fields = vec![fmt_g6(row.sweep_value)];
        for (_, r) in &row.cells {
            fields.push(fmt_g6(r.rate));
            fields.push(fmt_g6(r.stderr));
            fields.push(fmt_g6(r.t1));
            fields.push(fmt_g6(r.t2));
            fields.push(fmt_g6(r.t3));
            fields.push(fmt_g6(r.alpha1));
            fields.push(fmt_g6(r.theta1));
            fields.push(fmt_g6(r.rho));
            fields.push(if r.u_tx { "1" } else { "0" }.to_string());
            fields.push(if r.u_rx { "1" } else { "0" }.to_string());
        }
        out.write_all(fields.join(",").as_bytes()).map_err(io_err)?;
        out.write_all(b"\n").map_err(io_err)?;
    }
    Ok(())
}

/// Write rows to a CSV file at `path`.
pub fn emit_csv(rows: &[ResultRow], path: &str) -> Result<()> {
    let file = fs::File::create(path).map_err(|source| ExperimentsError::Io {
        path: path.to_string(),
        source,
    })?;
    write_csv(rows, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_fig3_matches_table() {
        let s = preset("fig3").unwrap();
        let CsitMode::FullCsit(ch) = s.csit else {
            panic!("fig3 is full CSIT")
        };
        assert_eq!(ch.h14.magnitude(), 0.36);
        assert!((ch.h14.phase() - 1.6).abs() < 1e-12);
        assert_eq!(ch.h24.magnitude(), 0.45);
        assert_eq!(ch.h34.magnitude(), 0.96);
        assert!((ch.h34.phase() - (std::f64::consts::TAU - 3.1)).abs() < 1e-12);
        assert_eq!(ch.h13.magnitude(), 0.96);
        assert_eq!(ch.h23.magnitude(), 0.24);
        assert_eq!(ch.h12.magnitude(), 1.0);
        assert_eq!(s.budget.p1_bar, 100.0);
    }

    #[test]
    fn preset_fig6_matches_table() {
        let s = preset("fig6").unwrap();
        let CsitMode::Statistics(st) = s.csit else {
            panic!("fig6 is statistics CSIT")
        };
        assert_eq!(
            (st.var14, st.var24, st.var34, st.var13, st.var23, st.var12),
            (0.4, 0.21, 0.91, 0.82, 0.88, 1.0)
        );
    }

    #[test]
    fn preset_listing_and_unknown() {
        assert_eq!(preset_names().len(), 7);
        for name in preset_names() {
            assert!(preset(name).is_some());
        }
        assert!(preset("fig2").is_none());
        assert!(matches!(
            load_scenario("no_such_preset_or_file"),
            Err(ExperimentsError::UnknownScenario(_))
        ));
    }

    #[test]
    fn scenario_round_trip_full() {
        let text = "
            # full CSIT example
            csit = full
            h14 = 0.36 1.6
            h24 = 0.45, 1.6
            h34 = 0.96 -3.1
            h13 = 0.96 -0.69
            h23 = 0.24 -1.89
            h12 = 1 -2.28
            p1_db = 20
            p2_db = 20
            target_rate = auto
        ";
        let s = parse_scenario_str(text).unwrap();
        assert_eq!(s, preset("fig3").unwrap());
    }

    #[test]
    fn scenario_round_trip_stats() {
        let text = "
            var14 = 0.4\n var24 = 0.21\n var34 = 0.91
            var13 = 0.82\n var23 = 0.88\n var12 = 1
        ";
        let s = parse_scenario_str(text).unwrap();
        assert_eq!(s, preset("fig6").unwrap());
    }

    #[test]
    fn scenario_parse_errors_carry_line_numbers() {
        assert!(matches!(
            parse_scenario_str(""),
            Err(ExperimentsError::Parse { .. })
        ));
        let bad_pair = "csit = full\nh14 = 0.36";
        match parse_scenario_str(bad_pair) {
            Err(ExperimentsError::Parse { line, msg }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("h14"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let unknown = "csit = full\nbogus = 1";
        match parse_scenario_str(unknown) {
            Err(ExperimentsError::Parse { line, msg }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("bogus"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let missing = "csit = full\nh14 = 1 0";
        match parse_scenario_str(missing) {
            Err(ExperimentsError::Parse { msg, .. }) => assert!(msg.contains("missing link")),
            other => panic!("expected parse error, got {other:?}"),
        }
        let badvar = "var14 = -1\nvar24 = 1\nvar34 = 1\nvar13 = 1\nvar23 = 1\nvar12 = 1";
        assert!(parse_scenario_str(badvar).is_err());
    }

    #[test]
    fn sweep_spec_parsing_and_validation() {
        let spec = parse_sweep_spec_str(
            "scenario = fig3\nvariable = su_snr_db\nstart = 0\nstop = 30\nsteps = 16\nschemes = jv, ct, ctr\nseed = 9\nmc_samples = 1000",
        )
        .unwrap();
        assert_eq!(spec.steps, 16);
        assert_eq!(spec.schemes, vec![Scheme::Jv, Scheme::Ct, Scheme::Ctr]);
        assert_eq!(spec.knobs.mc.seed, 9);

        for bad in [
            "scenario = fig3\nvariable = su_snr_db\nstart = 0\nstop = 30\nsteps = 1",
            "scenario = fig3\nvariable = su_snr_db\nstart = 30\nstop = 0\nsteps = 4",
            "scenario = fig6\nvariable = h24_magnitude\nstart = 0\nstop = 1\nsteps = 4",
            "scenario = fig3\nvariable = gmg_snr_db\nstart = 0\nstop = 100\nsteps = 4",
            "scenario = fig3\nvariable = alpha1\nstart = 0\nstop = 1.5\nsteps = 4",
            "scenario = fig3\nvariable = bogus\nstart = 0\nstop = 1\nsteps = 4",
            "scenario = fig3\nvariable = su_snr_db\nstart = 0\nstop = 30\nsteps = 4\nschemes = xx",
        ] {
            assert!(parse_sweep_spec_str(bad).is_err(), "accepted: {bad}");
        }

        // inline scenario
        let inline = parse_sweep_spec_str(
            "variable = su_snr_db\nstart = 0\nstop = 10\nsteps = 3\nvar14 = 0.4\nvar24 = 0.21\nvar34 = 0.91\nvar13 = 0.82\nvar23 = 0.88\nvar12 = 1",
        )
        .unwrap();
        assert_eq!(inline.scenario_name, "inline");
        assert!(matches!(inline.scenario.csit, CsitMode::Statistics(_)));
    }

    #[test]
    fn six_significant_digit_formatting() {
        assert_eq!(fmt_g6(0.0), "0");
        assert_eq!(fmt_g6(3.803227036434), "3.80323");
        assert_eq!(fmt_g6(123456.7), "123457");
        assert_eq!(fmt_g6(0.0001), "0.0001");
        assert_eq!(fmt_g6(-2.5), "-2.5");
        assert_eq!(fmt_g6(1.0e-5), "1.00000e-5");
        assert_eq!(fmt_g6(1234567.0), "1.23457e6");
        for x in [3.803227, 0.066587, 12.96, 7.5e-7, 9.87654e8] {
            let parsed: f64 = fmt_g6(x).parse().unwrap();
            assert!(
                (parsed - x).abs() <= 1e-5 * x.abs(),
                "{x} -> {} -> {parsed}",
                fmt_g6(x)
            );
        }
    }

    fn tiny_knobs() -> RunKnobs {
        let mut k = RunKnobs::default().with_grid_points(9);
        k.mc.n_samples = 4000;
        k.fading.coarse_samples = 2000;
        k.splits = 3;
        k.ctr.theta_points = 16;
        k.ctr.rho_points = 5;
        k.ctr.refine_rounds = 1;
        k.ctr.refine_points = 5;
        k.fading.rho_points = 5;
        k.fading.refine_rounds = 1;
        k
    }

    #[test]
    fn csv_shape_and_round_trip() {
        let spec = SweepSpec {
            scenario: preset("fig3").unwrap(),
            scenario_name: "fig3".into(),
            variable: SweepVariable::SuSnrDb,
            start: 10.0,
            stop: 20.0,
            steps: 2,
            schemes: vec![Scheme::Jv, Scheme::Ct],
            knobs: tiny_knobs(),
        };
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("sweep_value,jv_rate,jv_stderr"));
        assert_eq!(lines[0].split(',').count(), 1 + 2 * 10);
        // values parse back
        for line in &lines[1..] {
            for field in line.split(',') {
                field.parse::<f64>().unwrap();
            }
        }
        assert!(write_csv(&[], &mut Vec::new()).is_err());
    }

    #[test]
    fn sweeps_are_deterministic() {
        let spec = parse_sweep_spec_str(
            "scenario = fig6\nvariable = su_snr_db\nstart = 10\nstop = 20\nsteps = 2\nschemes = ct\nmc_samples = 3000\ngrid_points = 7\nseed = 5",
        )
        .unwrap();
        let mut a = Vec::new();
        write_csv(&run_sweep(&spec).unwrap(), &mut a).unwrap();
        let mut b = Vec::new();
        write_csv(&run_sweep(&spec).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn alpha_sweep_masks_infeasible_ratios() {
        let spec = SweepSpec {
            scenario: preset("fig3").unwrap(),
            scenario_name: "fig3".into(),
            variable: SweepVariable::Alpha1,
            start: 0.0,
            stop: 1.0,
            steps: 11,
            schemes: vec![Scheme::Jv],
            knobs: tiny_knobs(),
        };
        let rows = run_sweep(&spec).unwrap();
        // small ratios cannot meet coexistence (rate 0); large ones can
        assert_eq!(rows[0].cells[0].1.rate, 0.0);
        let last = rows.last().unwrap().cells[0].1;
        assert!(last.rate >= 0.0);
        let best = rows
            .iter()
            .map(|r| r.cells[0].1.rate)
            .fold(0.0f64, f64::max);
        assert!(best > 0.0);
    }
}
