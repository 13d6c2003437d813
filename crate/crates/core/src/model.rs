//! Channel, power, and scenario data model shared by all schemes.
//!
//! Everything is stored linear-scale; decibels appear only at the CLI
//! boundary. Receiver noise variances are unity, so the power budgets equal
//! average transmit SNRs.

use num_complex::Complex64;
use std::f64::consts::TAU;

/// A complex channel gain in polar form.
///
/// The phase is kept normalized to `[0, 2π)` radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexGain {
    magnitude: f64,
    phase: f64,
}

impl ComplexGain {
    /// Build a gain from magnitude and phase; the phase may be any finite
    /// angle and is reduced modulo 2π.
    ///
    /// Panics if the magnitude is negative or either argument is non-finite.
    pub fn new(magnitude: f64, phase: f64) -> Self {
        assert!(
            magnitude.is_finite() && magnitude >= 0.0,
            "channel gain magnitude must be finite and nonnegative, got {magnitude}"
        );
        assert!(phase.is_finite(), "channel gain phase must be finite");
        Self {
            magnitude,
            phase: phase.rem_euclid(TAU),
        }
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    /// Phase in `[0, 2π)` radians.
    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.phase)
    }
}

/// The six deterministic link gains of the four-node cognitive channel
/// (full CSIT case). Node 1/2 are the PU/SU transmitters, node 4/3 the
/// PU/SU receivers; `h_ij` is the gain from node `i` to node `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullCsitChannel {
    pub h14: ComplexGain,
    pub h24: ComplexGain,
    pub h34: ComplexGain,
    pub h13: ComplexGain,
    pub h23: ComplexGain,
    pub h12: ComplexGain,
}

/// Per-link variances of the zero-mean complex Gaussian fading gains
/// (statistics-only CSIT case).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingStats {
    pub var14: f64,
    pub var24: f64,
    pub var34: f64,
    pub var13: f64,
    pub var23: f64,
    pub var12: f64,
}

impl FadingStats {
    pub fn new(var14: f64, var24: f64, var34: f64, var13: f64, var23: f64, var12: f64) -> Self {
        let s = Self {
            var14,
            var24,
            var34,
            var13,
            var23,
            var12,
        };
        for v in [var14, var24, var34, var13, var23, var12] {
            assert!(
                v.is_finite() && v > 0.0,
                "link variance must be positive, got {v}"
            );
        }
        s
    }
}

/// Long-term average power constraints of nodes 1, 2 and 3 (linear scale).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    pub p1_bar: f64,
    pub p2_bar: f64,
    pub p3_bar: f64,
}

impl PowerBudget {
    pub fn new(p1_bar: f64, p2_bar: f64, p3_bar: f64) -> Self {
        for p in [p1_bar, p2_bar, p3_bar] {
            assert!(
                p.is_finite() && p >= 0.0,
                "power budget must be nonnegative, got {p}"
            );
        }
        Self {
            p1_bar,
            p2_bar,
            p3_bar,
        }
    }
}

/// Channel knowledge available at the transmitters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CsitMode {
    FullCsit(FullCsitChannel),
    Statistics(FadingStats),
}

/// The PU's rate target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetRate {
    /// The PU rate obtained when the SU is silent.
    Auto,
    /// An explicit target in bits per channel use.
    Fixed(f64),
}

/// A complete problem instance: channel knowledge, power budgets and the
/// PU rate target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub csit: CsitMode,
    pub budget: PowerBudget,
    pub target_rate: TargetRate,
}

impl Scenario {
    /// Resolve the PU target rate in bpcu.
    pub fn resolved_target_rate(&self) -> f64 {
        match self.target_rate {
            TargetRate::Fixed(r) => r,
            TargetRate::Auto => default_target_rate(self),
        }
    }
}

/// Shannon capacity of a unit-noise Gaussian channel at SNR `x`:
/// `log2(1 + x)` in bits per channel use.
///
/// Panics if `x` is negative or non-finite.
pub fn cap(x: f64) -> f64 {
    assert!(
        x.is_finite() && x >= 0.0,
        "cap: SNR must be finite and nonnegative, got {x}"
    );
    (1.0 + x).log2()
}

/// Positive part, `max(x, 0)`.
pub fn pos_part(x: f64) -> f64 {
    x.max(0.0)
}

/// Decibels to linear power ratio.
pub fn snr_db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// The interference-free PU rate used as the default coexistence target:
/// `C(|h14|^2 P1)` with full CSIT, `E[C(|H14|^2 P1)]` with statistics only.
pub fn default_target_rate(scenario: &Scenario) -> f64 {
    let p1 = scenario.budget.p1_bar;
    match &scenario.csit {
        CsitMode::FullCsit(ch) => cap(ch.h14.magnitude().powi(2) * p1),
        CsitMode::Statistics(stats) => crate::fading::ergodic_cap_exponential(stats.var14, p1),
    }
}
