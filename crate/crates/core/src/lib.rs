//! Achievable secondary-user rates for clean-relaying cognitive radio under
//! the coexistence constraint.
//!
//! The library models a four-node cognitive channel in which a secondary user
//! (SU) may transmit only if the primary user's (PU) target rate stays
//! achievable with a single-user decoder. Three half-duplex transmission
//! schemes are implemented:
//!
//! * `JV` — the two-phase baseline in which the SU transmitter relays the
//!   PU signal while simultaneously sending its own precoded data,
//! * `CT` — clean transmitter relaying, which adds a third phase of
//!   interference-free relaying from the SU transmitter ([`ct`]),
//! * `CTR` — clean transmitter-receiver relaying, where the SU receiver also
//!   relays and Phase 2 becomes a multiple-access channel with a common
//!   message ([`ctr`]).
//!
//! Two channel-knowledge regimes are covered: deterministic gains with full
//! CSIT ([`ct`], [`ctr`]) and fast Rayleigh fading where only the per-link
//! variances are known at the transmitters ([`fading`]). The [`experiments`]
//! module reproduces the reference rate and generalized-multiplexing-gain
//! sweeps as CSV files and backs the `cogrelay` command-line tool.

pub mod ct;
pub mod ctr;
pub mod experiments;
pub mod fading;
pub mod model;
pub mod numerics;

pub use model::{
    cap, default_target_rate, pos_part, snr_db_to_linear, ComplexGain, CsitMode, FadingStats,
    FullCsitChannel, PowerBudget, Scenario, TargetRate,
};
