//! Time-stepped UE mobility simulation.
//!
//! A UE drives a waypoint route at constant speed, measures every cell at
//! each sample interval, L3-filters the measurements, evaluates the A3
//! condition per neighbor with time-to-trigger, and executes handovers
//! against a SINR-threshold failure model. The run produces an
//! [`EventLog`] of handovers, radio link failures, dwell records, and
//! per-sample SINR.

mod events;
mod link;
mod sim;
mod trajectory;

pub use events::{DwellEnd, Event, EventKind, EventLog, EventLogError, SinrSample};
pub use link::{l3_filter_step, resolve_handover, sinr_db, HandoverOutcome, Subframe};
pub use sim::{run_simulation, SimError, UeContext, UeState};
pub use trajectory::{build_trajectory, Trajectory, TrajectoryError};

use serde::{Deserialize, Serialize};

/// Almost-blank-subframe settings. Macros blank a fraction of subframes;
/// in those protected subframes a pico-served UE sees each macro
/// interferer reduced by the residual-interference figure (the reference
/// signals keep transmitting).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AbsConfig {
    pub duty_cycle: f64,
    pub residual_interference_db: f64,
}

impl Default for AbsConfig {
    fn default() -> Self {
        AbsConfig {
            duty_cycle: 0.5,
            residual_interference_db: 20.0,
        }
    }
}

impl AbsConfig {
    /// Whether any subframes are blanked at all.
    pub fn is_active(&self) -> bool {
        self.duty_cycle > 0.0
    }

    pub const fn disabled() -> AbsConfig {
        AbsConfig {
            duty_cycle: 0.0,
            residual_interference_db: 0.0,
        }
    }
}

/// Radio-link failure and handover-execution model. A handover fails when
/// the serving-cell SINR is below `q_out_db` at the trigger instant or any
/// time during the `t_exec_ms` execution window; a failure counts as a
/// dropped call, and the UE re-establishes on the strongest cell after
/// `outage_ms`. Outside handovers, `t_rlf_ms` of continuous sub-threshold
/// SINR also drops the call.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RlfConfig {
    pub enabled: bool,
    pub q_out_db: f64,
    pub t_exec_ms: u64,
    pub t_rlf_ms: u64,
    pub outage_ms: u64,
}

impl Default for RlfConfig {
    fn default() -> Self {
        RlfConfig {
            enabled: true,
            q_out_db: -8.0,
            t_exec_ms: 200,
            t_rlf_ms: 1000,
            outage_ms: 1000,
        }
    }
}

impl RlfConfig {
    pub const fn disabled() -> RlfConfig {
        RlfConfig {
            enabled: false,
            q_out_db: -8.0,
            t_exec_ms: 0,
            t_rlf_ms: 1000,
            outage_ms: 1000,
        }
    }
}
