//! Heterogeneous LTE network handover simulator.
//!
//! The crate models a macro/pico cell deployment, computes RSRP coverage
//! maps with correlated log-normal shadowing, assigns Cell Individual
//! Offset (CIO) bias matrices under four strategies (RETB, ASYD, MINR,
//! MIN3), detects handover race zones by grid-point analysis, and runs a
//! time-stepped UE mobility simulation that produces handover, radio-link
//! failure, and time-of-stay KPIs.
//!
//! Pipeline stages (each usable on its own):
//!
//! 1. [`network`] - scenario parsing, pathloss, shadow fields, RSRP maps
//! 2. [`bias`]    - A3 event algebra, bias matrices, neighbor sets,
//!    per-pico bias fitting, strategy assignment
//! 3. [`analysis`] - stable-server and race-zone classification of the map
//! 4. [`mobility`] - trajectories, L3 filtering, SINR, the UE state
//!    machine, and the event log
//! 5. [`kpi`]     - aggregation of event logs into the report table
//!
//! All randomness is seeded; identical inputs produce bit-identical
//! artifacts.

pub mod analysis;
pub mod bias;
pub mod kpi;
pub mod mobility;
pub mod network;

pub use network::{Cell, CellId, CellKind, GridSpec, Scenario};
