//! Cell deployment model and RSRP map computation.
//!
//! A [`Scenario`] holds the validated deployment: cells with positions and
//! transmit powers, the analysis grid, propagation and shadowing settings,
//! drive routes, and per-run parameters. [`compute_rsrp_map`] evaluates
//! `tx - pathloss + shadow` for every cell at every grid point.

mod config;
mod map;
mod pathloss;
mod shadow;
#[cfg(test)]
pub mod test_fixtures;

pub use config::{load_scenario, validate_config, Diagnostic, ScenarioError, Severity};
pub use map::{
    biased_pico_point_count, compute_rsrp_map, coverage_areas, unbiased_argmax,
    unbiased_server_kinds, Coverage, MapError, RsrpMap, ServerVerdict,
};
pub(crate) use map::pico_win_deficits;
pub use pathloss::PathlossModel;
pub use shadow::{generate_shadow_field, ShadowError, ShadowField};

use serde::{Deserialize, Serialize};

use crate::bias::MobilityParams;
use crate::mobility::{AbsConfig, RlfConfig};

/// Cell index, dense `0..N`.
pub type CellId = usize;

/// Macro or pico layer. Determines the default pathloss model and the
/// handover leg classification (MM/MP/PM/PP).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Macro,
    Pico,
}

/// One transmitting cell.
#[derive(Debug, Clone)]
pub struct Cell {
    pub id: CellId,
    pub kind: CellKind,
    /// Site position in meters.
    pub x_m: f64,
    pub y_m: f64,
    /// Per-resource-element reference power, i.e. the RSRP at 0 dB pathloss.
    pub tx_power_dbm: f64,
    pub antenna_height_m: f64,
    pub pathloss: PathlossModel,
}

impl Cell {
    pub fn distance_to(&self, x_m: f64, y_m: f64) -> f64 {
        let dx = self.x_m - x_m;
        let dy = self.y_m - y_m;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Regular 2-D analysis grid. Points sit at `origin + (ix, iy) * cell_size`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin_x_m: f64,
    pub origin_y_m: f64,
    pub cell_size_m: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn num_points(&self) -> usize {
        self.nx * self.ny
    }

    /// Area represented by one grid point.
    pub fn point_area_m2(&self) -> f64 {
        self.cell_size_m * self.cell_size_m
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix < self.nx && iy < self.ny);
        iy * self.nx + ix
    }

    pub fn point(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            self.origin_x_m + ix as f64 * self.cell_size_m,
            self.origin_y_m + iy as f64 * self.cell_size_m,
        )
    }

    pub fn point_at(&self, idx: usize) -> (f64, f64) {
        self.point(idx % self.nx, idx / self.nx)
    }
}

/// Propagation settings shared by all cells.
#[derive(Debug, Clone, Copy)]
pub struct Propagation {
    /// Distances below this are clamped before pathloss evaluation.
    pub min_distance_m: f64,
}

/// Shadow fading settings.
#[derive(Debug, Clone, Copy)]
pub struct ShadowingConfig {
    pub sigma_db: f64,
    pub correlation_distance_m: f64,
    pub seed: u64,
}

/// A drive route as a waypoint polyline.
#[derive(Debug, Clone)]
pub struct Route {
    pub name: String,
    /// Waypoints in meters.
    pub waypoints: Vec<(f64, f64)>,
    /// Number of traversals of the polyline.
    pub loops: u32,
}

/// Bias-assignment strategy selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    /// Retaining bias only; no off-loading bias in any macro.
    Retb,
    /// Group-synchronized retaining bias with reduced off-loading.
    Asyd,
    /// Skew-symmetric bias over the strong (off-loading) neighbor set.
    Minr,
    /// Skew-symmetric bias restricted to the best three macro neighbors.
    Min3,
}

impl StrategyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyKind::Retb => "RETB",
            StrategyKind::Asyd => "ASYD",
            StrategyKind::Minr => "MINR",
            StrategyKind::Min3 => "MIN3",
        }
    }

    pub fn parse(s: &str) -> Option<StrategyKind> {
        match s.to_ascii_lowercase().as_str() {
            "retb" => Some(StrategyKind::Retb),
            "asyd" => Some(StrategyKind::Asyd),
            "minr" => Some(StrategyKind::Minr),
            "min3" => Some(StrategyKind::Min3),
            _ => None,
        }
    }
}

/// Strategy and bias-fitting parameters.
#[derive(Debug, Clone)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    /// Size of the off-loading (strong) neighbor set.
    pub n_off: usize,
    /// Bias clamp, `0 <= v_i <= v_max`.
    pub v_max_db: f64,
    /// Search step of the bias fit.
    pub v_step_db: f64,
    /// Pico-layer share of the enclosing macro's unbiased area.
    pub area_share: f64,
    /// Retaining-set detectability window below the pico RSRP.
    pub detect_window_db: f64,
    /// Picos within this distance form a neighbor group.
    pub group_radius_m: f64,
    /// Encode retaining bias on the broadcast diagonal instead of
    /// per-neighbor entries.
    pub global_retaining: bool,
    /// Use `v_o = 2 v_r - v` for ASYD instead of the default `v_o = 2 v - v_r`.
    pub asyd_literal_formula: bool,
}

/// Dynamic-simulation settings.
#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub seed: u64,
    /// Independent trajectory replicas, each with its own shadow field.
    pub n_ues: usize,
    pub noise_dbm: f64,
    /// Optional truncation of each UE run.
    pub max_duration_s: Option<f64>,
}

/// UE speed and measurement-selection settings.
#[derive(Debug, Clone, Copy)]
pub struct UeConfig {
    pub speed_kmh: f64,
    /// Cells within this window of the strongest at a point are handover
    /// candidates.
    pub candidate_window_db: f64,
}

/// A fully validated deployment plus run parameters.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub cells: Vec<Cell>,
    pub grid: GridSpec,
    pub propagation: Propagation,
    pub shadowing: ShadowingConfig,
    pub mobility: MobilityParams,
    pub ue: UeConfig,
    pub routes: Vec<Route>,
    pub strategy: StrategyConfig,
    pub abs: AbsConfig,
    pub rlf: RlfConfig,
    pub sim: SimConfig,
    /// Explicit bias matrix rows, overriding strategy assignment.
    pub bias_rows: Option<Vec<Vec<f64>>>,
}

impl Scenario {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn kinds(&self) -> Vec<CellKind> {
        self.cells.iter().map(|c| c.kind).collect()
    }

    pub fn pico_ids(&self) -> Vec<CellId> {
        self.cells
            .iter()
            .filter(|c| c.kind == CellKind::Pico)
            .map(|c| c.id)
            .collect()
    }

    pub fn macro_ids(&self) -> Vec<CellId> {
        self.cells
            .iter()
            .filter(|c| c.kind == CellKind::Macro)
            .map(|c| c.id)
            .collect()
    }

    /// RSRP of `cell` at an arbitrary position, with the shadow field
    /// sampled bilinearly. Positions on grid points reproduce the map
    /// values exactly.
    pub fn rsrp_at(&self, cell: CellId, x_m: f64, y_m: f64, shadow: &ShadowField) -> f64 {
        let c = &self.cells[cell];
        let d = c.distance_to(x_m, y_m);
        c.tx_power_dbm - c.pathloss.loss_db(d, self.propagation.min_distance_m)
            + shadow.sample(cell, x_m, y_m)
    }

    /// RSRP of every cell at a position, into `out`.
    pub fn rsrp_all_at(&self, x_m: f64, y_m: f64, shadow: &ShadowField, out: &mut Vec<f64>) {
        out.clear();
        for c in 0..self.n_cells() {
            out.push(self.rsrp_at(c, x_m, y_m, shadow));
        }
    }
}
