//! Scenario builders shared by unit tests.

use super::{
    Cell, CellKind, GridSpec, Propagation, Route, Scenario, ShadowingConfig, SimConfig,
    StrategyConfig, StrategyKind, UeConfig,
};
use crate::bias::MobilityParams;
use crate::mobility::{AbsConfig, RlfConfig};
use crate::network::PathlossModel;

/// Cells on the y = 0 line over a 0..2000 m grid at 5 m spacing.
pub fn line_scenario(cells: &[(CellKind, f64, f64)]) -> Scenario {
    let grid = GridSpec {
        origin_x_m: 0.0,
        origin_y_m: 0.0,
        cell_size_m: 5.0,
        nx: 401,
        ny: 1,
    };
    let cells = cells
        .iter()
        .enumerate()
        .map(|(id, &(kind, x, tx))| Cell {
            id,
            kind,
            x_m: x,
            y_m: 0.0,
            tx_power_dbm: tx,
            antenna_height_m: if kind == CellKind::Pico { 8.0 } else { 30.0 },
            pathloss: match kind {
                CellKind::Macro => PathlossModel::MACRO_DEFAULT,
                CellKind::Pico => PathlossModel::PICO_DEFAULT,
            },
        })
        .collect();
    Scenario {
        name: "line".to_string(),
        cells,
        grid,
        propagation: Propagation {
            min_distance_m: 1.0,
        },
        shadowing: ShadowingConfig {
            sigma_db: 0.0,
            correlation_distance_m: 25.0,
            seed: 1,
        },
        mobility: MobilityParams {
            hys_db: 1.0,
            off_db: 0.0,
            k: 0,
            ttt_ms: 0,
            sample_interval_ms: 200,
        },
        ue: UeConfig {
            speed_kmh: 60.0,
            candidate_window_db: 20.0,
        },
        routes: vec![Route {
            name: "line".to_string(),
            waypoints: vec![(0.0, 0.0), (2000.0, 0.0)],
            loops: 1,
        }],
        strategy: StrategyConfig {
            kind: StrategyKind::Minr,
            n_off: 3,
            v_max_db: 5.0,
            v_step_db: 0.1,
            area_share: 0.5,
            detect_window_db: 10.0,
            group_radius_m: 150.0,
            global_retaining: false,
            asyd_literal_formula: false,
        },
        abs: AbsConfig::disabled(),
        rlf: RlfConfig::disabled(),
        sim: SimConfig {
            seed: 1,
            n_ues: 1,
            noise_dbm: -120.0,
            max_duration_s: None,
        },
        bias_rows: None,
    }
}

/// The three-cell race fixture: a pico (id 0) between two macros (ids 1
/// and 2). At 5 dB bias and 1 dB global hysteresis the racy bias matrix
/// produces a race zone near x = 950 m with the cycle M1 -> P1 -> M2 -> M1.
pub fn three_cell_line() -> Scenario {
    line_scenario(&[
        (CellKind::Pico, 850.0, 4.0),
        (CellKind::Macro, 0.0, 30.0),
        (CellKind::Macro, 2000.0, 30.0),
    ])
}
