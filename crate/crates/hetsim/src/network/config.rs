//! Scenario file parsing and validation.
//!
//! Scenarios are TOML: a `[grid]`, a list of `[[cells]]`, and optional
//! `[propagation]`, `[shadowing]`, `[mobility]`, `[[routes]]`,
//! `[strategy]`, `[abs]`, `[rlf]`, `[sim]` and `[bias]` sections, all with
//! documented defaults. `load_scenario` either returns a fully validated
//! [`Scenario`] or the first semantic error; `validate_config` returns
//! every diagnostic with its field path.

use serde::Deserialize;
use thiserror::Error;

use super::{
    Cell, CellKind, GridSpec, PathlossModel, Propagation, Route, Scenario, ShadowingConfig,
    SimConfig, StrategyConfig, StrategyKind, UeConfig,
};
use crate::bias::{BiasMatrix, MobilityParams};
use crate::mobility::{AbsConfig, RlfConfig};

#[derive(Debug, Error)]
pub enum ScenarioError {
    /// TOML-level failure; the message carries line and column.
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("{}", first_error(.0))]
    Semantic(Vec<Diagnostic>),
}

fn first_error(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .find(|d| d.severity == Severity::Error)
        .map(|d| format!("{}: {}", d.path, d.message))
        .unwrap_or_else(|| "invalid scenario".to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// One validation finding, anchored to a config field path.
#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub severity: Severity,
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}: {}", self.path, self.message)
    }
}

// --------------------------------------------------------------------------
// Raw (serde) schema
// --------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    grid: RawGrid,
    cells: Vec<RawCell>,
    propagation: Option<RawPropagation>,
    shadowing: Option<RawShadowing>,
    mobility: Option<RawMobility>,
    routes: Option<Vec<RawRoute>>,
    strategy: Option<RawStrategy>,
    abs: Option<RawAbs>,
    rlf: Option<RawRlf>,
    sim: Option<RawSim>,
    bias: Option<RawBias>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    origin: Option<[f64; 2]>,
    cell_size_m: Option<f64>,
    nx: i64,
    ny: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCell {
    id: i64,
    kind: CellKind,
    position: [f64; 2],
    tx_power_dbm: Option<f64>,
    antenna_height_m: Option<f64>,
    pathloss: Option<RawPathloss>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPathloss {
    intercept_db: f64,
    slope_db_per_decade: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPropagation {
    min_distance_m: Option<f64>,
    macro_pathloss: Option<RawPathloss>,
    pico_pathloss: Option<RawPathloss>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawShadowing {
    sigma_db: Option<f64>,
    correlation_distance_m: Option<f64>,
    seed: Option<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMobility {
    hys_db: Option<f64>,
    off_db: Option<f64>,
    k: Option<i64>,
    ttt_ms: Option<i64>,
    sample_interval_ms: Option<i64>,
    speed_kmh: Option<f64>,
    candidate_window_db: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRoute {
    name: Option<String>,
    waypoints: Vec<[f64; 2]>,
    loops: Option<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStrategy {
    kind: Option<String>,
    n_off: Option<i64>,
    v_max_db: Option<f64>,
    v_step_db: Option<f64>,
    area_share: Option<f64>,
    detect_window_db: Option<f64>,
    group_radius_m: Option<f64>,
    global_retaining: Option<bool>,
    asyd_literal_formula: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAbs {
    duty_cycle: Option<f64>,
    residual_interference_db: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRlf {
    enabled: Option<bool>,
    q_out_db: Option<f64>,
    t_exec_ms: Option<i64>,
    t_rlf_ms: Option<i64>,
    outage_ms: Option<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    seed: Option<i64>,
    n_ues: Option<i64>,
    noise_dbm: Option<f64>,
    max_duration_s: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBias {
    rows: Vec<Vec<f64>>,
}

// --------------------------------------------------------------------------
// Validation
// --------------------------------------------------------------------------

struct Check {
    diags: Vec<Diagnostic>,
}

impl Check {
    fn error(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            severity: Severity::Error,
            path: path.into(),
            message: message.into(),
        });
    }

    fn warn(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            severity: Severity::Warning,
            path: path.into(),
            message: message.into(),
        });
    }

    fn has_errors(&self) -> bool {
        self.diags.iter().any(|d| d.severity == Severity::Error)
    }
}

fn build(raw: RawScenario, check: &mut Check) -> Option<Scenario> {
    // Grid
    let cell_size = raw.grid.cell_size_m.unwrap_or(5.0);
    if cell_size <= 0.0 {
        check.error("grid.cell_size_m", "must be positive");
    }
    if raw.grid.nx < 1 {
        check.error("grid.nx", "must be at least 1");
    }
    if raw.grid.ny < 1 {
        check.error("grid.ny", "must be at least 1");
    }
    let origin = raw.grid.origin.unwrap_or([0.0, 0.0]);
    let grid = GridSpec {
        origin_x_m: origin[0],
        origin_y_m: origin[1],
        cell_size_m: cell_size,
        nx: raw.grid.nx.max(1) as usize,
        ny: raw.grid.ny.max(1) as usize,
    };

    // Propagation defaults
    let prop = raw.propagation.as_ref();
    let min_distance = prop.and_then(|p| p.min_distance_m).unwrap_or(1.0);
    if min_distance <= 0.0 {
        check.error("propagation.min_distance_m", "must be positive");
    }
    let to_model = |p: &RawPathloss| PathlossModel {
        intercept_db: p.intercept_db,
        slope_db_per_decade: p.slope_db_per_decade,
    };
    let macro_pl = prop
        .and_then(|p| p.macro_pathloss.as_ref())
        .map(to_model)
        .unwrap_or(PathlossModel::MACRO_DEFAULT);
    let pico_pl = prop
        .and_then(|p| p.pico_pathloss.as_ref())
        .map(to_model)
        .unwrap_or(PathlossModel::PICO_DEFAULT);

    // Cells
    if raw.cells.is_empty() {
        check.error("cells", "at least one cell is required");
    }
    let n = raw.cells.len();
    let mut seen = vec![false; n];
    let mut cells = Vec::with_capacity(n);
    for (i, rc) in raw.cells.iter().enumerate() {
        let path = format!("cells[{i}]");
        if rc.id < 0 || rc.id as usize >= n {
            check.error(
                format!("{path}.id"),
                format!("cell id {} outside the dense range 0..{n}", rc.id),
            );
            continue;
        }
        let id = rc.id as usize;
        if seen[id] {
            check.error(format!("{path}.id"), format!("duplicate cell id {id}"));
            continue;
        }
        seen[id] = true;
        let tx = rc.tx_power_dbm.unwrap_or(match rc.kind {
            CellKind::Macro => 15.0,
            CellKind::Pico => 5.0,
        });
        if !tx.is_finite() {
            check.error(format!("{path}.tx_power_dbm"), "must be finite");
        }
        let height = rc.antenna_height_m.unwrap_or(match rc.kind {
            CellKind::Macro => 30.0,
            CellKind::Pico => 8.0,
        });
        if height < 0.0 {
            check.error(format!("{path}.antenna_height_m"), "must be non-negative");
        }
        let pathloss = match (&rc.pathloss, rc.kind) {
            (Some(p), _) => to_model(p),
            (None, CellKind::Macro) => macro_pl,
            (None, CellKind::Pico) => pico_pl,
        };
        if pathloss.slope_db_per_decade < 0.0 {
            check.error(
                format!("{path}.pathloss.slope_db_per_decade"),
                "must be non-negative",
            );
        }
        cells.push(Cell {
            id,
            kind: rc.kind,
            x_m: rc.position[0],
            y_m: rc.position[1],
            tx_power_dbm: tx,
            antenna_height_m: height,
            pathloss,
        });
    }
    cells.sort_by_key(|c| c.id);

    // Shadowing
    let sh = raw.shadowing.as_ref();
    let sigma = sh.and_then(|s| s.sigma_db).unwrap_or(8.0);
    if sigma < 0.0 {
        check.error("shadowing.sigma_db", "must be non-negative");
    }
    let corr = sh.and_then(|s| s.correlation_distance_m).unwrap_or(25.0);
    if corr <= 0.0 {
        check.error("shadowing.correlation_distance_m", "must be positive");
    }
    let shadow_seed = sh.and_then(|s| s.seed).unwrap_or(1);
    if shadow_seed < 0 {
        check.error("shadowing.seed", "must be non-negative");
    }

    // Mobility
    let mo = raw.mobility.as_ref();
    let k = mo.and_then(|m| m.k).unwrap_or(4);
    if k < 0 {
        check.error("mobility.k", "must be non-negative");
    }
    let ttt = mo.and_then(|m| m.ttt_ms).unwrap_or(320);
    if ttt < 0 {
        check.error("mobility.ttt_ms", "must be non-negative");
    }
    let interval = mo.and_then(|m| m.sample_interval_ms).unwrap_or(200);
    if interval <= 0 {
        check.error("mobility.sample_interval_ms", "must be positive");
    }
    let speed = mo.and_then(|m| m.speed_kmh).unwrap_or(60.0);
    if speed <= 0.0 {
        check.error("mobility.speed_kmh", "must be positive");
    }
    let window = mo.and_then(|m| m.candidate_window_db).unwrap_or(20.0);
    if window <= 0.0 {
        check.error("mobility.candidate_window_db", "must be positive");
    }
    let mobility = MobilityParams {
        hys_db: mo.and_then(|m| m.hys_db).unwrap_or(0.5),
        off_db: mo.and_then(|m| m.off_db).unwrap_or(0.0),
        k: k.max(0) as u32,
        ttt_ms: ttt.max(0) as u64,
        sample_interval_ms: interval.max(1) as u64,
    };

    // Routes
    let mut routes = Vec::new();
    for (i, rr) in raw.routes.as_deref().unwrap_or(&[]).iter().enumerate() {
        let path = format!("routes[{i}]");
        if rr.waypoints.len() < 2 {
            check.error(format!("{path}.waypoints"), "need at least two waypoints");
            continue;
        }
        let length: f64 = rr
            .waypoints
            .windows(2)
            .map(|w| ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt())
            .sum();
        if length <= 0.0 {
            check.error(format!("{path}.waypoints"), "route has zero length");
            continue;
        }
        let loops = rr.loops.unwrap_or(1);
        if loops < 1 {
            check.error(format!("{path}.loops"), "must be at least 1");
        }
        let inside = |w: &[f64; 2]| {
            w[0] >= grid.origin_x_m
                && w[0] <= grid.origin_x_m + (grid.nx - 1) as f64 * grid.cell_size_m
                && w[1] >= grid.origin_y_m
                && w[1] <= grid.origin_y_m + (grid.ny - 1) as f64 * grid.cell_size_m
        };
        if !rr.waypoints.iter().all(inside) {
            check.warn(
                format!("{path}.waypoints"),
                "route leaves the grid; shadow samples clamp at the boundary",
            );
        }
        routes.push(Route {
            name: rr.name.clone().unwrap_or_else(|| format!("route_{i}")),
            waypoints: rr.waypoints.iter().map(|w| (w[0], w[1])).collect(),
            loops: loops.max(1) as u32,
        });
    }

    // Strategy
    let st = raw.strategy.as_ref();
    let kind = match st.and_then(|s| s.kind.as_deref()) {
        None => StrategyKind::Minr,
        Some(s) => match StrategyKind::parse(s) {
            Some(k) => k,
            None => {
                check.error(
                    "strategy.kind",
                    format!("unknown strategy `{s}` (expected retb|asyd|minr|min3)"),
                );
                StrategyKind::Minr
            }
        },
    };
    let n_off = st.and_then(|s| s.n_off).unwrap_or(3);
    if n_off < 1 {
        check.error("strategy.n_off", "must be at least 1");
    }
    let v_max = st.and_then(|s| s.v_max_db).unwrap_or(5.0);
    if v_max <= 0.0 {
        check.error("strategy.v_max_db", "must be positive");
    }
    let v_step = st.and_then(|s| s.v_step_db).unwrap_or(0.1);
    if v_step <= 0.0 {
        check.error("strategy.v_step_db", "must be positive");
    }
    let area_share = st.and_then(|s| s.area_share).unwrap_or(0.5);
    if !(area_share > 0.0 && area_share <= 1.0) {
        check.error("strategy.area_share", "must lie in (0, 1]");
    }
    let detect = st.and_then(|s| s.detect_window_db).unwrap_or(10.0);
    if detect <= 0.0 {
        check.error("strategy.detect_window_db", "must be positive");
    }
    let group_radius = st.and_then(|s| s.group_radius_m).unwrap_or(150.0);
    if group_radius <= 0.0 {
        check.error("strategy.group_radius_m", "must be positive");
    }
    let strategy = StrategyConfig {
        kind,
        n_off: n_off.max(1) as usize,
        v_max_db: v_max,
        v_step_db: v_step,
        area_share,
        detect_window_db: detect,
        group_radius_m: group_radius,
        global_retaining: st.and_then(|s| s.global_retaining).unwrap_or(false),
        asyd_literal_formula: st.and_then(|s| s.asyd_literal_formula).unwrap_or(false),
    };

    // ABS
    let ra = raw.abs.as_ref();
    let duty = ra.and_then(|a| a.duty_cycle).unwrap_or(0.5);
    if !(0.0..=1.0).contains(&duty) {
        check.error("abs.duty_cycle", "must lie in [0, 1]");
    }
    let residual = ra.and_then(|a| a.residual_interference_db).unwrap_or(20.0);
    if residual < 0.0 {
        check.error("abs.residual_interference_db", "must be non-negative");
    }
    let abs = AbsConfig {
        duty_cycle: duty,
        residual_interference_db: residual,
    };

    // RLF
    let rr = raw.rlf.as_ref();
    let t_exec = rr.and_then(|r| r.t_exec_ms).unwrap_or(200);
    if t_exec < 0 {
        check.error("rlf.t_exec_ms", "must be non-negative");
    }
    let t_rlf = rr.and_then(|r| r.t_rlf_ms).unwrap_or(1000);
    if t_rlf < 0 {
        check.error("rlf.t_rlf_ms", "must be non-negative");
    }
    let outage = rr.and_then(|r| r.outage_ms).unwrap_or(1000);
    if outage < 0 {
        check.error("rlf.outage_ms", "must be non-negative");
    }
    let q_out = rr.and_then(|r| r.q_out_db).unwrap_or(-8.0);
    if !q_out.is_finite() {
        check.error("rlf.q_out_db", "must be finite");
    }
    let rlf = RlfConfig {
        enabled: rr.and_then(|r| r.enabled).unwrap_or(true),
        q_out_db: q_out,
        t_exec_ms: t_exec.max(0) as u64,
        t_rlf_ms: t_rlf.max(0) as u64,
        outage_ms: outage.max(0) as u64,
    };

    // Sim
    let rs = raw.sim.as_ref();
    let seed = rs.and_then(|s| s.seed).unwrap_or(1);
    if seed < 0 {
        check.error("sim.seed", "must be non-negative");
    }
    let n_ues = rs.and_then(|s| s.n_ues).unwrap_or(1);
    if n_ues < 1 {
        check.error("sim.n_ues", "must be at least 1");
    }
    let noise = rs.and_then(|s| s.noise_dbm).unwrap_or(-120.0);
    if !noise.is_finite() {
        check.error("sim.noise_dbm", "must be finite");
    }
    let sim = SimConfig {
        seed: seed.max(0) as u64,
        n_ues: n_ues.max(1) as usize,
        noise_dbm: noise,
        max_duration_s: rs.and_then(|s| s.max_duration_s),
    };

    // Explicit bias
    let bias_rows = match &raw.bias {
        None => None,
        Some(b) => {
            if b.rows.len() != n || b.rows.iter().any(|r| r.len() != n) {
                check.error(
                    "bias.rows",
                    format!("must be a {n}x{n} matrix matching the cell count"),
                );
                None
            } else {
                match BiasMatrix::from_rows(&b.rows, v_max) {
                    Ok(_) => Some(b.rows.clone()),
                    Err(e) => {
                        check.error("bias.rows", e.to_string());
                        None
                    }
                }
            }
        }
    };

    if check.has_errors() {
        return None;
    }
    Some(Scenario {
        name: raw.name.unwrap_or_else(|| "scenario".to_string()),
        cells,
        grid,
        propagation: Propagation {
            min_distance_m: min_distance,
        },
        shadowing: ShadowingConfig {
            sigma_db: sigma,
            correlation_distance_m: corr,
            seed: shadow_seed.max(0) as u64,
        },
        mobility,
        ue: UeConfig {
            speed_kmh: speed,
            candidate_window_db: window,
        },
        routes,
        strategy,
        abs,
        rlf,
        sim,
        bias_rows,
    })
}

/// Parse and validate a scenario. Returns the first semantic error when
/// validation fails; parse errors carry line information.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = toml::from_str(text)?;
    let mut check = Check { diags: Vec::new() };
    match build(raw, &mut check) {
        Some(s) => Ok(s),
        None => Err(ScenarioError::Semantic(check.diags)),
    }
}

/// Validate a scenario and return every diagnostic. Parse failures become
/// a single error diagnostic.
pub fn validate_config(text: &str) -> Vec<Diagnostic> {
    let raw: RawScenario = match toml::from_str(text) {
        Ok(r) => r,
        Err(e) => {
            return vec![Diagnostic {
                severity: Severity::Error,
                path: "(file)".to_string(),
                message: e.to_string(),
            }]
        }
    };
    let mut check = Check { diags: Vec::new() };
    build(raw, &mut check);
    check.diags
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [grid]
        nx = 10
        ny = 1

        [[cells]]
        id = 0
        kind = "macro"
        position = [0.0, 0.0]
    "#;

    #[test]
    fn minimal_config_gets_defaults() {
        let sc = load_scenario(MINIMAL).unwrap();
        assert_eq!(sc.n_cells(), 1);
        assert_eq!(sc.grid.cell_size_m, 5.0);
        assert_eq!(sc.cells[0].tx_power_dbm, 15.0);
        assert_eq!(sc.cells[0].antenna_height_m, 30.0);
        assert_eq!(sc.cells[0].pathloss, PathlossModel::MACRO_DEFAULT);
        assert_eq!(sc.mobility.ttt_ms, 320);
        assert_eq!(sc.mobility.k, 4);
        assert_eq!(sc.strategy.v_max_db, 5.0);
        assert_eq!(sc.shadowing.sigma_db, 8.0);
    }

    #[test]
    fn duplicate_id_names_the_id() {
        let text = r#"
            [grid]
            nx = 10
            ny = 1

            [[cells]]
            id = 0
            kind = "macro"
            position = [0.0, 0.0]

            [[cells]]
            id = 0
            kind = "pico"
            position = [50.0, 0.0]
        "#;
        let err = load_scenario(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("duplicate cell id 0"), "{msg}");
        assert!(msg.contains("cells[1].id"), "{msg}");
    }

    #[test]
    fn sparse_ids_rejected() {
        let text = r#"
            [grid]
            nx = 10
            ny = 1

            [[cells]]
            id = 0
            kind = "macro"
            position = [0.0, 0.0]

            [[cells]]
            id = 5
            kind = "pico"
            position = [50.0, 0.0]
        "#;
        assert!(load_scenario(text).is_err());
    }

    #[test]
    fn parse_error_carries_line_info() {
        let text = "[grid\nnx = 10";
        match load_scenario(text) {
            Err(ScenarioError::Parse(e)) => {
                assert!(e.to_string().contains("line 1"), "{e}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn negative_ttt_is_a_field_diagnostic() {
        let text = format!("{MINIMAL}\n[mobility]\nttt_ms = -5\n");
        let diags = validate_config(&text);
        assert!(diags
            .iter()
            .any(|d| d.severity == Severity::Error && d.path == "mobility.ttt_ms"));
    }

    #[test]
    fn oversized_bias_entry_cites_the_clamp() {
        let text = r#"
            [grid]
            nx = 10
            ny = 1

            [[cells]]
            id = 0
            kind = "macro"
            position = [0.0, 0.0]

            [[cells]]
            id = 1
            kind = "pico"
            position = [50.0, 0.0]

            [bias]
            rows = [[0.0, 7.0], [0.0, 0.0]]
        "#;
        let diags = validate_config(text);
        let err = diags
            .iter()
            .find(|d| d.path == "bias.rows")
            .expect("bias diagnostic");
        assert!(err.message.contains("|b| <= 5"), "{}", err.message);
    }

    #[test]
    fn valid_fixture_has_no_diagnostics() {
        let diags = validate_config(MINIMAL);
        assert!(diags.is_empty(), "{diags:?}");
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        let text = format!("{MINIMAL}\n[grid2]\nnx = 3\n");
        assert!(matches!(
            load_scenario(&text),
            Err(ScenarioError::Parse(_))
        ));
    }

    #[test]
    fn explicit_bias_accepted_when_in_range() {
        let text = r#"
            [grid]
            nx = 10
            ny = 1

            [[cells]]
            id = 0
            kind = "pico"
            position = [25.0, 0.0]

            [[cells]]
            id = 1
            kind = "macro"
            position = [0.0, 0.0]

            [bias]
            rows = [[0.0, -5.0], [5.0, 0.0]]
        "#;
        let sc = load_scenario(text).unwrap();
        assert_eq!(sc.bias_rows.as_ref().unwrap()[1][0], 5.0);
    }

    #[test]
    fn route_outside_grid_warns() {
        let text = format!(
            "{MINIMAL}\n[[routes]]\nwaypoints = [[0.0, 0.0], [500.0, 0.0]]\n"
        );
        let diags = validate_config(&text);
        assert!(diags
            .iter()
            .any(|d| d.severity == Severity::Warning && d.path.starts_with("routes[0]")));
        // Warnings do not block loading.
        assert!(load_scenario(&text).is_ok());
    }
}
