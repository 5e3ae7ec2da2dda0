//! RSRP map computation and server/coverage accounting.

use thiserror::Error;

use super::{CellId, CellKind, GridSpec, Scenario, ShadowField};
use crate::analysis::{candidate_cells, stable_server_set};
use crate::bias::BiasMatrix;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("shadow field grid {shadow:?} does not match scenario grid {scenario:?}")]
    GridMismatch {
        shadow: Box<GridSpec>,
        scenario: Box<GridSpec>,
    },
    #[error("shadow field holds {shadow} cells, scenario {scenario}")]
    CellCountMismatch { shadow: usize, scenario: usize },
    #[error("bias matrix is {bias}x{bias} but the map holds {cells} cells")]
    BiasDimension { bias: usize, cells: usize },
}

/// Per-cell RSRP in dBm on the analysis grid.
#[derive(Debug, Clone)]
pub struct RsrpMap {
    pub grid: GridSpec,
    /// `values[cell][iy * nx + ix]`, dBm.
    values: Vec<Vec<f64>>,
}

impl RsrpMap {
    pub fn from_values(grid: GridSpec, values: Vec<Vec<f64>>) -> RsrpMap {
        RsrpMap { grid, values }
    }

    pub fn n_cells(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn value(&self, cell: CellId, idx: usize) -> f64 {
        self.values[cell][idx]
    }

    pub fn cell_values(&self, cell: CellId) -> &[f64] {
        &self.values[cell]
    }

    /// RSRP of every cell at a grid point, into `out`.
    pub fn gather_point(&self, idx: usize, out: &mut Vec<f64>) {
        out.clear();
        for cell in &self.values {
            out.push(cell[idx]);
        }
    }

    /// CSV export: header `x,y,cell_0..cell_{N-1}`, one row per grid
    /// point, values in dBm.
    pub fn to_csv(&self) -> String {
        let n = self.n_cells();
        let mut out = String::from("x,y");
        for c in 0..n {
            out.push_str(&format!(",cell_{c}"));
        }
        out.push('\n');
        for idx in 0..self.grid.num_points() {
            let (x, y) = self.grid.point_at(idx);
            out.push_str(&format!("{x},{y}"));
            for c in 0..n {
                out.push_str(&format!(",{}", self.value(c, idx)));
            }
            out.push('\n');
        }
        out
    }
}

/// Evaluate `tx - pathloss + shadow` for every cell at every grid point.
pub fn compute_rsrp_map(scenario: &Scenario, shadow: &ShadowField) -> Result<RsrpMap, MapError> {
    if *shadow.grid() != scenario.grid {
        return Err(MapError::GridMismatch {
            shadow: Box::new(*shadow.grid()),
            scenario: Box::new(scenario.grid),
        });
    }
    if shadow.n_cells() != scenario.n_cells() {
        return Err(MapError::CellCountMismatch {
            shadow: shadow.n_cells(),
            scenario: scenario.n_cells(),
        });
    }
    let grid = scenario.grid;
    let npoints = grid.num_points();
    let mut values = Vec::with_capacity(scenario.n_cells());
    for cell in &scenario.cells {
        let mut v = Vec::with_capacity(npoints);
        let shadow_field = shadow.cell_field(cell.id);
        for idx in 0..npoints {
            let (x, y) = grid.point_at(idx);
            let d = cell.distance_to(x, y);
            let pl = cell
                .pathloss
                .loss_db(d, scenario.propagation.min_distance_m);
            v.push(cell.tx_power_dbm - pl + shadow_field[idx]);
        }
        values.push(v);
    }
    Ok(RsrpMap { grid, values })
}

/// Index of the strongest cell at a point; ties go to the lower id.
#[inline]
pub fn unbiased_argmax(point_rsrp: &[f64]) -> CellId {
    let mut best = 0;
    for c in 1..point_rsrp.len() {
        if point_rsrp[c] > point_rsrp[best] {
            best = c;
        }
    }
    best
}

/// Server verdict of a grid point under a bias matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServerVerdict {
    /// Unique stable server.
    Server(CellId),
    /// More than one stable server (hysteresis overlap); no area credited.
    Ambiguous,
    /// No stable server.
    Race,
}

/// Per-cell served area and the server map.
#[derive(Debug, Clone)]
pub struct Coverage {
    pub server: Vec<ServerVerdict>,
    pub areas_m2: Vec<f64>,
    /// Points without a unique stable server.
    pub unresolved_points: usize,
}

/// Served areas on the grid. Without a bias matrix the server at a point
/// is the strongest cell; with one it is the unique stable server where
/// one exists, and the point is flagged otherwise.
pub fn coverage_areas(
    map: &RsrpMap,
    bias: Option<&BiasMatrix>,
    h_g_db: f64,
    candidate_window_db: f64,
) -> Result<Coverage, MapError> {
    if let Some(b) = bias {
        if b.n() != map.n_cells() {
            return Err(MapError::BiasDimension {
                bias: b.n(),
                cells: map.n_cells(),
            });
        }
    }
    let npoints = map.grid.num_points();
    let point_area = map.grid.point_area_m2();
    let mut server = Vec::with_capacity(npoints);
    let mut areas = vec![0.0f64; map.n_cells()];
    let mut unresolved = 0usize;
    let mut point = Vec::with_capacity(map.n_cells());
    for idx in 0..npoints {
        map.gather_point(idx, &mut point);
        let verdict = match bias {
            None => ServerVerdict::Server(unbiased_argmax(&point)),
            Some(b) => {
                let cands = candidate_cells(&point, candidate_window_db);
                let stable = stable_server_set(&point, b, h_g_db, &cands);
                match stable.len() {
                    0 => ServerVerdict::Race,
                    1 => ServerVerdict::Server(stable[0]),
                    _ => ServerVerdict::Ambiguous,
                }
            }
        };
        if let ServerVerdict::Server(c) = verdict {
            areas[c] += point_area;
        } else {
            unresolved += 1;
        }
        server.push(verdict);
    }
    Ok(Coverage {
        server,
        areas_m2: areas,
        unresolved_points: unresolved,
    })
}

/// Grid points won by `pico` when its RSRP is raised by `extra_bias_db`
/// and every other cell stays unbiased: the cell-range-expansion region
/// used by the area-equalization fit.
pub fn biased_pico_point_count(map: &RsrpMap, pico: CellId, extra_bias_db: f64) -> usize {
    let npoints = map.grid.num_points();
    let mut count = 0;
    for idx in 0..npoints {
        let p = map.value(pico, idx) + extra_bias_db;
        let mut wins = true;
        for c in 0..map.n_cells() {
            if c != pico && map.value(c, idx) >= p {
                wins = false;
                break;
            }
        }
        if wins {
            count += 1;
        }
    }
    count
}

/// Shortfall `max_other - pico` in dB per grid point: the bias a pico
/// needs to win each point. Sorting this once lets the bias fit count
/// coverage at any bias level cheaply.
pub(crate) fn pico_win_deficits(map: &RsrpMap, pico: CellId) -> Vec<f64> {
    let npoints = map.grid.num_points();
    let mut deficits = Vec::with_capacity(npoints);
    for idx in 0..npoints {
        let mut max_other = f64::NEG_INFINITY;
        for c in 0..map.n_cells() {
            if c != pico {
                max_other = max_other.max(map.value(c, idx));
            }
        }
        deficits.push(max_other - map.value(pico, idx));
    }
    deficits
}

/// Kind of the strongest cell at every grid point.
pub fn unbiased_server_kinds(map: &RsrpMap, kinds: &[CellKind]) -> Vec<CellKind> {
    let mut out = Vec::with_capacity(map.grid.num_points());
    let mut point = Vec::with_capacity(map.n_cells());
    for idx in 0..map.grid.num_points() {
        map.gather_point(idx, &mut point);
        out.push(kinds[unbiased_argmax(&point)]);
    }
    out
}
