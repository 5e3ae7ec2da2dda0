//! Grid-point stable-server and race-zone analysis.
//!
//! A cell is a *stable server* at a point when no other candidate cell
//! satisfies the A3 entering condition against it. A point with no stable
//! server among its candidates is a *race zone*: a stationary UE there
//! keeps handing over from cell to cell with near-zero dwell time. This
//! module classifies every grid point of an RSRP map and reports the race
//! probability as a function of the global hysteresis.

use thiserror::Error;

use crate::bias::{a3_entering, BiasMatrix};
use crate::network::{CellId, CellKind, RsrpMap};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("bias matrix is {bias}x{bias} but the map holds {cells} cells")]
    DimensionMismatch { bias: usize, cells: usize },
    #[error("hysteresis list is empty")]
    EmptyHgList,
}

/// Stability verdict of a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Race,
}

/// Classification of one grid point.
#[derive(Debug, Clone)]
pub struct PointClassification {
    /// Cells with no triggering neighbor at this point.
    pub stable: Vec<CellId>,
    pub verdict: Verdict,
    /// Chosen next cell per candidate serving cell (`None` = would stay).
    pub transitions: Vec<(CellId, Option<CellId>)>,
}

/// Cells whose RSRP lies within `window_db` of the strongest at the point.
/// Cells far below the top cannot trigger an A3 event under bounded bias,
/// so the stability check is restricted to this set.
pub fn candidate_cells(point_rsrp: &[f64], window_db: f64) -> Vec<CellId> {
    let best = point_rsrp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (0..point_rsrp.len())
        .filter(|&c| point_rsrp[c] >= best - window_db)
        .collect()
}

/// Candidate set guaranteed to contain `must_have` (the serving cell of a
/// moving UE can fall below the window without leaving the system).
pub fn candidates_including(
    point_rsrp: &[f64],
    window_db: f64,
    must_have: CellId,
) -> Vec<CellId> {
    let mut cands = candidate_cells(point_rsrp, window_db);
    if !cands.contains(&must_have) {
        cands.push(must_have);
        cands.sort_unstable();
    }
    cands
}

/// Cells `p` in `candidates` for which no other candidate `n` satisfies
/// the A3 entering condition `M_n > M_p + H_e1(p, n)`.
pub fn stable_server_set(
    point_rsrp: &[f64],
    bias: &BiasMatrix,
    h_g_db: f64,
    candidates: &[CellId],
) -> Vec<CellId> {
    candidates
        .iter()
        .copied()
        .filter(|&p| {
            candidates
                .iter()
                .all(|&n| n == p || !a3_entering(point_rsrp[n], point_rsrp[p], bias, h_g_db, p, n))
        })
        .collect()
}

/// Next cell a UE served by `serving` would hand over to at this point, or
/// `None` when no neighbor triggers. Among simultaneously triggering
/// neighbors the one with the highest biased RSRP `M_n + b[serving][n]`
/// wins; ties go to the lower cell id.
pub fn handover_transition(
    serving: CellId,
    point_rsrp: &[f64],
    bias: &BiasMatrix,
    h_g_db: f64,
    candidates: &[CellId],
) -> Option<CellId> {
    let mut best: Option<(f64, CellId)> = None;
    for &n in candidates {
        if n == serving {
            continue;
        }
        if a3_entering(point_rsrp[n], point_rsrp[serving], bias, h_g_db, serving, n) {
            let biased = point_rsrp[n] + bias.get(serving, n);
            let better = match best {
                None => true,
                Some((bv, bn)) => biased > bv || (biased == bv && n < bn),
            };
            if better {
                best = Some((biased, n));
            }
        }
    }
    best.map(|(_, n)| n)
}

/// Full classification of a point: stable set, race verdict, and the
/// transition graph over the candidates. When the stable set is empty the
/// transition graph necessarily contains a cycle (every candidate has an
/// outgoing edge in a finite graph).
pub fn classify_grid_point(
    point_rsrp: &[f64],
    bias: &BiasMatrix,
    h_g_db: f64,
    candidates: &[CellId],
) -> PointClassification {
    let stable = stable_server_set(point_rsrp, bias, h_g_db, candidates);
    let transitions = candidates
        .iter()
        .map(|&c| {
            (
                c,
                handover_transition(c, point_rsrp, bias, h_g_db, candidates),
            )
        })
        .collect();
    let verdict = if stable.is_empty() {
        Verdict::Race
    } else {
        Verdict::Stable
    };
    PointClassification {
        stable,
        verdict,
        transitions,
    }
}

/// Follow `handover_transition` from `start` until a cell repeats or a
/// stable cell is reached. Returns the visited sequence; at a race point
/// the sequence ends on the first revisited cell.
pub fn walk_transitions(
    start: CellId,
    point_rsrp: &[f64],
    bias: &BiasMatrix,
    h_g_db: f64,
    candidates: &[CellId],
) -> Vec<CellId> {
    let mut seq = vec![start];
    let mut cur = start;
    for _ in 0..candidates.len() + 1 {
        match handover_transition(cur, point_rsrp, bias, h_g_db, candidates) {
            None => break,
            Some(next) => {
                let revisit = seq.contains(&next);
                seq.push(next);
                if revisit {
                    break;
                }
                cur = next;
            }
        }
    }
    seq
}

/// One evaluated hysteresis value of the race curve.
#[derive(Debug, Clone, Copy)]
pub struct RaceCurvePoint {
    pub h_g_db: f64,
    pub race_points: usize,
    /// Grid points whose unbiased or biased server is a pico.
    pub pico_points: usize,
    pub total_points: usize,
    /// Race points normalized to pico coverage; `None` when no point is
    /// pico-covered.
    pub race_prob_norm: Option<f64>,
    /// Race points over the whole grid.
    pub race_frac_raw: f64,
}

/// Race analysis of a map over a list of global-hysteresis values.
#[derive(Debug, Clone)]
pub struct RaceReport {
    pub curve: Vec<RaceCurvePoint>,
    /// 0/1 race mask for the first hysteresis value, row-major.
    pub mask: Vec<u8>,
    pub mask_h_g_db: f64,
    pub nx: usize,
    pub ny: usize,
}

/// Classify every grid point for each `H_g` in `h_g_list`. The race
/// probability is normalized to the pico coverage area: points whose
/// unbiased strongest server is a pico or whose stable set contains a
/// pico.
pub fn race_report(
    map: &RsrpMap,
    kinds: &[CellKind],
    bias: &BiasMatrix,
    h_g_list: &[f64],
    candidate_window_db: f64,
) -> Result<RaceReport, AnalysisError> {
    if h_g_list.is_empty() {
        return Err(AnalysisError::EmptyHgList);
    }
    if bias.n() != map.n_cells() {
        return Err(AnalysisError::DimensionMismatch {
            bias: bias.n(),
            cells: map.n_cells(),
        });
    }
    let npoints = map.grid.num_points();
    let mut curve = Vec::with_capacity(h_g_list.len());
    let mut mask = vec![0u8; npoints];
    let mut point = Vec::with_capacity(map.n_cells());
    for (hi, &h_g) in h_g_list.iter().enumerate() {
        let mut race_points = 0usize;
        let mut pico_points = 0usize;
        for idx in 0..npoints {
            map.gather_point(idx, &mut point);
            let cands = candidate_cells(&point, candidate_window_db);
            let stable = stable_server_set(&point, bias, h_g, &cands);
            let unbiased_pico =
                kinds[crate::network::unbiased_argmax(&point)] == CellKind::Pico;
            let stable_pico = stable.iter().any(|&c| kinds[c] == CellKind::Pico);
            if unbiased_pico || stable_pico {
                pico_points += 1;
            }
            if stable.is_empty() {
                race_points += 1;
                if hi == 0 {
                    mask[idx] = 1;
                }
            }
        }
        curve.push(RaceCurvePoint {
            h_g_db: h_g,
            race_points,
            pico_points,
            total_points: npoints,
            race_prob_norm: if pico_points > 0 {
                Some(race_points as f64 / pico_points as f64)
            } else {
                None
            },
            race_frac_raw: race_points as f64 / npoints as f64,
        });
    }
    Ok(RaceReport {
        curve,
        mask,
        mask_h_g_db: h_g_list[0],
        nx: map.grid.nx,
        ny: map.grid.ny,
    })
}

impl RaceReport {
    /// Race mask as a bare CSV grid of 0/1, one row per grid row.
    pub fn mask_csv(&self) -> String {
        let mut out = String::new();
        for iy in 0..self.ny {
            let row: Vec<&str> = (0..self.nx)
                .map(|ix| if self.mask[iy * self.nx + ix] == 1 { "1" } else { "0" })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Hysteresis curve as CSV `(h_g_db, race_prob_norm, race_frac_raw)`.
    /// An undefined normalized probability renders as `-`.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("h_g_db,race_prob_norm,race_frac_raw\n");
        for p in &self.curve {
            let norm = match p.race_prob_norm {
                Some(v) => format!("{v}"),
                None => "-".to_string(),
            };
            out.push_str(&format!("{},{},{}\n", p.h_g_db, norm, p.race_frac_raw));
        }
        out
    }
}
