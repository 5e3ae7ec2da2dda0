//! Bias-matrix assembly under the four assignment strategies.
//!
//! Every strategy starts from the per-pico optimized bias `v_i` and the
//! derived neighbor sets, then fills the matrix rows:
//!
//! * RETB: retaining bias only (`v_r = v`, `v_o = 0`), across the full
//!   retaining set. No macro ever carries off-loading bias, which provably
//!   eliminates race zones at the cost of range extension.
//! * ASYD: retaining as RETB but synchronized to the group maximum within
//!   each pico neighbor group; the strong macros off-load with a reduced
//!   value so the two-boundary midpoint stays at `v`.
//! * MINR: skew-symmetric `+v`/`-v` over the strong (off-loading) set.
//! * MIN3: skew-symmetric over only the best three macro neighbors.

use super::{BiasError, BiasMatrix, NeighborSets};
use crate::network::{CellId, CellKind, StrategyKind};

/// Assembly options.
#[derive(Debug, Clone, Copy)]
pub struct AssignConfig {
    pub v_max_db: f64,
    /// Encode retaining bias on the broadcast diagonal (`b[i][i] = +v_r`)
    /// instead of one entry per macro neighbor; used when a retaining set
    /// would exceed the 32-neighbor row limit.
    pub global_retaining: bool,
    /// ASYD variant: use `v_o = 2 v_r - v` as printed in some parameter
    /// sheets instead of the load-preserving `v_o = 2 v - v_r`.
    pub asyd_literal_formula: bool,
}

impl Default for AssignConfig {
    fn default() -> Self {
        AssignConfig {
            v_max_db: BiasMatrix::DEFAULT_V_MAX_DB,
            global_retaining: false,
            asyd_literal_formula: false,
        }
    }
}

/// Retaining and off-loading values chosen for one pico.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasVectorEntry {
    pub pico: CellId,
    /// Optimized range-extension bias.
    pub v_db: f64,
    pub v_r_db: f64,
    pub v_o_db: f64,
}

/// A strategy-assigned matrix plus the per-pico bias vector behind it.
#[derive(Debug, Clone)]
pub struct BiasAssignment {
    pub matrix: BiasMatrix,
    pub vectors: Vec<BiasVectorEntry>,
}

impl BiasAssignment {
    /// Per-pico vector CSV `(pico, v_db, v_r_db, v_o_db)`.
    pub fn vectors_csv(&self) -> String {
        let mut out = String::from("pico,v_db,v_r_db,v_o_db\n");
        for e in &self.vectors {
            out.push_str(&format!("{},{},{},{}\n", e.pico, e.v_db, e.v_r_db, e.v_o_db));
        }
        out
    }
}

/// Build the bias matrix for `strategy` from the neighbor sets and the
/// per-cell optimized bias `v_db` (macro entries ignored). Rows that would
/// exceed the 32-neighbor limit are rejected with a hint to enable global
/// retaining.
pub fn assign_bias_matrix(
    strategy: StrategyKind,
    kinds: &[CellKind],
    sets: &NeighborSets,
    v_db: &[f64],
    cfg: &AssignConfig,
) -> Result<BiasAssignment, BiasError> {
    let n = kinds.len();
    let mut rows = vec![vec![0.0f64; n]; n];
    let mut vectors = Vec::with_capacity(sets.per_pico.len());

    for pn in &sets.per_pico {
        let p = pn.pico;
        let v = v_db
            .get(p)
            .copied()
            .unwrap_or(0.0)
            .clamp(0.0, cfg.v_max_db);

        // Strategy-specific values and sets.
        let ordered_macros = pn.retaining_macros(kinds);
        let (v_r, v_o, retain_set, offload_set): (f64, f64, Vec<CellId>, Vec<CellId>) =
            match strategy {
                StrategyKind::Retb => (v, 0.0, ordered_macros, Vec::new()),
                StrategyKind::Asyd => {
                    let group_max = sets
                        .group_of(p)
                        .map(|g| {
                            g.iter()
                                .map(|&q| v_db.get(q).copied().unwrap_or(0.0))
                                .fold(0.0f64, f64::max)
                        })
                        .unwrap_or(v)
                        .clamp(0.0, cfg.v_max_db);
                    let v_o = if cfg.asyd_literal_formula {
                        2.0 * group_max - v
                    } else {
                        2.0 * v - group_max
                    };
                    (
                        group_max,
                        v_o.clamp(0.0, cfg.v_max_db),
                        ordered_macros,
                        pn.offloading.clone(),
                    )
                }
                StrategyKind::Minr => (v, v, pn.offloading.clone(), pn.offloading.clone()),
                StrategyKind::Min3 => {
                    let top3: Vec<CellId> =
                        ordered_macros.iter().copied().take(3).collect();
                    (v, v, top3.clone(), top3)
                }
            };

        if cfg.global_retaining {
            rows[p][p] = v_r;
        } else {
            for &m in &retain_set {
                rows[p][m] = -v_r;
            }
        }
        if v_o > 0.0 {
            for &m in &offload_set {
                rows[m][p] = v_o;
            }
        }
        vectors.push(BiasVectorEntry {
            pico: p,
            v_db: v,
            v_r_db: v_r,
            v_o_db: v_o,
        });
    }

    let matrix = BiasMatrix::from_rows(&rows, cfg.v_max_db)?;
    Ok(BiasAssignment { matrix, vectors })
}
