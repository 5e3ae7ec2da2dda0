//! Cell Individual Offset algebra: the A3 entering condition, effective
//! hysteresis, and the bias matrix representation.
//!
//! The A3 event entering condition for serving cell `p` and neighbor `n` is
//!
//! ```text
//! M_n + O_cn - H_ys > M_p + O_cp + O_ff
//! ```
//!
//! With the bias matrix convention `b[p][n] = O_cn(p, n)` for `p != n` and
//! `b[p][p] = O_cp(p)` (row = broadcasting cell), the condition simplifies
//! to `M_n > M_p + H_e1` where the effective hysteresis is
//! `H_e1 = H_g + b[p][p] - b[p][n]` and `H_g = O_ff + H_ys` is the global
//! hysteresis.

mod assign;
mod neighbors;
mod optimize;

pub use assign::{assign_bias_matrix, AssignConfig, BiasAssignment, BiasVectorEntry};
pub use neighbors::{derive_neighbor_sets, NeighborParams, NeighborSets, PicoNeighbors};
pub use optimize::{optimize_pico_bias, pico_area_targets, BiasFit};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::CellId;

/// Maximum number of per-neighbor CIO entries a cell may broadcast.
pub const MAX_CIO_NEIGHBORS: usize = 32;

#[derive(Debug, Error)]
pub enum BiasError {
    #[error("serving and neighbor cell are the same (cell {0})")]
    SelfPair(CellId),
    #[error("bias entry b[{row}][{col}] = {value} dB exceeds the clamp |b| <= {v_max} dB")]
    EntryOutOfRange {
        row: CellId,
        col: CellId,
        value: f64,
        v_max: f64,
    },
    #[error("row {row} has {count} nonzero neighbor offsets, more than the {MAX_CIO_NEIGHBORS} allowed; enable global retaining bias to compress the row")]
    RowLimitExceeded { row: CellId, count: usize },
    #[error("bias matrix is {actual}x{actual} but {expected} cells are defined")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix rows have inconsistent lengths")]
    RaggedRows,
    #[error("cell {0} out of range for a {1}x{1} bias matrix")]
    CellOutOfRange(CellId, usize),
    #[error("failed to parse bias matrix: {0}")]
    Parse(String),
}

/// Measurement and trigger parameters of the A3 machinery.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MobilityParams {
    /// A3 hysteresis `H_ys` in dB.
    pub hys_db: f64,
    /// A3 offset `O_ff` in dB.
    pub off_db: f64,
    /// L3 filter coefficient; the filter weight is `a = (1/2)^(K/4)`.
    pub k: u32,
    /// Time-to-trigger in ms.
    pub ttt_ms: u64,
    /// Measurement sample interval in ms.
    pub sample_interval_ms: u64,
}

impl Default for MobilityParams {
    fn default() -> Self {
        MobilityParams {
            hys_db: 0.5,
            off_db: 0.0,
            k: 4,
            ttt_ms: 320,
            sample_interval_ms: 200,
        }
    }
}

impl MobilityParams {
    /// Global hysteresis `H_g = O_ff + H_ys`: every non-CIO term of the
    /// effective hysteresis.
    pub fn h_g_db(&self) -> f64 {
        self.off_db + self.hys_db
    }

    /// L3 filter weight `a = (1/2)^(K/4)`, in (0, 1].
    pub fn filter_a(&self) -> f64 {
        0.5f64.powf(self.k as f64 / 4.0)
    }
}

/// N x N matrix of CIO values in dB. Row `i` holds what cell `i`
/// broadcasts: `b[i][j]` is the per-neighbor offset `O_cn(i, j)` and the
/// diagonal `b[i][i]` is the serving-cell offset `O_cp(i)`.
///
/// Immutable after construction; construction enforces the `|b| <= v_max`
/// clamp and the 32-neighbor row limit.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasMatrix {
    n: usize,
    v_max_db: f64,
    entries: Vec<f64>,
}

impl BiasMatrix {
    /// Default bias clamp in dB.
    pub const DEFAULT_V_MAX_DB: f64 = 5.0;

    pub fn zero(n: usize, v_max_db: f64) -> BiasMatrix {
        BiasMatrix {
            n,
            v_max_db,
            entries: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>], v_max_db: f64) -> Result<BiasMatrix, BiasError> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(BiasError::RaggedRows);
            }
            entries.extend_from_slice(row);
        }
        let m = BiasMatrix {
            n,
            v_max_db,
            entries,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn v_max_db(&self) -> f64 {
        self.v_max_db
    }

    #[inline]
    pub fn get(&self, row: CellId, col: CellId) -> f64 {
        self.entries[row * self.n + col]
    }

    pub fn row(&self, row: CellId) -> &[f64] {
        &self.entries[row * self.n..(row + 1) * self.n]
    }

    pub fn row_nonzero_neighbors(&self, row: CellId) -> usize {
        self.row(row)
            .iter()
            .enumerate()
            .filter(|(col, v)| *col != row && **v != 0.0)
            .count()
    }

    pub fn validate(&self) -> Result<(), BiasError> {
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j);
                if !v.is_finite() || v.abs() > self.v_max_db + 1e-9 {
                    return Err(BiasError::EntryOutOfRange {
                        row: i,
                        col: j,
                        value: v,
                        v_max: self.v_max_db,
                    });
                }
            }
            let count = self.row_nonzero_neighbors(i);
            if count > MAX_CIO_NEIGHBORS {
                return Err(BiasError::RowLimitExceeded { row: i, count });
            }
        }
        Ok(())
    }

    /// CSV form: N rows of N comma-separated dB values.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, v_max_db: f64) -> Result<BiasMatrix, BiasError> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse()).collect();
            rows.push(row.map_err(|e| {
                BiasError::Parse(format!("line {}: {}", lineno + 1, e))
            })?);
        }
        BiasMatrix::from_rows(&rows, v_max_db)
    }

    /// Structured text keyed by broadcaster cell id.
    pub fn to_keyed_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("v_max_db = {}\n\n[rows]\n", self.v_max_db));
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            out.push_str(&format!("cell_{i} = [{}]\n", row.join(", ")));
        }
        out
    }

    pub fn from_keyed_text(text: &str) -> Result<BiasMatrix, BiasError> {
        #[derive(Deserialize)]
        struct Keyed {
            v_max_db: f64,
            rows: std::collections::BTreeMap<String, Vec<f64>>,
        }
        let keyed: Keyed =
            toml::from_str(text).map_err(|e| BiasError::Parse(e.to_string()))?;
        let n = keyed.rows.len();
        let mut rows = vec![Vec::new(); n];
        for (key, row) in keyed.rows {
            let id: usize = key
                .strip_prefix("cell_")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| BiasError::Parse(format!("bad row key `{key}`")))?;
            if id >= n {
                return Err(BiasError::CellOutOfRange(id, n));
            }
            rows[id] = row;
        }
        BiasMatrix::from_rows(&rows, keyed.v_max_db)
    }
}

/// Effective hysteresis `H_e1 = H_g + b[p][p] - b[p][n]` for serving cell
/// `p` and neighbor `n`: the margin by which `M_n` must exceed `M_p` to
/// enter the A3 condition.
pub fn effective_hysteresis(
    bias: &BiasMatrix,
    h_g_db: f64,
    p: CellId,
    n: CellId,
) -> Result<f64, BiasError> {
    if p == n {
        return Err(BiasError::SelfPair(p));
    }
    if p >= bias.n() || n >= bias.n() {
        return Err(BiasError::CellOutOfRange(p.max(n), bias.n()));
    }
    Ok(h_e1(bias, h_g_db, p, n))
}

#[inline]
pub(crate) fn h_e1(bias: &BiasMatrix, h_g_db: f64, p: CellId, n: CellId) -> f64 {
    h_g_db + bias.get(p, p) - bias.get(p, n)
}

/// A3 event entering condition on measurements `M_n` (neighbor) and `M_p`
/// (serving), both dBm: true iff `M_n > M_p + H_e1(p, n)`. Strict
/// inequality; equality does not trigger.
#[inline]
pub fn a3_entering(
    m_n_dbm: f64,
    m_p_dbm: f64,
    bias: &BiasMatrix,
    h_g_db: f64,
    p: CellId,
    n: CellId,
) -> bool {
    assert!(p != n, "a3_entering requires distinct serving and neighbor");
    m_n_dbm > m_p_dbm + h_e1(bias, h_g_db, p, n)
}
