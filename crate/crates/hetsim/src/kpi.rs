//! KPI aggregation: handover failure rates, call-drop probability,
//! handover rate, time-of-stay statistics, race and ping-pong rates, edge
//! SINR loss, and driving distance per cell type, reported per handover
//! leg type (MM, MP, PM, PP).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mobility::{DwellEnd, EventKind, EventLog, SinrSample};
use crate::network::CellKind;

#[derive(Debug, Error)]
pub enum KpiError {
    #[error("event log is empty")]
    EmptyLog,
    #[error("report table is malformed: {0}")]
    Table(String),
}

/// Handover leg type, determined solely by the serving and target cell
/// kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HoType {
    /// macro to macro
    Mm,
    /// macro to pico
    Mp,
    /// pico to macro
    Pm,
    /// pico to pico
    Pp,
}

impl HoType {
    pub const ALL: [HoType; 4] = [HoType::Mm, HoType::Mp, HoType::Pm, HoType::Pp];

    pub fn label(&self) -> &'static str {
        match self {
            HoType::Mm => "MM",
            HoType::Mp => "MP",
            HoType::Pm => "PM",
            HoType::Pp => "PP",
        }
    }

    fn index(&self) -> usize {
        match self {
            HoType::Mm => 0,
            HoType::Mp => 1,
            HoType::Pm => 2,
            HoType::Pp => 3,
        }
    }
}

pub fn classify_handover_type(from: CellKind, to: CellKind) -> HoType {
    match (from, to) {
        (CellKind::Macro, CellKind::Macro) => HoType::Mm,
        (CellKind::Macro, CellKind::Pico) => HoType::Mp,
        (CellKind::Pico, CellKind::Macro) => HoType::Pm,
        (CellKind::Pico, CellKind::Pico) => HoType::Pp,
    }
}

/// Probability (percent) of at least one drop over a 100 s call at a
/// Poisson drop rate of `rate_per_s`: `100 (1 - exp(-100 rate))`. A rate
/// of 1e-4/s maps to the familiar 1%-per-100 s target (0.995%).
pub fn prob_100s_call_drop(rate_per_s: f64) -> f64 {
    100.0 * (1.0 - (-rate_per_s * 100.0).exp())
}

/// Counters and derived rates for one handover leg type (or for all).
/// Rates are `None` when the type saw no attempts; the export renders
/// those as `-`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TypeKpis {
    pub attempts: u64,
    pub failures: u64,
    pub successes: u64,
    /// Dropped calls attributed to this leg type (handover failures, plus
    /// standalone radio link failures in the `All` bucket).
    pub drops: u64,
    pub fail_rate_pct: Option<f64>,
    pub ho_per_100s: Option<f64>,
    pub drop_prob_pct: Option<f64>,
    pub short_stay_pct: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TosStats {
    pub median_s: Option<f64>,
    pub p5_s: Option<f64>,
    pub mean_s: Option<f64>,
}

/// Run identification carried into the report columns.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub label: String,
    pub picos: usize,
    pub is_abs: bool,
    pub mro_type: String,
    pub max_cio_db: Option<f64>,
    pub tos_threshold_ms: u64,
    pub race_threshold_ms: u64,
    /// Convention notes, e.g. the per-type Poisson drop conversion.
    pub notes: String,
}

/// Aggregated KPI suite of one simulation run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KpiReport {
    pub meta: RunMeta,
    pub all: TypeKpis,
    pub per_type: Vec<TypeKpis>,
    pub tos: TosStats,
    /// Share of dwells below the race threshold.
    pub race_event_rate_pct: Option<f64>,
    /// Share of successful handovers that return to the previous cell
    /// within the short-stay threshold.
    pub pingpong_rate_pct: Option<f64>,
    /// 5th-percentile SINR of the unbiased strongest server minus that of
    /// the actual server.
    pub edge_sinr_loss_db: Option<f64>,
    pub distance_km_macro: f64,
    pub distance_km_pico: f64,
    pub connected_s: f64,
}

impl KpiReport {
    pub fn of_type(&self, t: HoType) -> &TypeKpis {
        &self.per_type[t.index()]
    }
}

/// Everything `compute_kpis` needs beyond the log itself.
#[derive(Debug, Clone)]
pub struct KpiContext {
    pub kinds: Vec<CellKind>,
    /// Distance traveled per connected sample.
    pub step_m: f64,
    pub label: String,
    pub is_abs: bool,
    pub mro_type: String,
    pub max_cio_db: Option<f64>,
}

/// Nearest-rank percentile of an ascending-sorted slice.
fn percentile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((q / 100.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Aggregate an event log into the KPI report. Pure function of its
/// inputs; recomputation is bit-identical.
pub fn compute_kpis(
    log: &EventLog,
    tos_threshold_ms: u64,
    race_threshold_ms: u64,
    sinr: &[SinrSample],
    ctx: &KpiContext,
) -> Result<KpiReport, KpiError> {
    if log.events.is_empty() && sinr.is_empty() {
        return Err(KpiError::EmptyLog);
    }
    let mut per_type = vec![TypeKpis::default(); 4];
    let mut all = TypeKpis::default();
    let mut standalone_drops = 0u64;
    let mut dwell_all: Vec<u64> = Vec::new();
    let mut dwell_by_type: Vec<Vec<u64>> = vec![Vec::new(); 4];
    let mut connected_ms = 0u64;

    for e in &log.events {
        match e.kind {
            EventKind::HandoverAttempt { ho_type, .. } => {
                per_type[ho_type.index()].attempts += 1;
                all.attempts += 1;
            }
            EventKind::HandoverSuccess { ho_type, .. } => {
                per_type[ho_type.index()].successes += 1;
                all.successes += 1;
            }
            EventKind::HandoverFailure { ho_type, .. } => {
                per_type[ho_type.index()].failures += 1;
                per_type[ho_type.index()].drops += 1;
                all.failures += 1;
                all.drops += 1;
            }
            EventKind::Rlf {
                during_handover, ..
            } => {
                if during_handover.is_none() {
                    standalone_drops += 1;
                    all.drops += 1;
                }
            }
            EventKind::Dwell {
                tos_ms, ended_by, ..
            } => {
                connected_ms += tos_ms;
                match ended_by {
                    DwellEnd::Handover(t) => {
                        dwell_all.push(tos_ms);
                        dwell_by_type[t.index()].push(tos_ms);
                    }
                    DwellEnd::Rlf => dwell_all.push(tos_ms),
                    DwellEnd::SimEnd => {}
                }
            }
            EventKind::Reestablish { .. } => {}
        }
    }

    let connected_s = connected_ms as f64 / 1000.0;
    let finish = |k: &mut TypeKpis, dwells: &[u64]| {
        if k.attempts == 0 {
            return;
        }
        k.fail_rate_pct = Some(100.0 * k.failures as f64 / k.attempts as f64);
        if connected_s > 0.0 {
            k.ho_per_100s = Some(100.0 * k.successes as f64 / connected_s);
            k.drop_prob_pct = Some(prob_100s_call_drop(k.drops as f64 / connected_s));
        }
        if !dwells.is_empty() {
            let short = dwells.iter().filter(|d| **d < tos_threshold_ms).count();
            k.short_stay_pct = Some(100.0 * short as f64 / dwells.len() as f64);
        }
    };
    for t in HoType::ALL {
        let dwells = std::mem::take(&mut dwell_by_type[t.index()]);
        finish(&mut per_type[t.index()], &dwells);
    }
    finish(&mut all, &dwell_all);
    // Standalone link drops count toward the overall drop probability even
    // when no handover was in flight.
    if (all.attempts > 0 || standalone_drops > 0) && connected_s > 0.0 {
        all.drop_prob_pct = Some(prob_100s_call_drop(all.drops as f64 / connected_s));
    }

    let mut tos_sorted: Vec<f64> = dwell_all.iter().map(|d| *d as f64 / 1000.0).collect();
    tos_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tos = TosStats {
        median_s: percentile(&tos_sorted, 50.0),
        p5_s: percentile(&tos_sorted, 5.0),
        mean_s: if tos_sorted.is_empty() {
            None
        } else {
            Some(tos_sorted.iter().sum::<f64>() / tos_sorted.len() as f64)
        },
    };
    let race_event_rate_pct = if dwell_all.is_empty() {
        None
    } else {
        let races = dwell_all.iter().filter(|d| **d < race_threshold_ms).count();
        Some(100.0 * races as f64 / dwell_all.len() as f64)
    };

    let pingpong_rate_pct = pingpong_rate(log, tos_threshold_ms);

    let edge_sinr_loss_db = {
        let mut actual: Vec<f64> = sinr.iter().map(|s| s.sinr_db).collect();
        let mut ideal: Vec<f64> = sinr.iter().map(|s| s.ideal_sinr_db).collect();
        actual.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ideal.sort_by(|a, b| a.partial_cmp(b).unwrap());
        match (percentile(&ideal, 5.0), percentile(&actual, 5.0)) {
            (Some(i), Some(a)) => Some(i - a),
            _ => None,
        }
    };

    let mut dist_macro_m = 0.0;
    let mut dist_pico_m = 0.0;
    for s in sinr {
        if s.t_ms == 0 {
            continue; // no travel before the first sample
        }
        match s.serving_kind {
            CellKind::Macro => dist_macro_m += ctx.step_m,
            CellKind::Pico => dist_pico_m += ctx.step_m,
        }
    }

    Ok(KpiReport {
        meta: RunMeta {
            label: ctx.label.clone(),
            picos: ctx.kinds.iter().filter(|k| **k == CellKind::Pico).count(),
            is_abs: ctx.is_abs,
            mro_type: ctx.mro_type.clone(),
            max_cio_db: ctx.max_cio_db,
            tos_threshold_ms,
            race_threshold_ms,
            notes: "per-type drop probability uses the same Poisson 100 s conversion as the overall rate".to_string(),
        },
        all,
        per_type,
        tos,
        race_event_rate_pct,
        pingpong_rate_pct,
        edge_sinr_loss_db,
        distance_km_macro: dist_macro_m / 1000.0,
        distance_km_pico: dist_pico_m / 1000.0,
        connected_s,
    })
}

/// Share of successful handovers that return to the cell the UE came from
/// within the short-stay threshold. Chains break at link drops.
fn pingpong_rate(log: &EventLog, threshold_ms: u64) -> Option<f64> {
    let mut prev_from: Vec<Option<usize>> = vec![None; log.n_ues.max(1)];
    let mut last_success: Vec<Option<(u64, usize, usize)>> = vec![None; log.n_ues.max(1)];
    let mut pingpongs = 0u64;
    let mut successes = 0u64;
    for e in &log.events {
        if e.ue >= prev_from.len() {
            prev_from.resize(e.ue + 1, None);
            last_success.resize(e.ue + 1, None);
        }
        match e.kind {
            EventKind::HandoverSuccess { from, to, .. } => {
                successes += 1;
                last_success[e.ue] = Some((e.t_ms, from, to));
            }
            EventKind::Dwell { cell, tos_ms, .. } => {
                // The dwell record for `from` lands at the same instant as
                // the success that ended it.
                if let Some((t, from, to)) = last_success[e.ue] {
                    if t == e.t_ms && cell == from {
                        if prev_from[e.ue] == Some(to) && tos_ms < threshold_ms {
                            pingpongs += 1;
                        }
                        prev_from[e.ue] = Some(from);
                        last_success[e.ue] = None;
                    }
                }
            }
            EventKind::Rlf { .. } | EventKind::Reestablish { .. } => {
                prev_from[e.ue] = None;
                last_success[e.ue] = None;
            }
            _ => {}
        }
    }
    if successes == 0 {
        None
    } else {
        Some(100.0 * pingpongs as f64 / successes as f64)
    }
}

/// Time-of-stay histogram CSV `(bin_ms, count)` over complete dwells.
pub fn tos_histogram_csv(log: &EventLog, bin_ms: u64) -> String {
    let mut counts: std::collections::BTreeMap<u64, u64> = std::collections::BTreeMap::new();
    for e in &log.events {
        if let EventKind::Dwell {
            tos_ms, ended_by, ..
        } = e.kind
        {
            if ended_by != DwellEnd::SimEnd {
                *counts.entry(tos_ms / bin_ms.max(1) * bin_ms.max(1)).or_insert(0) += 1;
            }
        }
    }
    let mut out = String::from("bin_ms,count\n");
    for (bin, count) in counts {
        out.push_str(&format!("{bin},{count}\n"));
    }
    out
}

// ---------------------------------------------------------------------------
// Report table export / import
// ---------------------------------------------------------------------------

/// Rendered report: fixed row labels, one value column per run. Exports
/// losslessly to CSV and JSON; absent values render as `-`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub rows: Vec<String>,
    pub columns: Vec<ReportColumn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportColumn {
    pub label: String,
    pub values: Vec<String>,
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v}"),
        None => "-".to_string(),
    }
}

/// Row labels of the report table; the time-of-stay threshold is baked
/// into the short-stay row labels.
pub fn report_row_labels(tos_threshold_ms: u64) -> Vec<String> {
    let mut rows = vec![
        "Picos".to_string(),
        "isABS".to_string(),
        "MROtype".to_string(),
        "maxCIO".to_string(),
    ];
    for group in ["HO Event Fail Rate (%)", "Prob(100sCallDrop) (%)", "HO/100s"] {
        for t in ["All", "MM", "PM", "MP", "PP"] {
            rows.push(format!("{group} {t}"));
        }
    }
    for t in ["All", "MM", "PM", "MP", "PP"] {
        rows.push(format!("Prob(TOS<{tos_threshold_ms}ms) (%) {t}"));
    }
    rows.push("Median TOS(s) All".to_string());
    rows.push("5thPC TOS(s) All".to_string());
    rows.push("Mean TOS(s) All".to_string());
    rows.push("Race Event Rate (%) All".to_string());
    rows.push("Ping-Pong Rate (%) All".to_string());
    rows.push("Edge SINR Loss (dB) All".to_string());
    rows.push("Distance (km) Macro".to_string());
    rows.push("Distance (km) Pico".to_string());
    rows
}

/// Render reports side by side. All reports must share the same
/// time-of-stay threshold (the row set depends on it).
pub fn build_report_table(reports: &[KpiReport]) -> Result<ReportTable, KpiError> {
    if reports.is_empty() {
        return Err(KpiError::Table("no reports given".to_string()));
    }
    let threshold = reports[0].meta.tos_threshold_ms;
    if reports.iter().any(|r| r.meta.tos_threshold_ms != threshold) {
        return Err(KpiError::Table(
            "reports use different short-stay thresholds".to_string(),
        ));
    }
    let rows = report_row_labels(threshold);
    let mut columns = Vec::with_capacity(reports.len());
    for r in reports {
        let mut v: Vec<String> = Vec::with_capacity(rows.len());
        v.push(format!("{}", r.meta.picos));
        v.push(if r.meta.is_abs { "1" } else { "0" }.to_string());
        v.push(if r.meta.mro_type.is_empty() {
            "NA".to_string()
        } else {
            r.meta.mro_type.clone()
        });
        v.push(fmt_opt(r.meta.max_cio_db));
        let order = [
            None,
            Some(HoType::Mm),
            Some(HoType::Pm),
            Some(HoType::Mp),
            Some(HoType::Pp),
        ];
        let pick = |r: &KpiReport, t: &Option<HoType>| -> TypeKpis {
            match t {
                None => r.all.clone(),
                Some(t) => r.of_type(*t).clone(),
            }
        };
        for t in &order {
            v.push(fmt_opt(pick(r, t).fail_rate_pct));
        }
        for t in &order {
            v.push(fmt_opt(pick(r, t).drop_prob_pct));
        }
        for t in &order {
            v.push(fmt_opt(pick(r, t).ho_per_100s));
        }
        for t in &order {
            v.push(fmt_opt(pick(r, t).short_stay_pct));
        }
        v.push(fmt_opt(r.tos.median_s));
        v.push(fmt_opt(r.tos.p5_s));
        v.push(fmt_opt(r.tos.mean_s));
        v.push(fmt_opt(r.race_event_rate_pct));
        v.push(fmt_opt(r.pingpong_rate_pct));
        v.push(fmt_opt(r.edge_sinr_loss_db));
        v.push(format!("{}", r.distance_km_macro));
        v.push(format!("{}", r.distance_km_pico));
        columns.push(ReportColumn {
            label: if r.meta.label.is_empty() {
                r.meta.mro_type.clone()
            } else {
                r.meta.label.clone()
            },
            values: v,
        });
    }
    Ok(ReportTable { rows, columns })
}

impl ReportTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric");
        for c in &self.columns {
            out.push(',');
            out.push_str(&c.label);
        }
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(row);
            for c in &self.columns {
                out.push(',');
                out.push_str(&c.values[i]);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<ReportTable, KpiError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| KpiError::Table("empty".into()))?;
        let labels: Vec<&str> = header.split(',').collect();
        if labels.is_empty() || labels[0] != "metric" {
            return Err(KpiError::Table("missing `metric` header".to_string()));
        }
        let mut rows = Vec::new();
        let mut columns: Vec<ReportColumn> = labels[1..]
            .iter()
            .map(|l| ReportColumn {
                label: l.to_string(),
                values: Vec::new(),
            })
            .collect();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns.len() + 1 {
                return Err(KpiError::Table(format!(
                    "row `{}` has {} fields, expected {}",
                    fields[0],
                    fields.len(),
                    columns.len() + 1
                )));
            }
            rows.push(fields[0].to_string());
            for (c, f) in columns.iter_mut().zip(&fields[1..]) {
                c.values.push(f.to_string());
            }
        }
        Ok(ReportTable { rows, columns })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report table serializes")
    }

    pub fn from_json(text: &str) -> Result<ReportTable, KpiError> {
        serde_json::from_str(text).map_err(|e| KpiError::Table(e.to_string()))
    }
}
