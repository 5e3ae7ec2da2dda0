//! Simulation event log and its CSV form.

use thiserror::Error;

use crate::kpi::HoType;
use crate::network::{CellId, CellKind};

#[derive(Debug, Error)]
pub enum EventLogError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// What ended a dwell on a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DwellEnd {
    Handover(HoType),
    Rlf,
    /// Run ended while still connected; partial record.
    SimEnd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    HandoverAttempt {
        from: CellId,
        to: CellId,
        ho_type: HoType,
    },
    HandoverSuccess {
        from: CellId,
        to: CellId,
        ho_type: HoType,
    },
    HandoverFailure {
        from: CellId,
        to: CellId,
        ho_type: HoType,
    },
    /// Radio link failure; `during_handover` carries the leg type when the
    /// drop happened while executing a handover.
    Rlf {
        cell: CellId,
        during_handover: Option<HoType>,
    },
    Reestablish {
        cell: CellId,
    },
    Dwell {
        cell: CellId,
        tos_ms: u64,
        ended_by: DwellEnd,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t_ms: u64,
    pub ue: usize,
    pub kind: EventKind,
}

/// One connected measurement sample: the serving-cell SINR and, for the
/// edge-SINR-loss KPI, the SINR the UE would have had on the unbiased
/// strongest cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrSample {
    pub t_ms: u64,
    pub ue: usize,
    pub serving: CellId,
    pub serving_kind: CellKind,
    pub sinr_db: f64,
    pub ideal_server: CellId,
    pub ideal_kind: CellKind,
    pub ideal_sinr_db: f64,
}

/// Full log of one simulation run, merged over UEs in (time, UE) order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    pub events: Vec<Event>,
    pub sinr: Vec<SinrSample>,
    pub n_ues: usize,
}

fn ho_type_str(t: HoType) -> &'static str {
    match t {
        HoType::Mm => "MM",
        HoType::Mp => "MP",
        HoType::Pm => "PM",
        HoType::Pp => "PP",
    }
}

fn parse_ho_type(s: &str) -> Option<HoType> {
    match s {
        "MM" => Some(HoType::Mm),
        "MP" => Some(HoType::Mp),
        "PM" => Some(HoType::Pm),
        "PP" => Some(HoType::Pp),
        _ => None,
    }
}

impl EventLog {
    /// CSV export with the fixed column set
    /// `t_ms,ue_id,event,from_cell,to_cell,ho_type,tos_ms,sinr_db`.
    /// Events and SINR samples are interleaved in time order; samples
    /// occupy two rows (`sinr` for the serving cell, `sinr_ideal` for the
    /// unbiased strongest cell).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_ms,ue_id,event,from_cell,to_cell,ho_type,tos_ms,sinr_db\n");
        let mut ei = 0usize;
        let mut si = 0usize;
        // Merge the two streams on (t, ue); events first at equal keys.
        while ei < self.events.len() || si < self.sinr.len() {
            let take_event = match (self.events.get(ei), self.sinr.get(si)) {
                (Some(e), Some(s)) => (e.t_ms, e.ue) <= (s.t_ms, s.ue),
                (Some(_), None) => true,
                (None, _) => false,
            };
            if take_event {
                let e = &self.events[ei];
                ei += 1;
                let (name, from, to, ho, tos): (
                    &str,
                    Option<CellId>,
                    Option<CellId>,
                    String,
                    Option<u64>,
                ) = match e.kind {
                    EventKind::HandoverAttempt { from, to, ho_type } => {
                        ("attempt", Some(from), Some(to), ho_type_str(ho_type).into(), None)
                    }
                    EventKind::HandoverSuccess { from, to, ho_type } => {
                        ("success", Some(from), Some(to), ho_type_str(ho_type).into(), None)
                    }
                    EventKind::HandoverFailure { from, to, ho_type } => {
                        ("failure", Some(from), Some(to), ho_type_str(ho_type).into(), None)
                    }
                    EventKind::Rlf {
                        cell,
                        during_handover,
                    } => (
                        "rlf",
                        Some(cell),
                        None,
                        during_handover.map(ho_type_str).unwrap_or("").into(),
                        None,
                    ),
                    EventKind::Reestablish { cell } => {
                        ("reestablish", None, Some(cell), String::new(), None)
                    }
                    EventKind::Dwell {
                        cell,
                        tos_ms,
                        ended_by,
                    } => {
                        let end = match ended_by {
                            DwellEnd::Handover(t) => ho_type_str(t).to_string(),
                            DwellEnd::Rlf => "rlf".to_string(),
                            DwellEnd::SimEnd => "end".to_string(),
                        };
                        ("dwell", Some(cell), None, end, Some(tos_ms))
                    }
                };
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},\n",
                    e.t_ms,
                    e.ue,
                    name,
                    from.map(|c| c.to_string()).unwrap_or_default(),
                    to.map(|c| c.to_string()).unwrap_or_default(),
                    ho,
                    tos.map(|t| t.to_string()).unwrap_or_default(),
                ));
            } else {
                let s = &self.sinr[si];
                si += 1;
                out.push_str(&format!(
                    "{},{},sinr,{},{},,,{}\n",
                    s.t_ms, s.ue, s.serving, s.ideal_server, s.sinr_db
                ));
                out.push_str(&format!(
                    "{},{},sinr_ideal,{},,,,{}\n",
                    s.t_ms, s.ue, s.ideal_server, s.ideal_sinr_db
                ));
            }
        }
        out
    }

    /// Parse the CSV form back. Cell kinds are needed to re-attach kind
    /// information to SINR samples.
    pub fn from_csv(text: &str, kinds: &[CellKind]) -> Result<EventLog, EventLogError> {
        let mut log = EventLog::default();
        let mut pending: Option<SinrSample> = None;
        for (i, line) in text.lines().enumerate() {
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let err = |msg: &str| EventLogError::Parse {
                line: i + 1,
                msg: msg.to_string(),
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 8 {
                return Err(err(&format!("expected 8 fields, got {}", fields.len())));
            }
            let t_ms: u64 = fields[0].parse().map_err(|_| err("bad t_ms"))?;
            let ue: usize = fields[1].parse().map_err(|_| err("bad ue_id"))?;
            let parse_cell = |f: &str| -> Result<CellId, EventLogError> {
                f.parse().map_err(|_| err("bad cell id"))
            };
            log.n_ues = log.n_ues.max(ue + 1);
            match fields[2] {
                "attempt" | "success" | "failure" => {
                    let from = parse_cell(fields[3])?;
                    let to = parse_cell(fields[4])?;
                    let ho_type = parse_ho_type(fields[5]).ok_or_else(|| err("bad ho_type"))?;
                    let kind = match fields[2] {
                        "attempt" => EventKind::HandoverAttempt { from, to, ho_type },
                        "success" => EventKind::HandoverSuccess { from, to, ho_type },
                        _ => EventKind::HandoverFailure { from, to, ho_type },
                    };
                    log.events.push(Event { t_ms, ue, kind });
                }
                "rlf" => {
                    let cell = parse_cell(fields[3])?;
                    let during = if fields[5].is_empty() {
                        None
                    } else {
                        Some(parse_ho_type(fields[5]).ok_or_else(|| err("bad ho_type"))?)
                    };
                    log.events.push(Event {
                        t_ms,
                        ue,
                        kind: EventKind::Rlf {
                            cell,
                            during_handover: during,
                        },
                    });
                }
                "reestablish" => {
                    let cell = parse_cell(fields[4])?;
                    log.events.push(Event {
                        t_ms,
                        ue,
                        kind: EventKind::Reestablish { cell },
                    });
                }
                "dwell" => {
                    let cell = parse_cell(fields[3])?;
                    let tos_ms: u64 = fields[6].parse().map_err(|_| err("bad tos_ms"))?;
                    let ended_by = match fields[5] {
                        "rlf" => DwellEnd::Rlf,
                        "end" => DwellEnd::SimEnd,
                        s => DwellEnd::Handover(
                            parse_ho_type(s).ok_or_else(|| err("bad dwell end"))?,
                        ),
                    };
                    log.events.push(Event {
                        t_ms,
                        ue,
                        kind: EventKind::Dwell {
                            cell,
                            tos_ms,
                            ended_by,
                        },
                    });
                }
                "sinr" => {
                    let serving = parse_cell(fields[3])?;
                    let ideal = parse_cell(fields[4])?;
                    let sinr: f64 = fields[7].parse().map_err(|_| err("bad sinr"))?;
                    pending = Some(SinrSample {
                        t_ms,
                        ue,
                        serving,
                        serving_kind: kinds[serving],
                        sinr_db: sinr,
                        ideal_server: ideal,
                        ideal_kind: kinds[ideal],
                        ideal_sinr_db: f64::NAN,
                    });
                }
                "sinr_ideal" => {
                    let mut sample = pending.take().ok_or_else(|| err("orphan sinr_ideal"))?;
                    let sinr: f64 = fields[7].parse().map_err(|_| err("bad sinr"))?;
                    sample.ideal_sinr_db = sinr;
                    log.sinr.push(sample);
                }
                other => return Err(err(&format!("unknown event `{other}`"))),
            }
        }
        if pending.is_some() {
            return Err(EventLogError::Parse {
                line: 0,
                msg: "sinr row without matching sinr_ideal".to_string(),
            });
        }
        Ok(log)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let kinds = vec![CellKind::Pico, CellKind::Macro];
        let log = EventLog {
            events: vec![
                Event {
                    t_ms: 200,
                    ue: 0,
                    kind: EventKind::HandoverAttempt {
                        from: 1,
                        to: 0,
                        ho_type: HoType::Mp,
                    },
                },
                Event {
                    t_ms: 200,
                    ue: 0,
                    kind: EventKind::HandoverSuccess {
                        from: 1,
                        to: 0,
                        ho_type: HoType::Mp,
                    },
                },
                Event {
                    t_ms: 200,
                    ue: 0,
                    kind: EventKind::Dwell {
                        cell: 1,
                        tos_ms: 200,
                        ended_by: DwellEnd::Handover(HoType::Mp),
                    },
                },
                Event {
                    t_ms: 600,
                    ue: 1,
                    kind: EventKind::Rlf {
                        cell: 0,
                        during_handover: None,
                    },
                },
                Event {
                    t_ms: 1600,
                    ue: 1,
                    kind: EventKind::Reestablish { cell: 1 },
                },
                Event {
                    t_ms: 2000,
                    ue: 1,
                    kind: EventKind::Dwell {
                        cell: 1,
                        tos_ms: 400,
                        ended_by: DwellEnd::SimEnd,
                    },
                },
            ],
            sinr: vec![SinrSample {
                t_ms: 0,
                ue: 0,
                serving: 1,
                serving_kind: CellKind::Macro,
                sinr_db: 12.5,
                ideal_server: 1,
                ideal_kind: CellKind::Macro,
                ideal_sinr_db: 12.5,
            }],
            n_ues: 2,
        };
        let csv = log.to_csv();
        let back = EventLog::from_csv(&csv, &kinds).unwrap();
        assert_eq!(back.events, log.events);
        assert_eq!(back.sinr.len(), 1);
        assert_eq!(back.sinr[0].sinr_db, 12.5);
        assert_eq!(back.n_ues, 2);
    }

    #[test]
    fn csv_header_is_stable() {
        let log = EventLog::default();
        assert!(log
            .to_csv()
            .starts_with("t_ms,ue_id,event,from_cell,to_cell,ho_type,tos_ms,sinr_db"));
    }

    #[test]
    fn bad_rows_give_line_numbers() {
        let kinds = vec![CellKind::Macro];
        let text = "t_ms,ue_id,event,from_cell,to_cell,ho_type,tos_ms,sinr_db\nnot_a_number,0,rlf,0,,,,\n";
        match EventLog::from_csv(text, &kinds) {
            Err(EventLogError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
