//! The per-UE handover state machine and the simulation driver.

use thiserror::Error;

use super::{
    build_trajectory, l3_filter_step, sinr_db, AbsConfig, DwellEnd, Event, EventKind, EventLog,
    RlfConfig, SinrSample, Subframe, TrajectoryError,
};
use crate::analysis::candidates_including;
use crate::bias::{a3_entering, BiasMatrix, MobilityParams};
use crate::kpi::classify_handover_type;
use crate::network::{
    generate_shadow_field, unbiased_argmax, CellId, CellKind, Scenario, ShadowError, ShadowField,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("bias matrix is {bias}x{bias} but the scenario has {cells} cells")]
    BiasDimension { bias: usize, cells: usize },
    #[error("scenario has no routes")]
    NoRoutes,
    #[error("scenario requests zero UEs")]
    NoUes,
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Shadow(#[from] ShadowError),
}

/// Immutable per-run inputs of the UE state machine.
pub struct UeContext<'a> {
    pub bias: &'a BiasMatrix,
    pub params: &'a MobilityParams,
    pub abs: &'a AbsConfig,
    pub rlf: &'a RlfConfig,
    pub kinds: &'a [CellKind],
    pub candidate_window_db: f64,
    pub noise_dbm: f64,
}

impl UeContext<'_> {
    /// Subframe class a UE served by `cell` is scheduled in: protected
    /// when the serving cell is a pico and blanking is active.
    fn subframe_for(&self, cell: CellId) -> Subframe {
        if self.kinds[cell] == CellKind::Pico && self.abs.is_active() {
            Subframe::Protected
        } else {
            Subframe::Normal
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ConnState {
    Connected,
    HandoverExecuting {
        target: CellId,
        ho_type: crate::kpi::HoType,
        elapsed_ms: u64,
    },
    RadioLinkFailure {
        remaining_ms: u64,
    },
}

/// Per-UE connection state: serving cell, L3 filter bank, per-neighbor
/// time-to-trigger accumulators, and the dwell clock.
pub struct UeState {
    pub ue: usize,
    serving: CellId,
    filters: Vec<f64>,
    initialized: bool,
    ttt_acc_ms: Vec<u64>,
    conn: ConnState,
    dwell_ms: u64,
    below_qout_ms: u64,
}

impl UeState {
    pub fn new(ue: usize, n_cells: usize) -> UeState {
        UeState {
            ue,
            serving: 0,
            filters: vec![0.0; n_cells],
            initialized: false,
            ttt_acc_ms: vec![0; n_cells],
            conn: ConnState::Connected,
            dwell_ms: 0,
            below_qout_ms: 0,
        }
    }

    pub fn serving(&self) -> Option<CellId> {
        match self.conn {
            ConnState::RadioLinkFailure { .. } => None,
            _ => Some(self.serving),
        }
    }

    pub fn is_connected(&self) -> bool {
        !matches!(self.conn, ConnState::RadioLinkFailure { .. })
    }

    fn clear_triggers(&mut self) {
        self.ttt_acc_ms.iter_mut().for_each(|a| *a = 0);
    }

    fn drop_call(
        &mut self,
        t_ms: u64,
        during: Option<crate::kpi::HoType>,
        ctx: &UeContext,
        log: &mut EventLog,
    ) {
        log.events.push(Event {
            t_ms,
            ue: self.ue,
            kind: EventKind::Rlf {
                cell: self.serving,
                during_handover: during,
            },
        });
        log.events.push(Event {
            t_ms,
            ue: self.ue,
            kind: EventKind::Dwell {
                cell: self.serving,
                tos_ms: self.dwell_ms,
                ended_by: DwellEnd::Rlf,
            },
        });
        self.conn = ConnState::RadioLinkFailure {
            remaining_ms: ctx.rlf.outage_ms,
        };
        self.dwell_ms = 0;
        self.below_qout_ms = 0;
        self.clear_triggers();
    }

    fn complete_handover(
        &mut self,
        t_ms: u64,
        target: CellId,
        ho_type: crate::kpi::HoType,
        log: &mut EventLog,
    ) {
        log.events.push(Event {
            t_ms,
            ue: self.ue,
            kind: EventKind::HandoverSuccess {
                from: self.serving,
                to: target,
                ho_type,
            },
        });
        log.events.push(Event {
            t_ms,
            ue: self.ue,
            kind: EventKind::Dwell {
                cell: self.serving,
                tos_ms: self.dwell_ms,
                ended_by: DwellEnd::Handover(ho_type),
            },
        });
        self.serving = target;
        self.dwell_ms = 0;
        self.below_qout_ms = 0;
        self.clear_triggers();
        self.conn = ConnState::Connected;
    }

    /// Advance one measurement sample. `point_rsrp` holds the raw RSRP of
    /// every cell at the UE's current position.
    pub fn step(&mut self, t_ms: u64, point_rsrp: &[f64], ctx: &UeContext, log: &mut EventLog) {
        let dt = ctx.params.sample_interval_ms;
        if !self.initialized {
            // Initial attach on the strongest cell.
            self.filters.copy_from_slice(point_rsrp);
            self.serving = unbiased_argmax(point_rsrp);
            self.initialized = true;
            self.conn = ConnState::Connected;
            self.dwell_ms = 0;
        } else {
            let a = ctx.params.filter_a();
            for (f, m) in self.filters.iter_mut().zip(point_rsrp) {
                *f = l3_filter_step(*f, *m, a);
            }
            if let ConnState::RadioLinkFailure { remaining_ms } = &mut self.conn {
                // The past interval was spent in outage.
                if *remaining_ms > dt {
                    *remaining_ms -= dt;
                    return;
                }
                // Re-establish on the strongest cell.
                self.serving = unbiased_argmax(&self.filters);
                self.conn = ConnState::Connected;
                self.dwell_ms = 0;
                self.below_qout_ms = 0;
                self.clear_triggers();
                log.events.push(Event {
                    t_ms,
                    ue: self.ue,
                    kind: EventKind::Reestablish { cell: self.serving },
                });
                return;
            }
            self.dwell_ms += dt;
        }

        // Serving-link quality over the past interval, plus the SINR the
        // unbiased strongest server would have offered.
        let actual_sinr = sinr_db(
            point_rsrp,
            ctx.kinds,
            self.serving,
            ctx.abs,
            ctx.subframe_for(self.serving),
            ctx.noise_dbm,
        );
        let ideal_server = unbiased_argmax(point_rsrp);
        let ideal_sinr = sinr_db(
            point_rsrp,
            ctx.kinds,
            ideal_server,
            ctx.abs,
            ctx.subframe_for(ideal_server),
            ctx.noise_dbm,
        );
        log.sinr.push(SinrSample {
            t_ms,
            ue: self.ue,
            serving: self.serving,
            serving_kind: ctx.kinds[self.serving],
            sinr_db: actual_sinr,
            ideal_server,
            ideal_kind: ctx.kinds[ideal_server],
            ideal_sinr_db: ideal_sinr,
        });

        if let ConnState::HandoverExecuting {
            target,
            ho_type,
            elapsed_ms,
        } = self.conn
        {
            // The link to the outgoing cell must hold through the window.
            if ctx.rlf.enabled && actual_sinr < ctx.rlf.q_out_db {
                log.events.push(Event {
                    t_ms,
                    ue: self.ue,
                    kind: EventKind::HandoverFailure {
                        from: self.serving,
                        to: target,
                        ho_type,
                    },
                });
                self.drop_call(t_ms, Some(ho_type), ctx, log);
                return;
            }
            let elapsed = elapsed_ms + dt;
            if elapsed >= ctx.rlf.t_exec_ms {
                self.complete_handover(t_ms, target, ho_type, log);
            } else {
                self.conn = ConnState::HandoverExecuting {
                    target,
                    ho_type,
                    elapsed_ms: elapsed,
                };
            }
            return;
        }

        // Radio-link monitoring outside handover execution.
        if ctx.rlf.enabled {
            if actual_sinr < ctx.rlf.q_out_db {
                self.below_qout_ms += dt;
            } else {
                self.below_qout_ms = 0;
            }
            if self.below_qout_ms >= ctx.rlf.t_rlf_ms {
                self.drop_call(t_ms, None, ctx, log);
                return;
            }
        }

        // A3 evaluation on filtered values with per-neighbor TTT. An
        // accumulator grows by one interval per sample while the entering
        // condition holds continuously and resets the moment it lapses.
        let cands =
            candidates_including(&self.filters, ctx.candidate_window_db, self.serving);
        let h_g = ctx.params.h_g_db();
        let mut target: Option<(f64, CellId)> = None;
        for c in 0..self.filters.len() {
            if c == self.serving {
                self.ttt_acc_ms[c] = 0;
                continue;
            }
            let holds = cands.contains(&c)
                && a3_entering(
                    self.filters[c],
                    self.filters[self.serving],
                    ctx.bias,
                    h_g,
                    self.serving,
                    c,
                );
            if !holds {
                self.ttt_acc_ms[c] = 0;
                continue;
            }
            self.ttt_acc_ms[c] += dt;
            if self.ttt_acc_ms[c] >= ctx.params.ttt_ms {
                // Report fires; the strongest biased neighbor wins.
                let biased = self.filters[c] + ctx.bias.get(self.serving, c);
                let better = match target {
                    None => true,
                    Some((bv, bc)) => biased > bv || (biased == bv && c < bc),
                };
                if better {
                    target = Some((biased, c));
                }
            }
        }
        if let Some((_, to)) = target {
            let ho_type = classify_handover_type(ctx.kinds[self.serving], ctx.kinds[to]);
            log.events.push(Event {
                t_ms,
                ue: self.ue,
                kind: EventKind::HandoverAttempt {
                    from: self.serving,
                    to,
                    ho_type,
                },
            });
            if !ctx.rlf.enabled {
                // Failure model off: the handover completes instantly.
                self.complete_handover(t_ms, to, ho_type, log);
            } else if actual_sinr < ctx.rlf.q_out_db {
                // Already below threshold at the trigger instant.
                log.events.push(Event {
                    t_ms,
                    ue: self.ue,
                    kind: EventKind::HandoverFailure {
                        from: self.serving,
                        to,
                        ho_type,
                    },
                });
                self.drop_call(t_ms, Some(ho_type), ctx, log);
            } else if ctx.rlf.t_exec_ms == 0 {
                self.complete_handover(t_ms, to, ho_type, log);
            } else {
                self.conn = ConnState::HandoverExecuting {
                    target: to,
                    ho_type,
                    elapsed_ms: 0,
                };
            }
        }
    }

    /// Close the run: record the final partial dwell when still connected.
    pub fn finish(&mut self, t_ms: u64, log: &mut EventLog) {
        if !self.initialized {
            return;
        }
        if self.is_connected() {
            log.events.push(Event {
                t_ms,
                ue: self.ue,
                kind: EventKind::Dwell {
                    cell: self.serving,
                    tos_ms: self.dwell_ms,
                    ended_by: DwellEnd::SimEnd,
                },
            });
        }
    }
}

/// Derive an independent shadow seed per UE.
fn ue_seed(base: u64, ue: usize) -> u64 {
    // splitmix64 finalizer over the combined value
    let mut z = base ^ (ue as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Run the dynamic simulation: one state machine per UE, each driving a
/// route replica with its own shadow-field realization, merged into a
/// single log ordered by (time, UE).
pub fn run_simulation(
    scenario: &Scenario,
    bias: &BiasMatrix,
    seed: u64,
) -> Result<EventLog, SimError> {
    let n = scenario.n_cells();
    if bias.n() != n {
        return Err(SimError::BiasDimension {
            bias: bias.n(),
            cells: n,
        });
    }
    if scenario.routes.is_empty() {
        return Err(SimError::NoRoutes);
    }
    if scenario.sim.n_ues == 0 {
        return Err(SimError::NoUes);
    }
    let kinds = scenario.kinds();
    let dt = scenario.mobility.sample_interval_ms;
    let max_samples = scenario
        .sim
        .max_duration_s
        .map(|s| ((s * 1000.0) / dt as f64).floor() as usize + 1)
        .unwrap_or(usize::MAX);

    let mut merged = EventLog {
        n_ues: scenario.sim.n_ues,
        ..EventLog::default()
    };
    let mut buf = Vec::with_capacity(n);
    for ue in 0..scenario.sim.n_ues {
        let route = &scenario.routes[ue % scenario.routes.len()];
        let traj = build_trajectory(
            &route.waypoints,
            scenario.ue.speed_kmh,
            dt,
            route.loops,
        )?;
        let shadow = if scenario.shadowing.sigma_db > 0.0 {
            generate_shadow_field(
                &scenario.grid,
                n,
                scenario.shadowing.sigma_db,
                scenario.shadowing.correlation_distance_m,
                ue_seed(seed, ue),
            )?
        } else {
            ShadowField::zero(&scenario.grid, n)
        };
        let ctx = UeContext {
            bias,
            params: &scenario.mobility,
            abs: &scenario.abs,
            rlf: &scenario.rlf,
            kinds: &kinds,
            candidate_window_db: scenario.ue.candidate_window_db,
            noise_dbm: scenario.sim.noise_dbm,
        };
        let mut state = UeState::new(ue, n);
        let mut log = EventLog::default();
        let mut last_t = 0;
        for (k, &(x, y)) in traj.samples.iter().enumerate().take(max_samples) {
            let t_ms = k as u64 * dt;
            scenario.rsrp_all_at(x, y, &shadow, &mut buf);
            state.step(t_ms, &buf, &ctx, &mut log);
            last_t = t_ms;
        }
        state.finish(last_t, &mut log);
        merged.events.extend(log.events);
        merged.sinr.extend(log.sinr);
    }
    merged.events.sort_by_key(|e| (e.t_ms, e.ue));
    merged.sinr.sort_by_key(|s| (s.t_ms, s.ue));
    Ok(merged)
}
