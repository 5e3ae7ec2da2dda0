//! L3 measurement filtering, SINR, and the handover failure rule.

use super::{AbsConfig, RlfConfig};
use crate::network::{CellId, CellKind};

/// L3 filter update `F = (1 - a) F_prev + a M`, in the dB domain. The
/// first sample of a connection initializes `F = M` directly.
#[inline]
pub fn l3_filter_step(f_prev_dbm: f64, m_dbm: f64, a: f64) -> f64 {
    (1.0 - a) * f_prev_dbm + a * m_dbm
}

/// Subframe class seen by the UE's scheduler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subframe {
    /// Macro data channels blanked; only residual reference-signal
    /// interference remains from macros.
    Protected,
    Normal,
}

/// Serving-cell SINR in dB from per-cell RSRP in dBm. In a protected
/// subframe with a pico serving cell, every macro interferer is reduced
/// by the residual-interference figure; normal subframes apply no
/// reduction.
pub fn sinr_db(
    point_rsrp: &[f64],
    kinds: &[CellKind],
    serving: CellId,
    abs: &AbsConfig,
    subframe: Subframe,
    noise_dbm: f64,
) -> f64 {
    let protect_macros =
        subframe == Subframe::Protected && kinds[serving] == CellKind::Pico;
    let signal_mw = 10f64.powf(point_rsrp[serving] / 10.0);
    let mut interference_mw = 10f64.powf(noise_dbm / 10.0);
    for c in 0..point_rsrp.len() {
        if c == serving {
            continue;
        }
        let mut p = point_rsrp[c];
        if protect_macros && kinds[c] == CellKind::Macro {
            p -= abs.residual_interference_db;
        }
        interference_mw += 10f64.powf(p / 10.0);
    }
    10.0 * (signal_mw / interference_mw).log10()
}

/// Outcome of the handover failure rule over a serving-SINR trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HandoverOutcome {
    Success,
    /// Index of the first sample at or below the trigger where the SINR
    /// crossed below `q_out_db`.
    Failure { breach_sample: usize },
}

/// Resolve a handover attempt against the serving-cell SINR trace covering
/// the trigger instant (index 0) through the end of the execution window.
/// The attempt fails at the first sample strictly below `q_out_db`.
pub fn resolve_handover(serving_sinr_window_db: &[f64], rlf: &RlfConfig) -> HandoverOutcome {
    if !rlf.enabled {
        return HandoverOutcome::Success;
    }
    for (i, &s) in serving_sinr_window_db.iter().enumerate() {
        if s < rlf.q_out_db {
            return HandoverOutcome::Failure { breach_sample: i };
        }
    }
    HandoverOutcome::Success
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn filter_is_identity_at_k0() {
        // a = 1 passes the measurement through.
        assert_eq!(l3_filter_step(-123.0, -90.0, 1.0), -90.0);
    }

    #[test]
    fn filter_halves_at_k4() {
        assert_abs_diff_eq!(l3_filter_step(-100.0, -90.0, 0.5), -95.0, epsilon = 1e-12);
    }

    #[test]
    fn filter_converges_geometrically_to_constant_input() {
        let a = 0.5f64.powf(1.0 / 4.0); // K = 1
        let target = -80.0;
        let mut f = -110.0;
        let mut prev_err = (f - target) as f64;
        for _ in 0..40 {
            f = l3_filter_step(f, target, a);
            let err = f - target;
            assert_abs_diff_eq!(err, prev_err * (1.0 - a), epsilon = 1e-9);
            prev_err = err;
        }
        assert!((f - target).abs() < 1e-4);
    }

    #[test]
    fn filter_output_stays_within_input_range() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let a = 0.5f64.powf(rng.random_range(0.0..3.0));
            let inputs: Vec<f64> = (0..50).map(|_| -130.0 + 60.0 * rng.random::<f64>()).collect();
            let lo = inputs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = inputs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut f = inputs[0];
            for &m in &inputs[1..] {
                f = l3_filter_step(f, m, a);
                assert!(f >= lo - 1e-9 && f <= hi + 1e-9);
            }
        }
    }

    fn abs20() -> AbsConfig {
        AbsConfig {
            duty_cycle: 0.5,
            residual_interference_db: 20.0,
        }
    }

    #[test]
    fn equal_interferer_gives_zero_db() {
        let kinds = [CellKind::Macro, CellKind::Macro];
        let s = sinr_db(&[-90.0, -90.0], &kinds, 0, &abs20(), Subframe::Normal, -300.0);
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn noise_limited_sinr() {
        let kinds = [CellKind::Macro];
        let s = sinr_db(&[-90.0], &kinds, 0, &abs20(), Subframe::Normal, -120.0);
        assert_abs_diff_eq!(s, 30.0, epsilon = 1e-9);
    }

    #[test]
    fn protected_subframe_suppresses_macro_interference() {
        // Pico serving at -95 dBm, one macro at -90 dBm, noise -120 dBm,
        // 20 dB residual reduction. Evaluated in the linear domain:
        //   protected: 10^-9.5 / (10^-11 + 10^-12)
        //   normal:    10^-9.5 / (10^-9  + 10^-12)
        let kinds = [CellKind::Pico, CellKind::Macro];
        let rsrp = [-95.0, -90.0];
        let protected = sinr_db(&rsrp, &kinds, 0, &abs20(), Subframe::Protected, -120.0);
        let normal = sinr_db(&rsrp, &kinds, 0, &abs20(), Subframe::Normal, -120.0);
        let lin = |db: f64| 10f64.powf(db / 10.0);
        let expect_prot = 10.0 * (lin(-95.0) / (lin(-110.0) + lin(-120.0))).log10();
        let expect_norm = 10.0 * (lin(-95.0) / (lin(-90.0) + lin(-120.0))).log10();
        assert_abs_diff_eq!(protected, expect_prot, epsilon = 1e-12);
        assert_abs_diff_eq!(normal, expect_norm, epsilon = 1e-12);
        assert_abs_diff_eq!(protected, 14.5861, epsilon = 1e-4);
        assert_abs_diff_eq!(normal, -5.0043, epsilon = 1e-4);
    }

    #[test]
    fn protected_never_below_normal_for_pico() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let n = rng.random_range(2..6);
            let rsrp: Vec<f64> = (0..n).map(|_| -120.0 + 40.0 * rng.random::<f64>()).collect();
            let kinds: Vec<CellKind> = (0..n)
                .map(|i| if i == 0 { CellKind::Pico } else { CellKind::Macro })
                .collect();
            let p = sinr_db(&rsrp, &kinds, 0, &abs20(), Subframe::Protected, -120.0);
            let q = sinr_db(&rsrp, &kinds, 0, &abs20(), Subframe::Normal, -120.0);
            assert!(p >= q - 1e-12);
        }
    }

    #[test]
    fn resolve_far_from_threshold_succeeds() {
        let rlf = RlfConfig::default();
        let window = vec![rlf.q_out_db + 10.0; 5];
        assert_eq!(resolve_handover(&window, &rlf), HandoverOutcome::Success);
    }

    #[test]
    fn resolve_fails_at_trigger_below_threshold() {
        let rlf = RlfConfig::default();
        let window = vec![rlf.q_out_db - 1.0, rlf.q_out_db + 5.0];
        assert_eq!(
            resolve_handover(&window, &rlf),
            HandoverOutcome::Failure { breach_sample: 0 }
        );
    }

    #[test]
    fn resolve_fails_at_first_mid_window_crossing() {
        let rlf = RlfConfig::default();
        // Interference sweep drags the SINR below Q_out at sample 3.
        let window: Vec<f64> = (0..6)
            .map(|i| rlf.q_out_db + 3.0 - i as f64 * 1.2)
            .collect();
        let first_below = window.iter().position(|s| *s < rlf.q_out_db).unwrap();
        assert_eq!(
            resolve_handover(&window, &rlf),
            HandoverOutcome::Failure {
                breach_sample: first_below
            }
        );
        assert_eq!(first_below, 3);
    }

    #[test]
    fn resolve_disabled_model_always_succeeds() {
        let rlf = RlfConfig::disabled();
        let window = vec![-40.0; 4];
        assert_eq!(resolve_handover(&window, &rlf), HandoverOutcome::Success);
    }
}
