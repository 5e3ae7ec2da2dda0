//! Waypoint routes sampled at exact arc-length steps.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("a route needs at least two waypoints, got {0}")]
    TooFewWaypoints(usize),
    #[error("route has zero length")]
    ZeroLength,
    #[error("speed must be positive, got {0} km/h")]
    NonPositiveSpeed(f64),
    #[error("sample interval must be positive")]
    ZeroInterval,
}

/// Position samples along a polyline at constant speed. Consecutive
/// samples are exactly `speed * sample_interval` apart along the path.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<(f64, f64)>,
    pub step_m: f64,
    pub speed_kmh: f64,
    pub sample_interval_ms: u64,
}

/// Sample a route at arc-length steps of `speed * interval`, starting at
/// the first waypoint. The sample count is `floor(length / step)` per
/// traversal, so a 1 km leg at 60 km/h and 200 ms yields 300 samples.
pub fn build_trajectory(
    waypoints: &[(f64, f64)],
    speed_kmh: f64,
    sample_interval_ms: u64,
    loops: u32,
) -> Result<Trajectory, TrajectoryError> {
    if waypoints.len() < 2 {
        return Err(TrajectoryError::TooFewWaypoints(waypoints.len()));
    }
    if speed_kmh <= 0.0 {
        return Err(TrajectoryError::NonPositiveSpeed(speed_kmh));
    }
    if sample_interval_ms == 0 {
        return Err(TrajectoryError::ZeroInterval);
    }
    let mut cumulative = vec![0.0f64];
    for w in waypoints.windows(2) {
        let (dx, dy) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
        let seg = (dx * dx + dy * dy).sqrt();
        cumulative.push(cumulative.last().unwrap() + seg);
    }
    let length = *cumulative.last().unwrap();
    if length <= 0.0 {
        return Err(TrajectoryError::ZeroLength);
    }
    let step_m = speed_kmh / 3.6 * sample_interval_ms as f64 / 1000.0;
    let per_loop = ((length / step_m) + 1e-9).floor() as usize;
    let per_loop = per_loop.max(1);
    let total = per_loop * loops.max(1) as usize;
    let mut samples = Vec::with_capacity(total);
    let mut seg = 0usize;
    for k in 0..total {
        let mut d = (k % per_loop) as f64 * step_m;
        if k % per_loop == 0 {
            seg = 0;
        }
        // Clamp arithmetic drift at the loop end.
        if d > length {
            d = length;
        }
        while seg + 2 < cumulative.len() && cumulative[seg + 1] < d {
            seg += 1;
        }
        let seg_len = cumulative[seg + 1] - cumulative[seg];
        let t = if seg_len > 0.0 {
            (d - cumulative[seg]) / seg_len
        } else {
            0.0
        };
        let (x0, y0) = waypoints[seg];
        let (x1, y1) = waypoints[seg + 1];
        samples.push((x0 + t * (x1 - x0), y0 + t * (y1 - y0)));
    }
    Ok(Trajectory {
        samples,
        step_m,
        speed_kmh,
        sample_interval_ms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn step_is_speed_times_interval() {
        let t = build_trajectory(&[(0.0, 0.0), (100.0, 0.0)], 60.0, 200, 1).unwrap();
        assert_abs_diff_eq!(t.step_m, 60.0 / 3.6 * 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(t.step_m, 3.333333333333, epsilon = 1e-9);
    }

    #[test]
    fn one_km_at_60kmh_gives_300_samples() {
        let t = build_trajectory(&[(0.0, 0.0), (1000.0, 0.0)], 60.0, 200, 1).unwrap();
        assert_eq!(t.samples.len(), 300);
        assert_eq!(t.samples[0], (0.0, 0.0));
    }

    #[test]
    fn consecutive_spacing_is_exact() {
        let t = build_trajectory(&[(0.0, 0.0), (500.0, 0.0), (500.0, 400.0)], 50.0, 200, 1)
            .unwrap();
        for w in t.samples.windows(2) {
            let (dx, dy) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            // Spacing along the path equals the step; across a corner the
            // chord can only be shorter.
            let chord = (dx * dx + dy * dy).sqrt();
            assert!(chord <= t.step_m + 1e-9);
        }
        // On a straight run the chord equals the step exactly.
        let straight = build_trajectory(&[(0.0, 0.0), (100.0, 0.0)], 60.0, 200, 1).unwrap();
        for w in straight.samples.windows(2) {
            assert_abs_diff_eq!(w[1].0 - w[0].0, straight.step_m, epsilon = 1e-9);
        }
    }

    #[test]
    fn out_and_back_is_symmetric_about_the_turn() {
        let t = build_trajectory(
            &[(0.0, 0.0), (100.0, 0.0), (0.0, 0.0)],
            60.0,
            200,
            1,
        )
        .unwrap();
        let n = t.samples.len();
        // d and 200 - d land at the same x.
        for k in 0..n {
            let d = k as f64 * t.step_m;
            let expect = if d <= 100.0 { d } else { 200.0 - d };
            assert_abs_diff_eq!(t.samples[k].0, expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn degenerate_routes_rejected() {
        assert!(matches!(
            build_trajectory(&[(1.0, 1.0)], 60.0, 200, 1),
            Err(TrajectoryError::TooFewWaypoints(1))
        ));
        assert!(matches!(
            build_trajectory(&[(1.0, 1.0), (1.0, 1.0)], 60.0, 200, 1),
            Err(TrajectoryError::ZeroLength)
        ));
        assert!(build_trajectory(&[(0.0, 0.0), (1.0, 0.0)], 0.0, 200, 1).is_err());
    }

    #[test]
    fn loops_repeat_the_polyline() {
        let once = build_trajectory(&[(0.0, 0.0), (100.0, 0.0)], 60.0, 200, 1).unwrap();
        let twice = build_trajectory(&[(0.0, 0.0), (100.0, 0.0)], 60.0, 200, 2).unwrap();
        assert_eq!(twice.samples.len(), 2 * once.samples.len());
        assert_eq!(&twice.samples[..once.samples.len()], &once.samples[..]);
    }
}
