//! Log-distance pathloss models.

use serde::{Deserialize, Serialize};

/// `loss = intercept + slope * log10(d_km)`.
///
/// Defaults follow the standard hexagonal-layout evaluation models:
/// `128.1 + 37.6 log10(d_km)` for macros and `140.7 + 36.7 log10(d_km)`
/// for picos. Both are overridable per cell in the scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathlossModel {
    pub intercept_db: f64,
    pub slope_db_per_decade: f64,
}

impl PathlossModel {
    pub const MACRO_DEFAULT: PathlossModel = PathlossModel {
        intercept_db: 128.1,
        slope_db_per_decade: 37.6,
    };

    pub const PICO_DEFAULT: PathlossModel = PathlossModel {
        intercept_db: 140.7,
        slope_db_per_decade: 36.7,
    };

    /// Pathloss in dB at `distance_m`, clamped to `min_distance_m` to keep
    /// the model finite at the antenna.
    pub fn loss_db(&self, distance_m: f64, min_distance_m: f64) -> f64 {
        let d_km = distance_m.max(min_distance_m) / 1000.0;
        self.intercept_db + self.slope_db_per_decade * d_km.log10()
    }
}
