//! Closed-form HAPS link figures: path-loss parity distance, propagation
//! latency and elevation-limited footprint.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudgetParams {
    pub haps_altitude_m: f64,
    pub haps_pathloss_exponent: f64,
    pub terrestrial_pathloss_exponent: f64,
    pub min_elevation_deg: f64,
    pub propagation_speed_mps: f64,
}

impl Default for LinkBudgetParams {
    fn default() -> Self {
        Self {
            haps_altitude_m: 20_000.0,
            haps_pathloss_exponent: 2.0,
            terrestrial_pathloss_exponent: 4.0,
            min_elevation_deg: 30.0,
            propagation_speed_mps: 2.998e8,
        }
    }
}

impl LinkBudgetParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.haps_altitude_m >= 0.0
            && self.haps_pathloss_exponent >= 1.0
            && self.terrestrial_pathloss_exponent >= 1.0
            && self.min_elevation_deg > 0.0
            && self.min_elevation_deg < 90.0
            && self.propagation_speed_mps > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(alloc::format!(
                "invalid link budget parameters {self:?}"
            )))
        }
    }

    /// Terrestrial link length with the same path loss as the vertical HAPS
    /// link: `d^n_terr = h^n_haps`.
    pub fn parity_distance_m(&self) -> f64 {
        libm::pow(
            self.haps_altitude_m,
            self.haps_pathloss_exponent / self.terrestrial_pathloss_exponent,
        )
    }

    /// One-way delay over the nadir path.
    pub fn propagation_latency_ms(&self) -> f64 {
        self.haps_altitude_m / self.propagation_speed_mps * 1000.0
    }

    /// Ground radius within which the HAPS is seen above `min_elevation_deg`
    /// (flat earth).
    pub fn footprint_radius_m(&self) -> f64 {
        self.haps_altitude_m / libm::tan(self.min_elevation_deg.to_radians())
    }
}
