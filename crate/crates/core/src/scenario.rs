use alloc::format;

use crate::mobility::MobilityParams;
use crate::{Error, Result};

/// Active users per slot for the default scenario, found by bisecting the
/// baseline utilization onto 73% at a 16 Mbps mean demand (seed
/// [`DEFAULT_SEED`]). Re-derive with `hapsim calibrate`.
pub const CALIBRATED_ACTIVE_USERS: usize = 2589;

pub const DEFAULT_SEED: u64 = 20_230_601;

/// Full parameterization of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub area_width_m: f64,
    pub area_height_m: f64,
    pub bs_rows: usize,
    pub bs_cols: usize,
    pub bs_coverage_radius_m: f64,
    pub bs_capacity_mbps: f64,
    /// Zero disables the overlay.
    pub haps_capacity_mbps: f64,
    /// Total population. Only `active_user_count` of them demand service in
    /// any given slot.
    pub num_users: usize,
    pub active_user_count: usize,
    pub ts_duration_s: f64,
    pub num_ts: usize,
    /// Scale of the half-normal demand distribution.
    pub demand_sigma_mbps: f64,
    pub mobility: MobilityParams,
    pub admission: AdmissionRule,
    pub seed: u64,
}

/// How a cell treats users arriving once a demand has failed to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdmissionRule {
    /// Only the demand that does not fit is rejected; later, smaller demands
    /// may still be admitted.
    #[default]
    SkipOverflow,
    /// The first demand that does not fit closes the cell; everyone after it
    /// is rejected for capacity.
    CloseOnOverflow,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            area_width_m: 8000.0,
            area_height_m: 8000.0,
            bs_rows: 6,
            bs_cols: 6,
            bs_coverage_radius_m: 700.0,
            bs_capacity_mbps: 1000.0,
            haps_capacity_mbps: 0.0,
            num_users: 14_000,
            active_user_count: CALIBRATED_ACTIVE_USERS,
            ts_duration_s: 60.0,
            num_ts: 1440,
            demand_sigma_mbps: 20.0,
            mobility: MobilityParams::default(),
            admission: AdmissionRule::default(),
            seed: DEFAULT_SEED,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        }
        fn non_negative(name: &str, v: f64) -> Result<()> {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{name} must be non-negative, got {v}"
                )))
            }
        }

        positive("area_width_m", self.area_width_m)?;
        positive("area_height_m", self.area_height_m)?;
        if self.bs_rows == 0 || self.bs_cols == 0 {
            return Err(Error::Config(format!(
                "grid must hold at least one site, got {}x{}",
                self.bs_rows, self.bs_cols
            )));
        }
        non_negative("bs_coverage_radius_m", self.bs_coverage_radius_m)?;
        non_negative("bs_capacity_mbps", self.bs_capacity_mbps)?;
        non_negative("haps_capacity_mbps", self.haps_capacity_mbps)?;
        non_negative("ts_duration_s", self.ts_duration_s)?;
        non_negative("demand_sigma_mbps", self.demand_sigma_mbps)?;
        if self.active_user_count > self.num_users {
            return Err(Error::Config(format!(
                "active_user_count {} exceeds num_users {}",
                self.active_user_count, self.num_users
            )));
        }
        if self.num_ts == 0 {
            return Err(Error::Config("num_ts must be at least 1".into()));
        }
        self.mobility.validate()
    }

    /// Summed capacity of the initial grid.
    pub fn grid_capacity_mbps(&self) -> f64 {
        (self.bs_rows * self.bs_cols) as f64 * self.bs_capacity_mbps
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.area_width_m).contains(&x) && (0.0..=self.area_height_m).contains(&y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        let s = Scenario::default();
        s.validate().unwrap();
        assert_eq!(s.bs_rows * s.bs_cols, 36);
        assert_eq!(s.num_ts, 1440);
        assert_eq!(s.grid_capacity_mbps(), 36_000.0);
    }

    #[test]
    fn rejects_bad_dimensions() {
        let mut s = Scenario {
            area_width_m: 0.0,
            ..Scenario::default()
        };
        assert!(matches!(s.validate(), Err(Error::Config(_))));
        s.area_width_m = 10.0;
        s.bs_cols = 0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn rejects_more_active_than_population() {
        let s = Scenario {
            num_users: 10,
            active_user_count: 11,
            ..Scenario::default()
        };
        assert!(s.validate().is_err());
        let s = Scenario {
            num_ts: 0,
            ..Scenario::default()
        };
        assert!(s.validate().is_err());
    }
}
