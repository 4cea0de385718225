//! Scenario files.
//!
//! A config is TOML with flat key/value sections. Every key is optional and
//! falls back to the default scenario:
//!
//! ```toml
//! [scenario]
//! area_width_m = 8000.0
//! bs_rows = 6
//! active_user_count = 2500   # omit to use the stored calibration constant
//! seed = 20230601
//!
//! [mobility]
//! speed_min_mps = 1.0
//!
//! [sweep]
//! mean_demands_mbps = [10.0, 12.0, 14.0]
//! variants = ["baseline", "densified", "haps(2000)"]
//! ```

use std::path::Path;

use hapsim_core::link_budget::LinkBudgetParams;
use hapsim_core::mobility::MobilityParams;
use hapsim_core::planner::PlannerOptions;
use hapsim_core::scenario::CALIBRATED_ACTIVE_USERS;
use hapsim_core::{AdmissionRule, PowerModel, Scenario};
use serde::Deserialize;

use crate::runner::Variant;
use crate::{Error, Result};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub scenario: ScenarioSection,
    pub mobility: MobilitySection,
    pub power: PowerSection,
    pub planner: PlannerSection,
    pub link_budget: LinkBudgetSection,
    pub sweep: SweepSection,
    pub calibration: CalibrationSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub area_width_m: f64,
    pub area_height_m: f64,
    pub bs_rows: usize,
    pub bs_cols: usize,
    pub bs_coverage_radius_m: f64,
    pub bs_capacity_mbps: f64,
    pub haps_capacity_mbps: f64,
    pub num_users: usize,
    pub active_user_count: Option<usize>,
    pub ts_duration_s: f64,
    pub num_ts: usize,
    /// Takes precedence over `mean_demand_mbps` when both are given.
    pub demand_sigma_mbps: Option<f64>,
    pub mean_demand_mbps: Option<f64>,
    pub admission_rule: AdmissionRuleKey,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmissionRuleKey {
    #[default]
    SkipOverflow,
    CloseOnOverflow,
}

impl From<AdmissionRuleKey> for AdmissionRule {
    fn from(k: AdmissionRuleKey) -> Self {
        match k {
            AdmissionRuleKey::CloseOnOverflow => AdmissionRule::CloseOnOverflow,
            AdmissionRuleKey::SkipOverflow => AdmissionRule::SkipOverflow,
        }
    }
}

impl Default for ScenarioSection {
    fn default() -> Self {
        let s = Scenario::default();
        Self {
            area_width_m: s.area_width_m,
            area_height_m: s.area_height_m,
            bs_rows: s.bs_rows,
            bs_cols: s.bs_cols,
            bs_coverage_radius_m: s.bs_coverage_radius_m,
            bs_capacity_mbps: s.bs_capacity_mbps,
            haps_capacity_mbps: s.haps_capacity_mbps,
            num_users: s.num_users,
            active_user_count: None,
            ts_duration_s: s.ts_duration_s,
            num_ts: s.num_ts,
            demand_sigma_mbps: None,
            mean_demand_mbps: None,
            admission_rule: AdmissionRuleKey::default(),
            seed: s.seed,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilitySection {
    pub speed_min_mps: f64,
    pub speed_max_mps: f64,
    pub pause_prob: f64,
}

impl Default for MobilitySection {
    fn default() -> Self {
        let m = MobilityParams::default();
        Self {
            speed_min_mps: m.speed_min_mps,
            speed_max_mps: m.speed_max_mps,
            pause_prob: m.pause_prob,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerSection {
    pub kw_per_gbps: f64,
}

impl Default for PowerSection {
    fn default() -> Self {
        Self {
            kw_per_gbps: PowerModel::default().kw_per_gbps,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSection {
    /// Defaults to a quarter of the coverage radius.
    pub candidate_cell_m: Option<f64>,
    pub max_rounds: usize,
}

impl Default for PlannerSection {
    fn default() -> Self {
        Self {
            candidate_cell_m: None,
            max_rounds: 10,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkBudgetSection {
    pub haps_altitude_m: f64,
    pub haps_pathloss_exponent: f64,
    pub terrestrial_pathloss_exponent: f64,
    pub min_elevation_deg: f64,
    pub propagation_speed_mps: f64,
}

impl Default for LinkBudgetSection {
    fn default() -> Self {
        let p = LinkBudgetParams::default();
        Self {
            haps_altitude_m: p.haps_altitude_m,
            haps_pathloss_exponent: p.haps_pathloss_exponent,
            terrestrial_pathloss_exponent: p.terrestrial_pathloss_exponent,
            min_elevation_deg: p.min_elevation_deg,
            propagation_speed_mps: p.propagation_speed_mps,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub mean_demands_mbps: Vec<f64>,
    pub variants: Vec<String>,
    /// Mean demand whose baseline trace the frozen densification plan is
    /// built from.
    pub plan_mean_mbps: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            mean_demands_mbps: (0..17).map(|i| 10.0 + 2.0 * i as f64).collect(),
            variants: [
                "baseline",
                "densified",
                "haps(2000)",
                "haps(5000)",
                "haps(10000)",
                "haps(15000)",
                "haps(20000)",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
            plan_mean_mbps: 16.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSection {
    pub target_utilization: f64,
    pub target_rejection: f64,
    pub slots: usize,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        Self {
            target_utilization: 0.73,
            target_rejection: 0.01,
            slots: 200,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// The validated scenario. A missing `active_user_count` takes the
    /// stored calibration constant.
    pub fn scenario(&self) -> Result<Scenario> {
        let s = &self.scenario;
        let sigma = match (s.demand_sigma_mbps, s.mean_demand_mbps) {
            (Some(sigma), _) => sigma,
            (None, Some(mean)) => hapsim_core::mobility::sigma_for_mean(mean),
            (None, None) => Scenario::default().demand_sigma_mbps,
        };
        let scenario = Scenario {
            area_width_m: s.area_width_m,
            area_height_m: s.area_height_m,
            bs_rows: s.bs_rows,
            bs_cols: s.bs_cols,
            bs_coverage_radius_m: s.bs_coverage_radius_m,
            bs_capacity_mbps: s.bs_capacity_mbps,
            haps_capacity_mbps: s.haps_capacity_mbps,
            num_users: s.num_users,
            active_user_count: s.active_user_count.unwrap_or(CALIBRATED_ACTIVE_USERS),
            ts_duration_s: s.ts_duration_s,
            num_ts: s.num_ts,
            demand_sigma_mbps: sigma,
            mobility: MobilityParams {
                speed_min_mps: self.mobility.speed_min_mps,
                speed_max_mps: self.mobility.speed_max_mps,
                pause_prob: self.mobility.pause_prob,
            },
            admission: s.admission_rule.into(),
            seed: s.seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn power(&self) -> PowerModel {
        PowerModel {
            kw_per_gbps: self.power.kw_per_gbps,
        }
    }

    pub fn planner_options(&self) -> PlannerOptions {
        let radius = self.scenario.bs_coverage_radius_m;
        PlannerOptions {
            candidate_cell_m: self.planner.candidate_cell_m.unwrap_or(radius / 4.0),
            first_site_id: 0,
        }
    }

    pub fn link_budget(&self) -> Result<LinkBudgetParams> {
        let l = &self.link_budget;
        let p = LinkBudgetParams {
            haps_altitude_m: l.haps_altitude_m,
            haps_pathloss_exponent: l.haps_pathloss_exponent,
            terrestrial_pathloss_exponent: l.terrestrial_pathloss_exponent,
            min_elevation_deg: l.min_elevation_deg,
            propagation_speed_mps: l.propagation_speed_mps,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn variants(&self) -> Result<Vec<Variant>> {
        self.sweep.variants.iter().map(|v| v.parse()).collect()
    }
}
