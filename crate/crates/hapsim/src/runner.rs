//! Experiments: load calibration, densification, the comparison table and
//! demand sweeps.

use std::fmt;
use std::str::FromStr;

use hapsim_core::geometry::{place_initial_grid, CellSite};
use hapsim_core::metrics::{capacity_utilization, summarize};
use hapsim_core::mobility::sigma_for_mean;
use hapsim_core::planner::{plan_sites_with, PlannerOptions};
use hapsim_core::{
    run_simulation, DemandPoint, MetricsSummary, PowerModel, Scenario, TimeSlotResult,
};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::{Error, Result};

/// Network configuration compared in a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    Baseline,
    Densified,
    /// Initial grid plus a HAPS of the given capacity (Mbps).
    Haps(f64),
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Baseline => f.write_str("baseline"),
            Variant::Densified => f.write_str("densified"),
            Variant::Haps(c) => write!(f, "haps({c})"),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "baseline" => return Ok(Variant::Baseline),
            "densified" => return Ok(Variant::Densified),
            _ => {}
        }
        t.strip_prefix("haps(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|c| c.trim().parse::<f64>().ok())
            .filter(|c| *c > 0.0 && c.is_finite())
            .map(Variant::Haps)
            .ok_or_else(|| Error::BadVariant(s.to_string()))
    }
}

impl Serialize for Variant {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// One point of the served-proportion / utilization vs. demand curves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub mean_demand_mbps: f64,
    pub variant: Variant,
    pub proportion_served: f64,
    pub utilization: f64,
    pub utilization_switchoff: f64,
    pub power_kw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub active_user_count: usize,
    pub utilization: f64,
    /// Fraction of active users rejected, to compare against the target.
    pub rejection: f64,
    pub target_utilization: f64,
    pub target_rejection: f64,
    /// Even a single user exceeds the target; the count is pinned to 1.
    pub below_minimum: bool,
}

pub const CALIBRATION_TOLERANCE: f64 = 0.01;

fn baseline_run(scenario: &Scenario, active: usize, slots: usize) -> Result<Vec<TimeSlotResult>> {
    let s = Scenario {
        active_user_count: active,
        num_ts: slots,
        haps_capacity_mbps: 0.0,
        ..scenario.clone()
    };
    let sites = place_initial_grid(&s)?;
    Ok(run_simulation(&s, &sites)?)
}

fn rejection_fraction(results: &[TimeSlotResult]) -> f64 {
    1.0 - hapsim_core::metrics::proportion_served(results)
}

/// Finds the active user count whose baseline utilization over a short run
/// of `slots` slots lands within one point of `target_utilization`.
pub fn calibrate_load(
    scenario: &Scenario,
    target_utilization: f64,
    target_rejection: f64,
    slots: usize,
) -> Result<CalibrationReport> {
    if !(0.0..1.0).contains(&target_utilization) {
        return Err(Error::Invalid(format!(
            "target utilization {target_utilization} outside [0, 1)"
        )));
    }
    let grid = scenario.grid_capacity_mbps();
    let eval = |n: usize| -> Result<(f64, f64)> {
        let r = baseline_run(scenario, n, slots)?;
        Ok((capacity_utilization(&r, grid)?, rejection_fraction(&r)))
    };
    let report = |n: usize, (u, rej): (f64, f64), below_minimum| CalibrationReport {
        active_user_count: n,
        utilization: u,
        rejection: rej,
        target_utilization,
        target_rejection,
        below_minimum,
    };

    let (mut lo, mut hi) = (1usize, scenario.num_users.max(1));
    let at_lo = eval(lo)?;
    if at_lo.0 >= target_utilization {
        return Ok(report(lo, at_lo, true));
    }
    let at_hi = eval(hi)?;
    if at_hi.0 < target_utilization - CALIBRATION_TOLERANCE {
        return Err(Error::Calibration {
            target: target_utilization,
            low_count: lo,
            low_util: at_lo.0,
            high_count: hi,
            high_util: at_hi.0,
        });
    }
    if at_hi.0 < target_utilization {
        return Ok(report(hi, at_hi, false));
    }
    // Invariant: u(lo) < target <= u(hi).
    let (mut u_lo, mut u_hi) = (at_lo, at_hi);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let u = eval(mid)?;
        if u.0 >= target_utilization {
            hi = mid;
            u_hi = u;
        } else {
            lo = mid;
            u_lo = u;
        }
    }
    let (n, u) = if target_utilization - u_lo.0 < u_hi.0 - target_utilization {
        (lo, u_lo)
    } else {
        (hi, u_hi)
    };
    if (u.0 - target_utilization).abs() > CALIBRATION_TOLERANCE {
        return Err(Error::Calibration {
            target: target_utilization,
            low_count: lo,
            low_util: u_lo.0,
            high_count: hi,
            high_util: u_hi.0,
        });
    }
    Ok(report(n, u, false))
}

#[derive(Debug, Clone)]
pub struct DensifyRound {
    pub input_points: usize,
    pub added_sites: usize,
}

#[derive(Debug, Clone)]
pub struct DensifyOutcome {
    pub baseline: Vec<TimeSlotResult>,
    pub added_sites: Vec<CellSite>,
    pub rounds: Vec<DensifyRound>,
    /// Replay of the same seed on the initial plus added sites.
    pub replay: Vec<TimeSlotResult>,
}

/// Adds sites until replaying the scenario's own trace serves every user.
///
/// The first round plans over the baseline's rejected demand. A replay then
/// re-associates everyone with their new nearest site, which can overload an
/// added site; any demand still rejected seeds the next round.
pub fn densify(
    scenario: &Scenario,
    opts: PlannerOptions,
    max_rounds: usize,
) -> Result<DensifyOutcome> {
    let scenario = Scenario {
        haps_capacity_mbps: 0.0,
        ..scenario.clone()
    };
    let initial = place_initial_grid(&scenario)?;
    let baseline = run_simulation(&scenario, &initial)?;

    let mut sites = initial.clone();
    let mut added = Vec::new();
    let mut rounds = Vec::new();
    let mut points: Vec<DemandPoint> = baseline.iter().flat_map(|r| r.rejected_points()).collect();
    let mut replay = baseline.clone();
    while !points.is_empty() {
        if rounds.len() == max_rounds {
            return Err(Error::DensifyDiverged { rounds: max_rounds });
        }
        let next_id = sites.iter().map(|s| s.id + 1).max().unwrap_or(0);
        let plan = plan_sites_with(
            &points,
            scenario.bs_coverage_radius_m,
            scenario.bs_capacity_mbps,
            PlannerOptions {
                first_site_id: next_id,
                ..opts
            },
        )?;
        rounds.push(DensifyRound {
            input_points: points.len(),
            added_sites: plan.new_sites.len(),
        });
        sites.extend(plan.new_sites.iter().cloned());
        added.extend(plan.new_sites);
        replay = run_simulation(&scenario, &sites)?;
        points = replay.iter().flat_map(|r| r.rejected_points()).collect();
    }
    Ok(DensifyOutcome {
        baseline,
        added_sites: added,
        rounds,
        replay,
    })
}

#[derive(Debug, Clone)]
pub struct Table1Report {
    pub baseline: MetricsSummary,
    pub densified: MetricsSummary,
    pub haps: MetricsSummary,
    pub added_sites: Vec<CellSite>,
    pub densify_rounds: Vec<DensifyRound>,
    /// Slots in which the HAPS variant still dropped someone.
    pub haps_slots_with_drops: usize,
    pub haps_dropped_total: usize,
}

/// Baseline, densified and HAPS-assisted networks on one trace.
pub fn run_table1(
    scenario: &Scenario,
    haps_capacity_mbps: f64,
    power: PowerModel,
    opts: PlannerOptions,
    max_rounds: usize,
) -> Result<Table1Report> {
    let outcome = densify(scenario, opts, max_rounds)?;
    let baseline = summarize(&outcome.baseline, power)?;
    let densified = summarize(&outcome.replay, power)?;

    let with_haps = Scenario {
        haps_capacity_mbps,
        ..scenario.clone()
    };
    let initial = place_initial_grid(&with_haps)?;
    let haps_results = run_simulation(&with_haps, &initial)?;
    let haps = summarize(&haps_results, power)?;

    Ok(Table1Report {
        baseline,
        densified,
        haps,
        added_sites: outcome.added_sites,
        densify_rounds: outcome.rounds,
        haps_slots_with_drops: haps_results.iter().filter(|r| r.dropped_users > 0).count(),
        haps_dropped_total: haps_results.iter().map(|r| r.dropped_users).sum(),
    })
}

/// Evaluates every (variant, mean demand) pair on the scenario's seed.
/// `added_sites` is the frozen densification used by [`Variant::Densified`].
/// Records come back ordered by variant (as listed), then by mean demand.
pub fn run_sweep(
    scenario: &Scenario,
    mean_demands: &[f64],
    variants: &[Variant],
    added_sites: &[CellSite],
    power: PowerModel,
) -> Result<Vec<SweepRecord>> {
    if mean_demands.iter().any(|m| m.is_nan() || *m <= 0.0) {
        return Err(Error::Invalid("mean demands must be positive".into()));
    }
    let initial = place_initial_grid(scenario)?;
    let mut densified = initial.clone();
    densified.extend(added_sites.iter().cloned());

    let jobs: Vec<(usize, usize)> = (0..variants.len())
        .flat_map(|v| (0..mean_demands.len()).map(move |m| (v, m)))
        .collect();
    let mut records: Vec<(usize, usize, SweepRecord)> = jobs
        .into_par_iter()
        .map(|(vi, mi)| {
            let variant = variants[vi];
            let mean = mean_demands[mi];
            let mut s = Scenario {
                demand_sigma_mbps: sigma_for_mean(mean),
                haps_capacity_mbps: 0.0,
                ..scenario.clone()
            };
            let sites = match variant {
                Variant::Baseline => &initial,
                Variant::Densified => &densified,
                Variant::Haps(c) => {
                    s.haps_capacity_mbps = c;
                    &initial
                }
            };
            let results = run_simulation(&s, sites)?;
            let m = summarize(&results, power)?;
            Ok((
                vi,
                mi,
                SweepRecord {
                    mean_demand_mbps: mean,
                    variant,
                    proportion_served: m.proportion_served,
                    utilization: m.utilization,
                    utilization_switchoff: m.utilization_switchoff,
                    power_kw: m.power_kw,
                },
            ))
        })
        .collect::<Result<_>>()?;
    records.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(mean_demands[a.1].total_cmp(&mean_demands[b.1]))
            .then(a.1.cmp(&b.1))
    });
    Ok(records.into_iter().map(|r| r.2).collect())
}
