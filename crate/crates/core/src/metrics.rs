//! Served proportion, capacity utilization and network power.
//!
//! Every figure is an arithmetic mean over slots.

use crate::association::TimeSlotResult;
use crate::{Error, Result};

/// Power drawn per Gbps of deployed capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    pub kw_per_gbps: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        // 314.5 kW / 85 Gbps = 140.6 kW / 38 Gbps
        Self { kw_per_gbps: 3.7 }
    }
}

impl PowerModel {
    pub fn network_power_kw(&self, deployed_capacity_mbps: f64) -> f64 {
        self.kw_per_gbps * deployed_capacity_mbps / 1000.0
    }
}

/// Power at the default 3.7 kW/Gbps.
pub fn network_power_kw(deployed_capacity_mbps: f64) -> f64 {
    PowerModel::default().network_power_kw(deployed_capacity_mbps)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsSummary {
    pub proportion_served: f64,
    pub utilization: f64,
    pub utilization_switchoff: f64,
    pub power_kw: f64,
    /// Mean per-slot power counting only sites that served someone.
    pub power_switchoff_kw: f64,
    pub total_capacity_mbps: f64,
}

/// Mean over slots of served (terrestrial + HAPS) users per active user. A
/// slot with no active users counts as fully served.
pub fn proportion_served(results: &[TimeSlotResult]) -> f64 {
    mean(results.iter().map(|r| {
        if r.active_users == 0 {
            1.0
        } else {
            r.served_users() as f64 / r.active_users as f64
        }
    }))
}

pub fn capacity_utilization(
    results: &[TimeSlotResult],
    deployed_capacity_mbps: f64,
) -> Result<f64> {
    if deployed_capacity_mbps.is_nan() || deployed_capacity_mbps <= 0.0 {
        return Err(Error::UndefinedMetric("deployed capacity is zero"));
    }
    Ok(mean(
        results
            .iter()
            .map(|r| r.served_demand_mbps() / deployed_capacity_mbps),
    ))
}

/// Capacity of the sites (and HAPS) serving at least one user in the slot.
pub fn active_capacity_mbps(r: &TimeSlotResult) -> f64 {
    let terrestrial: f64 = r
        .sites
        .iter()
        .filter(|s| s.served_users > 0)
        .map(|s| s.capacity_mbps)
        .sum();
    let haps = if r.haps_served_users > 0 {
        r.haps_capacity_mbps
    } else {
        0.0
    };
    terrestrial + haps
}

/// Utilization with each slot's denominator limited to the sites that were
/// switched on, i.e. served at least one user. A slot with nothing switched
/// on contributes zero.
pub fn capacity_utilization_switchoff(results: &[TimeSlotResult]) -> f64 {
    mean(results.iter().map(|r| {
        let cap = active_capacity_mbps(r);
        if cap > 0.0 {
            r.served_demand_mbps() / cap
        } else {
            0.0
        }
    }))
}

/// Capacity deployed in a slot: all terrestrial sites plus the HAPS payload.
pub fn deployed_capacity_mbps(r: &TimeSlotResult) -> f64 {
    r.sites.iter().map(|s| s.capacity_mbps).sum::<f64>() + r.haps_capacity_mbps
}

pub fn summarize(results: &[TimeSlotResult], power: PowerModel) -> Result<MetricsSummary> {
    let first = results
        .first()
        .ok_or(Error::UndefinedMetric("no time slots"))?;
    let total = deployed_capacity_mbps(first);
    Ok(MetricsSummary {
        proportion_served: proportion_served(results),
        utilization: capacity_utilization(results, total)?,
        utilization_switchoff: capacity_utilization_switchoff(results),
        power_kw: power.network_power_kw(total),
        power_switchoff_kw: mean(
            results
                .iter()
                .map(|r| power.network_power_kw(active_capacity_mbps(r))),
        ),
        total_capacity_mbps: total,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}
