//! CSV formats: per-slot tallies, rejected-demand logs, plans, summaries,
//! sweep records and trajectory dumps.

use std::io::{Read, Write};

use hapsim_core::geometry::{CellSite, Position, SiteKind};
use hapsim_core::{DemandPoint, MetricsSummary, RejectReason, TimeSlotResult, UserState};
use serde::{Deserialize, Serialize};

use crate::runner::SweepRecord;
use crate::Result;

#[derive(Debug, Serialize)]
struct SlotRow {
    ts: usize,
    site_id: u32,
    served_demand_mbps: f64,
    served_users: usize,
    rejected_coverage_count: usize,
    rejected_capacity_count: usize,
    haps_served_demand_mbps: f64,
}

/// One row per (slot, terrestrial site).
pub fn write_slot_results<W: Write>(out: W, results: &[TimeSlotResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        for s in &r.sites {
            w.serialize(SlotRow {
                ts: r.ts_index,
                site_id: s.site_id,
                served_demand_mbps: s.served_demand_mbps,
                served_users: s.served_users,
                rejected_coverage_count: s.rejected_coverage,
                rejected_capacity_count: s.rejected_capacity,
                haps_served_demand_mbps: r.haps_served_demand_mbps,
            })?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct PointRow {
    ts: usize,
    x_m: f64,
    y_m: f64,
    demand_mbps: f64,
    #[serde(default)]
    reason: String,
}

/// The unserved demand of a run, one row per rejected user and slot.
pub fn write_rejections<W: Write>(out: W, results: &[TimeSlotResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        for rej in &r.rejected {
            w.serialize(PointRow {
                ts: rej.point.ts_index,
                x_m: rej.point.position.x_m,
                y_m: rej.point.position.y_m,
                demand_mbps: rej.point.demand_mbps,
                reason: match rej.reason {
                    RejectReason::Coverage => "coverage".into(),
                    RejectReason::Capacity => "capacity".into(),
                },
            })?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_demand_points<R: Read>(input: R) -> Result<Vec<DemandPoint>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<PointRow>()
        .map(|row| {
            let row = row?;
            Ok(DemandPoint {
                position: Position::new(row.x_m, row.y_m),
                demand_mbps: row.demand_mbps,
                ts_index: row.ts,
            })
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct SiteRow {
    site_id: u32,
    x_m: f64,
    y_m: f64,
    capacity_mbps: f64,
}

pub fn write_plan<W: Write>(out: W, sites: &[CellSite]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in sites {
        w.serialize(SiteRow {
            site_id: s.id,
            x_m: s.position.x_m,
            y_m: s.position.y_m,
            capacity_mbps: s.capacity_mbps,
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads added sites back; they take `radius_m` as coverage radius.
pub fn read_plan<R: Read>(input: R, radius_m: f64) -> Result<Vec<CellSite>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<SiteRow>()
        .map(|row| {
            let row = row?;
            Ok(CellSite {
                id: row.site_id,
                position: Position::new(row.x_m, row.y_m),
                kind: SiteKind::TerrestrialAdded,
                coverage_radius_m: radius_m,
                capacity_mbps: row.capacity_mbps,
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct SummaryRow {
    proportion_served: f64,
    utilization: f64,
    utilization_switchoff: f64,
    power_kw: f64,
    power_switchoff_kw: f64,
    total_capacity_mbps: f64,
}

pub fn write_summary<W: Write>(out: W, m: &MetricsSummary) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.serialize(SummaryRow {
        proportion_served: m.proportion_served,
        utilization: m.utilization,
        utilization_switchoff: m.utilization_switchoff,
        power_kw: m.power_kw,
        power_switchoff_kw: m.power_switchoff_kw,
        total_capacity_mbps: m.total_capacity_mbps,
    })?;
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Aligned text using the comparison-table row labels.
pub fn format_summary_table(columns: &[(&str, &MetricsSummary)]) -> String {
    let mut out = String::new();
    let width = 22;
    out.push_str(&format!("{:<28}", "Feature"));
    for (name, _) in columns {
        out.push_str(&format!("{name:>width$}"));
    }
    out.push('\n');
    type Cell = fn(&MetricsSummary) -> String;
    let rows: [(&str, Cell); 5] = [
        ("Available Capacity", |m| {
            format!("{:.1} Gbps", m.total_capacity_mbps / 1000.0)
        }),
        ("Proportion of Users Served", |m| {
            format!("{:.2}%", m.proportion_served * 100.0)
        }),
        ("Capacity Utilization", |m| {
            format!("{:.1}%", m.utilization * 100.0)
        }),
        ("Utilization (switch-off)", |m| {
            format!("{:.1}%", m.utilization_switchoff * 100.0)
        }),
        ("Network Power Consumption", |m| {
            format!("{:.1} kW", m.power_kw)
        }),
    ];
    for (label, f) in rows {
        out.push_str(&format!("{label:<28}"));
        for (_, m) in columns {
            out.push_str(&format!("{:>width$}", f(m)));
        }
        out.push('\n');
    }
    out
}

pub fn write_sweep<W: Write>(out: W, records: &[SweepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Streaming writer for `ts,user_id,x_m,y_m,demand_mbps` rows.
pub struct TrajectoryWriter<W: Write> {
    inner: csv::Writer<W>,
}

#[derive(Serialize)]
struct TrajectoryRow {
    ts: usize,
    user_id: u32,
    x_m: f64,
    y_m: f64,
    demand_mbps: f64,
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(out: W) -> Self {
        Self {
            inner: csv::Writer::from_writer(out),
        }
    }

    pub fn write_slot(&mut self, ts: usize, users: &[UserState]) -> Result<()> {
        for u in users {
            self.inner.serialize(TrajectoryRow {
                ts,
                user_id: u.id,
                x_m: u.position.x_m,
                y_m: u.position.y_m,
                demand_mbps: u.demand_mbps,
            })?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_round_trip() {
        let sites = vec![
            CellSite {
                id: 36,
                position: Position::new(123.456789, 7999.0),
                kind: SiteKind::TerrestrialAdded,
                coverage_radius_m: 700.0,
                capacity_mbps: 1000.0,
            },
            CellSite {
                id: 37,
                position: Position::new(0.1 + 0.2, 1.0 / 3.0),
                kind: SiteKind::TerrestrialAdded,
                coverage_radius_m: 700.0,
                capacity_mbps: 1000.0,
            },
        ];
        let mut buf = Vec::new();
        write_plan(&mut buf, &sites).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("site_id,x_m,y_m,capacity_mbps\n"));
        assert_eq!(read_plan(buf.as_slice(), 700.0).unwrap(), sites);
    }

    #[test]
    fn demand_log_without_reason_column() {
        let text = "ts,x_m,y_m,demand_mbps\n0,1.5,2.5,30.0\n3,10,20,0.5\n";
        let pts = read_demand_points(text.as_bytes()).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].ts_index, 3);
        assert_eq!(pts[1].position, Position::new(10.0, 20.0));
    }
}
