//! Area geometry, site placement and coverage tests.

use alloc::vec::Vec;

use crate::scenario::Scenario;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x_m: f64,
    pub y_m: f64,
}

impl Position {
    pub const fn new(x_m: f64, y_m: f64) -> Self {
        Self { x_m, y_m }
    }

    pub fn distance_sq(&self, other: &Position) -> f64 {
        let dx = self.x_m - other.x_m;
        let dy = self.y_m - other.y_m;
        dx * dx + dy * dy
    }

    pub fn distance(&self, other: &Position) -> f64 {
        libm::sqrt(self.distance_sq(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SiteKind {
    TerrestrialInitial,
    TerrestrialAdded,
    Haps,
}

impl SiteKind {
    pub fn is_terrestrial(self) -> bool {
        !matches!(self, SiteKind::Haps)
    }
}

/// A serving node: initial base station, densification site or HAPS.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSite {
    pub id: u32,
    pub position: Position,
    pub kind: SiteKind,
    /// Ignored for [`SiteKind::Haps`], whose footprint spans the whole area.
    pub coverage_radius_m: f64,
    pub capacity_mbps: f64,
}

impl CellSite {
    /// A HAPS hovering over the centre of the scenario area.
    pub fn haps(id: u32, scenario: &Scenario, capacity_mbps: f64) -> Self {
        Self {
            id,
            position: Position::new(scenario.area_width_m / 2.0, scenario.area_height_m / 2.0),
            kind: SiteKind::Haps,
            coverage_radius_m: f64::INFINITY,
            capacity_mbps,
        }
    }
}

/// Uniform cell-centred grid of `bs_rows x bs_cols` initial base stations.
///
/// Site `(i, j)` sits at `((j + 0.5) * w / cols, (i + 0.5) * h / rows)` and
/// gets id `i * cols + j`.
pub fn place_initial_grid(scenario: &Scenario) -> Result<Vec<CellSite>> {
    scenario.validate()?;
    let dx = scenario.area_width_m / scenario.bs_cols as f64;
    let dy = scenario.area_height_m / scenario.bs_rows as f64;
    let mut sites = Vec::with_capacity(scenario.bs_rows * scenario.bs_cols);
    for i in 0..scenario.bs_rows {
        for j in 0..scenario.bs_cols {
            sites.push(CellSite {
                id: (i * scenario.bs_cols + j) as u32,
                position: Position::new((j as f64 + 0.5) * dx, (i as f64 + 0.5) * dy),
                kind: SiteKind::TerrestrialInitial,
                coverage_radius_m: scenario.bs_coverage_radius_m,
                capacity_mbps: scenario.bs_capacity_mbps,
            });
        }
    }
    Ok(sites)
}

/// Boundary inclusive. A HAPS covers every point.
pub fn in_coverage(site: &CellSite, p: &Position) -> bool {
    match site.kind {
        SiteKind::Haps => true,
        _ => site.position.distance_sq(p) <= site.coverage_radius_m * site.coverage_radius_m,
    }
}

/// Closest terrestrial site to `p`, ties going to the lowest id.
pub fn nearest_site<'a>(sites: &'a [CellSite], p: &Position) -> Result<&'a CellSite> {
    let mut best: Option<(&CellSite, f64)> = None;
    for site in sites.iter().filter(|s| s.kind.is_terrestrial()) {
        let d = site.position.distance_sq(p);
        best = match best {
            Some((b, bd)) if bd < d || (bd == d && b.id < site.id) => Some((b, bd)),
            _ => Some((site, d)),
        };
    }
    best.map(|(s, _)| s).ok_or(Error::NoTerrestrialSite)
}
