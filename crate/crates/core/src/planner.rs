//! Greedy capacitated covering of rejected demand with added base stations.
//!
//! Each round places one site at the uncovered demand point that can absorb
//! the most demand, where "absorb" respects capacity slot by slot: within
//! each slot the uncovered points inside the radius are taken nearest first,
//! skipping any that would overflow the site. Points from different slots
//! share the capacity, since a site serves one slot at a time.
//!
//! On large logs the candidate set is thinned to one representative point
//! per square of side [`PlannerOptions::candidate_cell_m`]. Candidates are
//! re-scored lazily: a popped candidate is re-evaluated and kept only if it
//! still beats the best stale score.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::association::{run_simulation, DemandPoint, TimeSlotResult};
use crate::geometry::{CellSite, Position, SiteKind};
use crate::metrics::{summarize, MetricsSummary, PowerModel};
use crate::scenario::Scenario;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DensificationPlan {
    pub new_sites: Vec<CellSite>,
    pub input_point_count: usize,
    pub covered_point_count: usize,
    /// Site index in `new_sites` that each input point was assigned to.
    pub assignment: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerOptions {
    /// Side of the squares used to thin candidate positions. Zero makes every
    /// distinct point a candidate.
    pub candidate_cell_m: f64,
    /// Ids of new sites start here.
    pub first_site_id: u32,
}

impl PlannerOptions {
    pub fn for_radius(radius_m: f64) -> Self {
        Self {
            candidate_cell_m: radius_m / 4.0,
            first_site_id: 0,
        }
    }

    pub fn exact() -> Self {
        Self {
            candidate_cell_m: 0.0,
            first_site_id: 0,
        }
    }
}

/// Plans added sites for `points` with the default candidate thinning and
/// site ids starting at zero.
pub fn plan_sites(
    points: &[DemandPoint],
    radius_m: f64,
    capacity_mbps: f64,
) -> Result<DensificationPlan> {
    plan_sites_with(
        points,
        radius_m,
        capacity_mbps,
        PlannerOptions::for_radius(radius_m),
    )
}

pub fn plan_sites_with(
    points: &[DemandPoint],
    radius_m: f64,
    capacity_mbps: f64,
    opts: PlannerOptions,
) -> Result<DensificationPlan> {
    if radius_m.is_nan() || radius_m <= 0.0 || capacity_mbps.is_nan() || capacity_mbps <= 0.0 {
        return Err(Error::Config(alloc::format!(
            "planner needs positive radius and capacity, got {radius_m} m / {capacity_mbps} Mbps"
        )));
    }
    let offenders: Vec<usize> = points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.demand_mbps.is_nan() || p.demand_mbps > capacity_mbps)
        .map(|(i, _)| i)
        .collect();
    if !offenders.is_empty() {
        return Err(Error::InfeasiblePoints { offenders });
    }

    let mut planner = Planner::new(points, radius_m, capacity_mbps, opts.candidate_cell_m);
    let mut new_sites = Vec::new();
    let mut assignment = vec![usize::MAX; points.len()];

    let mut heap: BinaryHeap<Scored> = (0..planner.candidates.len())
        .filter_map(|c| {
            planner
                .score(c)
                .map(|(gain, _)| Scored { gain, candidate: c })
        })
        .collect();

    while planner.uncovered > 0 {
        let Some(top) = heap.pop() else { break };
        let Some((gain, centre)) = planner.score(top.candidate) else {
            continue;
        };
        let fresh = Scored {
            gain,
            candidate: top.candidate,
        };
        if let Some(next) = heap.peek() {
            if fresh < *next {
                heap.push(fresh);
                continue;
            }
        }
        let site_idx = new_sites.len();
        let (_, taken) = planner.pack(centre, true);
        for k in taken {
            planner.covered[k] = true;
            planner.uncovered -= 1;
            assignment[planner.orig[k]] = site_idx;
        }
        new_sites.push(CellSite {
            id: opts.first_site_id + site_idx as u32,
            position: Position::new(planner.xs[centre], planner.ys[centre]),
            kind: SiteKind::TerrestrialAdded,
            coverage_radius_m: radius_m,
            capacity_mbps,
        });
        heap.push(fresh);
    }
    debug_assert_eq!(planner.uncovered, 0);

    Ok(DensificationPlan {
        new_sites,
        input_point_count: points.len(),
        covered_point_count: points.len() - planner.uncovered,
        assignment,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Gain {
    demand: f64,
    count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Scored {
    gain: Gain,
    candidate: usize,
}

impl Eq for Scored {}

impl Ord for Scored {
    // Max-heap: larger demand, then more points, then the lower candidate.
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .demand
            .total_cmp(&other.gain.demand)
            .then(self.gain.count.cmp(&other.gain.count))
            .then(other.candidate.cmp(&self.candidate))
    }
}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Square buckets over a point set. Bucket `b` owns the index range
/// `start[b]..start[b + 1]` of the bucket-ordered point arrays.
struct Buckets {
    origin: Position,
    cell: f64,
    nx: usize,
    ny: usize,
    start: Vec<usize>,
}

impl Buckets {
    /// Returns the layout plus the original indices in bucket order.
    fn build(points: &[DemandPoint], cell: f64) -> (Self, Vec<usize>) {
        let mut min = Position::new(f64::MAX, f64::MAX);
        let mut max = Position::new(f64::MIN, f64::MIN);
        for p in points {
            min.x_m = min.x_m.min(p.position.x_m);
            min.y_m = min.y_m.min(p.position.y_m);
            max.x_m = max.x_m.max(p.position.x_m);
            max.y_m = max.y_m.max(p.position.y_m);
        }
        if points.is_empty() {
            min = Position::new(0.0, 0.0);
            max = min;
        }
        let nx = libm::floor((max.x_m - min.x_m) / cell) as usize + 1;
        let ny = libm::floor((max.y_m - min.y_m) / cell) as usize + 1;
        let mut b = Self {
            origin: min,
            cell,
            nx,
            ny,
            start: Vec::new(),
        };
        let keys: Vec<usize> = points.iter().map(|p| b.bucket_of(&p.position)).collect();
        let mut order: Vec<usize> = (0..points.len()).collect();
        // Stable, so members of a bucket stay in input order.
        order.sort_by_key(|&i| keys[i]);
        let mut start = vec![0; nx * ny + 1];
        for &k in &keys {
            start[k + 1] += 1;
        }
        for i in 0..nx * ny {
            start[i + 1] += start[i];
        }
        b.start = start;
        (b, order)
    }

    fn cell_of(&self, p: &Position) -> (usize, usize) {
        let cx = libm::floor((p.x_m - self.origin.x_m) / self.cell).max(0.0) as usize;
        let cy = libm::floor((p.y_m - self.origin.y_m) / self.cell).max(0.0) as usize;
        (cx.min(self.nx - 1), cy.min(self.ny - 1))
    }

    fn bucket_of(&self, p: &Position) -> usize {
        let (cx, cy) = self.cell_of(p);
        cy * self.nx + cx
    }

    /// Index ranges of the buckets that may hold points within `radius` of
    /// `centre`.
    fn ranges_near(&self, centre: &Position, radius: f64, out: &mut Vec<(usize, usize)>) {
        out.clear();
        let reach = libm::ceil(radius / self.cell) as usize;
        let (cx, cy) = self.cell_of(centre);
        let (x0, x1) = (cx.saturating_sub(reach), (cx + reach).min(self.nx - 1));
        let (y0, y1) = (cy.saturating_sub(reach), (cy + reach).min(self.ny - 1));
        for y in y0..=y1 {
            // Buckets in one row are contiguous.
            let lo = self.start[y * self.nx + x0];
            let hi = self.start[y * self.nx + x1 + 1];
            if lo < hi {
                out.push((lo, hi));
            }
        }
    }
}

/// Working state of one planning run. Points live in bucket order; `orig`
/// maps back to input indices.
struct Planner {
    radius_m: f64,
    capacity_mbps: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
    demand: Vec<f64>,
    ts: Vec<usize>,
    orig: Vec<usize>,
    covered: Vec<bool>,
    uncovered: usize,
    grid: Buckets,
    /// Members (bucket-order indices) of each candidate, ascending by input
    /// index. Candidates are ordered by their first member's input index.
    candidates: Vec<Vec<usize>>,
    slot_sum: Vec<f64>,
    slot_state: Vec<u8>,
    touched: Vec<usize>,
    ranges: Vec<(usize, usize)>,
    crowded: Vec<(usize, f64, usize)>,
}

const SLOT_UNSEEN: u8 = 0;
const SLOT_FITS: u8 = 1;
const SLOT_CROWDED: u8 = 2;

impl Planner {
    fn new(
        points: &[DemandPoint],
        radius_m: f64,
        capacity_mbps: f64,
        candidate_cell_m: f64,
    ) -> Self {
        let (grid, orig) = Buckets::build(points, radius_m / 2.0);
        let mut rank = vec![0; points.len()];
        for (k, &i) in orig.iter().enumerate() {
            rank[i] = k;
        }

        let mut groups: Vec<Vec<usize>> = if candidate_cell_m > 0.0 {
            let (cgrid, corder) = Buckets::build(points, candidate_cell_m);
            cgrid
                .start
                .windows(2)
                .filter(|w| w[0] < w[1])
                .map(|w| corder[w[0]..w[1]].to_vec())
                .collect()
        } else {
            let mut order: Vec<usize> = (0..points.len()).collect();
            order.sort_by(|&a, &b| {
                let (pa, pb) = (points[a].position, points[b].position);
                pa.x_m
                    .total_cmp(&pb.x_m)
                    .then(pa.y_m.total_cmp(&pb.y_m))
                    .then(a.cmp(&b))
            });
            let mut groups: Vec<Vec<usize>> = Vec::new();
            for i in order {
                match groups.last_mut() {
                    Some(g) if points[g[0]].position == points[i].position => g.push(i),
                    _ => groups.push(vec![i]),
                }
            }
            groups
        };
        for g in groups.iter_mut() {
            g.sort_unstable();
        }
        groups.sort_by_key(|g| g[0]);
        let candidates = groups
            .into_iter()
            .map(|g| g.into_iter().map(|i| rank[i]).collect())
            .collect();

        let slots = points.iter().map(|p| p.ts_index + 1).max().unwrap_or(0);
        Self {
            radius_m,
            capacity_mbps,
            xs: orig.iter().map(|&i| points[i].position.x_m).collect(),
            ys: orig.iter().map(|&i| points[i].position.y_m).collect(),
            demand: orig.iter().map(|&i| points[i].demand_mbps).collect(),
            ts: orig.iter().map(|&i| points[i].ts_index).collect(),
            orig,
            covered: vec![false; points.len()],
            uncovered: points.len(),
            grid,
            candidates,
            slot_sum: vec![0.0; slots],
            slot_state: vec![SLOT_UNSEEN; slots],
            touched: Vec::new(),
            ranges: Vec::new(),
            crowded: Vec::new(),
        }
    }

    /// Lowest-input-index uncovered member of candidate `c`.
    fn centre_of(&self, c: usize) -> Option<usize> {
        self.candidates[c]
            .iter()
            .copied()
            .find(|&k| !self.covered[k])
    }

    fn score(&mut self, c: usize) -> Option<(Gain, usize)> {
        let centre = self.centre_of(c)?;
        Some((self.pack(centre, false).0, centre))
    }

    /// Demand a site at point `centre` would absorb: per slot, uncovered
    /// points within the radius are taken nearest first while they fit.
    /// With `collect`, also returns the taken points.
    fn pack(&mut self, centre: usize, collect: bool) -> (Gain, Vec<usize>) {
        let (cx, cy) = (self.xs[centre], self.ys[centre]);
        let r2 = self.radius_m * self.radius_m;
        let mut ranges = core::mem::take(&mut self.ranges);
        self.grid
            .ranges_near(&Position::new(cx, cy), self.radius_m, &mut ranges);

        let within = |p: &Self, k: usize| {
            let (dx, dy) = (p.xs[k] - cx, p.ys[k] - cy);
            !p.covered[k] && dx * dx + dy * dy <= r2
        };

        self.touched.clear();
        let mut in_range = 0;
        for &(lo, hi) in &ranges {
            for k in lo..hi {
                if within(self, k) {
                    in_range += 1;
                    let t = self.ts[k];
                    if self.slot_state[t] == SLOT_UNSEEN {
                        self.slot_state[t] = SLOT_FITS;
                        self.touched.push(t);
                    }
                    self.slot_sum[t] += self.demand[k];
                }
            }
        }
        let mut any_crowded = false;
        for &t in &self.touched {
            if self.slot_sum[t] > self.capacity_mbps {
                self.slot_state[t] = SLOT_CROWDED;
                any_crowded = true;
            }
        }

        let mut gain = Gain {
            demand: 0.0,
            count: 0,
        };
        let mut taken = Vec::new();
        self.crowded.clear();
        if collect || any_crowded {
            for &(lo, hi) in &ranges {
                for k in lo..hi {
                    if !within(self, k) {
                        continue;
                    }
                    let t = self.ts[k];
                    if self.slot_state[t] == SLOT_CROWDED {
                        let (dx, dy) = (self.xs[k] - cx, self.ys[k] - cy);
                        self.crowded.push((t, dx * dx + dy * dy, k));
                    } else {
                        gain.demand += self.demand[k];
                        gain.count += 1;
                        if collect {
                            taken.push(k);
                        }
                    }
                }
            }
            self.crowded.sort_by(|a, b| {
                a.0.cmp(&b.0)
                    .then(a.1.total_cmp(&b.1))
                    .then(self.orig[a.2].cmp(&self.orig[b.2]))
            });
            let mut i = 0;
            while i < self.crowded.len() {
                let t = self.crowded[i].0;
                let mut load = 0.0;
                while i < self.crowded.len() && self.crowded[i].0 == t {
                    let k = self.crowded[i].2;
                    if load + self.demand[k] <= self.capacity_mbps {
                        load += self.demand[k];
                        gain.demand += self.demand[k];
                        gain.count += 1;
                        if collect {
                            taken.push(k);
                        }
                    }
                    i += 1;
                }
            }
        } else {
            for &t in &self.touched {
                gain.demand += self.slot_sum[t];
            }
            gain.count = in_range;
        }

        for &t in &self.touched {
            self.slot_sum[t] = 0.0;
            self.slot_state[t] = SLOT_UNSEEN;
        }
        self.ranges = ranges;
        (gain, taken)
    }
}

/// Result of replaying a scenario on the initial grid plus a plan's sites.
#[derive(Debug, Clone)]
pub struct PlanEvaluation {
    pub summary: MetricsSummary,
    pub results: Vec<TimeSlotResult>,
}

/// Re-runs `scenario` (without HAPS) on `initial_sites` plus the plan's new
/// sites.
pub fn evaluate_plan(
    scenario: &Scenario,
    initial_sites: &[CellSite],
    plan: &DensificationPlan,
    power: PowerModel,
) -> Result<PlanEvaluation> {
    let scenario = Scenario {
        haps_capacity_mbps: 0.0,
        ..scenario.clone()
    };
    let mut sites = initial_sites.to_vec();
    sites.extend(plan.new_sites.iter().cloned());
    let results = run_simulation(&scenario, &sites)?;
    let summary = summarize(&results, power)?;
    Ok(PlanEvaluation { summary, results })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64, d: f64, ts: usize) -> DemandPoint {
        DemandPoint {
            position: Position::new(x, y),
            demand_mbps: d,
            ts_index: ts,
        }
    }

    #[test]
    fn empty_input() {
        let plan = plan_sites(&[], 700.0, 1000.0).unwrap();
        assert!(plan.new_sites.is_empty());
        assert_eq!(plan.input_point_count, 0);
    }

    #[test]
    fn one_disc_one_site() {
        let pts = [
            pt(0.0, 0.0, 200.0, 0),
            pt(300.0, 0.0, 300.0, 0),
            pt(0.0, 300.0, 400.0, 0),
        ];
        let plan = plan_sites_with(&pts, 700.0, 1000.0, PlannerOptions::exact()).unwrap();
        assert_eq!(plan.new_sites.len(), 1);
        assert_eq!(plan.covered_point_count, 3);
    }

    #[test]
    fn capacity_splits_same_slot() {
        let pts = [pt(0.0, 0.0, 600.0, 0), pt(10.0, 0.0, 600.0, 0)];
        let plan = plan_sites_with(&pts, 700.0, 1000.0, PlannerOptions::exact()).unwrap();
        assert_eq!(plan.new_sites.len(), 2);
        // Different slots share one site.
        let pts = [pt(0.0, 0.0, 600.0, 0), pt(10.0, 0.0, 600.0, 1)];
        let plan = plan_sites_with(&pts, 700.0, 1000.0, PlannerOptions::exact()).unwrap();
        assert_eq!(plan.new_sites.len(), 1);
    }

    #[test]
    fn infeasible_points_listed() {
        let pts = [
            pt(0.0, 0.0, 10.0, 0),
            pt(0.0, 0.0, 1200.0, 0),
            pt(5.0, 0.0, 1001.0, 2),
        ];
        assert_eq!(
            plan_sites(&pts, 700.0, 1000.0),
            Err(Error::InfeasiblePoints {
                offenders: vec![1, 2]
            })
        );
        assert!(plan_sites(&pts, 0.0, 1000.0).is_err());
    }

    #[test]
    fn zero_demand_points_still_covered() {
        let pts = [pt(0.0, 0.0, 0.0, 0), pt(5000.0, 0.0, 0.0, 0)];
        let plan = plan_sites(&pts, 700.0, 1000.0).unwrap();
        assert_eq!(plan.new_sites.len(), 2);
    }

    #[test]
    fn duplicate_positions() {
        let pts = [
            pt(1.0, 1.0, 700.0, 0),
            pt(1.0, 1.0, 700.0, 0),
            pt(1.0, 1.0, 700.0, 0),
        ];
        let plan = plan_sites_with(&pts, 700.0, 1000.0, PlannerOptions::exact()).unwrap();
        assert_eq!(plan.new_sites.len(), 3);
        assert_eq!(plan.covered_point_count, 3);
    }
}
