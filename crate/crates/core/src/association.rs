//! Per-slot user association with coverage and capacity admission, the HAPS
//! overlay, and the slot loop that ties mobility, demand and association
//! together.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::geometry::{in_coverage, CellSite, Position, SiteKind};
use crate::mobility::{init_users, sample_demands, step_mobility, Assignment, UserState};
use crate::rng::Streams;
use crate::scenario::{AdmissionRule, Scenario};
use crate::site_index::SiteIndex;
use crate::{Error, Result};

/// A demand that went unserved in some slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandPoint {
    pub position: Position,
    pub demand_mbps: f64,
    pub ts_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    Coverage,
    Capacity,
}

/// One user turned away by its nearest terrestrial site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rejection {
    pub user_id: u32,
    /// The nearest site that refused the user.
    pub site_id: u32,
    pub reason: RejectReason,
    pub point: DemandPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiteTally {
    pub site_id: u32,
    pub capacity_mbps: f64,
    pub served_demand_mbps: f64,
    pub served_users: usize,
    pub rejected_coverage: usize,
    pub rejected_capacity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSlotResult {
    pub ts_index: usize,
    /// One tally per terrestrial site, in input order.
    pub sites: Vec<SiteTally>,
    /// Users still unserved after association (and after the overlay, when
    /// one ran), in the order they were processed.
    pub rejected: Vec<Rejection>,
    /// Zero when no HAPS is deployed.
    pub haps_capacity_mbps: f64,
    pub haps_served_demand_mbps: f64,
    pub haps_served_users: usize,
    pub dropped_users: usize,
    pub active_users: usize,
}

impl TimeSlotResult {
    pub fn terrestrial_served_users(&self) -> usize {
        self.sites.iter().map(|s| s.served_users).sum()
    }

    pub fn terrestrial_served_demand_mbps(&self) -> f64 {
        self.sites.iter().map(|s| s.served_demand_mbps).sum()
    }

    pub fn served_users(&self) -> usize {
        self.terrestrial_served_users() + self.haps_served_users
    }

    pub fn served_demand_mbps(&self) -> f64 {
        self.terrestrial_served_demand_mbps() + self.haps_served_demand_mbps
    }

    pub fn rejected_points(&self) -> impl Iterator<Item = DemandPoint> + '_ {
        self.rejected.iter().map(|r| r.point)
    }
}

/// Associates every user with its nearest terrestrial site.
///
/// Users contend in a uniformly random order drawn from `rng`. A user outside
/// its nearest site's coverage is rejected for coverage; one whose demand
/// exceeds the residual capacity is rejected for capacity (and, under
/// [`AdmissionRule::CloseOnOverflow`], so is everyone after it at that site);
/// anyone else is admitted in full. There is no fallback to a farther site.
pub fn associate_slot<R: Rng + ?Sized>(
    users: &mut [UserState],
    sites: &[CellSite],
    scenario: &Scenario,
    ts_index: usize,
    rng: &mut R,
) -> Result<TimeSlotResult> {
    let index = SiteIndex::new(sites, scenario.area_width_m, scenario.area_height_m);
    let mut order: Vec<usize> = (0..users.len()).collect();
    associate_indexed(
        users,
        sites,
        &index,
        scenario.admission,
        ts_index,
        &mut order,
        rng,
    )
}

/// The order in which `n` contenders are offered capacity: a uniformly random
/// permutation of `0..n`. [`associate_slot`] and [`haps_overlay`] each draw
/// exactly one such permutation from the generator they are given.
pub fn contention_order<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut order = Vec::with_capacity(n);
    fill_order(&mut order, n, rng);
    order
}

fn fill_order<R: Rng + ?Sized>(order: &mut Vec<usize>, n: usize, rng: &mut R) {
    order.clear();
    order.extend(0..n);
    order.shuffle(rng);
}

fn associate_indexed<R: Rng + ?Sized>(
    users: &mut [UserState],
    sites: &[CellSite],
    index: &SiteIndex,
    rule: AdmissionRule,
    ts_index: usize,
    order: &mut Vec<usize>,
    rng: &mut R,
) -> Result<TimeSlotResult> {
    // Tally slot for every site position in `sites`; HAPS entries stay unused.
    let mut tally_of = Vec::with_capacity(sites.len());
    let mut tallies = Vec::new();
    for s in sites {
        if s.kind.is_terrestrial() {
            tally_of.push(tallies.len());
            tallies.push(SiteTally {
                site_id: s.id,
                capacity_mbps: s.capacity_mbps,
                served_demand_mbps: 0.0,
                served_users: 0,
                rejected_coverage: 0,
                rejected_capacity: 0,
            });
        } else {
            tally_of.push(usize::MAX);
        }
    }
    if tallies.is_empty() {
        return Err(Error::NoTerrestrialSite);
    }

    fill_order(order, users.len(), rng);

    let mut closed = alloc::vec![false; tallies.len()];
    let mut rejected = Vec::new();
    for &ui in order.iter() {
        let user = &mut users[ui];
        let si = index
            .nearest(&user.position)
            .ok_or(Error::NoTerrestrialSite)?;
        let site = &sites[si];
        let ti = tally_of[si];
        let tally = &mut tallies[ti];
        let reason = if !in_coverage(site, &user.position) {
            tally.rejected_coverage += 1;
            Some(RejectReason::Coverage)
        } else if closed[ti] || site.capacity_mbps - tally.served_demand_mbps < user.demand_mbps {
            closed[ti] = rule == AdmissionRule::CloseOnOverflow;
            tally.rejected_capacity += 1;
            Some(RejectReason::Capacity)
        } else {
            tally.served_demand_mbps += user.demand_mbps;
            tally.served_users += 1;
            None
        };
        match reason {
            None => user.assignment = Assignment::ServedBy(site.id),
            Some(reason) => {
                user.assignment = match reason {
                    RejectReason::Coverage => Assignment::RejectedCoverage,
                    RejectReason::Capacity => Assignment::RejectedCapacity,
                };
                rejected.push(Rejection {
                    user_id: user.id,
                    site_id: site.id,
                    reason,
                    point: DemandPoint {
                        position: user.position,
                        demand_mbps: user.demand_mbps,
                        ts_index,
                    },
                });
            }
        }
    }

    Ok(TimeSlotResult {
        ts_index,
        sites: tallies,
        dropped_users: rejected.len(),
        rejected,
        haps_capacity_mbps: 0.0,
        haps_served_demand_mbps: 0.0,
        haps_served_users: 0,
        active_users: users.len(),
    })
}

/// Offers every rejected user to the HAPS in a random order and admits each
/// one whose demand fits the residual HAPS capacity. Under
/// [`AdmissionRule::CloseOnOverflow`] the first misfit closes the HAPS.
///
/// `users` is indexed by user id; admitted users are marked
/// [`Assignment::ServedByHaps`], the rest [`Assignment::Dropped`].
pub fn haps_overlay<R: Rng + ?Sized>(
    result: &mut TimeSlotResult,
    users: &mut [UserState],
    haps: &CellSite,
    rule: AdmissionRule,
    rng: &mut R,
) {
    debug_assert_eq!(haps.kind, SiteKind::Haps);
    result.haps_capacity_mbps = haps.capacity_mbps;
    if result.rejected.is_empty() {
        return;
    }
    let order = contention_order(result.rejected.len(), rng);

    let mut residual = haps.capacity_mbps;
    let mut open = true;
    let mut admitted = alloc::vec![false; result.rejected.len()];
    for i in order {
        let r = &result.rejected[i];
        let fits = open && residual >= r.point.demand_mbps;
        if !fits && rule == AdmissionRule::CloseOnOverflow {
            open = false;
        }
        if fits {
            residual -= r.point.demand_mbps;
            result.haps_served_demand_mbps += r.point.demand_mbps;
            result.haps_served_users += 1;
            admitted[i] = true;
        }
        if let Some(u) = users.get_mut(r.user_id as usize) {
            u.assignment = if fits {
                Assignment::ServedByHaps
            } else {
                Assignment::Dropped
            };
        }
    }
    let mut k = 0;
    result.rejected.retain(|_| {
        k += 1;
        !admitted[k - 1]
    });
    result.dropped_users = result.rejected.len();
}

/// A simulation run that can be stepped one slot at a time.
pub struct Simulation {
    scenario: Scenario,
    sites: Vec<CellSite>,
    index: SiteIndex,
    haps: Option<CellSite>,
    users: Vec<UserState>,
    streams: Streams,
    order: Vec<usize>,
    next_ts: usize,
}

impl Simulation {
    /// Terrestrial service comes from the terrestrial entries of `sites`. A
    /// HAPS is added when `scenario.haps_capacity_mbps > 0`.
    pub fn new(scenario: &Scenario, sites: &[CellSite]) -> Result<Self> {
        scenario.validate()?;
        if !sites.iter().any(|s| s.kind.is_terrestrial()) {
            return Err(Error::NoTerrestrialSite);
        }
        let sites: Vec<CellSite> = sites
            .iter()
            .filter(|s| s.kind.is_terrestrial())
            .cloned()
            .collect();
        let haps = (scenario.haps_capacity_mbps > 0.0).then(|| {
            let id = sites.iter().map(|s| s.id).max().unwrap_or(0) + 1;
            CellSite::haps(id, scenario, scenario.haps_capacity_mbps)
        });
        let mut streams = Streams::new(scenario.seed);
        let users = init_users(
            scenario,
            &mut streams.positions,
            &mut streams.waypoints,
            &mut streams.speeds,
        );
        Ok(Self {
            index: SiteIndex::new(&sites, scenario.area_width_m, scenario.area_height_m),
            scenario: scenario.clone(),
            sites,
            haps,
            users,
            streams,
            order: Vec::new(),
            next_ts: 0,
        })
    }

    pub fn users(&self) -> &[UserState] {
        &self.users
    }

    pub fn haps(&self) -> Option<&CellSite> {
        self.haps.as_ref()
    }

    /// Runs the next slot, or returns `None` once `num_ts` slots are done.
    pub fn step(&mut self) -> Option<TimeSlotResult> {
        if self.next_ts >= self.scenario.num_ts {
            return None;
        }
        let s = &mut self.streams;
        step_mobility(
            &mut self.users,
            &self.scenario,
            &mut s.waypoints,
            &mut s.speeds,
            &mut s.pauses,
        );
        sample_demands(
            &mut self.users,
            self.scenario.demand_sigma_mbps,
            &mut s.demands,
        );
        let mut result = associate_indexed(
            &mut self.users,
            &self.sites,
            &self.index,
            self.scenario.admission,
            self.next_ts,
            &mut self.order,
            &mut s.admission,
        )
        .expect("terrestrial site presence checked at construction");
        if let Some(haps) = &self.haps {
            haps_overlay(
                &mut result,
                &mut self.users,
                haps,
                self.scenario.admission,
                &mut s.haps,
            );
        }
        self.next_ts += 1;
        Some(result)
    }
}

impl Iterator for Simulation {
    type Item = TimeSlotResult;

    fn next(&mut self) -> Option<TimeSlotResult> {
        self.step()
    }
}

/// Runs all `num_ts` slots and collects their results.
pub fn run_simulation(scenario: &Scenario, sites: &[CellSite]) -> Result<Vec<TimeSlotResult>> {
    Ok(Simulation::new(scenario, sites)?.collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::place_initial_grid;
    use crate::rng::{stream, StreamId};

    fn user(id: u32, x: f64, y: f64, demand: f64) -> UserState {
        UserState {
            id,
            position: Position::new(x, y),
            waypoint: Position::new(x, y),
            speed_mps: 0.0,
            paused: false,
            demand_mbps: demand,
            assignment: Assignment::Dropped,
        }
    }

    fn one_cell() -> (Scenario, Vec<CellSite>) {
        let s = Scenario {
            area_width_m: 1000.0,
            area_height_m: 1000.0,
            bs_rows: 1,
            bs_cols: 1,
            ..Scenario::default()
        };
        let sites = place_initial_grid(&s).unwrap();
        (s, sites)
    }

    #[test]
    fn single_user_served() {
        let (s, sites) = one_cell();
        let mut users = [user(0, 500.0, 600.0, 5.0)];
        let mut rng = stream(1, StreamId::Admission);
        let r = associate_slot(&mut users, &sites, &s, 0, &mut rng).unwrap();
        assert_eq!(r.sites[0].served_demand_mbps, 5.0);
        assert_eq!(r.served_users(), 1);
        assert_eq!(users[0].assignment, Assignment::ServedBy(0));
        assert!(r.rejected.is_empty());
    }

    #[test]
    fn capacity_admits_one_of_three() {
        let (s, sites) = one_cell();
        for seed in 0..20 {
            let mut users = [
                user(0, 500.0, 500.0, 600.0),
                user(1, 510.0, 500.0, 600.0),
                user(2, 520.0, 500.0, 600.0),
            ];
            let mut rng = stream(seed, StreamId::Admission);
            let r = associate_slot(&mut users, &sites, &s, 0, &mut rng).unwrap();
            assert_eq!(r.served_users(), 1);
            assert_eq!(r.sites[0].rejected_capacity, 2);
            assert!(r
                .rejected
                .iter()
                .all(|x| x.reason == RejectReason::Capacity));
        }
    }

    #[test]
    fn corner_user_out_of_coverage() {
        let s = Scenario::default();
        let sites = place_initial_grid(&s).unwrap();
        let mut users = [user(0, 0.0, 0.0, 1.0)];
        let mut rng = stream(1, StreamId::Admission);
        let r = associate_slot(&mut users, &sites, &s, 3, &mut rng).unwrap();
        assert_eq!(users[0].assignment, Assignment::RejectedCoverage);
        assert_eq!(r.rejected[0].reason, RejectReason::Coverage);
        assert_eq!(r.rejected[0].point.ts_index, 3);
        assert_eq!(r.sites[0].rejected_coverage, 1);
    }

    #[test]
    fn overlay_without_rejections_is_noop() {
        let (s, sites) = one_cell();
        let mut users = [user(0, 500.0, 500.0, 5.0)];
        let mut rng = stream(1, StreamId::Admission);
        let mut r = associate_slot(&mut users, &sites, &s, 0, &mut rng).unwrap();
        let before = r.clone();
        let haps = CellSite::haps(9, &s, 2000.0);
        haps_overlay(
            &mut r,
            &mut users,
            &haps,
            AdmissionRule::SkipOverflow,
            &mut rng,
        );
        assert_eq!(r.rejected, before.rejected);
        assert_eq!(r.haps_served_users, 0);
        assert_eq!(r.dropped_users, 0);
    }

    #[test]
    fn overlay_absorbs_everything_that_fits() {
        let (s, sites) = one_cell();
        let mut users = [
            user(0, 500.0, 500.0, 900.0),
            user(1, 500.0, 500.0, 600.0),
            user(2, 500.0, 500.0, 500.0),
            user(3, 500.0, 500.0, 400.0),
        ];
        let mut rng = stream(4, StreamId::Admission);
        let mut r = associate_slot(&mut users, &sites, &s, 0, &mut rng).unwrap();
        let rejected_total: f64 = r.rejected.iter().map(|x| x.point.demand_mbps).sum();
        assert!(rejected_total <= 2000.0);
        let haps = CellSite::haps(9, &s, 2000.0);
        haps_overlay(
            &mut r,
            &mut users,
            &haps,
            AdmissionRule::SkipOverflow,
            &mut rng,
        );
        assert_eq!(r.dropped_users, 0);
        assert_eq!(r.served_users(), 4);
        assert!(r.rejected.is_empty());
    }

    #[test]
    fn overlay_first_fit_order() {
        let (s, _) = one_cell();
        let rej = |id: u32, d: f64| Rejection {
            user_id: id,
            site_id: 0,
            reason: RejectReason::Capacity,
            point: DemandPoint {
                position: Position::new(0.0, 0.0),
                demand_mbps: d,
                ts_index: 0,
            },
        };
        let haps = CellSite::haps(9, &s, 2000.0);
        let mut saw = [false, false];
        for seed in 0..32 {
            let mut r = TimeSlotResult {
                ts_index: 0,
                sites: Vec::new(),
                rejected: alloc::vec![rej(0, 1500.0), rej(1, 800.0)],
                haps_capacity_mbps: 0.0,
                haps_served_demand_mbps: 0.0,
                haps_served_users: 0,
                dropped_users: 2,
                active_users: 2,
            };
            let mut users = [user(0, 0.0, 0.0, 1500.0), user(1, 0.0, 0.0, 800.0)];
            let mut rng = stream(seed, StreamId::HapsAdmission);
            haps_overlay(
                &mut r,
                &mut users,
                &haps,
                AdmissionRule::SkipOverflow,
                &mut rng,
            );
            assert_eq!(r.haps_served_users, 1);
            assert_eq!(r.dropped_users, 1);
            let admitted_big = users[0].assignment == Assignment::ServedByHaps;
            saw[admitted_big as usize] = true;
            if admitted_big {
                assert_eq!(users[1].assignment, Assignment::Dropped);
            }
        }
        assert!(saw[0] && saw[1], "both orders should occur over 32 seeds");
    }

    #[test]
    fn zero_sigma_single_slot() {
        let s = Scenario {
            num_ts: 1,
            demand_sigma_mbps: 0.0,
            active_user_count: 300,
            ..Scenario::default()
        };
        let sites = place_initial_grid(&s).unwrap();
        let r = run_simulation(&s, &sites).unwrap();
        assert_eq!(r.len(), 1);
        let r = &r[0];
        assert_eq!(r.served_demand_mbps(), 0.0);
        assert!(r
            .rejected
            .iter()
            .all(|x| x.reason == RejectReason::Coverage));
        assert_eq!(r.served_users() + r.dropped_users, 300);
    }

    #[test]
    fn needs_terrestrial_site() {
        let s = Scenario::default();
        let haps = CellSite::haps(0, &s, 2000.0);
        assert!(matches!(
            Simulation::new(&s, &[haps]),
            Err(Error::NoTerrestrialSite)
        ));
    }
}
