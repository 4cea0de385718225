//! Random-waypoint mobility and half-normal per-slot demand.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::Position;
use crate::scenario::Scenario;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityParams {
    pub speed_min_mps: f64,
    pub speed_max_mps: f64,
    /// Probability of pausing for one slot on reaching a waypoint.
    pub pause_prob: f64,
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self {
            speed_min_mps: 1.0,
            speed_max_mps: 2.0,
            pause_prob: 0.2,
        }
    }
}

impl MobilityParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.speed_min_mps >= 0.0
            && self.speed_min_mps <= self.speed_max_mps
            && self.speed_max_mps.is_finite()
            && (0.0..=1.0).contains(&self.pause_prob);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(alloc::format!(
                "invalid mobility parameters {self:?}"
            )))
        }
    }
}

/// Outcome of a user in the current slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assignment {
    ServedBy(u32),
    RejectedCoverage,
    RejectedCapacity,
    ServedByHaps,
    /// Not served. Also the state before the first association.
    Dropped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserState {
    pub id: u32,
    pub position: Position,
    pub waypoint: Position,
    pub speed_mps: f64,
    pub paused: bool,
    pub demand_mbps: f64,
    pub assignment: Assignment,
}

fn uniform_position<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Position {
    Position::new(
        rng.random_range(0.0..=scenario.area_width_m),
        rng.random_range(0.0..=scenario.area_height_m),
    )
}

fn draw_speed<R: Rng + ?Sized>(params: &MobilityParams, rng: &mut R) -> f64 {
    rng.random_range(params.speed_min_mps..=params.speed_max_mps)
}

/// `active_user_count` users at i.i.d. uniform positions with fresh waypoints
/// and speeds, zero demand, assignment [`Assignment::Dropped`].
pub fn init_users<R: Rng + ?Sized>(
    scenario: &Scenario,
    positions: &mut R,
    waypoints: &mut R,
    speeds: &mut R,
) -> Vec<UserState> {
    (0..scenario.active_user_count)
        .map(|i| UserState {
            id: i as u32,
            position: uniform_position(scenario, positions),
            waypoint: uniform_position(scenario, waypoints),
            speed_mps: draw_speed(&scenario.mobility, speeds),
            paused: false,
            demand_mbps: 0.0,
            assignment: Assignment::Dropped,
        })
        .collect()
}

/// Advance every user by one slot.
///
/// A moving user covers `speed * ts_duration` metres towards its waypoint and
/// stops there if it arrives early. On arrival it pauses for the next slot
/// with probability `pause_prob`; otherwise (or once the pause is over) it
/// draws a new waypoint and speed.
pub fn step_mobility<R: Rng + ?Sized>(
    users: &mut [UserState],
    scenario: &Scenario,
    waypoints: &mut R,
    speeds: &mut R,
    pauses: &mut R,
) {
    let params = &scenario.mobility;
    for u in users.iter_mut() {
        if u.paused {
            u.paused = false;
            u.waypoint = uniform_position(scenario, waypoints);
            u.speed_mps = draw_speed(params, speeds);
            continue;
        }
        let step = u.speed_mps * scenario.ts_duration_s;
        let remaining = u.position.distance(&u.waypoint);
        if step >= remaining {
            u.position = u.waypoint;
            if pauses.random_bool(params.pause_prob) {
                u.paused = true;
            } else {
                u.waypoint = uniform_position(scenario, waypoints);
                u.speed_mps = draw_speed(params, speeds);
            }
        } else {
            let f = step / remaining;
            // Convex combination of two in-area points stays in the area.
            u.position = Position::new(
                u.position.x_m + f * (u.waypoint.x_m - u.position.x_m),
                u.position.y_m + f * (u.waypoint.y_m - u.position.y_m),
            );
        }
    }
}

/// Half-normal scale whose mean is `mean_mbps`.
pub fn sigma_for_mean(mean_mbps: f64) -> f64 {
    mean_mbps * libm::sqrt(PI / 2.0)
}

pub fn half_normal_mean(sigma_mbps: f64) -> f64 {
    sigma_mbps * libm::sqrt(2.0 / PI)
}

pub fn half_normal_variance(sigma_mbps: f64) -> f64 {
    sigma_mbps * sigma_mbps * (1.0 - 2.0 / PI)
}

/// Draws a fresh `|N(0, sigma^2)|` demand for each user, in id order.
pub fn sample_demands<R: Rng + ?Sized>(users: &mut [UserState], sigma_mbps: f64, rng: &mut R) {
    for u in users.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        u.demand_mbps = libm::fabs(z * sigma_mbps);
    }
}
