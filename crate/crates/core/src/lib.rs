//! Time-slotted simulation of a dense urban radio access network.
//!
//! A fixed grid of terrestrial base stations serves mobile users whose
//! positions follow a random-waypoint model and whose per-slot throughput
//! demands are half-normal. Users bind to their nearest base station and are
//! rejected when out of coverage or when the cell has no residual capacity.
//! Rejected demand can then be absorbed either by densifying the terrestrial
//! grid ([`planner`]) or by a high altitude platform overlay
//! ([`association::haps_overlay`]). [`metrics`] turns slot results into the
//! served proportion, capacity utilization and power figures.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. All floating point maths goes through `libm` so results are
//! bit-identical across targets.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod association;
pub mod error;
pub mod geometry;
pub mod link_budget;
pub mod metrics;
pub mod mobility;
pub mod planner;
pub mod rng;
pub mod scenario;
mod site_index;

pub use association::{
    associate_slot, contention_order, haps_overlay, run_simulation, DemandPoint, RejectReason,
    Simulation, SiteTally, TimeSlotResult,
};
pub use error::Error;
pub use geometry::{in_coverage, nearest_site, place_initial_grid, CellSite, Position, SiteKind};
pub use link_budget::LinkBudgetParams;
pub use metrics::{MetricsSummary, PowerModel};
pub use mobility::{Assignment, MobilityParams, UserState};
pub use planner::{evaluate_plan, plan_sites, DensificationPlan};
pub use scenario::{AdmissionRule, Scenario};

pub type Result<T, E = Error> = core::result::Result<T, E>;
