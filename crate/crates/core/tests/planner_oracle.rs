use hapsim_core::planner::{plan_sites_with, PlannerOptions};
use hapsim_core::{plan_sites, DemandPoint, Error, Position};
use proptest::prelude::*;

const RADIUS: f64 = 700.0;
const CAPACITY: f64 = 1000.0;

fn pt(x: f64, y: f64, d: f64, ts: usize) -> DemandPoint {
    DemandPoint {
        position: Position::new(x, y),
        demand_mbps: d,
        ts_index: ts,
    }
}

fn within(a: &Position, b: &Position) -> bool {
    a.distance_sq(b) <= RADIUS * RADIUS
}

/// Can the points be split among `sites` so every point is within reach of
/// its site and no site exceeds its capacity in any slot?
fn assignable(points: &[DemandPoint], sites: &[Position]) -> bool {
    fn go(
        points: &[DemandPoint],
        sites: &[Position],
        i: usize,
        load: &mut Vec<(usize, usize, f64)>,
    ) -> bool {
        if i == points.len() {
            return true;
        }
        let p = &points[i];
        for (s, pos) in sites.iter().enumerate() {
            if !within(pos, &p.position) {
                continue;
            }
            let used: f64 = load
                .iter()
                .filter(|(ls, lt, _)| *ls == s && *lt == p.ts_index)
                .map(|(_, _, d)| d)
                .sum();
            if used + p.demand_mbps <= CAPACITY {
                load.push((s, p.ts_index, p.demand_mbps));
                if go(points, sites, i + 1, load) {
                    return true;
                }
                load.pop();
            }
        }
        false
    }
    go(points, sites, 0, &mut Vec::new())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

/// Fewest sites, placed at input points, that can carry every point.
fn optimum(points: &[DemandPoint]) -> usize {
    let candidates: Vec<Position> = points.iter().map(|p| p.position).collect();
    (0..=points.len())
        .find(|&k| {
            combinations(candidates.len(), k).iter().any(|c| {
                let chosen: Vec<Position> = c.iter().map(|&i| candidates[i]).collect();
                assignable(points, &chosen)
            })
        })
        .unwrap()
}

fn check_plan(points: &[DemandPoint], plan: &hapsim_core::DensificationPlan) {
    assert_eq!(plan.input_point_count, points.len());
    assert_eq!(plan.covered_point_count, points.len());
    assert_eq!(plan.assignment.len(), points.len());
    let mut load = std::collections::HashMap::new();
    for (p, &s) in points.iter().zip(&plan.assignment) {
        let site = &plan.new_sites[s];
        assert!(
            within(&site.position, &p.position),
            "point {p:?} outside site {site:?}"
        );
        *load.entry((s, p.ts_index)).or_insert(0.0) += p.demand_mbps;
    }
    for ((s, ts), l) in load {
        assert!(l <= CAPACITY + 1e-9, "site {s} slot {ts} carries {l}");
    }
    for (i, s) in plan.new_sites.iter().enumerate() {
        assert!(plan.assignment.contains(&i), "site {} serves nobody", s.id);
        assert_eq!(s.capacity_mbps, CAPACITY);
        assert_eq!(s.coverage_radius_m, RADIUS);
    }
}

fn small_instance() -> impl Strategy<Value = Vec<DemandPoint>> {
    prop::collection::vec(
        (0.0..2500.0f64, 0.0..2500.0f64, 0.0..=CAPACITY, 0usize..3),
        1..=6,
    )
    .prop_map(|v| v.into_iter().map(|(x, y, d, t)| pt(x, y, d, t)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn exact_greedy_is_near_optimal(points in small_instance()) {
        let plan = plan_sites_with(&points, RADIUS, CAPACITY, PlannerOptions::exact()).unwrap();
        check_plan(&points, &plan);
        let opt = optimum(&points);
        prop_assert!(plan.new_sites.len() <= opt + 1, "greedy {} vs optimum {}", plan.new_sites.len(), opt);
    }

    #[test]
    fn thinned_plans_stay_feasible(points in prop::collection::vec(
        (0.0..8000.0f64, 0.0..8000.0f64, 0.0..=CAPACITY, 0usize..20), 0..400,
    )) {
        let points: Vec<DemandPoint> = points.into_iter().map(|(x, y, d, t)| pt(x, y, d, t)).collect();
        let plan = plan_sites(&points, RADIUS, CAPACITY).unwrap();
        check_plan(&points, &plan);
        prop_assert_eq!(plan_sites(&points, RADIUS, CAPACITY).unwrap(), plan);
    }

    #[test]
    fn first_site_id_offsets_ids(points in small_instance(), first in 0u32..1000) {
        let opts = PlannerOptions { first_site_id: first, ..PlannerOptions::exact() };
        let plan = plan_sites_with(&points, RADIUS, CAPACITY, opts).unwrap();
        for (i, s) in plan.new_sites.iter().enumerate() {
            prop_assert_eq!(s.id, first + i as u32);
        }
    }
}

#[test]
fn three_points_one_disc() {
    let points = [
        pt(0.0, 0.0, 200.0, 0),
        pt(300.0, 0.0, 300.0, 0),
        pt(0.0, 300.0, 400.0, 0),
    ];
    for opts in [PlannerOptions::exact(), PlannerOptions::for_radius(RADIUS)] {
        let plan = plan_sites_with(&points, RADIUS, CAPACITY, opts).unwrap();
        assert_eq!(plan.new_sites.len(), 1);
        check_plan(&points, &plan);
    }
    assert_eq!(optimum(&points), 1);
}

#[test]
fn oversized_demand_is_rejected() {
    let points = [
        pt(0.0, 0.0, 200.0, 0),
        pt(10.0, 0.0, 1000.5, 0),
        pt(20.0, 0.0, 1e9, 1),
    ];
    match plan_sites(&points, RADIUS, CAPACITY) {
        Err(Error::InfeasiblePoints { offenders }) => assert_eq!(offenders, vec![1, 2]),
        other => panic!("expected infeasible points, got {other:?}"),
    }
}

#[test]
fn far_apart_points_need_a_site_each() {
    let points: Vec<DemandPoint> = (0..5)
        .map(|i| pt(i as f64 * 1500.0, 0.0, 10.0, 0))
        .collect();
    let plan = plan_sites(&points, RADIUS, CAPACITY).unwrap();
    assert_eq!(plan.new_sites.len(), 5);
    check_plan(&points, &plan);
}
