use hapsim::runner::CALIBRATION_TOLERANCE;
use hapsim::{calibrate_load, densify, run_sweep, Error, Variant};
use hapsim_core::metrics::proportion_served;
use hapsim_core::mobility::sigma_for_mean;
use hapsim_core::planner::PlannerOptions;
use hapsim_core::{PowerModel, Scenario};

fn small() -> Scenario {
    Scenario {
        num_ts: 30,
        active_user_count: 1500,
        seed: 17,
        ..Scenario::default()
    }
}

#[test]
fn calibration_lands_within_tolerance() {
    let s = small();
    let r = calibrate_load(&s, 0.4, 0.01, 20).unwrap();
    assert!(
        (r.utilization - 0.4).abs() <= CALIBRATION_TOLERANCE,
        "{r:?}"
    );
    assert!(!r.below_minimum);
    assert_eq!(r.target_utilization, 0.4);
}

#[test]
fn calibration_flags_targets_below_one_user() {
    let r = calibrate_load(&small(), 0.0, 0.0, 10).unwrap();
    assert_eq!(r.active_user_count, 1);
    assert!(r.below_minimum);
}

#[test]
fn calibration_reports_unreachable_targets() {
    let s = Scenario {
        num_users: 50,
        ..small()
    };
    match calibrate_load(&s, 0.7, 0.01, 10) {
        Err(Error::Calibration { high_count, .. }) => assert_eq!(high_count, 50),
        other => panic!("expected calibration error, got {other:?}"),
    }
    assert!(calibrate_load(&s, 1.2, 0.01, 10).is_err());
}

#[test]
fn doubling_capacity_halves_light_load_utilization() {
    let s = small();
    let doubled = Scenario {
        bs_capacity_mbps: 2.0 * s.bs_capacity_mbps,
        ..s.clone()
    };
    let a = calibrate_load(&s, 0.10, 0.0, 20).unwrap();
    let b = calibrate_load(&doubled, 0.05, 0.0, 20).unwrap();
    let ratio = b.active_user_count as f64 / a.active_user_count as f64;
    assert!((ratio - 1.0).abs() < 0.1, "{a:?} {b:?}");
}

#[test]
fn densify_reaches_full_service() {
    let s = small();
    let out = densify(&s, PlannerOptions::for_radius(s.bs_coverage_radius_m), 10).unwrap();
    assert!(proportion_served(&out.baseline) < 1.0);
    assert_eq!(proportion_served(&out.replay), 1.0);
    assert_eq!(
        out.rounds.iter().map(|r| r.added_sites).sum::<usize>(),
        out.added_sites.len()
    );
    let mut ids: Vec<u32> = out.added_sites.iter().map(|s| s.id).collect();
    ids.dedup();
    assert_eq!(
        ids,
        (36..36 + out.added_sites.len() as u32).collect::<Vec<_>>()
    );
    assert!(matches!(
        densify(&s, PlannerOptions::for_radius(s.bs_coverage_radius_m), 0),
        Err(Error::DensifyDiverged { rounds: 0 })
    ));
}

#[test]
fn sweep_curves_behave() {
    let s = small();
    let plan_at = Scenario {
        demand_sigma_mbps: sigma_for_mean(16.0),
        ..s.clone()
    };
    let added = densify(&plan_at, PlannerOptions::for_radius(700.0), 10)
        .unwrap()
        .added_sites;
    let means = [10.0, 20.0, 30.0, 40.0];
    let variants = [
        Variant::Baseline,
        Variant::Haps(2000.0),
        Variant::Haps(10_000.0),
        Variant::Densified,
    ];
    let records = run_sweep(&s, &means, &variants, &added, PowerModel::default()).unwrap();
    assert_eq!(records.len(), 16);
    for (k, r) in records.iter().enumerate() {
        assert_eq!(r.variant, variants[k / 4]);
        assert_eq!(r.mean_demand_mbps, means[k % 4]);
    }
    let curve = |v: usize| &records[v * 4..v * 4 + 4];
    for v in 0..4 {
        for w in curve(v).windows(2) {
            assert!(
                w[1].proportion_served <= w[0].proportion_served + 0.005,
                "{w:?}"
            );
        }
    }
    for m in 0..4 {
        let base = &curve(0)[m];
        for v in 1..4 {
            assert!(curve(v)[m].proportion_served >= base.proportion_served - 0.005);
        }
        assert!(curve(2)[m].proportion_served >= curve(1)[m].proportion_served - 0.005);
    }
    assert_eq!(
        records,
        run_sweep(&s, &means, &variants, &added, PowerModel::default()).unwrap()
    );
    assert!(run_sweep(&s, &[0.0], &variants, &added, PowerModel::default()).is_err());
}
