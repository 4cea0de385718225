use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hapsim::io as csvio;
use hapsim::runner::{calibrate_load, densify, run_sweep, run_table1};
use hapsim::Config;
use hapsim_core::geometry::place_initial_grid;
use hapsim_core::metrics::summarize;
use hapsim_core::mobility::sigma_for_mean;
use hapsim_core::planner::plan_sites_with;
use hapsim_core::{Scenario, Simulation};

#[derive(Parser)]
#[command(
    name = "hapsim",
    version,
    about = "Dense urban RAN simulator: densification vs. HAPS overlay"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML scenario file; defaults apply when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<(Config, Scenario)> {
        let mut config = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        if let Some(seed) = self.seed {
            config.scenario.seed = seed;
        }
        let scenario = config.scenario()?;
        Ok((config, scenario))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and report its metrics.
    Run {
        #[command(flatten)]
        common: Common,
        /// Added sites (plan CSV) to deploy on top of the initial grid.
        #[arg(long)]
        sites: Option<PathBuf>,
        /// Write the one-row summary CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write per-slot, per-site tallies here.
        #[arg(long)]
        slots_csv: Option<PathBuf>,
        /// Write the unserved demand log here.
        #[arg(long)]
        rejections_csv: Option<PathBuf>,
        /// Dump every user's position and demand per slot.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Plan added base stations for rejected demand.
    Densify {
        #[command(flatten)]
        common: Common,
        /// Plan from this demand log instead of simulating the baseline.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Plan CSV output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep mean demand across network variants.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Frozen densification plan; planned at `sweep.plan_mean_mbps` when omitted.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Find the active user count matching a target baseline utilization.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        target_utilization: Option<f64>,
        #[arg(long)]
        target_rejection: Option<f64>,
        /// Slots per trial run.
        #[arg(long)]
        slots: Option<usize>,
    },
    /// Baseline vs. densified vs. HAPS-assisted comparison.
    Table1 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2000.0)]
        haps_capacity_mbps: f64,
        /// Write the added sites here.
        #[arg(long)]
        plan_out: Option<PathBuf>,
    },
    /// Print parity distance, latency and footprint radius.
    Linkbudget {
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(long)]
        altitude_m: Option<f64>,
        #[arg(long)]
        haps_exponent: Option<f64>,
        #[arg(long)]
        terrestrial_exponent: Option<f64>,
        #[arg(long)]
        elevation_deg: Option<f64>,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).with_context(|| format!("opening {}", path.display()))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            common,
            sites,
            out,
            slots_csv,
            rejections_csv,
            trajectory,
        } => {
            let (config, scenario) = common.load()?;
            let mut all_sites = place_initial_grid(&scenario)?;
            if let Some(p) = sites {
                all_sites.extend(csvio::read_plan(open(&p)?, scenario.bs_coverage_radius_m)?);
            }
            let mut sim = Simulation::new(&scenario, &all_sites)?;
            let mut traj = trajectory
                .as_deref()
                .map(create)
                .transpose()?
                .map(csvio::TrajectoryWriter::new);
            let mut results = Vec::with_capacity(scenario.num_ts);
            while let Some(r) = sim.step() {
                if let Some(t) = traj.as_mut() {
                    t.write_slot(r.ts_index, sim.users())?;
                }
                results.push(r);
            }
            if let Some(t) = traj {
                t.finish()?;
            }
            let summary = summarize(&results, config.power())?;
            if let Some(p) = slots_csv {
                csvio::write_slot_results(create(&p)?, &results)?;
            }
            if let Some(p) = rejections_csv {
                csvio::write_rejections(create(&p)?, &results)?;
            }
            if let Some(p) = out {
                csvio::write_summary(create(&p)?, &summary)?;
            }
            print!("{}", csvio::format_summary_table(&[("scenario", &summary)]));
        }
        Command::Densify { common, log, out } => {
            let (config, scenario) = common.load()?;
            let opts = config.planner_options();
            let sites = match log {
                Some(p) => {
                    let points = csvio::read_demand_points(open(&p)?)?;
                    let first_site_id = (scenario.bs_rows * scenario.bs_cols) as u32;
                    let plan = plan_sites_with(
                        &points,
                        scenario.bs_coverage_radius_m,
                        scenario.bs_capacity_mbps,
                        hapsim_core::planner::PlannerOptions {
                            first_site_id,
                            ..opts
                        },
                    )?;
                    eprintln!(
                        "{} points -> {} sites",
                        plan.input_point_count,
                        plan.new_sites.len()
                    );
                    plan.new_sites
                }
                None => {
                    let outcome = densify(&scenario, opts, config.planner.max_rounds)?;
                    for (i, r) in outcome.rounds.iter().enumerate() {
                        eprintln!(
                            "round {i}: {} rejected points -> {} sites",
                            r.input_points, r.added_sites
                        );
                    }
                    outcome.added_sites
                }
            };
            csvio::write_plan(create(&out)?, &sites)?;
        }
        Command::Sweep { common, plan, out } => {
            let (config, scenario) = common.load()?;
            let added = match plan {
                Some(p) => csvio::read_plan(open(&p)?, scenario.bs_coverage_radius_m)?,
                None => {
                    let at_plan_mean = Scenario {
                        demand_sigma_mbps: sigma_for_mean(config.sweep.plan_mean_mbps),
                        ..scenario.clone()
                    };
                    densify(
                        &at_plan_mean,
                        config.planner_options(),
                        config.planner.max_rounds,
                    )?
                    .added_sites
                }
            };
            let records = run_sweep(
                &scenario,
                &config.sweep.mean_demands_mbps,
                &config.variants()?,
                &added,
                config.power(),
            )?;
            csvio::write_sweep(create(&out)?, &records)?;
        }
        Command::Calibrate {
            common,
            target_utilization,
            target_rejection,
            slots,
        } => {
            let (config, scenario) = common.load()?;
            let c = &config.calibration;
            let report = calibrate_load(
                &scenario,
                target_utilization.unwrap_or(c.target_utilization),
                target_rejection.unwrap_or(c.target_rejection),
                slots.unwrap_or(c.slots),
            )?;
            let mut w = csv::Writer::from_writer(io::stdout());
            w.write_record([
                "active_user_count",
                "utilization",
                "rejection",
                "target_utilization",
                "target_rejection",
                "below_minimum",
            ])?;
            w.write_record([
                report.active_user_count.to_string(),
                report.utilization.to_string(),
                report.rejection.to_string(),
                report.target_utilization.to_string(),
                report.target_rejection.to_string(),
                report.below_minimum.to_string(),
            ])?;
            w.flush()?;
        }
        Command::Table1 {
            common,
            haps_capacity_mbps,
            plan_out,
        } => {
            let (config, scenario) = common.load()?;
            let t = run_table1(
                &scenario,
                haps_capacity_mbps,
                config.power(),
                config.planner_options(),
                config.planner.max_rounds,
            )?;
            if let Some(p) = plan_out {
                csvio::write_plan(create(&p)?, &t.added_sites)?;
            }
            let mut out = io::stdout().lock();
            write!(
                out,
                "{}",
                csvio::format_summary_table(&[
                    ("Baseline", &t.baseline),
                    ("HAPS-assisted", &t.haps),
                    ("Densified", &t.densified),
                ])
            )?;
            writeln!(
                out,
                "added sites: {} over {} round(s)",
                t.added_sites.len(),
                t.densify_rounds.len()
            )?;
            writeln!(out, "HAPS slots with drops: {}", t.haps_slots_with_drops)?;
        }
        Command::Linkbudget {
            config,
            altitude_m,
            haps_exponent,
            terrestrial_exponent,
            elevation_deg,
        } => {
            let config = match config {
                Some(p) => Config::load(&p)?,
                None => Config::default(),
            };
            let mut p = config.link_budget()?;
            if let Some(v) = altitude_m {
                p.haps_altitude_m = v;
            }
            if let Some(v) = haps_exponent {
                p.haps_pathloss_exponent = v;
            }
            if let Some(v) = terrestrial_exponent {
                p.terrestrial_pathloss_exponent = v;
            }
            if let Some(v) = elevation_deg {
                p.min_elevation_deg = v;
            }
            p.validate()?;
            println!("parity_distance_m,{:.2}", p.parity_distance_m());
            println!("propagation_latency_ms,{:.4}", p.propagation_latency_ms());
            println!("footprint_radius_m,{:.1}", p.footprint_radius_m());
        }
    }
    Ok(())
}
