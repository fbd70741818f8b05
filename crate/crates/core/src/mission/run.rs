use std::fs;
use std::path::{Path, PathBuf};

use super::config::{MissionConfig, Mode};
use super::csv::{export_csv, ControlsTable, QuadTable};
use super::report::{build_report, ComparisonReport};
use crate::consensus::{
    consensus_point, integrate_protocol_with, ConsensusTrajectory, ProtocolOptions,
};
use crate::error::{Error, Result};
use crate::numerics::Vec3;
use crate::planner::{plan_maneuver, rendezvous_leg_with, ControlSchedule};
use crate::quad::{simulate_with, QuadTrajectory};

/// Name of the marker file left in the output directory when a run fails.
pub const FAILURE_MARKER: &str = "FAILED";

#[derive(Debug, Clone)]
pub struct QuadRun {
    pub schedule: ControlSchedule,
    pub trajectory: QuadTrajectory,
}

#[derive(Debug, Clone)]
pub struct MissionOutcome {
    pub report: ComparisonReport,
    pub particle: Option<ConsensusTrajectory>,
    pub quads: Vec<QuadRun>,
}

/// Output directory: explicit override, then the config's own setting, then
/// `$SWARM_OUT_DIR/<name>`, then `./out/<name>`.
pub fn resolve_output_dir(cfg: &MissionConfig, cli: Option<&Path>) -> PathBuf {
    if let Some(dir) = cli {
        return dir.to_path_buf();
    }
    if let Some(dir) = &cfg.output {
        return dir.clone();
    }
    match std::env::var_os("SWARM_OUT_DIR") {
        Some(root) if !root.is_empty() => PathBuf::from(root).join(&cfg.name),
        _ => PathBuf::from("out").join(&cfg.name),
    }
}

fn run_particles(cfg: &MissionConfig) -> Result<ConsensusTrajectory> {
    let opts = ProtocolOptions {
        stride: cfg.integration.stride,
        convergence_tol: cfg.integration.convergence_tol,
    };
    integrate_protocol_with(
        &cfg.network,
        &cfg.positions,
        cfg.integration.t_final,
        cfg.integration.dt,
        &opts,
    )
}

fn fly(cfg: &MissionConfig, agent: usize, target: &Vec3) -> Result<QuadRun> {
    let start = cfg.initial_states()[agent];
    let schedule = if cfg.maneuvers.is_empty() {
        rendezvous_leg_with(&cfg.params, &start, target, &cfg.planner)?
    } else {
        ControlSchedule::concat(
            cfg.maneuvers
                .iter()
                .map(|m| plan_maneuver(&cfg.params, m, &cfg.planner))
                .collect::<Result<Vec<_>>>()?,
        )
    };
    let trajectory = simulate_with(
        &cfg.params,
        &start,
        &schedule,
        schedule.total_duration(),
        cfg.integration.dt,
        cfg.integration.stride,
    )?;
    Ok(QuadRun {
        schedule,
        trajectory,
    })
}

/// Plans and simulates every drone concurrently; results keep agent order.
fn run_quads(cfg: &MissionConfig) -> Vec<Result<QuadRun>> {
    let alpha = consensus_point(&cfg.positions);
    let target = Vec3::new(alpha[0], alpha[1], alpha[2]);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..cfg.n())
            .map(|i| scope.spawn(move || fly(cfg, i, &target)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("quad simulation thread panicked"))
            .collect()
    })
}

fn assemble(
    cfg: &MissionConfig,
    particle: Option<ConsensusTrajectory>,
    quads: Vec<QuadRun>,
) -> Result<MissionOutcome> {
    let trajectories: Vec<_> = quads.iter().map(|q| q.trajectory.clone()).collect();
    let report = build_report(
        &cfg.name,
        cfg.mode,
        &cfg.positions,
        particle.as_ref(),
        cfg.mode.runs_quads().then_some(&trajectories[..]),
        cfg.maneuvers.is_empty(),
    )?;
    Ok(MissionOutcome {
        report,
        particle,
        quads,
    })
}

/// Runs the mission in memory without writing anything.
pub fn run_mission(cfg: &MissionConfig) -> Result<MissionOutcome> {
    let particle = match cfg.mode {
        Mode::Particle | Mode::Compare => Some(run_particles(cfg)?),
        Mode::Quad => None,
    };
    let quads = if cfg.mode.runs_quads() {
        run_quads(cfg).into_iter().collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    assemble(cfg, particle, quads)
}

/// Runs the mission and writes `particles.csv`, `quad_<i>.csv`,
/// `controls_<i>.csv` and `report.json` into `out_dir`. On failure,
/// whatever finished is still written, plus a `FAILED` marker holding the
/// error message.
pub fn run_and_export(cfg: &MissionConfig, out_dir: &Path) -> Result<MissionOutcome> {
    fs::create_dir_all(out_dir)?;
    let marker = out_dir.join(FAILURE_MARKER);
    if marker.exists() {
        fs::remove_file(&marker)?;
    }
    let result = export_all(cfg, out_dir);
    if let Err(e) = &result {
        fs::write(&marker, format!("{e}\n"))?;
    }
    result
}

fn export_all(cfg: &MissionConfig, out_dir: &Path) -> Result<MissionOutcome> {
    let particle = if cfg.mode.runs_particles() {
        let traj = run_particles(cfg)?;
        export_csv(&traj, out_dir.join("particles.csv"))?;
        Some(traj)
    } else {
        None
    };

    let mut quads = Vec::new();
    let mut first_error: Option<Error> = None;
    if cfg.mode.runs_quads() {
        let sample_dt = cfg.integration.dt * cfg.integration.stride as f64;
        for (i, run) in run_quads(cfg).into_iter().enumerate() {
            match run {
                Ok(run) => {
                    export_csv(
                        &QuadTable {
                            trajectory: &run.trajectory,
                            params: &cfg.params,
                        },
                        out_dir.join(format!("quad_{}.csv", i + 1)),
                    )?;
                    let samples = run.schedule.sample(sample_dt)?;
                    export_csv(
                        &ControlsTable {
                            samples: &samples,
                            params: &cfg.params,
                        },
                        out_dir.join(format!("controls_{}.csv", i + 1)),
                    )?;
                    quads.push(run);
                }
                Err(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
    }
    if let Some(e) = first_error {
        return Err(e);
    }

    let outcome = assemble(cfg, particle, quads)?;
    fs::write(out_dir.join("report.json"), outcome.report.to_json() + "\n")?;
    Ok(outcome)
}
