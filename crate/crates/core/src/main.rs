use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rendezvous_core::mission::{
    bundled_scenario, load_bundled, load_config, parse_config, resolve_output_dir,
    run_and_export, MissionConfig, Mode, SCENARIOS,
};
use rendezvous_core::Error;

/// Multi-agent rendezvous: consensus protocols and quadcopter flight plans.
#[derive(Parser)]
#[command(name = "rendezvous", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a mission file (or a bundled scenario by name) and write outputs.
    Run {
        config: String,
        /// Override the config's mode: particle, quad or compare.
        #[arg(long)]
        mode: Option<Mode>,
        /// Override the integration step, s.
        #[arg(long)]
        dt: Option<f64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a mission file without running it.
    Validate { config: String },
    /// List the scenarios bundled with the binary.
    ListScenarios,
}

fn load(spec: &str) -> Result<MissionConfig, Error> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Some(s) = bundled_scenario(spec) {
            return load_bundled(s.name);
        }
    }
    load_config(path)
}

fn exit_code(e: &Error) -> ExitCode {
    match e {
        Error::Parse { .. } | Error::Validation(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn run(
    spec: &str,
    mode: Option<Mode>,
    dt: Option<f64>,
    out: Option<&Path>,
) -> Result<(), Error> {
    let mut cfg = load(spec)?;
    if let Some(mode) = mode {
        cfg = cfg.with_mode(mode)?;
    }
    if let Some(dt) = dt {
        cfg = cfg.with_dt(dt)?;
    }
    let dir = resolve_output_dir(&cfg, out);
    let outcome = run_and_export(&cfg, &dir)?;
    let r = &outcome.report;
    println!("{}: rendezvous point {:?}", r.name, r.rendezvous_point);
    for a in &r.agents {
        let mut parts = vec![format!("agent {}", a.agent)];
        if let Some(e) = a.particle_final_error {
            parts.push(format!("particle error {e:.3e} m"));
        }
        if let Some(e) = a.quad_final_error {
            parts.push(format!("quad error {e:.3e} m"));
        }
        if let Some(x) = a.quad_cross_track {
            parts.push(format!("cross-track {x:.3e} m"));
        }
        if let Some(t) = a.flight_time {
            parts.push(format!("flight {t:.2} s"));
        }
        println!("  {}", parts.join(", "));
    }
    println!("outputs written to {}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            mode,
            dt,
            out,
        } => run(&config, mode, dt, out.as_deref()),
        Command::Validate { config } => load(&config).map(|cfg| {
            println!("{}: ok ({} agents, mode {:?})", cfg.name, cfg.n(), cfg.mode);
        }),
        Command::ListScenarios => {
            for s in SCENARIOS {
                let description = parse_config(s.text, Path::new(s.name))
                    .ok()
                    .and_then(|c| c.description)
                    .unwrap_or_default();
                println!("{:<28} {description}", s.name);
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
