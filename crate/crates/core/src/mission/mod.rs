//! Scenario orchestration: mission configs, consensus and quadcopter runs,
//! their comparison, and CSV/JSON export.

mod config;
mod csv;
mod report;
mod run;
mod scenarios;

pub use config::{load_config, parse_config, Integration, MissionConfig, Mode};
pub use csv::{export_csv, write_csv, ControlsTable, CsvTable, QuadTable};
pub use report::{compare_trajectories, segment_distance, AgentReport, ComparisonReport, EigenvalueRecord};
pub use run::{
    resolve_output_dir, run_and_export, run_mission, MissionOutcome, QuadRun, FAILURE_MARKER,
};
pub use scenarios::{bundled_scenario, load_bundled, Scenario, SCENARIOS};
