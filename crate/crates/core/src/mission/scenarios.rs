use std::path::Path;

use super::config::{parse_config, MissionConfig};
use crate::error::{Error, Result};

/// A mission file shipped inside the library.
#[derive(Debug, Clone, Copy)]
pub struct Scenario {
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(Scenario {
            name: $name,
            text: include_str!(concat!("../../scenarios/", $name, ".cfg")),
        }),*]
    };
}

pub const SCENARIOS: &[Scenario] = bundled![
    "scenario_2_4_1",
    "scenario_2_4_1_l2",
    "scenario_2_5_1",
    "scenario_2_5_1_unweighted",
    "scenario_2_5_2",
    "scenario_2_5_2_fixed",
    "scenario_4_2_1",
    "scenario_4_2_2",
];

pub fn bundled_scenario(name: &str) -> Option<&'static Scenario> {
    let name = name.strip_suffix(".cfg").unwrap_or(name);
    SCENARIOS.iter().find(|s| s.name == name)
}

pub fn load_bundled(name: &str) -> Result<MissionConfig> {
    let s = bundled_scenario(name).ok_or_else(|| {
        Error::Validation(vec![format!("no bundled scenario named `{name}`")])
    })?;
    parse_config(s.text, Path::new(&format!("{}.cfg", s.name)))
}
