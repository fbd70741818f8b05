use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::consensus::StateMatrix;
use crate::error::{Error, Result};
use crate::network::{Edge, Network, DEFAULT_PROXIMITY_THRESHOLD};
use crate::numerics::{Vec3, DEFAULT_DT};
use crate::planner::{Axis, ManeuverKind, ManeuverSpec, Mixing, PlannerConfig};
use crate::quad::{QuadParams, QuadState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Consensus protocol on point agents only.
    #[default]
    Particle,
    /// Planned and simulated quadcopter legs only.
    Quad,
    /// Both, plus a comparison of the two.
    Compare,
}

impl Mode {
    pub fn runs_particles(self) -> bool {
        matches!(self, Mode::Particle | Mode::Compare)
    }

    pub fn runs_quads(self) -> bool {
        matches!(self, Mode::Quad | Mode::Compare)
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "particle" => Ok(Mode::Particle),
            "quad" => Ok(Mode::Quad),
            "compare" => Ok(Mode::Compare),
            other => Err(Error::Validation(vec![format!(
                "unknown mode `{other}` (expected particle, quad or compare)"
            )])),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integration {
    pub t_final: f64,
    pub dt: f64,
    /// Keep every `stride`-th step in recorded trajectories.
    pub stride: usize,
    /// Early-stop radius around the agreed point for consensus runs.
    pub convergence_tol: Option<f64>,
}

impl Default for Integration {
    fn default() -> Self {
        Integration {
            t_final: 10.0,
            dt: DEFAULT_DT,
            stride: 10,
            convergence_tol: Some(1e-4),
        }
    }
}

/// A validated mission description.
#[derive(Debug, Clone, PartialEq)]
pub struct MissionConfig {
    pub name: String,
    pub description: Option<String>,
    pub mode: Mode,
    pub network: Network,
    /// Initial consensus state, one row per agent.
    pub positions: StateMatrix,
    /// Initial yaw of each drone.
    pub yaw: Vec<f64>,
    pub integration: Integration,
    pub params: QuadParams,
    pub planner: PlannerConfig,
    pub output: Option<PathBuf>,
    /// When present, every drone flies this script instead of a rendezvous leg.
    pub maneuvers: Vec<ManeuverSpec>,
}

impl MissionConfig {
    pub fn n(&self) -> usize {
        self.positions.n()
    }

    /// Initial hover state of each drone.
    pub fn initial_states(&self) -> Vec<QuadState> {
        (0..self.n())
            .map(|i| {
                let row = self.positions.row(i);
                QuadState::hover_at(Vec3::new(row[0], row[1], row[2]), self.yaw[i])
            })
            .collect()
    }

    pub fn with_mode(mut self, mode: Mode) -> Result<Self> {
        self.mode = mode;
        self.check_mode()?;
        Ok(self)
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Validation(vec![format!(
                "integration.dt must be positive, got {dt}"
            )]));
        }
        self.integration.dt = dt;
        self.planner.sim_dt = dt;
        Ok(self)
    }

    fn check_mode(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.mode.runs_quads() && self.positions.r() != 3 {
            problems.push(format!(
                "mode `{:?}` needs 3-D agent positions, got {} coordinates",
                self.mode,
                self.positions.r()
            ));
        }
        if !self.maneuvers.is_empty() && self.mode != Mode::Quad {
            problems.push("[[maneuvers]] scripts require mode = \"quad\"".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mission: RawMission,
    network: RawNetwork,
    agents: RawAgents,
    #[serde(default)]
    integration: RawIntegration,
    #[serde(default)]
    params: QuadParams,
    #[serde(default)]
    planner: RawPlanner,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    maneuvers: Vec<RawManeuver>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMission {
    name: String,
    description: Option<String>,
    #[serde(default)]
    mode: Mode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum WeightKind {
    #[default]
    Unweighted,
    Static,
    InitialDistance,
    Distance,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    agents: Option<usize>,
    #[serde(default)]
    complete: bool,
    /// 1-based agent pairs.
    #[serde(default)]
    edges: Vec<[usize; 2]>,
    #[serde(default)]
    weights: WeightKind,
    /// `[i, j, w]` triples for `weights = "static"`.
    #[serde(default)]
    static_weights: Vec<(usize, usize, f64)>,
    proximity_threshold: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgents {
    positions: Vec<Vec<f64>>,
    yaw: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawIntegration {
    t_final: f64,
    dt: f64,
    stride: usize,
    /// 0 disables early stopping.
    convergence_tol: f64,
}

impl Default for RawIntegration {
    fn default() -> Self {
        let d = Integration::default();
        RawIntegration {
            t_final: d.t_final,
            dt: d.dt,
            stride: d.stride,
            convergence_tol: d.convergence_tol.unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawPlanner {
    omega_max: f64,
    max_tilt: f64,
    mixing: Mixing,
}

impl Default for RawPlanner {
    fn default() -> Self {
        let d = PlannerConfig::default();
        RawPlanner {
            omega_max: d.omega_max,
            max_tilt: d.max_tilt,
            mixing: d.mixing,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawKind {
    Hover,
    Yaw,
    Translate,
    Vertical,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManeuver {
    kind: RawKind,
    duration: f64,
    angle: Option<f64>,
    axis: Option<Axis>,
    distance: Option<f64>,
    free_parameter: Option<f64>,
}

pub fn load_config(path: impl AsRef<Path>) -> Result<MissionConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, path)
}

/// Parses and validates config text; `path` is only used in messages.
pub fn parse_config(text: &str, path: &Path) -> Result<MissionConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| parse_error(&e, text, path))?;
    validate(raw)
}

fn parse_error(e: &toml::de::Error, text: &str, path: &Path) -> Error {
    let (line, key) = match e.span() {
        Some(span) => {
            let start = span.start.min(text.len());
            let line = text[..start].matches('\n').count() + 1;
            // The span may cover the key or only the offending value; the
            // key is whatever precedes `=` on that line.
            let line_start = text[..start].rfind('\n').map_or(0, |i| i + 1);
            let line_text = text[line_start..].lines().next().unwrap_or("");
            let key = match line_text.split_once('=') {
                Some((k, _)) => k,
                None => &text[span.clone()],
            }
            .trim()
            .trim_matches(|c| c == '[' || c == ']')
            .to_string();
            (line, key)
        }
        None => (0, String::new()),
    };
    Error::Parse {
        path: path.to_path_buf(),
        line,
        key,
        message: e.message().trim().to_string(),
    }
}

fn validate(raw: RawConfig) -> Result<MissionConfig> {
    let mut problems = Vec::new();

    if raw.mission.name.trim().is_empty() {
        problems.push("mission.name must not be empty".into());
    }

    let n = raw.agents.positions.len();
    let r = raw.agents.positions.first().map_or(0, Vec::len);
    if n == 0 {
        problems.push("agents.positions must list at least one agent".into());
    }
    if r == 0 && n > 0 {
        problems.push("agent positions need at least one coordinate".into());
    }
    for (i, row) in raw.agents.positions.iter().enumerate() {
        if row.len() != r {
            problems.push(format!(
                "agents.positions[{}] has {} coordinates, expected {r}",
                i + 1,
                row.len()
            ));
        }
        if row.iter().any(|x| !x.is_finite()) {
            problems.push(format!("agents.positions[{}] is not finite", i + 1));
        }
    }
    let yaw = raw.agents.yaw.clone().unwrap_or_else(|| vec![0.0; n]);
    if yaw.len() != n {
        problems.push(format!("agents.yaw has {} entries, expected {n}", yaw.len()));
    }
    if let Some(count) = raw.network.agents {
        if count != n {
            problems.push(format!(
                "network.agents = {count} does not match the {n} agent positions"
            ));
        }
    }

    let integ = &raw.integration;
    if !(integ.t_final > 0.0 && integ.t_final.is_finite()) {
        problems.push(format!("integration.t_final must be positive, got {}", integ.t_final));
    }
    if !(integ.dt > 0.0 && integ.dt.is_finite()) {
        problems.push(format!("integration.dt must be positive, got {}", integ.dt));
    }
    if integ.stride == 0 {
        problems.push("integration.stride must be at least 1".into());
    }
    if !(integ.convergence_tol >= 0.0) {
        problems.push(format!(
            "integration.convergence_tol must be nonnegative, got {}",
            integ.convergence_tol
        ));
    }
    if !(raw.planner.omega_max > 0.0) {
        problems.push(format!("planner.omega_max must be positive, got {}", raw.planner.omega_max));
    }
    if !(raw.planner.max_tilt > 0.0 && raw.planner.max_tilt < std::f64::consts::FRAC_PI_2) {
        problems.push(format!(
            "planner.max_tilt must lie in (0, π/2), got {}",
            raw.planner.max_tilt
        ));
    }
    if let Err(Error::Validation(p)) = raw.params.validate() {
        problems.extend(p);
    }

    let maneuvers = raw
        .maneuvers
        .iter()
        .enumerate()
        .filter_map(|(i, m)| match maneuver(m) {
            Ok(spec) => Some(spec),
            Err(msg) => {
                problems.push(format!("maneuvers[{}]: {msg}", i + 1));
                None
            }
        })
        .collect::<Vec<_>>();

    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }

    let positions = StateMatrix::from_row_vecs(&raw.agents.positions)?;
    let network = build_network(&raw.network, n, &positions).map_err(|e| match e {
        Error::Validation(p) => Error::Validation(p),
        other => Error::Validation(vec![format!("network: {other}")]),
    })?;

    let planner = PlannerConfig {
        omega_max: raw.planner.omega_max,
        max_tilt: raw.planner.max_tilt,
        mixing: raw.planner.mixing,
        sim_dt: integ.dt,
        ..Default::default()
    };
    let cfg = MissionConfig {
        name: raw.mission.name,
        description: raw.mission.description,
        mode: raw.mission.mode,
        network,
        positions,
        yaw,
        integration: Integration {
            t_final: integ.t_final,
            dt: integ.dt,
            stride: integ.stride,
            convergence_tol: (integ.convergence_tol > 0.0).then_some(integ.convergence_tol),
        },
        params: raw.params,
        planner,
        output: raw.output.dir,
        maneuvers,
    };
    cfg.check_mode()?;
    Ok(cfg)
}

fn maneuver(m: &RawManeuver) -> std::result::Result<ManeuverSpec, String> {
    if !(m.duration > 0.0 && m.duration.is_finite()) {
        return Err(format!("duration must be positive, got {}", m.duration));
    }
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| format!("`{name}` is required"));
    let kind = match m.kind {
        RawKind::Hover => ManeuverKind::Hover,
        RawKind::Yaw => ManeuverKind::Yaw {
            angle: need(m.angle, "angle")?,
        },
        RawKind::Translate => ManeuverKind::Translate {
            axis: m.axis.unwrap_or(Axis::X),
            distance: need(m.distance, "distance")?,
        },
        RawKind::Vertical => ManeuverKind::Vertical {
            distance: need(m.distance, "distance")?,
        },
    };
    Ok(ManeuverSpec {
        kind,
        duration: m.duration,
        free_parameter: m.free_parameter,
    })
}

fn build_network(raw: &RawNetwork, n: usize, positions: &StateMatrix) -> Result<Network> {
    let base = if raw.complete {
        if !raw.edges.is_empty() {
            return Err(Error::Validation(vec![
                "network: give either `complete = true` or `edges`, not both".into(),
            ]));
        }
        Network::complete(n)?
    } else {
        let pairs: Vec<_> = raw.edges.iter().map(|[i, j]| (*i, *j)).collect();
        Network::from_pairs(n, &pairs)?
    };
    if raw.weights != WeightKind::Static && !raw.static_weights.is_empty() {
        return Err(Error::Validation(vec![
            "network.static_weights given but weights is not \"static\"".into(),
        ]));
    }
    if raw.weights != WeightKind::Distance && raw.proximity_threshold.is_some() {
        return Err(Error::Validation(vec![
            "network.proximity_threshold only applies to weights = \"distance\"".into(),
        ]));
    }
    match raw.weights {
        WeightKind::Unweighted => Ok(base),
        WeightKind::Static => {
            let mut map = BTreeMap::new();
            for (i, j, w) in &raw.static_weights {
                map.insert(Edge::one_based(*i, *j)?, *w);
            }
            base.with_static_weights(map)
        }
        WeightKind::InitialDistance => base.with_initial_distance_weights(positions),
        WeightKind::Distance => base.with_distance_weights(
            raw.proximity_threshold
                .unwrap_or(DEFAULT_PROXIMITY_THRESHOLD),
        ),
    }
}
