//! Python bindings: networks and consensus runs, the quadcopter model,
//! flight planning and bundled mission scenarios.
//!
//! Matrices cross the boundary as lists of rows; vectors as lists.

use std::collections::BTreeMap;
use std::path::Path;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use rendezvous_core::consensus::{
    self, consensus_point as core_consensus_point, integrate_protocol_with, ProtocolOptions,
    StateMatrix,
};
use rendezvous_core::mission::{self, bundled_scenario, load_bundled, load_config, SCENARIOS};
use rendezvous_core::network::{self as net, Edge};
use rendezvous_core::numerics::{sym_eigen, MatN, Vec3};
use rendezvous_core::planner::{
    self, hover_controls, rendezvous_leg_with, Axis, ControlSchedule, ManeuverKind, ManeuverSpec,
    PlannerConfig,
};
use rendezvous_core::quad::{self, simulate_with, state_derivative, Controls};
use rendezvous_core::Error;

create_exception!(rendezvous, RendezvousError, PyException);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_)
        | Error::Dimension { .. }
        | Error::Parse { .. }
        | Error::Validation(_) => PyValueError::new_err(e.to_string()),
        _ => RendezvousError::new_err(e.to_string()),
    }
}

fn rows(m: &MatN) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn states(positions: Vec<Vec<f64>>) -> PyResult<StateMatrix> {
    StateMatrix::from_row_vecs(&positions).map_err(to_py)
}

fn vec3(v: [f64; 3]) -> Vec3 {
    Vec3::from(v)
}

/// Communication network between agents; agents are numbered from 1.
#[pyclass(module = "rendezvous", skip_from_py_object)]
#[derive(Clone)]
struct Network {
    inner: net::Network,
}

#[pymethods]
impl Network {
    /// `edges` are 1-based pairs. `weights`, if given, holds one weight per
    /// edge in the same order.
    #[new]
    #[pyo3(signature = (n, edges, weights = None))]
    fn new(n: usize, edges: Vec<(usize, usize)>, weights: Option<Vec<f64>>) -> PyResult<Self> {
        let mut inner = net::Network::from_pairs(n, &edges).map_err(to_py)?;
        if let Some(w) = weights {
            if w.len() != edges.len() {
                return Err(PyValueError::new_err(format!(
                    "{} weights for {} edges",
                    w.len(),
                    edges.len()
                )));
            }
            let map = edges
                .iter()
                .zip(w)
                .map(|(&(i, j), w)| Ok((Edge::one_based(i, j)?, w)))
                .collect::<Result<BTreeMap<_, _>, Error>>()
                .map_err(to_py)?;
            inner = inner.with_static_weights(map).map_err(to_py)?;
        }
        Ok(Network { inner })
    }

    #[staticmethod]
    fn complete(n: usize) -> PyResult<Self> {
        Ok(Network {
            inner: net::Network::complete(n).map_err(to_py)?,
        })
    }

    /// Weights every edge by the initial distance between its agents.
    fn distance_weighted(&self, positions: Vec<Vec<f64>>) -> PyResult<Self> {
        let q = states(positions)?;
        Ok(Network {
            inner: self
                .inner
                .clone()
                .with_initial_distance_weights(&q)
                .map_err(to_py)?,
        })
    }

    /// Re-weights edges by current distance during integration and adds
    /// an edge whenever two agents come within `threshold`.
    fn time_varying(&self, threshold: f64) -> PyResult<Self> {
        Ok(Network {
            inner: self
                .inner
                .clone()
                .with_distance_weights(threshold)
                .map_err(to_py)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// 1-based edge list.
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner
            .edges()
            .iter()
            .map(|e| {
                let (i, j) = e.endpoints();
                (i + 1, j + 1)
            })
            .collect()
    }

    fn is_connected(&self) -> bool {
        net::is_connected(&self.inner)
    }

    /// Laplacian; time-varying networks need the agents' positions.
    #[pyo3(signature = (positions = None))]
    fn laplacian(&self, positions: Option<Vec<Vec<f64>>>) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(&self.laplacian_matrix(positions)?))
    }

    /// Ascending Laplacian eigenvalues.
    #[pyo3(signature = (positions = None))]
    fn eigenvalues(&self, positions: Option<Vec<Vec<f64>>>) -> PyResult<Vec<f64>> {
        let m = self.laplacian_matrix(positions)?;
        Ok(sym_eigen(&m).map_err(to_py)?.values.iter().copied().collect())
    }

    fn __repr__(&self) -> String {
        format!("Network(n={}, edges={:?})", self.inner.n(), self.edges())
    }
}

impl Network {
    fn laplacian_matrix(&self, positions: Option<Vec<Vec<f64>>>) -> PyResult<MatN> {
        let l = match positions {
            Some(p) => net::weighted_laplacian_at(&self.inner, &states(p)?, 0.0),
            None => net::laplacian(&self.inner),
        };
        Ok(l.map_err(to_py)?.matrix)
    }
}

/// Sampled consensus run.
#[pyclass(module = "rendezvous", get_all)]
struct ConsensusResult {
    times: Vec<f64>,
    /// One n×r matrix (list of rows) per sample.
    states: Vec<Vec<Vec<f64>>>,
    converged: bool,
    rendezvous_point: Vec<f64>,
}

#[pymethods]
impl ConsensusResult {
    #[getter]
    fn final_state(&self) -> Vec<Vec<f64>> {
        self.states.last().cloned().unwrap_or_default()
    }
}

/// Average of the initial positions: where every agent meets.
#[pyfunction]
fn consensus_point(positions: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    Ok(core_consensus_point(&states(positions)?).iter().copied().collect())
}

/// Integrates the consensus protocol with RK4.
#[pyfunction]
#[pyo3(signature = (network, positions, t_final, dt = 1e-3, stride = 10, convergence_tol = None))]
fn integrate_consensus(
    network: &Network,
    positions: Vec<Vec<f64>>,
    t_final: f64,
    dt: f64,
    stride: usize,
    convergence_tol: Option<f64>,
) -> PyResult<ConsensusResult> {
    let q0 = states(positions)?;
    let opts = ProtocolOptions {
        stride,
        convergence_tol,
    };
    let traj =
        integrate_protocol_with(&network.inner, &q0, t_final, dt, &opts).map_err(to_py)?;
    Ok(ConsensusResult {
        rendezvous_point: core_consensus_point(&q0).iter().copied().collect(),
        states: traj.states.iter().map(|q| rows(q.matrix())).collect(),
        times: traj.times,
        converged: traj.converged,
    })
}

/// Exact solution of the fixed-network protocol at time `t`.
#[pyfunction]
fn closed_form(network: &Network, positions: Vec<Vec<f64>>, t: f64) -> PyResult<Vec<Vec<f64>>> {
    let l = net::laplacian(&network.inner).map_err(to_py)?;
    let q = consensus::closed_form_state(&l, &states(positions)?, t).map_err(to_py)?;
    Ok(rows(q.matrix()))
}

/// Physical constants of the quadcopter.
#[pyclass(module = "rendezvous", from_py_object)]
#[derive(Clone)]
struct QuadParams {
    inner: quad::QuadParams,
}

#[pymethods]
impl QuadParams {
    #[new]
    #[pyo3(signature = (mass = None, gravity = None))]
    fn new(mass: Option<f64>, gravity: Option<f64>) -> PyResult<Self> {
        let mut inner = quad::QuadParams::default();
        if let Some(m) = mass {
            inner.mass = m;
        }
        if let Some(g) = gravity {
            inner.gravity = g;
        }
        inner.validate().map_err(to_py)?;
        Ok(QuadParams { inner })
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.inner.mass
    }

    #[getter]
    fn gravity(&self) -> f64 {
        self.inner.gravity
    }

    #[getter]
    fn inertia(&self) -> [f64; 3] {
        self.inner.inertia
    }

    #[getter]
    fn arm_length(&self) -> f64 {
        self.inner.arm_length
    }

    #[getter]
    fn thrust_coeff(&self) -> f64 {
        self.inner.thrust_coeff
    }

    /// Common rotor speed that balances gravity, rad/s.
    fn hover_speed(&self) -> PyResult<f64> {
        Ok(hover_controls(&self.inner).map_err(to_py)?.omega[0])
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

fn params_or_default(p: Option<&QuadParams>) -> quad::QuadParams {
    p.map(|p| p.inner).unwrap_or_default()
}

/// Rigid-body state: position, Euler angles (roll, pitch, yaw), inertial
/// velocity and body angular velocity.
#[pyclass(module = "rendezvous", from_py_object)]
#[derive(Clone)]
struct QuadState {
    inner: quad::QuadState,
}

#[pymethods]
impl QuadState {
    #[new]
    #[pyo3(signature = (
        position = [0.0; 3],
        angles = [0.0; 3],
        velocity = [0.0; 3],
        angular_velocity = [0.0; 3],
    ))]
    fn new(
        position: [f64; 3],
        angles: [f64; 3],
        velocity: [f64; 3],
        angular_velocity: [f64; 3],
    ) -> Self {
        QuadState {
            inner: quad::QuadState {
                position: vec3(position),
                angles: vec3(angles),
                velocity: vec3(velocity),
                angular_velocity: vec3(angular_velocity),
            },
        }
    }

    #[staticmethod]
    #[pyo3(signature = (position, yaw = 0.0))]
    fn hover_at(position: [f64; 3], yaw: f64) -> Self {
        QuadState {
            inner: quad::QuadState::hover_at(vec3(position), yaw),
        }
    }

    #[getter]
    fn position(&self) -> [f64; 3] {
        self.inner.position.into()
    }

    #[getter]
    fn angles(&self) -> [f64; 3] {
        self.inner.angles.into()
    }

    #[getter]
    fn velocity(&self) -> [f64; 3] {
        self.inner.velocity.into()
    }

    #[getter]
    fn angular_velocity(&self) -> [f64; 3] {
        self.inner.angular_velocity.into()
    }

    /// Time derivative of the 12-component state under rotor speeds `omega`.
    #[pyo3(signature = (omega, params = None))]
    fn derivative(&self, omega: [f64; 4], params: Option<&QuadParams>) -> PyResult<Vec<f64>> {
        let d = state_derivative(&self.inner, &Controls::new(omega), &params_or_default(params))
            .map_err(to_py)?;
        Ok(d.iter().copied().collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "QuadState(position={:?}, angles={:?})",
            self.position(),
            self.angles()
        )
    }
}

/// Piecewise rotor-speed schedule.
#[pyclass(module = "rendezvous", skip_from_py_object)]
#[derive(Clone)]
struct FlightPlan {
    inner: ControlSchedule,
}

#[pymethods]
impl FlightPlan {
    #[getter]
    fn duration(&self) -> f64 {
        self.inner.total_duration()
    }

    /// Rotor speeds at time `t`, rad/s.
    fn controls_at(&self, t: f64) -> PyResult<[f64; 4]> {
        Ok(self.inner.controls_at(t).map_err(to_py)?.omega)
    }

    /// `(t, [ω1, ω2, ω3, ω4])` every `dt` seconds.
    fn sample(&self, dt: f64) -> PyResult<Vec<(f64, [f64; 4])>> {
        Ok(self
            .inner
            .sample(dt)
            .map_err(to_py)?
            .into_iter()
            .map(|(t, c)| (t, c.omega))
            .collect())
    }

    /// Appends another plan after this one.
    fn then(&self, other: &FlightPlan) -> FlightPlan {
        FlightPlan {
            inner: self.inner.clone().then(other.inner.clone()),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "FlightPlan(segments={}, duration={})",
            self.inner.segments().len(),
            self.duration()
        )
    }
}

fn plan(spec: ManeuverSpec, params: Option<&QuadParams>) -> PyResult<FlightPlan> {
    let inner = planner::plan_maneuver(&params_or_default(params), &spec, &PlannerConfig::default())
        .map_err(to_py)?;
    Ok(FlightPlan { inner })
}

/// Turn in place by `angle` radians.
#[pyfunction]
#[pyo3(signature = (angle, duration, params = None))]
fn plan_yaw(angle: f64, duration: f64, params: Option<&QuadParams>) -> PyResult<FlightPlan> {
    plan(ManeuverSpec::new(ManeuverKind::Yaw { angle }, duration), params)
}

/// Fly `distance` metres along body `axis` ("x" or "y") at constant height.
#[pyfunction]
#[pyo3(signature = (axis, distance, duration, params = None))]
fn plan_translation(
    axis: &str,
    distance: f64,
    duration: f64,
    params: Option<&QuadParams>,
) -> PyResult<FlightPlan> {
    let axis = match axis {
        "x" => Axis::X,
        "y" => Axis::Y,
        other => return Err(PyValueError::new_err(format!("axis must be \"x\" or \"y\", got {other:?}"))),
    };
    plan(
        ManeuverSpec::new(ManeuverKind::Translate { axis, distance }, duration),
        params,
    )
}

/// Climb (positive) or descend by `distance` metres.
#[pyfunction]
#[pyo3(signature = (distance, duration, params = None))]
fn plan_vertical(distance: f64, duration: f64, params: Option<&QuadParams>) -> PyResult<FlightPlan> {
    plan(ManeuverSpec::new(ManeuverKind::Vertical { distance }, duration), params)
}

/// Climb, turn toward `target`, then fly straight to it.
#[pyfunction]
#[pyo3(signature = (start, target, params = None))]
fn plan_rendezvous(
    start: &QuadState,
    target: [f64; 3],
    params: Option<&QuadParams>,
) -> PyResult<FlightPlan> {
    let inner = rendezvous_leg_with(
        &params_or_default(params),
        &start.inner,
        &vec3(target),
        &PlannerConfig::default(),
    )
    .map_err(to_py)?;
    Ok(FlightPlan { inner })
}

/// Sampled quadcopter flight.
#[pyclass(module = "rendezvous", get_all)]
struct Flight {
    times: Vec<f64>,
    positions: Vec<[f64; 3]>,
    angles: Vec<[f64; 3]>,
    velocities: Vec<[f64; 3]>,
    omega: Vec<[f64; 4]>,
}

#[pymethods]
impl Flight {
    #[getter]
    fn final_position(&self) -> Option<[f64; 3]> {
        self.positions.last().copied()
    }

    #[getter]
    fn final_angles(&self) -> Option<[f64; 3]> {
        self.angles.last().copied()
    }
}

/// Flies `plan` from `start` with RK4 for the plan's whole duration.
#[pyfunction]
#[pyo3(signature = (plan, start, dt = 1e-3, stride = 10, params = None))]
fn simulate(
    plan: &FlightPlan,
    start: &QuadState,
    dt: f64,
    stride: usize,
    params: Option<&QuadParams>,
) -> PyResult<Flight> {
    let traj = simulate_with(
        &params_or_default(params),
        &start.inner,
        &plan.inner,
        plan.inner.total_duration(),
        dt,
        stride,
    )
    .map_err(to_py)?;
    Ok(Flight {
        positions: traj.states.iter().map(|s| s.position.into()).collect(),
        angles: traj.states.iter().map(|s| s.angles.into()).collect(),
        velocities: traj.states.iter().map(|s| s.velocity.into()).collect(),
        omega: traj.controls.iter().map(|c| c.omega).collect(),
        times: traj.times,
    })
}

/// Names of the scenarios bundled with the library.
#[pyfunction]
fn list_scenarios() -> Vec<&'static str> {
    SCENARIOS.iter().map(|s| s.name).collect()
}

/// Runs a bundled scenario (by name) or a mission file in memory and
/// returns its report as a dict. `mode` overrides the file's mode.
#[pyfunction]
#[pyo3(signature = (config, mode = None))]
fn run_mission<'py>(
    py: Python<'py>,
    config: &str,
    mode: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = if !Path::new(config).exists() && bundled_scenario(config).is_some() {
        load_bundled(config)
    } else {
        load_config(config)
    }
    .map_err(to_py)?;
    if let Some(mode) = mode {
        let mode = mode.parse().map_err(to_py)?;
        cfg = cfg.with_mode(mode).map_err(to_py)?;
    }
    let json = py
        .detach(|| mission::run_mission(&cfg))
        .map_err(to_py)?
        .report
        .to_json();
    py.import("json")?.call_method1("loads", (json,))
}

#[pymodule]
pub fn rendezvous(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("RendezvousError", m.py().get_type::<RendezvousError>())?;
    m.add_class::<Network>()?;
    m.add_class::<ConsensusResult>()?;
    m.add_class::<QuadParams>()?;
    m.add_class::<QuadState>()?;
    m.add_class::<FlightPlan>()?;
    m.add_class::<Flight>()?;
    m.add_function(wrap_pyfunction!(consensus_point, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_consensus, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(plan_yaw, m)?)?;
    m.add_function(wrap_pyfunction!(plan_translation, m)?)?;
    m.add_function(wrap_pyfunction!(plan_vertical, m)?)?;
    m.add_function(wrap_pyfunction!(plan_rendezvous, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(list_scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(run_mission, m)?)?;
    Ok(())
}
