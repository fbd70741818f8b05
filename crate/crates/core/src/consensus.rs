//! The agreement protocol `Q̇ = −L Q` on fixed and time-varying networks.

use crate::error::{Error, Result};
use crate::network::{is_connected, weighted_laplacian_at, Laplacian, Network};
use crate::numerics::{rk4_step, sym_eigen, MatN, SymEigen, VecN};

/// Agent states, one row per agent.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMatrix(MatN);

impl StateMatrix {
    pub fn new(values: MatN) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::Dimension {
                expected: "at least one agent and one state column".into(),
                actual: format!("{}x{}", values.nrows(), values.ncols()),
            });
        }
        Ok(StateMatrix(values))
    }

    pub fn from_rows<const R: usize>(rows: &[[f64; R]]) -> Result<Self> {
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        StateMatrix::new(MatN::from_row_slice(rows.len(), R, &flat))
    }

    pub fn from_row_vecs(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != r) {
            return Err(Error::Dimension {
                expected: format!("{r} columns in every row"),
                actual: format!("{} columns", bad.len()),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        StateMatrix::new(MatN::from_row_slice(rows.len(), r, &flat))
    }

    /// Number of agents.
    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    /// Dimension of each agent's state.
    pub fn r(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &MatN {
        &self.0
    }

    pub fn row(&self, i: usize) -> VecN {
        self.0.row(i).transpose()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        (self.0.row(i) - self.0.row(j)).norm()
    }

    /// Largest Euclidean distance from any row to `point`.
    pub fn max_row_deviation(&self, point: &VecN) -> f64 {
        (0..self.n())
            .map(|i| (self.row(i) - point).norm())
            .fold(0.0, f64::max)
    }

    pub fn column_sums(&self) -> VecN {
        self.0.row_sum().transpose()
    }
}

/// Agreed state value: the column-wise average of the initial states.
pub fn consensus_point(q0: &StateMatrix) -> VecN {
    q0.column_sums() / q0.n() as f64
}

/// `V(Q) = ½ ‖Q − 1 q*ᵀ‖²` summed over all entries.
pub fn lyapunov(q: &StateMatrix, qstar: &VecN) -> f64 {
    let mut v = 0.0;
    for i in 0..q.n() {
        v += (q.row(i) - qstar).norm_squared();
    }
    0.5 * v
}

/// Closed-form solution `Q(t) = U e^{−Λt} Uᵀ Q(0)` for a fixed Laplacian.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    eigen: SymEigen,
}

impl ClosedForm {
    pub fn new(l: &Laplacian) -> Result<Self> {
        Ok(ClosedForm {
            eigen: sym_eigen(&l.matrix)?,
        })
    }

    pub fn eigenvalues(&self) -> &VecN {
        &self.eigen.values
    }

    pub fn state_at(&self, q0: &StateMatrix, t: f64) -> Result<StateMatrix> {
        if q0.n() != self.eigen.values.len() {
            return Err(Error::Dimension {
                expected: format!("{} agent rows", self.eigen.values.len()),
                actual: format!("{} rows", q0.n()),
            });
        }
        let u = &self.eigen.vectors;
        let decay = self.eigen.values.map(|lam| (-lam * t).exp());
        let modal = u.transpose() * q0.matrix();
        StateMatrix::new(u * MatN::from_diagonal(&decay) * modal)
    }
}

pub fn closed_form_state(l: &Laplacian, q0: &StateMatrix, t: f64) -> Result<StateMatrix> {
    ClosedForm::new(l)?.state_at(q0, t)
}

/// Smallest nonzero Laplacian eigenvalue, which sets the convergence rate.
pub fn convergence_rate(l: &Laplacian) -> Result<f64> {
    if l.n() < 2 {
        return Err(Error::Domain(
            "convergence rate needs at least two agents".into(),
        ));
    }
    let lambda2 = sym_eigen(&l.matrix)?.values[1];
    if lambda2 <= 1e-9 {
        return Err(Error::Disconnected(format!(
            "second-smallest eigenvalue {lambda2:e} is not positive"
        )));
    }
    Ok(lambda2)
}

#[derive(Debug, Clone)]
pub struct ProtocolOptions {
    /// Keep every `stride`-th step (the first and last samples are always kept).
    pub stride: usize,
    /// Stop once every agent is within this distance of the agreed point.
    pub convergence_tol: Option<f64>,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        ProtocolOptions {
            stride: 10,
            convergence_tol: Some(1e-4),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConsensusTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateMatrix>,
    /// Initial Laplacian, one snapshot per edge addition, and the final one.
    pub laplacian_log: Vec<Laplacian>,
    /// Whether the early-stop criterion fired.
    pub converged: bool,
}

impl ConsensusTrajectory {
    pub fn initial(&self) -> &StateMatrix {
        &self.states[0]
    }

    pub fn last(&self) -> &StateMatrix {
        self.states.last().expect("trajectory has at least one sample")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one sample")
    }

    pub fn agent_path(&self, agent: usize) -> impl Iterator<Item = VecN> + '_ {
        self.states.iter().map(move |q| q.row(agent))
    }
}

pub fn integrate_protocol(
    net: &Network,
    q0: &StateMatrix,
    t_final: f64,
    dt: f64,
) -> Result<ConsensusTrajectory> {
    integrate_protocol_with(net, q0, t_final, dt, &ProtocolOptions::default())
}

/// RK4 integration of `Q̇ = −L(t) Q`.
///
/// For distance-weighted networks the Laplacian is rebuilt from the
/// positions at the start of every step and held fixed across the step.
pub fn integrate_protocol_with(
    net: &Network,
    q0: &StateMatrix,
    t_final: f64,
    dt: f64,
    opts: &ProtocolOptions,
) -> Result<ConsensusTrajectory> {
    if !(dt > 0.0) || !(t_final >= 0.0) {
        return Err(Error::Domain(format!(
            "need dt > 0 and T >= 0, got dt = {dt}, T = {t_final}"
        )));
    }
    let stride = opts.stride.max(1);
    let alpha = consensus_point(q0);

    let mut lap = weighted_laplacian_at(net, q0, 0.0)?;
    if !is_connected(&lap.network) {
        return Err(Error::Disconnected(
            "communication graph is disconnected at t = 0".into(),
        ));
    }
    let fixed = net.is_fixed();
    let mut log = vec![lap.clone()];
    let mut times = vec![0.0];
    let mut states = vec![q0.clone()];
    let mut q = q0.matrix().clone();

    let mut converged = opts
        .convergence_tol
        .is_some_and(|tol| q0.max_row_deviation(&alpha) < tol);
    let steps = if converged {
        0
    } else {
        (t_final / dt - 1e-9).ceil().max(0.0) as usize
    };

    for k in 0..steps {
        let t = k as f64 * dt;
        let h = if k + 1 == steps { t_final - t } else { dt };
        if !fixed && k > 0 {
            let edges_before = lap.network.edges().len();
            lap = weighted_laplacian_at(&lap.network, &StateMatrix(q.clone()), t)?;
            if lap.network.edges().len() != edges_before {
                log.push(lap.clone());
            }
        }
        let l = &lap.matrix;
        q = rk4_step(|_, x: &MatN| Ok(-(l * x)), &q, t, h)?;

        let t_next = t + h;
        let current = StateMatrix(q.clone());
        converged = opts
            .convergence_tol
            .is_some_and(|tol| current.max_row_deviation(&alpha) < tol);
        if (k + 1) % stride == 0 || k + 1 == steps || converged {
            times.push(t_next);
            states.push(current);
        }
        if converged {
            break;
        }
    }

    if !fixed {
        let t_end = *times.last().unwrap();
        let final_lap = weighted_laplacian_at(&lap.network, states.last().unwrap(), t_end)?;
        log.push(final_lap);
    }

    Ok(ConsensusTrajectory {
        times,
        states,
        laplacian_log: log,
        converged,
    })
}

/// Largest distance between agent `agent`'s sampled path and the line
/// through its initial state and the agreed point.
pub fn straightness_residual(traj: &ConsensusTrajectory, agent: usize) -> f64 {
    let start = traj.initial().row(agent);
    let alpha = consensus_point(traj.initial());
    let axis = &alpha - &start;
    let len = axis.norm();
    traj.agent_path(agent)
        .map(|p| {
            let rel = p - &start;
            if len <= f64::EPSILON * start.norm().max(1.0) {
                rel.norm()
            } else {
                let dir = &axis / len;
                (&rel - &dir * rel.dot(&dir)).norm()
            }
        })
        .fold(0.0, f64::max)
}
