use serde::Serialize;

use super::config::Mode;
use crate::consensus::{consensus_point, ConsensusTrajectory, StateMatrix};
use crate::error::{Error, Result};
use crate::numerics::{sym_eigen, Vec3, VecN};
use crate::quad::QuadTrajectory;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentReport {
    /// 1-based agent index.
    pub agent: usize,
    /// Distance from the particle's terminal point to the rendezvous point.
    pub particle_final_error: Option<f64>,
    /// Distance from the drone's terminal position to the rendezvous point.
    pub quad_final_error: Option<f64>,
    /// Largest distance of the particle path from its straight segment.
    pub particle_cross_track: Option<f64>,
    /// Largest distance of the flown path from its straight segment.
    pub quad_cross_track: Option<f64>,
    pub flight_time: Option<f64>,
    pub quad_final_position: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenvalueRecord {
    pub t: f64,
    pub edges: usize,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub name: String,
    pub mode: Mode,
    pub rendezvous_point: Vec<f64>,
    pub particle_final_time: Option<f64>,
    pub particle_converged: Option<bool>,
    pub agents: Vec<AgentReport>,
    /// Laplacian spectrum at the start and after every change of network.
    pub eigenvalues: Vec<EigenvalueRecord>,
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Distance from `p` to the segment `a`–`b`.
pub fn segment_distance(p: &VecN, a: &VecN, b: &VecN) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * s)).norm()
}

fn to_vecn(v: &Vec3) -> VecN {
    VecN::from_column_slice(v.as_slice())
}

/// Compares consensus paths with flown drone paths toward the same point.
pub fn compare_trajectories(
    particle: &ConsensusTrajectory,
    quads: &[QuadTrajectory],
) -> Result<ComparisonReport> {
    if quads.len() != particle.initial().n() {
        return Err(Error::Dimension {
            expected: format!("{} quad trajectories", particle.initial().n()),
            actual: quads.len().to_string(),
        });
    }
    build_report("", Mode::Compare, particle.initial(), Some(particle), Some(quads), true)
}

pub(crate) fn build_report(
    name: &str,
    mode: Mode,
    q0: &StateMatrix,
    particle: Option<&ConsensusTrajectory>,
    quads: Option<&[QuadTrajectory]>,
    straight_legs: bool,
) -> Result<ComparisonReport> {
    let n = q0.n();
    let alpha = consensus_point(q0);
    if let Some(quads) = quads {
        if q0.r() != 3 {
            return Err(Error::Dimension {
                expected: "3-D agent positions".into(),
                actual: format!("{} coordinates", q0.r()),
            });
        }
        if quads.len() != n {
            return Err(Error::Dimension {
                expected: format!("{n} quad trajectories"),
                actual: quads.len().to_string(),
            });
        }
    }

    let agents = (0..n)
        .map(|i| {
            let start = q0.row(i);
            let particle_final_error =
                particle.map(|traj| (traj.last().row(i) - &alpha).norm());
            let particle_cross_track = particle.map(|traj| {
                traj.agent_path(i)
                    .map(|p| segment_distance(&p, &start, &alpha))
                    .fold(0.0, f64::max)
            });
            let quad = quads.map(|q| &q[i]);
            let quad_end = quad.map(|traj| to_vecn(&traj.last().position));
            AgentReport {
                agent: i + 1,
                particle_final_error,
                quad_final_error: quad_end
                    .as_ref()
                    .filter(|_| straight_legs)
                    .map(|end| (end - &alpha).norm()),
                particle_cross_track,
                quad_cross_track: quad.filter(|_| straight_legs).map(|traj| {
                    let from = to_vecn(&traj.states[0].position);
                    traj.states
                        .iter()
                        .map(|s| segment_distance(&to_vecn(&s.position), &from, &alpha))
                        .fold(0.0, f64::max)
                }),
                flight_time: quad.map(QuadTrajectory::final_time),
                quad_final_position: quad.map(|traj| traj.last().position.into()),
            }
        })
        .collect();

    let eigenvalues = match particle {
        Some(traj) => traj
            .laplacian_log
            .iter()
            .map(|l| {
                Ok(EigenvalueRecord {
                    t: l.time,
                    edges: l.network.edges().len(),
                    eigenvalues: sym_eigen(&l.matrix)?.values.iter().copied().collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };

    Ok(ComparisonReport {
        name: name.to_string(),
        mode,
        rendezvous_point: alpha.iter().copied().collect(),
        particle_final_time: particle.map(ConsensusTrajectory::final_time),
        particle_converged: particle.map(|t| t.converged),
        agents,
        eigenvalues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consensus::integrate_protocol;
    use crate::network::Network;
    use crate::quad::QuadState;

    #[test]
    fn segment_distance_cases() {
        let a = VecN::from_vec(vec![0.0, 0.0]);
        let b = VecN::from_vec(vec![2.0, 0.0]);
        let d = |x: f64, y: f64| segment_distance(&VecN::from_vec(vec![x, y]), &a, &b);
        assert_eq!(d(1.0, 1.0), 1.0);
        assert_eq!(d(-3.0, 4.0), 5.0);
        assert_eq!(d(5.0, 4.0), 5.0);
        assert_eq!(segment_distance(&b, &a, &a), 2.0);
    }

    #[test]
    fn complete_graph_particles_track_their_segments() {
        let q0 = StateMatrix::from_rows(&[[0., 0., 0.], [0., 9., 0.], [15., 9., 0.]]).unwrap();
        let traj = integrate_protocol(&Network::complete(3).unwrap(), &q0, 10.0, 1e-3).unwrap();
        let quads: Vec<_> = (0..3)
            .map(|i| {
                let row = q0.row(i);
                let s = QuadState::hover_at(Vec3::new(row[0], row[1], row[2]), 0.0);
                QuadTrajectory {
                    times: vec![0.0],
                    states: vec![s],
                    controls: vec![Default::default()],
                }
            })
            .collect();
        let report = compare_trajectories(&traj, &quads).unwrap();
        assert_eq!(report.rendezvous_point, vec![5.0, 6.0, 0.0]);
        for a in &report.agents {
            assert!(a.particle_cross_track.unwrap() <= 1e-6);
            assert!(a.particle_final_error.unwrap() <= 1e-4);
        }
        assert_eq!(report.eigenvalues.len(), 1);
        assert!(compare_trajectories(&traj, &quads[..2]).is_err());
        let json = report.to_json();
        assert!(json.contains("\"rendezvous_point\""));
    }
}
