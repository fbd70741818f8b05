//! Plot-ready CSV: header row, `\n` line endings, every number printed with
//! 17 significant digits so identical runs give identical bytes.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::consensus::ConsensusTrajectory;
use crate::error::Result;
use crate::quad::{Controls, QuadParams, QuadTrajectory};

pub trait CsvTable {
    fn header(&self) -> Vec<String>;
    fn write_rows(&self, row: &mut dyn FnMut(&[f64]) -> io::Result<()>) -> io::Result<()>;
}

impl CsvTable for ConsensusTrajectory {
    fn header(&self) -> Vec<String> {
        let q = self.initial();
        let names = ["x", "y", "z"];
        let mut h = vec!["t".to_string()];
        for i in 1..=q.n() {
            for k in 0..q.r() {
                h.push(match names.get(k) {
                    Some(c) if q.r() <= 3 => format!("{c}{i}"),
                    _ => format!("q{i}_{}", k + 1),
                });
            }
        }
        h
    }

    fn write_rows(&self, row: &mut dyn FnMut(&[f64]) -> io::Result<()>) -> io::Result<()> {
        let mut buf = Vec::new();
        for (t, q) in self.times.iter().zip(&self.states) {
            buf.clear();
            buf.push(*t);
            // Row-major: all coordinates of agent 1, then agent 2, ...
            buf.extend(q.matrix().transpose().iter());
            row(&buf)?;
        }
        Ok(())
    }
}

/// A flown trajectory with the parameters needed for the thrust column.
pub struct QuadTable<'a> {
    pub trajectory: &'a QuadTrajectory,
    pub params: &'a QuadParams,
}

impl CsvTable for QuadTable<'_> {
    fn header(&self) -> Vec<String> {
        [
            "t", "b1", "b2", "b3", "phi", "theta", "psi", "v1", "v2", "v3", "O1", "O2", "O3",
            "w1", "w2", "w3", "w4", "thrust",
        ]
        .map(String::from)
        .to_vec()
    }

    fn write_rows(&self, row: &mut dyn FnMut(&[f64]) -> io::Result<()>) -> io::Result<()> {
        let traj = self.trajectory;
        for ((t, s), c) in traj.times.iter().zip(&traj.states).zip(&traj.controls) {
            let mut buf = vec![*t];
            buf.extend(s.to_vector().iter());
            buf.extend(c.omega);
            buf.push(c.total_thrust(self.params));
            row(&buf)?;
        }
        Ok(())
    }
}

/// Sampled rotor commands of a schedule.
pub struct ControlsTable<'a> {
    pub samples: &'a [(f64, Controls)],
    pub params: &'a QuadParams,
}

impl CsvTable for ControlsTable<'_> {
    fn header(&self) -> Vec<String> {
        ["t", "w1", "w2", "w3", "w4", "thrust"].map(String::from).to_vec()
    }

    fn write_rows(&self, row: &mut dyn FnMut(&[f64]) -> io::Result<()>) -> io::Result<()> {
        for (t, c) in self.samples {
            let mut buf = vec![*t];
            buf.extend(c.omega);
            buf.push(c.total_thrust(self.params));
            row(&buf)?;
        }
        Ok(())
    }
}

pub fn write_csv(table: &dyn CsvTable, mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{}", table.header().join(","))?;
    table.write_rows(&mut |values| {
        let mut first = true;
        for v in values {
            if !first {
                out.write_all(b",")?;
            }
            first = false;
            write!(out, "{v:.16e}")?;
        }
        out.write_all(b"\n")
    })?;
    out.flush()
}

pub fn export_csv(table: &dyn CsvTable, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_csv(table, BufWriter::new(file))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consensus::{integrate_protocol, StateMatrix};
    use crate::network::Network;
    use crate::planner::hover_controls;
    use crate::quad::{simulate_with, QuadState};

    fn render(table: &dyn CsvTable) -> String {
        let mut buf = Vec::new();
        write_csv(table, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn hover_rows_and_header() {
        let p = QuadParams::default();
        let c = hover_controls(&p).unwrap();
        let traj = simulate_with(&p, &QuadState::default(), &c, 0.02, 1e-2, 1).unwrap();
        assert_eq!(traj.len(), 3);
        let text = render(&QuadTable {
            trajectory: &traj,
            params: &p,
        });
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(
            lines[0],
            "t,b1,b2,b3,phi,theta,psi,v1,v2,v3,O1,O2,O3,w1,w2,w3,w4,thrust"
        );
        assert_eq!(lines[1].split(',').count(), 18);
        assert!(!text.contains('\r'));
        let thrust: f64 = lines[1].rsplit(',').next().unwrap().parse().unwrap();
        assert!((thrust - p.weight()).abs() <= 1e-12);
    }

    #[test]
    fn consensus_columns_and_round_trip() {
        let q0 = StateMatrix::from_rows(&[
            [4., 17., 24.],
            [18., 10., 32.],
            [15., 10., 26.],
            [4., 2., 35.],
        ])
        .unwrap();
        let net = Network::from_pairs(4, &[(1, 2), (2, 3), (2, 4), (3, 4)]).unwrap();
        let traj = integrate_protocol(&net, &q0, 0.5, 1e-3).unwrap();
        let text = render(&traj);
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,x1,y1,z1,x2,y2,z2,x3,y3,z3,x4,y4,z4"
        );
        let last: Vec<f64> = text
            .lines()
            .last()
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(last[0], traj.final_time());
        let q = traj.last();
        assert_eq!(last[4], q.matrix()[(1, 0)]);
        assert_eq!(render(&traj), text);
    }
}
