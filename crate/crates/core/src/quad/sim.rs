use super::{state_derivative, Controls, QuadParams, QuadState, StateVector};
use crate::error::{Error, Result};
use crate::numerics::rk4_step;

/// Anything that can be asked for rotor speeds at a given time.
pub trait ControlSource {
    fn controls_at(&self, t: f64) -> Result<Controls>;

    /// Length of the interval on which the source is defined, starting at 0.
    fn duration(&self) -> f64;
}

/// Constant rotor speeds, defined for all time.
impl ControlSource for Controls {
    fn controls_at(&self, _t: f64) -> Result<Controls> {
        Ok(*self)
    }

    fn duration(&self) -> f64 {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Default)]
pub struct QuadTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<QuadState>,
    /// Controls applied at each retained sample.
    pub controls: Vec<Controls>,
}

impl QuadTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &QuadState {
        self.states.last().expect("trajectory has at least one sample")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one sample")
    }

    fn push(&mut self, t: f64, s: QuadState, c: Controls) {
        self.times.push(t);
        self.states.push(s);
        self.controls.push(c);
    }
}

/// RK4 integration keeping every tenth step.
pub fn simulate(
    p: &QuadParams,
    s0: &QuadState,
    source: &dyn ControlSource,
    t_final: f64,
    dt: f64,
) -> Result<QuadTrajectory> {
    simulate_with(p, s0, source, t_final, dt, 10)
}

/// RK4 integration on `[0, t_final]`, retaining every `stride`-th step and
/// always the final one. The last step is shortened to land on `t_final`.
///
/// Controls are re-evaluated at every Runge-Kutta stage and never clamped.
pub fn simulate_with(
    p: &QuadParams,
    s0: &QuadState,
    source: &dyn ControlSource,
    t_final: f64,
    dt: f64,
    stride: usize,
) -> Result<QuadTrajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("step size must be positive, got {dt}")));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::Domain(format!("final time must be nonnegative, got {t_final}")));
    }
    if stride == 0 {
        return Err(Error::Domain("sample stride must be at least 1".into()));
    }
    let duration = source.duration();
    if t_final > duration + 1e-9 {
        return Err(Error::ScheduleGap {
            t: t_final,
            duration,
        });
    }
    p.validate()?;
    s0.check().map_err(|e| stamp(e, 0.0))?;

    let mut traj = QuadTrajectory::default();
    traj.push(0.0, *s0, source.controls_at(0.0)?);

    let steps = (t_final / dt - 1e-9).ceil().max(0.0) as usize;
    let mut x = s0.to_vector();
    let mut t = 0.0;
    for k in 1..=steps {
        let h = (t_final - t).min(dt);
        x = rk4_step(
            |tau, xv: &StateVector| {
                let c = source.controls_at(tau.min(duration))?;
                state_derivative(&QuadState::from_vector(xv), &c, p)
            },
            &x,
            t,
            h,
        )
        .map_err(|e| stamp(e, t))?;
        t = if k == steps { t_final } else { k as f64 * dt };
        let s = QuadState::from_vector(&x);
        s.check().map_err(|e| stamp(e, t))?;
        if k % stride == 0 || k == steps {
            traj.push(t, s, source.controls_at(t)?);
        }
    }
    Ok(traj)
}

fn stamp(e: Error, t: f64) -> Error {
    match e {
        Error::GimbalLock { theta, time: None } => Error::GimbalLock {
            theta,
            time: Some(t),
        },
        other => other,
    }
}
