//! Open-loop rotor-speed schedules for hover, pure yaw, vertical and
//! single-axis translations, and composed rendezvous legs.
//!
//! Each maneuver follows a smooth rest-to-rest profile and inverts the
//! rigid-body model exactly along it. The commanded amplitude is then tuned
//! by bisection against a simulation so that the simulated endpoint matches
//! the request.

mod laws;
mod profile;
mod schedule;

pub use laws::{
    hover_speed, level_flight_tilt, side_translation_relation, translation_relation,
    translation_thrust, yaw_relation, Axis, ControlLaw, Mixing, TiltPlan,
};
pub use profile::{ProfileSample, SmoothTrapezoid};
pub use schedule::{ControlSchedule, Segment};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{wrap_angle, Vec3, DEFAULT_DT};
use crate::quad::{simulate_with, Controls, QuadParams, QuadState};

/// Default rotor speed limit, rad/s.
pub const DEFAULT_OMEGA_MAX: f64 = 500.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    pub omega_max: f64,
    /// Largest tilt a translation may command, rad.
    pub max_tilt: f64,
    pub mixing: Mixing,
    /// Share of a maneuver spent in each acceleration ramp.
    pub ramp_fraction: f64,
    /// Tune maneuver amplitudes against simulation.
    pub refine: bool,
    pub refine_tol: f64,
    pub refine_max_iter: usize,
    /// Step used by the tuning simulations.
    pub sim_dt: f64,
    /// Step of the central differences giving tilt rate and acceleration.
    pub fd_step: f64,
    /// Nominal rates used to pick durations for rendezvous legs.
    pub yaw_rate: f64,
    pub cruise_speed: f64,
    pub climb_rate: f64,
    pub min_yaw_duration: f64,
    pub min_translation_duration: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            omega_max: DEFAULT_OMEGA_MAX,
            max_tilt: std::f64::consts::FRAC_PI_4,
            mixing: Mixing::Decoupled,
            ramp_fraction: 0.2,
            refine: true,
            refine_tol: 1e-6,
            refine_max_iter: 60,
            sim_dt: DEFAULT_DT,
            fd_step: 1e-4,
            yaw_rate: std::f64::consts::FRAC_PI_8,
            cruise_speed: 1.25,
            climb_rate: 1.0,
            min_yaw_duration: 1.0,
            min_translation_duration: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManeuverKind {
    Hover,
    Yaw { angle: f64 },
    Translate { axis: Axis, distance: f64 },
    Vertical { distance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManeuverSpec {
    pub kind: ManeuverKind,
    pub duration: f64,
    /// Fixes the free rotor speed (`ω₂` for yaw, `ω₄` for x, `ω₃` for y)
    /// instead of deriving it from a profile. The resulting schedule obeys
    /// the closed-form rotor relations but does not steer to an endpoint.
    pub free_parameter: Option<f64>,
}

impl ManeuverSpec {
    pub fn new(kind: ManeuverKind, duration: f64) -> Self {
        ManeuverSpec {
            kind,
            duration,
            free_parameter: None,
        }
    }
}

/// Four equal rotor speeds balancing the weight.
pub fn hover_controls(p: &QuadParams) -> Result<Controls> {
    hover_controls_with(p, DEFAULT_OMEGA_MAX)
}

pub fn hover_controls_with(p: &QuadParams, omega_max: f64) -> Result<Controls> {
    p.validate()?;
    let c = Controls::uniform(hover_speed(p));
    check_saturation(&c, omega_max, 0.0)?;
    Ok(c)
}

fn check_saturation(c: &Controls, omega_max: f64, t: f64) -> Result<()> {
    c.check()?;
    match c.omega.iter().enumerate().find(|(_, w)| **w > omega_max) {
        Some((i, w)) => Err(Error::Saturation {
            rotor: i + 1,
            omega: *w,
            omega_max,
            t,
        }),
        None => Ok(()),
    }
}

/// Evaluates the schedule densely and rejects saturated, negative or
/// over-tilted commands.
pub fn check_schedule(schedule: &ControlSchedule, cfg: &PlannerConfig) -> Result<()> {
    for seg in schedule.segments() {
        let len = seg.duration();
        let n = ((len / 1e-3).ceil() as usize).max(1);
        for k in 0..=n {
            let tau = len * k as f64 / n as f64;
            let t = seg.t_start + tau;
            let c = seg.law.evaluate(tau)?;
            check_saturation(&c, cfg.omega_max, t)?;
            let tilt = seg.law.tilt(tau)?;
            if tilt.abs() >= cfg.max_tilt {
                return Err(Error::GimbalLock {
                    theta: tilt,
                    time: Some(t),
                });
            }
        }
    }
    Ok(())
}

/// Which terminal quantity a maneuver is tuned against.
#[derive(Clone, Copy)]
enum Measure {
    Yaw,
    Along(usize),
}

impl Measure {
    fn read(self, s: &QuadState) -> f64 {
        match self {
            Measure::Yaw => s.yaw(),
            Measure::Along(i) => s.position[i],
        }
    }
}

/// Finds the commanded amplitude whose simulated endpoint hits `target`.
///
/// The nominal plan (amplitude = target) is kept if already within
/// tolerance; otherwise a bracket is grown around it and bisected.
fn refine(
    p: &QuadParams,
    cfg: &PlannerConfig,
    target: f64,
    duration: f64,
    measure: Measure,
    build: impl Fn(f64) -> Result<ControlLaw>,
) -> Result<ControlLaw> {
    let law = build(target)?;
    if !cfg.refine || target == 0.0 {
        return Ok(law);
    }
    let start = QuadState::default();
    let miss = |law: &ControlLaw| -> Result<f64> {
        let schedule = ControlSchedule::single(law.clone(), duration)?;
        let traj = simulate_with(p, &start, &schedule, duration, cfg.sim_dt, usize::MAX)?;
        Ok(measure.read(traj.last()) - target)
    };
    let e0 = miss(&law)?;
    if e0.abs() <= cfg.refine_tol {
        return Ok(law);
    }
    // The endpoint grows with the commanded amplitude; step against the miss.
    let mut width = 2.0 * e0.abs();
    let (mut lo, mut hi) = (target, target);
    let (mut e_lo, mut e_hi) = (e0, e0);
    for _ in 0..30 {
        if e_lo <= 0.0 && e_hi >= 0.0 {
            break;
        }
        if e0 > 0.0 {
            lo = target - width;
            e_lo = miss(&build(lo)?)?;
        } else {
            hi = target + width;
            e_hi = miss(&build(hi)?)?;
        }
        width *= 2.0;
    }
    if !(e_lo <= 0.0 && e_hi >= 0.0) {
        return Err(Error::Infeasible(format!(
            "could not bracket commanded amplitude for target {target}"
        )));
    }
    for _ in 0..cfg.refine_max_iter {
        let mid = 0.5 * (lo + hi);
        let law = build(mid)?;
        let e = miss(&law)?;
        if e.abs() <= cfg.refine_tol {
            return Ok(law);
        }
        if e < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Infeasible(format!(
        "amplitude search did not reach {target} within {} iterations",
        cfg.refine_max_iter
    )))
}

fn finish(law: ControlLaw, duration: f64, cfg: &PlannerConfig) -> Result<ControlSchedule> {
    let schedule = ControlSchedule::single(law, duration)?;
    check_schedule(&schedule, cfg)?;
    Ok(schedule)
}

fn check_duration(duration: f64) -> Result<()> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::Domain(format!(
            "maneuver duration must be positive, got {duration}"
        )));
    }
    Ok(())
}

pub fn hover_schedule(p: &QuadParams, duration: f64, cfg: &PlannerConfig) -> Result<ControlSchedule> {
    ControlSchedule::single(
        ControlLaw::Hold(hover_controls_with(p, cfg.omega_max)?),
        duration,
    )
}

/// Rotation by `delta_psi` about the body z-axis while holding position.
pub fn yaw_schedule(p: &QuadParams, delta_psi: f64, duration: f64) -> Result<ControlSchedule> {
    yaw_schedule_with(p, delta_psi, duration, &PlannerConfig::default())
}

pub fn yaw_schedule_with(
    p: &QuadParams,
    delta_psi: f64,
    duration: f64,
    cfg: &PlannerConfig,
) -> Result<ControlSchedule> {
    check_duration(duration)?;
    p.validate()?;
    if delta_psi == 0.0 {
        return hover_schedule(p, duration, cfg);
    }
    let build = |angle: f64| -> Result<ControlLaw> {
        Ok(ControlLaw::Yaw {
            params: *p,
            profile: SmoothTrapezoid::new(angle, duration, cfg.ramp_fraction)?,
        })
    };
    check_schedule(&ControlSchedule::single(build(delta_psi)?, duration)?, cfg)?;
    let law = refine(p, cfg, delta_psi, duration, Measure::Yaw, build)?;
    finish(law, duration, cfg)
}

/// Straight flight of `distance` along a body axis at constant altitude.
pub fn axis_translation_schedule(
    p: &QuadParams,
    axis: Axis,
    distance: f64,
    duration: f64,
) -> Result<ControlSchedule> {
    axis_translation_schedule_with(p, axis, distance, duration, &PlannerConfig::default())
}

pub fn axis_translation_schedule_with(
    p: &QuadParams,
    axis: Axis,
    distance: f64,
    duration: f64,
    cfg: &PlannerConfig,
) -> Result<ControlSchedule> {
    check_duration(duration)?;
    p.validate()?;
    if distance == 0.0 {
        return hover_schedule(p, duration, cfg);
    }
    let build = |d: f64| -> Result<ControlLaw> {
        Ok(ControlLaw::Translate {
            params: *p,
            axis,
            profile: SmoothTrapezoid::new(d, duration, cfg.ramp_fraction)?,
            mixing: cfg.mixing,
            fd_step: cfg.fd_step,
        })
    };
    // Reject infeasible plans before spending simulations on them.
    check_schedule(&ControlSchedule::single(build(distance)?, duration)?, cfg)?;
    let index = match axis {
        Axis::X => 0,
        Axis::Y => 1,
    };
    let law = refine(p, cfg, distance, duration, Measure::Along(index), build)?;
    finish(law, duration, cfg)
}

/// Climb (positive) or descent along the body z-axis with level attitude.
pub fn vertical_schedule(
    p: &QuadParams,
    distance: f64,
    duration: f64,
    cfg: &PlannerConfig,
) -> Result<ControlSchedule> {
    check_duration(duration)?;
    p.validate()?;
    if distance == 0.0 {
        return hover_schedule(p, duration, cfg);
    }
    let build = |d: f64| -> Result<ControlLaw> {
        Ok(ControlLaw::Vertical {
            params: *p,
            profile: SmoothTrapezoid::new(d, duration, cfg.ramp_fraction)?,
        })
    };
    check_schedule(&ControlSchedule::single(build(distance)?, duration)?, cfg)?;
    let law = refine(p, cfg, distance, duration, Measure::Along(2), build)?;
    finish(law, duration, cfg)
}

pub fn plan_maneuver(
    p: &QuadParams,
    spec: &ManeuverSpec,
    cfg: &PlannerConfig,
) -> Result<ControlSchedule> {
    check_duration(spec.duration)?;
    match (spec.kind, spec.free_parameter) {
        (ManeuverKind::Hover, _) => hover_schedule(p, spec.duration, cfg),
        (ManeuverKind::Yaw { angle }, None) => yaw_schedule_with(p, angle, spec.duration, cfg),
        (ManeuverKind::Translate { axis, distance }, None) => {
            axis_translation_schedule_with(p, axis, distance, spec.duration, cfg)
        }
        (ManeuverKind::Vertical { distance }, _) => {
            vertical_schedule(p, distance, spec.duration, cfg)
        }
        (ManeuverKind::Yaw { .. }, Some(omega2)) => finish(
            ControlLaw::YawRelation {
                params: *p,
                omega2,
            },
            spec.duration,
            cfg,
        ),
        (ManeuverKind::Translate { axis, distance }, Some(free)) => finish(
            ControlLaw::TranslateRelation {
                params: *p,
                axis,
                profile: SmoothTrapezoid::new(distance, spec.duration, cfg.ramp_fraction)?,
                free,
                fd_step: cfg.fd_step,
            },
            spec.duration,
            cfg,
        ),
    }
}

/// Durations are rounded up to whole hundredths of a second.
fn round_duration(t: f64) -> f64 {
    (t * 100.0 - 1e-9).ceil() / 100.0
}

/// The maneuvers a rendezvous leg is built from, before planning.
pub fn rendezvous_maneuvers(
    start: &QuadState,
    target: &Vec3,
    cfg: &PlannerConfig,
) -> Result<Vec<ManeuverSpec>> {
    if !start.is_level_hover(1e-9) {
        return Err(Error::Domain(
            "rendezvous legs must start from a level hover at rest".into(),
        ));
    }
    let offset = target - start.position;
    let mut legs = Vec::new();
    if offset.z.abs() > 1e-9 {
        let duration = round_duration((offset.z.abs() / cfg.climb_rate).max(cfg.min_yaw_duration));
        legs.push(ManeuverSpec::new(
            ManeuverKind::Vertical { distance: offset.z },
            duration,
        ));
    }
    let horizontal = offset.xy().norm();
    if horizontal > 1e-9 {
        let turn = wrap_angle(offset.y.atan2(offset.x) - start.yaw());
        if turn.abs() > 1e-12 {
            let duration = round_duration((turn.abs() / cfg.yaw_rate).max(cfg.min_yaw_duration));
            legs.push(ManeuverSpec::new(ManeuverKind::Yaw { angle: turn }, duration));
        }
        let duration = round_duration(
            (horizontal / cfg.cruise_speed).max(cfg.min_translation_duration),
        );
        legs.push(ManeuverSpec::new(
            ManeuverKind::Translate {
                axis: Axis::X,
                distance: horizontal,
            },
            duration,
        ));
    }
    Ok(legs)
}

/// Optional climb, a yaw pointing the body x-axis at the target, and a
/// straight body-x flight to it. A target equal to the start yields a
/// zero-length hover schedule.
pub fn rendezvous_leg(p: &QuadParams, start: &QuadState, target: &Vec3) -> Result<ControlSchedule> {
    rendezvous_leg_with(p, start, target, &PlannerConfig::default())
}

pub fn rendezvous_leg_with(
    p: &QuadParams,
    start: &QuadState,
    target: &Vec3,
    cfg: &PlannerConfig,
) -> Result<ControlSchedule> {
    let legs = rendezvous_maneuvers(start, target, cfg)?;
    if legs.is_empty() {
        return ControlSchedule::single(ControlLaw::Hold(hover_controls_with(p, cfg.omega_max)?), 0.0);
    }
    let parts = legs
        .iter()
        .map(|spec| plan_maneuver(p, spec, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(ControlSchedule::concat(parts))
}
