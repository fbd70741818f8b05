use serde::{Deserialize, Serialize};

use super::profile::SmoothTrapezoid;
use crate::error::{Error, Result};
use crate::quad::{Controls, QuadParams};

/// Body axis along which a translation is flown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// How tilt torque and total thrust are distributed over the four rotors
/// during an axis translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mixing {
    /// Solve thrust, tilt torque, zero yaw torque and zero cross-axis torque
    /// (gyroscopic coupling included) simultaneously.
    #[default]
    Decoupled,
    /// Enforce the symmetric relation `ω₁ = ω₃ = ½(ω₂ + ω₄)` (x) or
    /// `ω₂ = ω₄ = ½(ω₁ + ω₃)` (y) exactly. This leaves a small residual
    /// yaw torque `−K_d δ²/2`, where `δ` is the tilt-pair speed difference.
    SymmetricRelation,
}

/// Open-loop rotor-speed law of one maneuver, in maneuver-local time.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlLaw {
    Hold(Controls),
    /// Pure yaw: `ω₁ = ω₃`, `ω₂ = ω₄` with `ω₁² + ω₂² = mg/(2K_r)`.
    Yaw {
        params: QuadParams,
        profile: SmoothTrapezoid,
    },
    /// Vertical motion with four equal rotor speeds.
    Vertical {
        params: QuadParams,
        profile: SmoothTrapezoid,
    },
    /// Level-altitude translation along a body axis, inverting the pitch
    /// (x) or roll (y) needed to track the profile.
    Translate {
        params: QuadParams,
        axis: Axis,
        profile: SmoothTrapezoid,
        mixing: Mixing,
        fd_step: f64,
    },
    /// Pure-yaw rotor relation with `ω₂ = ω₄` held at a fixed value.
    YawRelation { params: QuadParams, omega2: f64 },
    /// Axis translation with the free rotor (`ω₄` for x, `ω₃` for y) held at
    /// a fixed value and the remaining speeds from the closed-form relation.
    TranslateRelation {
        params: QuadParams,
        axis: Axis,
        profile: SmoothTrapezoid,
        free: f64,
        fd_step: f64,
    },
}

/// Commanded tilt with its first two time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltPlan {
    pub angle: f64,
    pub rate: f64,
    pub accel: f64,
    /// Total thrust `Σ K_r ω_i²` required, N.
    pub thrust: f64,
}

fn signed_square(x: f64) -> f64 {
    x * x.abs()
}

fn roots(u: [f64; 4]) -> Result<Controls> {
    if let Some(x) = u.iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::Infeasible(format!(
            "required squared rotor speed is negative ({x:.6e})"
        )));
    }
    Ok(Controls::new(u.map(f64::sqrt)))
}

/// Four equal rotor speeds whose thrust balances the weight.
pub fn hover_speed(p: &QuadParams) -> f64 {
    (p.weight() / (4.0 * p.thrust_coeff)).sqrt()
}

/// Rotor speeds for pure yaw given the free speed `ω₂ = ω₄`:
/// `ω₁ = ω₃ = √(mg/(2K_r) − ω₂²)`.
pub fn yaw_relation(p: &QuadParams, omega2: f64) -> Result<Controls> {
    let u1 = p.weight() / (2.0 * p.thrust_coeff) - omega2 * omega2;
    if u1 < 0.0 || omega2 < 0.0 {
        return Err(Error::Infeasible(format!(
            "free rotor speed {omega2} exceeds the hover budget for pure yaw"
        )));
    }
    Ok(Controls::new([u1.sqrt(), omega2, u1.sqrt(), omega2]))
}

/// Total thrust for straight flight along the body x-axis at constant
/// altitude, in terms of body velocities, `v̇₁`, pitch rate and pitch.
pub fn translation_thrust(
    p: &QuadParams,
    v1: f64,
    v3: f64,
    v1_dot: f64,
    omega2: f64,
    theta: f64,
) -> f64 {
    let (s, c) = theta.sin_cos();
    p.mass * ((v1_dot * s + v1 * c * omega2 + v3 * s * omega2) / c - v1 * omega2 + p.gravity * c)
        + signed_square(v3) * p.linear_drag[2]
}

/// Rotor speeds for body-x flight with total thrust `a` and free speed `ω₄`:
/// `ω₂ = ⅓(√((6a − 8K_r ω₄²)/K_r) − ω₄)`, `ω₁ = ω₃ = ½(ω₂ + ω₄)`.
pub fn translation_relation(p: &QuadParams, a: f64, omega4: f64) -> Result<Controls> {
    let [w1, w2] = pair_relation(p, a, omega4)?;
    Ok(Controls::new([w1, w2, w1, omega4]))
}

/// Body-y counterpart with free speed `ω₃`:
/// `ω₁ = ⅓(√((6a − 8K_r ω₃²)/K_r) − ω₃)`, `ω₂ = ω₄ = ½(ω₁ + ω₃)`.
pub fn side_translation_relation(p: &QuadParams, a: f64, omega3: f64) -> Result<Controls> {
    let [w2, w1] = pair_relation(p, a, omega3)?;
    Ok(Controls::new([w1, w2, omega3, w2]))
}

/// Returns `[mean, solved]` for the tilt pair whose other member is `free`.
fn pair_relation(p: &QuadParams, a: f64, free: f64) -> Result<[f64; 2]> {
    let radicand = (6.0 * a - 8.0 * p.thrust_coeff * free * free) / p.thrust_coeff;
    let solved = (radicand.max(0.0).sqrt() - free) / 3.0;
    if radicand < 0.0 || solved < 0.0 || free < 0.0 {
        return Err(Error::Infeasible(format!(
            "free rotor speed {free} incompatible with total thrust {a}"
        )));
    }
    Ok([0.5 * (solved + free), solved])
}

fn axis_index(axis: Axis) -> usize {
    match axis {
        Axis::X => 0,
        Axis::Y => 1,
    }
}

/// Tilt `α` (pitch for x, minus roll for y) that holds altitude while
/// accelerating at `acc` with ground speed `vel`:
/// `m·acc·cos α − m g sin α + C (vel cos α)|vel cos α| = 0`.
pub fn level_flight_tilt(p: &QuadParams, axis: Axis, vel: f64, acc: f64) -> Result<f64> {
    let (m, g) = (p.mass, p.gravity);
    let c = p.linear_drag[axis_index(axis)];
    let mut alpha = acc.atan2(g);
    for _ in 0..50 {
        let (s, co) = alpha.sin_cos();
        let w = vel * co;
        let f = m * acc * co - m * g * s + c * signed_square(w);
        let df = -m * acc * s - m * g * co - 2.0 * c * w.abs() * vel * s;
        let step = f / df;
        alpha -= step;
        if step.abs() <= 1e-15 * (1.0 + alpha.abs()) {
            return Ok(alpha);
        }
    }
    Err(Error::Infeasible(format!(
        "no level-flight tilt for speed {vel} and acceleration {acc}"
    )))
}

fn tilt_plan(
    p: &QuadParams,
    axis: Axis,
    profile: &SmoothTrapezoid,
    fd_step: f64,
    t: f64,
) -> Result<TiltPlan> {
    let tilt = |tau: f64| {
        let s = profile.sample(tau);
        level_flight_tilt(p, axis, s.vel, s.acc)
    };
    let s = profile.sample(t);
    let h = fd_step;
    let (am, a0, ap) = (tilt(t - h)?, tilt(t)?, tilt(t + h)?);
    let (sn, cs) = a0.sin_cos();
    Ok(TiltPlan {
        angle: a0,
        rate: (ap - am) / (2.0 * h),
        accel: (ap - 2.0 * a0 + am) / (h * h),
        thrust: p.mass * (s.acc * sn + p.gravity * cs)
            + signed_square(s.vel * sn) * p.linear_drag[2],
    })
}

impl ControlLaw {
    pub fn evaluate(&self, t: f64) -> Result<Controls> {
        match self {
            ControlLaw::Hold(c) => Ok(*c),
            ControlLaw::Yaw { params: p, profile } => {
                let s = profile.sample(t);
                let torque = p.inertia[2] * s.acc + signed_square(s.vel) * p.angular_drag[2];
                let half = p.weight() / (2.0 * p.thrust_coeff);
                let u1 = 0.5 * (half + torque / (2.0 * p.drag_torque_coeff));
                roots([u1, half - u1, u1, half - u1])
            }
            ControlLaw::Vertical { params: p, profile } => {
                let s = profile.sample(t);
                let thrust = p.mass * (s.acc + p.gravity) + signed_square(s.vel) * p.linear_drag[2];
                roots([thrust / (4.0 * p.thrust_coeff); 4])
            }
            ControlLaw::Translate {
                params: p,
                axis,
                profile,
                mixing,
                fd_step,
            } => {
                let plan = tilt_plan(p, *axis, profile, *fd_step, t)?;
                mix(p, *axis, *mixing, &plan)
            }
            ControlLaw::YawRelation { params, omega2 } => yaw_relation(params, *omega2),
            ControlLaw::TranslateRelation {
                params: p,
                axis,
                profile,
                free,
                fd_step,
            } => {
                let plan = tilt_plan(p, *axis, profile, *fd_step, t)?;
                match axis {
                    Axis::X => translation_relation(p, plan.thrust, *free),
                    Axis::Y => side_translation_relation(p, plan.thrust, *free),
                }
            }
        }
    }

    /// Commanded tilt magnitude (signed) at local time `t`.
    pub fn tilt(&self, t: f64) -> Result<f64> {
        match self {
            ControlLaw::Translate {
                params,
                axis,
                profile,
                ..
            }
            | ControlLaw::TranslateRelation {
                params,
                axis,
                profile,
                ..
            } => {
                let s = profile.sample(t);
                level_flight_tilt(params, *axis, s.vel, s.acc)
            }
            _ => Ok(0.0),
        }
    }
}

/// Distributes thrust and tilt torque over the rotors.
///
/// Index pairs: `(lo, hi)` is the tilt pair whose difference `u_hi − u_lo`
/// produces the tilt torque; `(a, b)` is the cross pair that must cancel the
/// gyroscopic torque on the other horizontal axis.
fn mix(p: &QuadParams, axis: Axis, mixing: Mixing, plan: &TiltPlan) -> Result<Controls> {
    let krd = p.thrust_coeff * p.arm_length;
    let total = plan.thrust / p.thrust_coeff;
    // Body-rate and tilt-torque requirement in terms of the rotated axis.
    let (torque, body_rate, lo, hi, a, b) = match axis {
        // θ = α: pitch torque from u₄ − u₂; roll balance from u₃ − u₁.
        Axis::X => (
            p.inertia[1] * plan.accel + signed_square(plan.rate) * p.angular_drag[1],
            plan.rate,
            1,
            3,
            0,
            2,
        ),
        // φ = −α: roll torque from u₃ − u₁; pitch balance from u₄ − u₂.
        Axis::Y => (
            -(p.inertia[0] * plan.accel + signed_square(plan.rate) * p.angular_drag[0]),
            -plan.rate,
            0,
            2,
            1,
            3,
        ),
    };
    let diff = torque / krd;
    let mut u = [0.0; 4];
    match mixing {
        Mixing::Decoupled => {
            u[lo] = 0.25 * total - 0.5 * diff;
            u[hi] = 0.25 * total + 0.5 * diff;
            // Gyroscopic torque J̄r Σ(−1)^{i+1}ω_i times the tilt rate acts on
            // the cross axis; offset the cross pair to cancel it.
            let sign = match axis {
                Axis::X => -1.0,
                Axis::Y => 1.0,
            };
            let mut cross = 0.0;
            for _ in 0..50 {
                u[a] = 0.25 * total - 0.5 * cross;
                u[b] = 0.25 * total + 0.5 * cross;
                let w = roots(u)?.omega;
                let spin = w[0] - w[1] + w[2] - w[3];
                let next = sign * p.rotor_inertia * spin * body_rate / krd;
                let done = (next - cross).abs() <= 1e-14 * total;
                cross = next;
                if done {
                    break;
                }
            }
            u[a] = 0.25 * total - 0.5 * cross;
            u[b] = 0.25 * total + 0.5 * cross;
            roots(u)
        }
        Mixing::SymmetricRelation => {
            let disc = total * total - 2.0 * diff * diff;
            if disc < 0.0 {
                return Err(Error::Infeasible(format!(
                    "tilt torque {torque:.4e} N·m exceeds what thrust {:.4e} N can mix",
                    plan.thrust
                )));
            }
            let sum = (0.5 * (total + disc.sqrt())).sqrt();
            let delta = diff / sum;
            let mut w = [0.0; 4];
            w[lo] = 0.5 * (sum - delta);
            w[hi] = 0.5 * (sum + delta);
            w[a] = 0.5 * sum;
            w[b] = 0.5 * sum;
            if w.iter().any(|x| *x < 0.0) {
                return Err(Error::Infeasible("tilt torque too large for thrust".into()));
            }
            Ok(Controls::new(w))
        }
    }
}
