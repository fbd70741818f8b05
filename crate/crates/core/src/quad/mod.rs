//! Rigid-body quadcopter model: parameters, state, rotor controls, the
//! coordinate equations of motion and their affine control decomposition.

mod dynamics;
mod sim;

pub use dynamics::{
    affine_fields, control_torque_directions, forces_body, geodesic_spray, gyroscopic_field,
    inertial_angular_momentum, inertial_linear_momentum, kinetic_energy, state_derivative,
    torques_body, AffineFields, BodyForces, BodyTorques, StateVector,
};
pub use sim::{simulate, simulate_with, ControlSource, QuadTrajectory};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{rotation_from_euler, Mat3, Vec3, GIMBAL_MARGIN};

/// Physical constants of the vehicle. The default is the parameter set
/// used throughout the bundled scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadParams {
    /// kg
    pub mass: f64,
    /// Principal moments of inertia, kg·m².
    pub inertia: [f64; 3],
    /// Rotor inertia about its spin axis, kg·m².
    pub rotor_inertia: f64,
    /// Distance from the center of mass to each rotor axis, m.
    pub arm_length: f64,
    /// Thrust coefficient: `t_i = K_r ω_i²`.
    pub thrust_coeff: f64,
    /// Propeller drag (yaw torque) coefficient.
    pub drag_torque_coeff: f64,
    /// Translational drag coefficients in the body frame.
    pub linear_drag: [f64; 3],
    /// Rotational drag coefficients in the body frame.
    pub angular_drag: [f64; 3],
    /// m/s²
    pub gravity: f64,
}

impl Default for QuadParams {
    fn default() -> Self {
        QuadParams {
            mass: 0.468,
            inertia: [3.8278e-3, 3.8288e-3, 7.6566e-3],
            rotor_inertia: 2.8385e-5,
            arm_length: 0.25,
            thrust_coeff: 2.9842e-5,
            drag_torque_coeff: 3.2320e-7,
            linear_drag: [5.5670e-4, 5.5670e-4, 6.3540e-4],
            angular_drag: [5.5670e-4, 5.5670e-4, 6.3540e-4],
            gravity: 9.81,
        }
    }
}

impl QuadParams {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let positive = [
            ("mass", self.mass),
            ("inertia[1]", self.inertia[0]),
            ("inertia[2]", self.inertia[1]),
            ("inertia[3]", self.inertia[2]),
            ("arm_length", self.arm_length),
            ("thrust_coeff", self.thrust_coeff),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                problems.push(format!("params.{name} must be positive, got {v}"));
            }
        }
        let nonnegative = [
            ("gravity", self.gravity),
            ("rotor_inertia", self.rotor_inertia),
            ("drag_torque_coeff", self.drag_torque_coeff),
            ("linear_drag[1]", self.linear_drag[0]),
            ("linear_drag[2]", self.linear_drag[1]),
            ("linear_drag[3]", self.linear_drag[2]),
            ("angular_drag[1]", self.angular_drag[0]),
            ("angular_drag[2]", self.angular_drag[1]),
            ("angular_drag[3]", self.angular_drag[2]),
        ];
        for (name, v) in nonnegative {
            if !(v >= 0.0 && v.is_finite()) {
                problems.push(format!("params.{name} must be nonnegative, got {v}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Weight `m g`.
    pub fn weight(&self) -> f64 {
        self.mass * self.gravity
    }

    pub fn inertia_vec(&self) -> Vec3 {
        Vec3::from(self.inertia)
    }

    /// Same vehicle with gravity, drag and rotor inertia removed.
    pub fn force_free(&self) -> Self {
        QuadParams {
            gravity: 0.0,
            linear_drag: [0.0; 3],
            angular_drag: [0.0; 3],
            rotor_inertia: 0.0,
            ..*self
        }
    }
}

/// Position, Tait-Bryan angles and body-frame velocities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadState {
    /// Inertial position `b`, m.
    pub position: Vec3,
    /// Roll, pitch, yaw `(φ, θ, ψ)`, rad.
    pub angles: Vec3,
    /// Body linear velocity `v`, m/s.
    pub velocity: Vec3,
    /// Body angular velocity `Ω`, rad/s.
    pub angular_velocity: Vec3,
}

impl QuadState {
    /// Level hover at rest with the given yaw.
    pub fn hover_at(position: Vec3, yaw: f64) -> Self {
        QuadState {
            position,
            angles: Vec3::new(0.0, 0.0, yaw),
            ..Default::default()
        }
    }

    pub fn roll(&self) -> f64 {
        self.angles.x
    }

    pub fn pitch(&self) -> f64 {
        self.angles.y
    }

    pub fn yaw(&self) -> f64 {
        self.angles.z
    }

    pub fn rotation(&self) -> Result<Mat3> {
        rotation_from_euler(self.angles.x, self.angles.y, self.angles.z)
    }

    pub fn check(&self) -> Result<()> {
        let theta = self.pitch();
        if !theta.is_finite() || theta.abs() >= std::f64::consts::FRAC_PI_2 - GIMBAL_MARGIN {
            return Err(Error::GimbalLock { theta, time: None });
        }
        Ok(())
    }

    pub fn is_level_hover(&self, tol: f64) -> bool {
        self.roll().abs() <= tol
            && self.pitch().abs() <= tol
            && self.velocity.amax() <= tol
            && self.angular_velocity.amax() <= tol
    }

    pub fn to_vector(&self) -> StateVector {
        let mut x = StateVector::zeros();
        x.fixed_rows_mut::<3>(0).copy_from(&self.position);
        x.fixed_rows_mut::<3>(3).copy_from(&self.angles);
        x.fixed_rows_mut::<3>(6).copy_from(&self.velocity);
        x.fixed_rows_mut::<3>(9).copy_from(&self.angular_velocity);
        x
    }

    pub fn from_vector(x: &StateVector) -> Self {
        QuadState {
            position: x.fixed_rows::<3>(0).into_owned(),
            angles: x.fixed_rows::<3>(3).into_owned(),
            velocity: x.fixed_rows::<3>(6).into_owned(),
            angular_velocity: x.fixed_rows::<3>(9).into_owned(),
        }
    }
}

/// Commanded rotor angular speeds `ω_1..ω_4` in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Controls {
    pub omega: [f64; 4],
}

impl Controls {
    pub fn new(omega: [f64; 4]) -> Self {
        Controls { omega }
    }

    pub fn uniform(omega: f64) -> Self {
        Controls { omega: [omega; 4] }
    }

    /// Squared speeds `u_i = ω_i²`, the inputs of the affine model.
    pub fn squared(&self) -> [f64; 4] {
        self.omega.map(|w| w * w)
    }

    pub fn thrusts(&self, p: &QuadParams) -> [f64; 4] {
        self.squared().map(|u| p.thrust_coeff * u)
    }

    pub fn total_thrust(&self, p: &QuadParams) -> f64 {
        self.thrusts(p).iter().sum()
    }

    pub fn check(&self) -> Result<()> {
        if let Some(w) = self.omega.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::Domain(format!(
                "rotor speeds must be finite and nonnegative, got {w}"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_are_valid() {
        QuadParams::default().validate().unwrap();
        let bad = QuadParams {
            mass: 0.0,
            linear_drag: [-1.0, 0.0, 0.0],
            ..Default::default()
        };
        match bad.validate() {
            Err(Error::Validation(v)) => assert_eq!(v.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn state_vector_layout() {
        let s = QuadState {
            position: Vec3::new(1., 2., 3.),
            angles: Vec3::new(4., 5., 6.),
            velocity: Vec3::new(7., 8., 9.),
            angular_velocity: Vec3::new(10., 11., 12.),
        };
        let x = s.to_vector();
        assert_eq!(x.as_slice(), &[1., 2., 3., 4., 5., 6., 7., 8., 9., 10., 11., 12.]);
        assert_eq!(QuadState::from_vector(&x), s);
    }

    #[test]
    fn controls_validation() {
        assert!(Controls::new([1.0, -1.0, 0.0, 0.0]).check().is_err());
        assert!(Controls::uniform(f64::NAN).check().is_err());
        Controls::uniform(0.0).check().unwrap();
    }
}
