use nalgebra::SVector;

use super::{Controls, QuadParams, QuadState};
use crate::error::Result;
use crate::numerics::{euler_rate_matrix, Vec3};

/// `(ḃ, φ̇, θ̇, ψ̇, v̇, Ω̇)`, or a state laid out the same way.
pub type StateVector = SVector<f64, 12>;

/// Rotor spin directions `(−1)^{i+1}` for rotors 1..4.
const SPIN: [f64; 4] = [1.0, -1.0, 1.0, -1.0];

fn signed_square(x: f64) -> f64 {
    x * x.abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyForces {
    /// Quadratic translational drag `f₁`.
    pub drag: Vec3,
    /// Gravity expressed in the body frame `f₂`.
    pub gravity: Vec3,
    /// Total rotor thrust along the body z-axis `f₃`.
    pub thrust: Vec3,
}

impl BodyForces {
    pub fn total(&self) -> Vec3 {
        self.drag + self.gravity + self.thrust
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyTorques {
    /// Quadratic rotational drag `τ₁`.
    pub drag: Vec3,
    /// Gyroscopic torque of the spinning rotors `τ₂`.
    pub gyroscopic: Vec3,
    /// Net torque from rotor thrust and propeller drag `τ_f`.
    pub rotor: Vec3,
}

impl BodyTorques {
    pub fn total(&self) -> Vec3 {
        self.drag + self.gyroscopic + self.rotor
    }
}

pub fn forces_body(s: &QuadState, c: &Controls, p: &QuadParams) -> Result<BodyForces> {
    let r = s.rotation()?;
    let v = &s.velocity;
    let drag = -Vec3::new(
        signed_square(v.x) * p.linear_drag[0],
        signed_square(v.y) * p.linear_drag[1],
        signed_square(v.z) * p.linear_drag[2],
    );
    let gravity = -p.weight() * r.transpose() * Vec3::z();
    let thrust = Vec3::new(0.0, 0.0, c.total_thrust(p));
    Ok(BodyForces {
        drag,
        gravity,
        thrust,
    })
}

pub fn torques_body(s: &QuadState, c: &Controls, p: &QuadParams) -> BodyTorques {
    let om = &s.angular_velocity;
    let drag = -Vec3::new(
        signed_square(om.x) * p.angular_drag[0],
        signed_square(om.y) * p.angular_drag[1],
        signed_square(om.z) * p.angular_drag[2],
    );
    let gyroscopic = (0..4)
        .map(|i| om.cross(&Vec3::new(0.0, 0.0, SPIN[i] * p.rotor_inertia * c.omega[i])))
        .fold(Vec3::zeros(), |acc, t| acc + t);
    let u = c.squared();
    let krd = p.thrust_coeff * p.arm_length;
    let rotor = Vec3::new(
        krd * (u[2] - u[0]),
        krd * (u[3] - u[1]),
        p.drag_torque_coeff * (0..4).map(|i| SPIN[i] * u[i]).sum::<f64>(),
    );
    BodyTorques {
        drag,
        gyroscopic,
        rotor,
    }
}

/// The twelve coordinate equations of motion, gyroscopic terms included.
///
/// Written out scalar by scalar; [`affine_fields`] builds the same field
/// from matrix and cross-product forms.
pub fn state_derivative(s: &QuadState, c: &Controls, p: &QuadParams) -> Result<StateVector> {
    s.check()?;
    let [b_phi, b_theta, b_psi] = [s.angles.x, s.angles.y, s.angles.z];
    let (sf, cf) = b_phi.sin_cos();
    let (st, ct) = b_theta.sin_cos();
    let (sp, cp) = b_psi.sin_cos();
    let tt = st / ct;
    let [v1, v2, v3] = [s.velocity.x, s.velocity.y, s.velocity.z];
    let [o1, o2, o3] = [s.angular_velocity.x, s.angular_velocity.y, s.angular_velocity.z];
    let [j1, j2, j3] = p.inertia;
    let (m, g) = (p.mass, p.gravity);
    let [cd1, cd2, cd3] = p.linear_drag;
    let [ct1, ct2, ct3] = p.angular_drag;
    let w = c.omega;
    let u = c.squared();
    let thrust: f64 = u.iter().map(|ui| p.thrust_coeff * ui).sum();
    let spin_sum: f64 = (0..4).map(|i| SPIN[i] * w[i]).sum();
    let spin_sq_sum: f64 = (0..4).map(|i| SPIN[i] * u[i]).sum();
    let krd = p.thrust_coeff * p.arm_length;
    let jr = p.rotor_inertia;

    Ok(StateVector::from_column_slice(&[
        v1 * cp * ct + v2 * (cp * st * sf - sp * cf) + v3 * (cp * st * cf + sp * sf),
        v1 * sp * ct + v2 * (sp * st * sf + cp * cf) + v3 * (sp * st * cf - cp * sf),
        -v1 * st + v2 * ct * sf + v3 * ct * cf,
        o1 + o2 * sf * tt + o3 * cf * tt,
        o2 * cf - o3 * sf,
        o2 * sf / ct + o3 * cf / ct,
        v2 * o3 - v3 * o2 - v1 * v1.abs() * cd1 / m + g * st,
        v3 * o1 - v1 * o3 - v2 * v2.abs() * cd2 / m - g * ct * sf,
        v1 * o2 - v2 * o1 + (thrust - v3 * v3.abs() * cd3) / m - g * ct * cf,
        ((j2 - j3) * o2 * o3 + jr * spin_sum * o2 + krd * (u[2] - u[0]) - o1 * o1.abs() * ct1)
            / j1,
        ((j3 - j1) * o1 * o3 - jr * spin_sum * o1 + krd * (u[3] - u[1]) - o2 * o2.abs() * ct2)
            / j2,
        ((j1 - j2) * o1 * o2 + p.drag_torque_coeff * spin_sq_sum - o3 * o3.abs() * ct3) / j3,
    ]))
}

/// Drift and control vector fields of the model with gyroscopic torque
/// neglected: `ẋ = drift + Σ controls[i] · ω_i²`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFields {
    pub drift: StateVector,
    pub controls: [StateVector; 4],
}

impl AffineFields {
    pub fn evaluate(&self, c: &Controls) -> StateVector {
        let u = c.squared();
        (0..4).fold(self.drift, |acc, i| acc + self.controls[i] * u[i])
    }
}

/// Torque per unit `ω_i²` produced by each rotor, before scaling by `J⁻¹`.
pub fn control_torque_directions(p: &QuadParams) -> [Vec3; 4] {
    let krd = p.thrust_coeff * p.arm_length;
    let kd = p.drag_torque_coeff;
    [
        Vec3::new(-krd, 0.0, kd),
        Vec3::new(0.0, -krd, -kd),
        Vec3::new(krd, 0.0, kd),
        Vec3::new(0.0, krd, -kd),
    ]
}

fn stack(position: Vec3, angles: Vec3, linear: Vec3, angular: Vec3) -> StateVector {
    let mut x = StateVector::zeros();
    x.fixed_rows_mut::<3>(0).copy_from(&position);
    x.fixed_rows_mut::<3>(3).copy_from(&angles);
    x.fixed_rows_mut::<3>(6).copy_from(&linear);
    x.fixed_rows_mut::<3>(9).copy_from(&angular);
    x
}

pub fn affine_fields(s: &QuadState, p: &QuadParams) -> Result<AffineFields> {
    s.check()?;
    let r = s.rotation()?;
    let theta_map = euler_rate_matrix(s.roll(), s.pitch())?;
    let (v, om) = (&s.velocity, &s.angular_velocity);
    let j = p.inertia_vec();
    let idle = Controls::default();
    let forces = forces_body(s, &idle, p)?;
    let torques = torques_body(s, &idle, p);

    let drift = stack(
        r * v,
        theta_map * om,
        v.cross(om) + (forces.drag + forces.gravity) / p.mass,
        (j.component_mul(om).cross(om) + torques.drag).component_div(&j),
    );
    let lift = Vec3::new(0.0, 0.0, p.thrust_coeff / p.mass);
    let controls = control_torque_directions(p)
        .map(|torque| stack(Vec3::zeros(), Vec3::zeros(), lift, torque.component_div(&j)));
    Ok(AffineFields { drift, controls })
}

/// Vertical lift of `J⁻¹ τ₂`, the gyroscopic term left out of the affine
/// decomposition.
pub fn gyroscopic_field(s: &QuadState, c: &Controls, p: &QuadParams) -> StateVector {
    let tau = torques_body(s, c, p).gyroscopic;
    stack(
        Vec3::zeros(),
        Vec3::zeros(),
        Vec3::zeros(),
        tau.component_div(&p.inertia_vec()),
    )
}

/// Force-free flow `(R v, Θ Ω, v × Ω, J⁻¹(JΩ × Ω))` in coordinates.
pub fn geodesic_spray(s: &QuadState, p: &QuadParams) -> Result<StateVector> {
    s.check()?;
    let r = s.rotation()?;
    let theta_map = euler_rate_matrix(s.roll(), s.pitch())?;
    let (v, om) = (&s.velocity, &s.angular_velocity);
    let j = p.inertia_vec();
    Ok(stack(
        r * v,
        theta_map * om,
        v.cross(om),
        j.component_mul(om).cross(om).component_div(&j),
    ))
}

/// `½ (m‖v‖² + Ωᵀ J Ω)`.
pub fn kinetic_energy(s: &QuadState, p: &QuadParams) -> f64 {
    let om = &s.angular_velocity;
    0.5 * (p.mass * s.velocity.norm_squared() + om.dot(&p.inertia_vec().component_mul(om)))
}

/// Inertial translational momentum `p = R m v`.
pub fn inertial_linear_momentum(s: &QuadState, p: &QuadParams) -> Result<Vec3> {
    Ok(s.rotation()? * (p.mass * s.velocity))
}

/// Inertial angular momentum of the body about its own center, `R J Ω`.
pub fn inertial_angular_momentum(s: &QuadState, p: &QuadParams) -> Result<Vec3> {
    Ok(s.rotation()? * p.inertia_vec().component_mul(&s.angular_velocity))
}
