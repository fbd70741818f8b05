//! Small dense numeric kernel: the hat map, Tait-Bryan rotation and Euler-rate
//! matrices, a cyclic Jacobi eigensolver for symmetric matrices, and a
//! classical fixed-step Runge-Kutta integrator.

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Mul};

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type MatN = DMatrix<f64>;
pub type VecN = DVector<f64>;

/// Distance from ±π/2 at which pitch is treated as gimbal-locked.
pub const GIMBAL_MARGIN: f64 = 1e-6;

/// Jacobi stops once the off-diagonal Frobenius norm falls below this
/// fraction of the full Frobenius norm.
pub const JACOBI_OFF_TOL: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Default integration step in seconds.
pub const DEFAULT_DT: f64 = 1e-3;

/// Skew-symmetric matrix with `hat(y) * z == y.cross(&z)`.
pub fn hat(y: &Vec3) -> Mat3 {
    Mat3::new(0.0, -y.z, y.y, y.z, 0.0, -y.x, -y.y, y.x, 0.0)
}

/// Inverse of [`hat`] for a skew-symmetric argument.
pub fn vee(m: &Mat3) -> Vec3 {
    Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Pure rotation about the first body axis.
pub fn rot_x(phi: f64) -> Mat3 {
    let (s, c) = phi.sin_cos();
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

/// Pure rotation about the second body axis.
pub fn rot_y(theta: f64) -> Mat3 {
    let (s, c) = theta.sin_cos();
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// Pure rotation about the third body axis.
pub fn rot_z(psi: f64) -> Mat3 {
    let (s, c) = psi.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn check_pitch_domain(theta: f64) -> Result<()> {
    if !theta.is_finite() || theta.abs() >= FRAC_PI_2 {
        return Err(Error::Domain(format!(
            "pitch {theta} rad outside the open interval (-pi/2, pi/2)"
        )));
    }
    Ok(())
}

/// Body-to-inertial rotation for roll `phi`, pitch `theta`, yaw `psi`
/// (intrinsic z-y'-x'' sequence), written out entrywise.
///
/// Roll and yaw are not range-checked: yaw is allowed to leave (-π, π]
/// during integration.
pub fn rotation_from_euler(phi: f64, theta: f64, psi: f64) -> Result<Mat3> {
    check_pitch_domain(theta)?;
    let (sf, cf) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = psi.sin_cos();
    Ok(Mat3::new(
        cp * ct,
        cp * st * sf - sp * cf,
        cp * st * cf + sp * sf,
        sp * ct,
        sp * st * sf + cp * cf,
        sp * st * cf - cp * sf,
        -st,
        ct * sf,
        ct * cf,
    ))
}

/// Map from body angular velocity to Euler-angle rates `(φ̇, θ̇, ψ̇)`.
pub fn euler_rate_matrix(phi: f64, theta: f64) -> Result<Mat3> {
    if !theta.is_finite() || theta.abs() >= FRAC_PI_2 - GIMBAL_MARGIN {
        return Err(Error::GimbalLock { theta, time: None });
    }
    let (sf, cf) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let tt = st / ct;
    Ok(Mat3::new(
        1.0,
        sf * tt,
        cf * tt,
        0.0,
        cf,
        -sf,
        0.0,
        sf / ct,
        cf / ct,
    ))
}

/// Eigendecomposition `A = U diag(values) Uᵀ` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Eigenvalues in ascending order.
    pub values: VecN,
    /// Orthonormal eigenvectors, column `k` paired with `values[k]`.
    pub vectors: MatN,
    pub sweeps: usize,
}

impl SymEigen {
    pub fn reconstruct(&self) -> MatN {
        &self.vectors * MatN::from_diagonal(&self.values) * self.vectors.transpose()
    }
}

fn off_diagonal_norm(m: &MatN) -> f64 {
    let n = m.nrows();
    let mut sum = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            sum += 2.0 * m[(p, q)] * m[(p, q)];
        }
    }
    sum.sqrt()
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Every sweep visits all `(p, q)` pairs in row order and annihilates
/// `A[p][q]` with a plane rotation. Eigenvectors are accumulated from the
/// rotations and the result is sorted by ascending eigenvalue.
pub fn sym_eigen(a: &MatN) -> Result<SymEigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension {
            expected: "square matrix".into(),
            actual: format!("{}x{}", n, a.ncols()),
        });
    }
    let scale = a.amax().max(1.0);
    for p in 0..n {
        for q in (p + 1)..n {
            if (a[(p, q)] - a[(q, p)]).abs() > 1e-12 * scale {
                return Err(Error::Domain(format!(
                    "matrix is not symmetric at ({p}, {q}): {} vs {}",
                    a[(p, q)],
                    a[(q, p)]
                )));
            }
        }
    }

    let mut m = (a + a.transpose()) * 0.5;
    let mut v = MatN::identity(n, n);
    let norm = m.norm();
    let mut sweeps = 0;

    if norm > 0.0 {
        loop {
            let off = off_diagonal_norm(&m);
            if off <= JACOBI_OFF_TOL * norm {
                break;
            }
            if sweeps == JACOBI_MAX_SWEEPS {
                return Err(Error::Convergence {
                    sweeps,
                    off_norm: off,
                });
            }
            sweeps += 1;
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let tau = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                        m[(k, p)] = c * mkp - s * mkq;
                        m[(k, q)] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                        m[(p, k)] = c * mpk - s * mqk;
                        m[(q, k)] = s * mpk + c * mqk;
                    }
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    for k in 0..n {
                        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = VecN::from_iterator(n, order.iter().map(|&i| m[(i, i)]));
    let mut vectors = MatN::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    Ok(SymEigen {
        values,
        vectors,
        sweeps,
    })
}

/// One classical fourth-order Runge-Kutta step of `ẋ = f(t, x)`.
///
/// Errors returned by `derivative` are propagated unchanged.
pub fn rk4_step<S, F>(mut derivative: F, x: &S, t: f64, dt: f64) -> Result<S>
where
    S: Clone + Add<Output = S> + Mul<f64, Output = S>,
    F: FnMut(f64, &S) -> Result<S>,
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("step size must be positive, got {dt}")));
    }
    let half = 0.5 * dt;
    let k1 = derivative(t, x)?;
    let k2 = derivative(t + half, &(x.clone() + k1.clone() * half))?;
    let k3 = derivative(t + half, &(x.clone() + k2.clone() * half))?;
    let k4 = derivative(t + dt, &(x.clone() + k3.clone() * dt))?;
    Ok(x.clone() + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}

/// Wraps an angle into (-π, π].
pub fn wrap_angle(angle: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn laplacian_l1() -> MatN {
        MatN::from_row_slice(
            4,
            4,
            &[
                1.0, -1.0, 0.0, 0.0, -1.0, 3.0, -1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, -1.0,
                2.0,
            ],
        )
    }

    fn laplacian_l2() -> MatN {
        MatN::from_row_slice(
            4,
            4,
            &[
                2.0, 0.0, -1.0, -1.0, 0.0, 1.0, -1.0, 0.0, -1.0, -1.0, 2.0, 0.0, -1.0, 0.0, 0.0,
                1.0,
            ],
        )
    }

    #[test]
    fn hat_examples() {
        assert_eq!(hat(&Vec3::zeros()), Mat3::zeros());
        assert_eq!(hat(&Vec3::x()) * Vec3::y(), Vec3::z());
        let y = Vec3::new(1.0, 2.0, 3.0);
        let z = Vec3::new(4.0, 5.0, 6.0);
        // y × z = (2·6 − 3·5, 3·4 − 1·6, 1·5 − 2·4)
        assert_eq!(hat(&y) * z, Vec3::new(-3.0, 6.0, -3.0));
        assert_eq!(vee(&hat(&y)), y);
    }

    #[test]
    fn rotation_examples() {
        assert_eq!(rotation_from_euler(0.0, 0.0, 0.0).unwrap(), Mat3::identity());
        let (phi, theta, psi) = (0.3, 0.2, 0.1);
        let r = rotation_from_euler(phi, theta, psi).unwrap();
        let product = rot_z(psi) * rot_y(theta) * rot_x(phi);
        assert!((r - product).amax() <= 1e-14);
        let turned = rotation_from_euler(0.0, 0.0, FRAC_PI_2).unwrap() * Vec3::x();
        assert_abs_diff_eq!(turned, Vec3::y(), epsilon = 1e-15);
    }

    #[test]
    fn rotation_rejects_pitch_outside_domain() {
        assert!(matches!(
            rotation_from_euler(0.0, FRAC_PI_2, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(rotation_from_euler(0.0, 0.1, 7.0).is_ok());
    }

    #[test]
    fn euler_rate_examples() {
        assert_eq!(euler_rate_matrix(0.0, 0.0).unwrap(), Mat3::identity());
        let m = euler_rate_matrix(FRAC_PI_4, FRAC_PI_4).unwrap();
        assert_abs_diff_eq!(m[(0, 1)], 2f64.sqrt() / 2.0, epsilon = 1e-15);
        assert!(matches!(
            euler_rate_matrix(0.0, FRAC_PI_2 - 1e-9),
            Err(Error::GimbalLock { .. })
        ));
    }

    /// Euler rates from finite differences of R(η(t)) must reproduce Ω via
    /// Rᵀ Ṙ = Ω̂.
    #[test]
    fn euler_rate_matches_rotation_kinematics() {
        let (phi, theta, psi) = (0.4, -0.3, 1.1);
        let omega = Vec3::new(0.7, -0.2, 0.5);
        let rates = euler_rate_matrix(phi, theta).unwrap() * omega;
        let h = 1e-6;
        let r = |s: f64| {
            rotation_from_euler(phi + s * rates.x, theta + s * rates.y, psi + s * rates.z).unwrap()
        };
        let rdot = (r(h) - r(-h)) / (2.0 * h);
        let omega_hat = r(0.0).transpose() * rdot;
        assert_abs_diff_eq!(vee(&omega_hat), omega, epsilon = 1e-8);
    }

    #[test]
    fn eigen_identity() {
        let e = sym_eigen(&MatN::identity(4, 4)).unwrap();
        assert_eq!(e.values.as_slice(), &[1.0; 4]);
    }

    #[test]
    fn eigen_unweighted_scenarios() {
        let e = sym_eigen(&laplacian_l1()).unwrap();
        for (got, want) in e.values.iter().zip([0.0, 1.0, 3.0, 4.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        let e = sym_eigen(&laplacian_l2()).unwrap();
        for (got, want) in e.values.iter().zip([0.0, 0.586, 2.0, 3.414]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-3);
        }
    }

    #[test]
    fn eigen_rejects_asymmetric_and_nonsquare() {
        let mut a = laplacian_l1();
        a[(0, 1)] += 1e-6;
        assert!(matches!(sym_eigen(&a), Err(Error::Domain(_))));
        assert!(matches!(
            sym_eigen(&MatN::zeros(2, 3)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn eigen_zero_and_scalar() {
        let e = sym_eigen(&MatN::zeros(3, 3)).unwrap();
        assert_eq!(e.values.as_slice(), &[0.0; 3]);
        assert_eq!(e.vectors, MatN::identity(3, 3));
        let e = sym_eigen(&MatN::from_element(1, 1, -2.5)).unwrap();
        assert_eq!(e.values[0], -2.5);
    }

    #[test]
    fn rk4_trivial_and_exponential() {
        let x = rk4_step(|_, _: &f64| Ok(0.0), &5.0, 0.0, 0.1).unwrap();
        assert_eq!(x, 5.0);
        let x = rk4_step(|_, x: &f64| Ok(*x), &1.0, 0.0, 0.01).unwrap();
        assert_abs_diff_eq!(x, 0.01f64.exp(), epsilon = 1e-10);
        assert!(rk4_step(|_, x: &f64| Ok(*x), &1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn rk4_propagates_derivative_errors() {
        let r = rk4_step(
            |_, _: &f64| Err(Error::GimbalLock { theta: 1.6, time: None }),
            &0.0,
            0.0,
            0.1,
        );
        assert!(matches!(r, Err(Error::GimbalLock { .. })));
    }

    /// Closed-form oracle for ẋ = −L x, computed with nalgebra's own
    /// symmetric eigensolver so it stays independent of `sym_eigen`.
    fn linear_oracle(l: &MatN, x0: &VecN, t: f64) -> VecN {
        let e = nalgebra::SymmetricEigen::new(l.clone());
        let decay = VecN::from_iterator(
            e.eigenvalues.len(),
            e.eigenvalues.iter().map(|lam| (-lam * t).exp()),
        );
        &e.eigenvectors * MatN::from_diagonal(&decay) * e.eigenvectors.transpose() * x0
    }

    fn rk4_linear(l: &MatN, x0: &VecN, t_final: f64, dt: f64) -> VecN {
        let steps = (t_final / dt).round() as usize;
        let mut x = x0.clone();
        for k in 0..steps {
            x = rk4_step(|_, x: &VecN| Ok(-(l * x)), &x, k as f64 * dt, dt).unwrap();
        }
        x
    }

    #[test]
    fn rk4_matches_matrix_exponential() {
        let l = laplacian_l1();
        let x0 = VecN::from_row_slice(&[4.0, 18.0, 15.0, 4.0]);
        let x = rk4_linear(&l, &x0, 1.0, 1e-3);
        let oracle = linear_oracle(&l, &x0, 1.0);
        assert!((x - oracle).amax() <= 1e-8);
    }

    #[test]
    fn rk4_global_error_is_fourth_order() {
        let l = laplacian_l2();
        let x0 = VecN::from_row_slice(&[24.0, 32.0, 26.0, 35.0]);
        let oracle = linear_oracle(&l, &x0, 1.0);
        let errs: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|&dt| (rk4_linear(&l, &x0, 1.0, dt) - &oracle).amax())
            .collect();
        for w in errs.windows(2) {
            assert!(w[0] / w[1] >= 12.0, "error ratios {errs:?}");
        }
    }

    #[test]
    fn wrap_angle_range() {
        assert_abs_diff_eq!(wrap_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_angle(-PI), PI, epsilon = 1e-15);
        assert_eq!(wrap_angle(0.5), 0.5);
    }

    fn symmetric_matrix() -> impl Strategy<Value = MatN> {
        (1usize..=10).prop_flat_map(|n| {
            prop::collection::vec(-10.0f64..10.0, n * n).prop_map(move |v| {
                let m = MatN::from_vec(n, n, v);
                (&m + m.transpose()) * 0.5
            })
        })
    }

    proptest! {
        #[test]
        fn hat_is_skew(x in -1e3f64..1e3, y in -1e3f64..1e3, z in -1e3f64..1e3) {
            let h = hat(&Vec3::new(x, y, z));
            prop_assert_eq!(h + h.transpose(), Mat3::zeros());
        }

        #[test]
        fn rotation_is_proper_orthogonal(
            phi in -PI..PI,
            theta in -1.57f64..1.57,
            psi in -PI..PI,
        ) {
            let r = rotation_from_euler(phi, theta, psi).unwrap();
            prop_assert!((r.determinant() - 1.0).abs() <= 1e-12);
            prop_assert!((r.transpose() * r - Mat3::identity()).amax() <= 1e-12);
        }

        #[test]
        fn eigen_reconstructs(a in symmetric_matrix()) {
            let e = sym_eigen(&a).unwrap();
            let scale = a.amax().max(f64::MIN_POSITIVE);
            let n = a.nrows();
            prop_assert!((e.reconstruct() - &a).amax() <= 1e-9 * scale);
            prop_assert!((e.vectors.transpose() * &e.vectors - MatN::identity(n, n)).amax() <= 1e-10);
            prop_assert!((&a * &e.vectors - &e.vectors * MatN::from_diagonal(&e.values)).amax() <= 1e-9 * scale);
            for w in e.values.as_slice().windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
        }
    }
}
