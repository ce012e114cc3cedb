//! Representation-independent calculus on SO(3).
//!
//! Closed-form expressions for the rotation matrix of a rotation vector and
//! for the Jacobian `Γ` of the exponential map, the catalog of analytic
//! derivative identities in [`jacobians`], and the limit-based numerical
//! differentiation operators in [`numeric`] used to verify them.

pub mod jacobians;
pub mod numeric;

use std::f64::consts::PI;

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::orientation::{hat, Orientation, RotationVector, SMALL_ANGLE_THRESHOLD};

pub use jacobians::{analytic_jacobians, DerivativeIdentity};
pub use numeric::{
    numeric_diff_between_manifolds, numeric_diff_from_manifold, numeric_diff_to_manifold,
    numeric_jacobian, numeric_jacobian_to_manifold, DiffConfig, DiffScheme,
};

/// 3×3 Jacobian block.
pub type Jacobian3 = Matrix3<f64>;

/// `C(φ) = C(exp(φ))` via Rodriguez' formula.
///
/// Below [`SMALL_ANGLE_THRESHOLD`] the series is truncated after the
/// quadratic term, which keeps the branch switch continuous to ~1e-13.
pub fn rodriguez(phi: &RotationVector) -> Jacobian3 {
    let angle = phi.norm();
    let k = hat(phi);
    let k2 = k * k;
    if angle < SMALL_ANGLE_THRESHOLD {
        return Matrix3::identity() + k + k2 * 0.5;
    }
    let half_sin = (0.5 * angle).sin();
    Matrix3::identity() + k * (angle.sin() / angle) + k2 * (2.0 * half_sin * half_sin / (angle * angle))
}

/// Jacobian of the exponential map, `∂ exp(φ) / ∂φ`.
pub fn gamma(phi: &RotationVector) -> Jacobian3 {
    let angle = phi.norm();
    let k = hat(phi);
    let k2 = k * k;
    if angle < SMALL_ANGLE_THRESHOLD {
        return Matrix3::identity() + k * 0.5 + k2 * (1.0 / 6.0);
    }
    let half_sin = (0.5 * angle).sin();
    let a2 = angle * angle;
    Matrix3::identity()
        + k * (2.0 * half_sin * half_sin / a2)
        + k2 * ((angle - angle.sin()) / (a2 * angle))
}

/// `Γ⁻¹(φ)`, computed by inverting `Γ(φ)` with an LU factorization.
///
/// Defined on the open ball `‖φ‖ < π`, the codomain of the logarithm.
pub fn gamma_inverse(phi: &RotationVector) -> Result<Jacobian3> {
    let norm = phi.norm();
    if norm.is_nan() || norm >= PI {
        return Err(Error::OutsideLogDomain { norm });
    }
    gamma(phi)
        .lu()
        .try_inverse()
        .ok_or(Error::OutsideLogDomain { norm })
}

/// Distance between `exp(Φ(v))` and `Φ ∘ exp(v) ∘ Φ⁻¹`; zero up to rounding.
pub fn adjoint_check(phi: &Orientation, v: &RotationVector) -> f64 {
    let lhs = Orientation::exp(&phi.rotate(v));
    let rhs = phi.compose(&Orientation::exp(v)).compose(&phi.inverse());
    lhs.distance(&rhs)
}

/// Residuals `‖log(exp(εφ1) ∘ exp(εφ2))/ε − (φ1 + φ2)‖` for each `ε`.
///
/// The residual vanishes at first order in `ε`; its leading term is
/// `ε‖φ1 × φ2‖/2`.
pub fn log_additivity_limit(
    phi1: &RotationVector,
    phi2: &RotationVector,
    eps_sequence: &[f64],
) -> Vec<f64> {
    let sum = phi1 + phi2;
    eps_sequence
        .iter()
        .map(|&eps| {
            let q = Orientation::exp(&(phi1 * eps)).compose(&Orientation::exp(&(phi2 * eps)));
            (q.log() / eps - sum).norm()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orientation::Vec3;
    use crate::sampling::{random_orientation, random_rotation_vector, seeded};
    use std::f64::consts::FRAC_PI_2;

    /// `Σ_{k=0..20} (A)^k / k!` on `A = φ^× / 2^s`, squared back `s` times.
    fn expm_series(phi: &Vec3) -> Matrix3<f64> {
        let s = phi.norm().log2().ceil().max(0.0) as i32 + 1;
        let k = hat(phi) / 2f64.powi(s);
        let mut term = Matrix3::identity();
        let mut sum = term;
        for n in 1..=20 {
            term = term * k / n as f64;
            sum += term;
        }
        (0..s).fold(sum, |m, _| m * m)
    }

    #[test]
    fn rodriguez_reference_values() {
        assert_eq!(rodriguez(&Vec3::zeros()), Matrix3::identity());
        let c = rodriguez(&Vec3::new(0.0, 0.0, FRAC_PI_2));
        let expected = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert!((c - expected).norm() < 1e-15);
    }

    #[test]
    fn rodriguez_matches_matrix_exponential_series() {
        let mut rng = seeded(21);
        for _ in 0..300 {
            let phi = random_rotation_vector(&mut rng, 3.0);
            let c = rodriguez(&phi);
            assert!((c - expm_series(&phi)).abs().max() < 1e-10);
            assert!((c.transpose() * c - Matrix3::identity()).norm() < 1e-9);
            assert!((c - Orientation::exp(&phi).rotation_matrix()).abs().max() < 1e-9);
        }
    }

    #[test]
    fn gamma_fixes_its_argument() {
        assert_eq!(gamma(&Vec3::zeros()), Matrix3::identity());
        let mut rng = seeded(22);
        for _ in 0..300 {
            let phi = random_rotation_vector(&mut rng, 3.0);
            let g = gamma(&phi);
            assert!((g * phi - phi).norm() < 1e-12);
            let lhs = g * hat(&phi);
            assert!((lhs - (rodriguez(&phi) - Matrix3::identity())).abs().max() < 1e-10);
        }
    }

    #[test]
    fn gamma_inverse_is_inverse() {
        assert!((gamma_inverse(&Vec3::zeros()).unwrap() - Matrix3::identity()).norm() < 1e-15);
        let mut rng = seeded(23);
        for _ in 0..300 {
            let phi = random_rotation_vector(&mut rng, PI - 0.1);
            let m = gamma_inverse(&phi).unwrap();
            assert!((m * gamma(&phi) - Matrix3::identity()).abs().max() < 1e-8);
        }
    }

    #[test]
    fn gamma_inverse_rejects_boundary() {
        assert!(matches!(
            gamma_inverse(&Vec3::new(PI, 0.0, 0.0)),
            Err(Error::OutsideLogDomain { .. })
        ));
        assert!(gamma_inverse(&Vec3::new(4.0, 0.0, 0.0)).is_err());
        assert!(gamma_inverse(&Vec3::new(f64::NAN, 0.0, 0.0)).is_err());
    }

    #[test]
    fn small_angle_branches_are_continuous() {
        let dir = Vec3::new(0.3, -0.4, 0.866).normalize();
        let below = dir * (SMALL_ANGLE_THRESHOLD * (1.0 - 1e-12));
        let at = dir * SMALL_ANGLE_THRESHOLD;
        assert!((rodriguez(&below) - rodriguez(&at)).abs().max() < 1e-10);
        assert!((gamma(&below) - gamma(&at)).abs().max() < 1e-10);
        let gi = gamma_inverse(&below).unwrap() - gamma_inverse(&at).unwrap();
        assert!(gi.abs().max() < 1e-10);
    }

    #[test]
    fn adjoint_identity_holds() {
        let mut rng = seeded(24);
        let id = Orientation::identity();
        assert_eq!(adjoint_check(&id, &Vec3::new(0.4, 0.1, -2.0)), 0.0);
        for _ in 0..300 {
            let q = random_orientation(&mut rng);
            assert!(adjoint_check(&q, &Vec3::zeros()) < 1e-15);
            let v = random_rotation_vector(&mut rng, 3.0);
            assert!(adjoint_check(&q, &v) < 1e-9);
        }
    }

    #[test]
    fn log_additivity_is_first_order() {
        let zero = log_additivity_limit(&Vec3::new(0.2, 0.5, -1.0), &Vec3::zeros(), &[1e-2, 1e-3]);
        assert!(zero.iter().all(|r| *r < 1e-12));

        let a = Vec3::new(0.3, -0.7, 0.2);
        let cancel = log_additivity_limit(&a, &-a, &[1e-2, 1e-3, 1e-4]);
        assert!(cancel.iter().all(|r| *r < 1e-9));

        let mut rng = seeded(25);
        for _ in 0..50 {
            let p1 = random_rotation_vector(&mut rng, 2.0);
            let p2 = random_rotation_vector(&mut rng, 2.0);
            if p1.cross(&p2).norm() < 1e-2 {
                continue;
            }
            let r = log_additivity_limit(&p1, &p2, &[1e-2, 1e-3, 1e-4]);
            for w in r.windows(2) {
                let ratio = w[0] / w[1];
                assert!((9.0..11.0).contains(&ratio), "ratio {ratio}");
            }
            assert!((r[2] - 0.5e-4 * p1.cross(&p2).norm()).abs() < 1e-7);
        }
    }
}
