//! Analytic derivative identities involving orientations.
//!
//! All Jacobians use the left-perturbation convention of `⊞`/`⊟`. The time
//! derivative is a contract rather than a matrix: the derivative of
//! `Φ_BA(t)` is `−B_ω_AB(t)`.

use nalgebra::Matrix3;

use super::{gamma, gamma_inverse, Jacobian3};
use crate::error::Result;
use crate::orientation::{hat, Orientation, RotationVector, Vec3};

/// The eight derivative identities, in catalog order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DerivativeIdentity {
    /// `∂/∂t Φ_BA(t) = −B_ω_AB`
    TimeDerivative,
    /// `∂/∂r Φ(r) = C(Φ)`
    RotateWrtVector,
    /// `∂/∂Φ Φ(r) = −(Φ(r))^×`
    RotateWrtOrientation,
    /// `∂/∂Φ Φ⁻¹ = −C(Φ)ᵀ`
    Inverse,
    /// `∂/∂Φ1 (Φ1 ∘ Φ2) = I`
    ComposeLeft,
    /// `∂/∂Φ2 (Φ1 ∘ Φ2) = C(Φ1)`
    ComposeRight,
    /// `∂/∂φ exp(φ) = Γ(φ)`
    Exp,
    /// `∂/∂Φ log(Φ) = Γ⁻¹(log Φ)`
    Log,
}

impl DerivativeIdentity {
    pub const ALL: [DerivativeIdentity; 8] = [
        Self::TimeDerivative,
        Self::RotateWrtVector,
        Self::RotateWrtOrientation,
        Self::Inverse,
        Self::ComposeLeft,
        Self::ComposeRight,
        Self::Exp,
        Self::Log,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::TimeDerivative => "d_time",
            Self::RotateWrtVector => "d_rotate_d_vector",
            Self::RotateWrtOrientation => "d_rotate_d_orientation",
            Self::Inverse => "d_inverse",
            Self::ComposeLeft => "d_compose_left",
            Self::ComposeRight => "d_compose_right",
            Self::Exp => "d_exp",
            Self::Log => "d_log",
        }
    }
}

pub fn analytic_jacobians() -> &'static [DerivativeIdentity] {
    &DerivativeIdentity::ALL
}

/// Time derivative of `Φ_BA(t)`, given the angular velocity of `B` relative to
/// `A` expressed in `B`.
pub fn d_time(omega_ab_in_b: &Vec3) -> RotationVector {
    -omega_ab_in_b
}

pub fn d_rotate_d_vector(phi: &Orientation) -> Jacobian3 {
    phi.rotation_matrix()
}

pub fn d_rotate_d_orientation(phi: &Orientation, r: &Vec3) -> Jacobian3 {
    -hat(&phi.rotate(r))
}

pub fn d_inverse(phi: &Orientation) -> Jacobian3 {
    -phi.rotation_matrix().transpose()
}

pub fn d_compose_left(_phi1: &Orientation, _phi2: &Orientation) -> Jacobian3 {
    Matrix3::identity()
}

pub fn d_compose_right(phi1: &Orientation) -> Jacobian3 {
    phi1.rotation_matrix()
}

pub fn d_exp(phi: &RotationVector) -> Jacobian3 {
    gamma(phi)
}

/// Fails for exact half-turns, where `log` reaches the boundary of its domain.
pub fn d_log(phi: &Orientation) -> Result<Jacobian3> {
    gamma_inverse(&phi.log())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::numeric::*;
    use crate::sampling::{random_orientation, random_rotation_vector, random_vec3, seeded};
    use std::f64::consts::PI;

    const TOL: f64 = 1e-5;

    #[test]
    fn catalog_lists_eight_identities() {
        let names: Vec<_> = analytic_jacobians().iter().map(|d| d.name()).collect();
        assert_eq!(names.len(), 8);
        assert_eq!(names[0], "d_time");
        assert_eq!(names[7], "d_log");
    }

    #[test]
    fn analytic_matches_finite_differences() {
        let cfg = DiffConfig::default();
        let mut rng = seeded(31);
        for _ in 0..100 {
            let q = random_orientation(&mut rng);
            let q2 = random_orientation(&mut rng);
            let r = random_vec3(&mut rng, 5.0);
            let phi = random_rotation_vector(&mut rng, 3.0);

            let num = numeric_jacobian(|x| q.rotate(x), &r, &cfg);
            assert!((num - d_rotate_d_vector(&q)).abs().max() < TOL);

            let num = numeric_diff_from_manifold(|p| p.rotate(&r), &q, &cfg);
            assert!((num - d_rotate_d_orientation(&q, &r)).abs().max() < TOL);

            let num = numeric_diff_between_manifolds(|p| p.inverse(), &q, &cfg);
            assert!((num - d_inverse(&q)).abs().max() < TOL);

            let num = numeric_diff_between_manifolds(|p| p.compose(&q2), &q, &cfg);
            assert!((num - d_compose_left(&q, &q2)).abs().max() < TOL);

            let num = numeric_diff_between_manifolds(|p| q.compose(p), &q2, &cfg);
            assert!((num - d_compose_right(&q)).abs().max() < TOL);

            let num = numeric_jacobian_to_manifold(Orientation::exp, &phi, &cfg);
            assert!((num - d_exp(&phi)).abs().max() < TOL);

            let target = Orientation::exp(&random_rotation_vector(&mut rng, PI - 0.1));
            let num = numeric_diff_from_manifold(|p| p.log(), &target, &cfg);
            assert!((num - d_log(&target).unwrap()).abs().max() < TOL);
        }
    }

    #[test]
    fn time_derivative_of_constant_rate_rotation() {
        // Φ_AB(t) = Φ_AB(0) ∘ exp(t w): B spins at B_ω_AB = w.
        let w = Vec3::new(0.3, -1.2, 0.5);
        let start = random_orientation(&mut seeded(32));
        let curve = |t: f64| start.compose(&Orientation::exp(&(w * t))).inverse();
        let d = numeric_diff_to_manifold(curve, 0.7, &DiffConfig::default());
        assert!((d - d_time(&w)).norm() < 1e-6);
    }

    #[test]
    fn log_jacobian_fails_at_half_turn() {
        let q = Orientation::new(0.0, Vec3::z()).unwrap();
        assert!(d_log(&q).is_err());
    }
}
