//! Finite-difference realizations of the manifold derivative definitions.
//!
//! Differences on SO(3) are taken with `⊟` and perturbations applied with
//! `⊞`, so every result lives in the same minimal coordinates as the
//! analytic Jacobians.

use nalgebra::{Matrix3, SMatrix, SVector};

use crate::error::{Error, Result};
use crate::orientation::{Orientation, RotationVector, Vec3};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DiffScheme {
    Forward,
    #[default]
    Central,
}

/// Step size and scheme for the numerical derivative operators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiffConfig {
    step: f64,
    scheme: DiffScheme,
}

impl DiffConfig {
    pub const DEFAULT_STEP: f64 = 1e-6;

    pub fn new(step: f64, scheme: DiffScheme) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidStep(step));
        }
        Ok(Self { step, scheme })
    }

    pub fn central(step: f64) -> Result<Self> {
        Self::new(step, DiffScheme::Central)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn scheme(&self) -> DiffScheme {
        self.scheme
    }
}

impl Default for DiffConfig {
    fn default() -> Self {
        Self {
            step: Self::DEFAULT_STEP,
            scheme: DiffScheme::Central,
        }
    }
}

/// Derivative of a curve `R → SO(3)`: `(f(x+ε) ⊟ f(x)) / ε` or its central
/// counterpart `(f(x+ε) ⊟ f(x−ε)) / 2ε`.
pub fn numeric_diff_to_manifold<F>(f: F, x: f64, cfg: &DiffConfig) -> RotationVector
where
    F: Fn(f64) -> Orientation,
{
    let h = cfg.step;
    match cfg.scheme {
        DiffScheme::Forward => f(x + h).boxminus(&f(x)) / h,
        DiffScheme::Central => f(x + h).boxminus(&f(x - h)) / (2.0 * h),
    }
}

/// Derivative of `f: SO(3) → R^M` at `phi`. Column `i` is the difference
/// along `phi ⊞ (e_i ε)`.
pub fn numeric_diff_from_manifold<const M: usize, F>(
    f: F,
    phi: &Orientation,
    cfg: &DiffConfig,
) -> SMatrix<f64, M, 3>
where
    F: Fn(&Orientation) -> SVector<f64, M>,
{
    let h = cfg.step;
    let mut jac = SMatrix::<f64, M, 3>::zeros();
    let center = match cfg.scheme {
        DiffScheme::Forward => Some(f(phi)),
        DiffScheme::Central => None,
    };
    for i in 0..3 {
        let e = Vec3::ith(i, h);
        let col = match &center {
            Some(f0) => (f(&phi.boxplus(&e)) - f0) / h,
            None => (f(&phi.boxplus(&e)) - f(&phi.boxplus(&-e))) / (2.0 * h),
        };
        jac.set_column(i, &col);
    }
    jac
}

/// Derivative of `f: SO(3) → SO(3)`: perturb with `⊞`, difference with `⊟`.
pub fn numeric_diff_between_manifolds<F>(f: F, phi: &Orientation, cfg: &DiffConfig) -> Matrix3<f64>
where
    F: Fn(&Orientation) -> Orientation,
{
    let h = cfg.step;
    let mut jac = Matrix3::zeros();
    for i in 0..3 {
        let e = Vec3::ith(i, h);
        let col = match cfg.scheme {
            DiffScheme::Forward => f(&phi.boxplus(&e)).boxminus(&f(phi)) / h,
            DiffScheme::Central => {
                f(&phi.boxplus(&e)).boxminus(&f(&phi.boxplus(&-e))) / (2.0 * h)
            }
        };
        jac.set_column(i, &col);
    }
    jac
}

/// Derivative of `f: R³ → SO(3)`, one manifold curve per coordinate axis.
pub fn numeric_jacobian_to_manifold<F>(f: F, x: &Vec3, cfg: &DiffConfig) -> Matrix3<f64>
where
    F: Fn(&Vec3) -> Orientation,
{
    let mut jac = Matrix3::zeros();
    for i in 0..3 {
        let col = numeric_diff_to_manifold(|t| f(&(x + Vec3::ith(i, t))), 0.0, cfg);
        jac.set_column(i, &col);
    }
    jac
}

/// Plain Euclidean Jacobian of `f: R^N → R^M`.
pub fn numeric_jacobian<const N: usize, const M: usize, F>(
    f: F,
    x: &SVector<f64, N>,
    cfg: &DiffConfig,
) -> SMatrix<f64, M, N>
where
    F: Fn(&SVector<f64, N>) -> SVector<f64, M>,
{
    let h = cfg.step;
    let mut jac = SMatrix::<f64, M, N>::zeros();
    let f0 = match cfg.scheme {
        DiffScheme::Forward => Some(f(x)),
        DiffScheme::Central => None,
    };
    for i in 0..N {
        let mut e = SVector::<f64, N>::zeros();
        e[i] = h;
        let col = match &f0 {
            Some(f0) => (f(&(x + e)) - f0) / h,
            None => (f(&(x + e)) - f(&(x - e))) / (2.0 * h),
        };
        jac.set_column(i, &col);
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orientation::hat;
    use crate::sampling::{random_orientation, random_rotation_vector, random_vec3, seeded};

    #[test]
    fn config_rejects_nonpositive_step() {
        assert!(matches!(DiffConfig::central(0.0), Err(Error::InvalidStep(_))));
        assert!(DiffConfig::new(-1e-3, DiffScheme::Forward).is_err());
        assert!(DiffConfig::central(f64::NAN).is_err());
        assert_eq!(DiffConfig::default().step(), 1e-6);
    }

    #[test]
    fn constant_curve_has_zero_derivative() {
        let q = random_orientation(&mut seeded(1));
        for cfg in [DiffConfig::default(), DiffConfig::new(1e-6, DiffScheme::Forward).unwrap()] {
            let d = numeric_diff_to_manifold(|_| q, 0.3, &cfg);
            assert!(d.norm() < 1e-6);
            let j = numeric_diff_from_manifold(|_| Vec3::new(1.0, 2.0, 3.0), &q, &cfg);
            assert!(j.norm() < 1e-6);
        }
    }

    #[test]
    fn one_parameter_subgroup_derivative() {
        let mut rng = seeded(2);
        let cfg = DiffConfig::default();
        for _ in 0..50 {
            let phi = random_rotation_vector(&mut rng, 3.0);
            let d = numeric_diff_to_manifold(|t| Orientation::exp(&(phi * t)), 0.0, &cfg);
            assert!((d - phi).norm() < 1e-6);
            let q0 = random_orientation(&mut rng);
            let d = numeric_diff_to_manifold(|t| q0.boxplus(&(phi * t)), 0.0, &cfg);
            assert!((d - phi).norm() < 1e-6);
        }
    }

    #[test]
    fn rotate_derivative_matches_skew_form() {
        let mut rng = seeded(3);
        let cfg = DiffConfig::default();
        for _ in 0..50 {
            let q = random_orientation(&mut rng);
            let r = random_vec3(&mut rng, 5.0);
            let j = numeric_diff_from_manifold(|p| p.rotate(&r), &q, &cfg);
            assert!((j + hat(&q.rotate(&r))).abs().max() < 1e-5);
        }
    }

    #[test]
    fn forward_differences_are_first_order() {
        let phi = Vec3::new(0.4, -0.3, 1.1);
        let q0 = random_orientation(&mut seeded(4));
        let f = |t: f64| q0.boxplus(&phi).boxplus(&(Vec3::new(0.7, 0.2, 0.1) * t * t));
        let coarse = DiffConfig::new(1e-3, DiffScheme::Forward).unwrap();
        let fine = DiffConfig::new(1e-4, DiffScheme::Forward).unwrap();
        let e1 = numeric_diff_to_manifold(f, 0.0, &coarse).norm();
        let e2 = numeric_diff_to_manifold(f, 0.0, &fine).norm();
        assert!((e1 / e2 - 10.0).abs() < 0.5, "{e1} {e2}");
    }

    #[test]
    fn euclidean_jacobian_of_linear_map() {
        let a = SMatrix::<f64, 2, 3>::new(1.0, 2.0, 3.0, -1.0, 0.5, 4.0);
        let x = SVector::<f64, 3>::new(0.1, 0.2, 0.3);
        let j = numeric_jacobian(|v| a * v, &x, &DiffConfig::default());
        assert!((j - a).abs().max() < 1e-9);
    }
}
