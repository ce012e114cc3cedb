//! Unit-quaternion implementation of 3D orientations.
//!
//! An [`Orientation`] `Φ_BA` is identified with the coordinate mapping it
//! induces, `B_r = Φ_BA(A_r)`. Quaternions follow the Hamilton convention and
//! are serialized as `(q0, q1, q2, q3)` with `q0` the real part.
//!
//! The tangent space is parameterized by rotation vectors in `R³` through the
//! exponential map. Perturbations are applied on the left:
//! `Φ ⊞ φ = exp(φ) ∘ Φ` and `Φ1 ⊟ Φ2 = log(Φ1 ∘ Φ2⁻¹)`.
//!
//! Storage is not canonicalized with respect to the double cover: `q` and
//! `-q` are both valid and compare equal. [`Orientation::log`] always returns
//! the representative inside the closed ball of radius pi.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Coordinate tuple in `R³`. Units depend on context.
pub type Vec3 = Vector3<f64>;

/// Tangent-space coordinates of an orientation, in radians.
pub type RotationVector = Vector3<f64>;

/// Below this angle (rad) the exponential and logarithm switch to their
/// small-angle expansions.
pub const SMALL_ANGLE_THRESHOLD: f64 = 1e-4;

/// Maximum deviation of the quaternion norm from 1 accepted by constructors.
pub const CONSTRUCTOR_NORM_TOLERANCE: f64 = 1e-6;

/// Skew-symmetric matrix `v^×` with `v^× r = v × r`.
pub fn hat(v: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Orientation of a frame relative to another, stored as a Hamilton unit
/// quaternion `(q0, q̌)`.
#[derive(Clone, Copy, Debug)]
pub struct Orientation {
    q0: f64,
    qv: Vec3,
}

impl Orientation {
    /// Builds an orientation from quaternion components.
    ///
    /// Inputs whose norm is within [`CONSTRUCTOR_NORM_TOLERANCE`] of 1 are
    /// renormalized; anything further off is treated as corrupted input.
    pub fn new(q0: f64, qv: Vec3) -> Result<Self> {
        if !q0.is_finite() || !qv.iter().all(|c| c.is_finite()) {
            return Err(Error::NonFinite("quaternion"));
        }
        let norm = (q0 * q0 + qv.norm_squared()).sqrt();
        if (norm - 1.0).abs() > CONSTRUCTOR_NORM_TOLERANCE {
            return Err(Error::NonUnitQuaternion {
                norm,
                tolerance: CONSTRUCTOR_NORM_TOLERANCE,
            });
        }
        Ok(Self::normalized(q0, qv))
    }

    /// Builds an orientation from `[q0, q1, q2, q3]`.
    pub fn from_array(q: [f64; 4]) -> Result<Self> {
        Self::new(q[0], Vec3::new(q[1], q[2], q[3]))
    }

    fn normalized(q0: f64, qv: Vec3) -> Self {
        let norm = (q0 * q0 + qv.norm_squared()).sqrt();
        Self {
            q0: q0 / norm,
            qv: qv / norm,
        }
    }

    pub fn identity() -> Self {
        Self {
            q0: 1.0,
            qv: Vec3::zeros(),
        }
    }

    /// Real part `q0`.
    pub fn scalar(&self) -> f64 {
        self.q0
    }

    /// Imaginary part `q̌`.
    pub fn vector(&self) -> Vec3 {
        self.qv
    }

    /// Components in serialization order `[q0, q1, q2, q3]`.
    pub fn to_array(&self) -> [f64; 4] {
        [self.q0, self.qv.x, self.qv.y, self.qv.z]
    }

    /// The other quaternion of the double cover. Represents the same rotation.
    pub fn negated(&self) -> Self {
        Self {
            q0: -self.q0,
            qv: -self.qv,
        }
    }

    /// Maps coordinates: `Φ_BA(A_r) = B_r`.
    pub fn rotate(&self, r: &Vec3) -> Vec3 {
        (2.0 * self.q0 * self.q0 - 1.0) * r
            + 2.0 * self.q0 * self.qv.cross(r)
            + 2.0 * self.qv * self.qv.dot(r)
    }

    /// Rotation matrix `C(Φ)` with `Φ(r) = C(Φ) r`.
    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        Matrix3::identity() * (2.0 * self.q0 * self.q0 - 1.0)
            + hat(&self.qv) * (2.0 * self.q0)
            + self.qv * self.qv.transpose() * 2.0
    }

    /// Concatenation `self ∘ rhs`: first apply `rhs`, then `self`.
    pub fn compose(&self, rhs: &Self) -> Self {
        let (q0, q) = (self.q0, &self.qv);
        let (p0, p) = (rhs.q0, &rhs.qv);
        Self::normalized(q0 * p0 - q.dot(p), q0 * p + p0 * q + q.cross(p))
    }

    pub fn inverse(&self) -> Self {
        Self {
            q0: self.q0,
            qv: -self.qv,
        }
    }

    /// Exponential map from a rotation vector.
    pub fn exp(phi: &RotationVector) -> Self {
        let angle = phi.norm();
        if angle < SMALL_ANGLE_THRESHOLD {
            return Self::normalized(1.0, phi * 0.5);
        }
        let half = 0.5 * angle;
        Self::normalized(half.cos(), phi * (half.sin() / angle))
    }

    /// Logarithm into the closed ball of radius pi.
    ///
    /// The sign of `q0` selects the double-cover representative. For an exact
    /// half-turn (`q0 == 0`) either hemisphere is valid; the one whose first
    /// nonzero component is positive is returned.
    pub fn log(&self) -> RotationVector {
        let (q0, qv) = if self.q0 < 0.0 {
            (-self.q0, -self.qv)
        } else {
            (self.q0, self.qv)
        };
        let n = qv.norm();
        if n < SMALL_ANGLE_THRESHOLD {
            return 2.0 * qv;
        }
        let axis = qv / n;
        if q0 == 0.0 {
            return PI * canonical_hemisphere(axis);
        }
        axis * (2.0 * n.atan2(q0))
    }

    /// `Φ ⊞ φ = exp(φ) ∘ Φ`.
    pub fn boxplus(&self, delta: &RotationVector) -> Self {
        Self::exp(delta).compose(self)
    }

    /// `Φ1 ⊟ Φ2 = log(Φ1 ∘ Φ2⁻¹)`.
    pub fn boxminus(&self, other: &Self) -> RotationVector {
        self.compose(&other.inverse()).log()
    }

    /// Rotation angle separating two orientations, in `[0, π]`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.boxminus(other).norm()
    }

    /// Squared quaternion norm; `1` up to rounding for every value of this type.
    pub fn norm_squared(&self) -> f64 {
        self.q0 * self.q0 + self.qv.norm_squared()
    }
}

fn canonical_hemisphere(axis: Vec3) -> Vec3 {
    match axis.iter().find(|c| **c != 0.0) {
        Some(c) if *c < 0.0 => -axis,
        _ => axis,
    }
}

/// `‖Φ1 ⊟ Φ2‖`, zero iff both represent the same rotation.
pub fn orientation_distance(a: &Orientation, b: &Orientation) -> f64 {
    a.distance(b)
}

impl Default for Orientation {
    fn default() -> Self {
        Self::identity()
    }
}

impl Mul for Orientation {
    type Output = Orientation;

    fn mul(self, rhs: Orientation) -> Orientation {
        self.compose(&rhs)
    }
}

impl Mul<&Orientation> for &Orientation {
    type Output = Orientation;

    fn mul(self, rhs: &Orientation) -> Orientation {
        self.compose(rhs)
    }
}

/// Exact equality as rotations: `q == p` or `q == -p` componentwise.
/// Use [`Orientation::distance`] for tolerance-based comparison.
impl PartialEq for Orientation {
    fn eq(&self, other: &Self) -> bool {
        (self.q0 == other.q0 && self.qv == other.qv)
            || (self.q0 == -other.q0 && self.qv == -other.qv)
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, [{}, {}, {}])",
            self.q0, self.qv.x, self.qv.y, self.qv.z
        )
    }
}
