//! Geometric kernels shared by the field integrands.
//!
//! All functions take an observation point `x` and a source point `xp` and
//! fail on coincident points instead of regularizing the singularity.

use nalgebra::{Matrix3, Vector3};

use crate::error::{invalid, FieldError, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Speed of light and Coulomb prefactor `1/(4 pi eps0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    c: f64,
    inv_4pi_eps0: f64,
}

impl PhysicalConstants {
    /// `c = 1`, `1/(4 pi eps0) = 1`.
    pub const NATURAL: Self = Self {
        c: 1.0,
        inv_4pi_eps0: 1.0,
    };

    /// SI values (CODATA 2018).
    pub const SI: Self = Self {
        c: 299_792_458.0,
        inv_4pi_eps0: 8.987_551_792_3e9,
    };

    pub fn new(c: f64, inv_4pi_eps0: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(invalid(format!("speed of light must be positive, got {c}")));
        }
        if !(inv_4pi_eps0.is_finite() && inv_4pi_eps0 > 0.0) {
            return Err(invalid(format!(
                "Coulomb prefactor must be positive, got {inv_4pi_eps0}"
            )));
        }
        Ok(Self { c, inv_4pi_eps0 })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn inv_4pi_eps0(&self) -> f64 {
        self.inv_4pi_eps0
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::NATURAL
    }
}

/// Distance and unit direction from a source point to an observation point.
#[derive(Debug, Clone, Copy)]
pub struct Separation {
    pub distance: f64,
    /// `(x - xp) / |x - xp|`
    pub direction: Vec3,
}

impl Separation {
    pub fn new(x: &Vec3, xp: &Vec3) -> Result<Self> {
        let d = x - xp;
        let distance = d.norm();
        if distance == 0.0 {
            return Err(FieldError::CoincidentPoints([x.x, x.y, x.z]));
        }
        if !distance.is_finite() {
            return Err(invalid("non-finite separation"));
        }
        Ok(Self {
            distance,
            direction: d / distance,
        })
    }

    /// `(I - 3 theta theta^T) / R^3`
    pub fn double_gradient(&self) -> Mat3 {
        let th = &self.direction;
        (Mat3::identity() - 3.0 * th * th.transpose()) / self.distance.powi(3)
    }

    /// `K v` without building the matrix.
    pub fn double_gradient_apply(&self, v: &Vec3) -> Vec3 {
        let th = &self.direction;
        (v - 3.0 * th.dot(v) * th) / self.distance.powi(3)
    }

    /// `(theta theta^T - I) v`
    pub fn far_apply(&self, v: &Vec3) -> Vec3 {
        let th = &self.direction;
        th.dot(v) * th - v
    }
}

/// `t - |x - xp| / c`
pub fn retarded_time(x: &Vec3, xp: &Vec3, t: f64, constants: &PhysicalConstants) -> Result<f64> {
    let sep = Separation::new(x, xp)?;
    Ok(t - sep.distance / constants.c())
}

pub fn unit_direction(x: &Vec3, xp: &Vec3) -> Result<Vec3> {
    Separation::new(x, xp).map(|s| s.direction)
}

/// Mixed second derivative `d_k d'_n (1/|x - xp|)`, unprimed on `x` and primed on `xp`.
///
/// Equals `(delta_kn - 3 theta_k theta_n) / R^3`; symmetric and traceless.
pub fn double_gradient_kernel(x: &Vec3, xp: &Vec3) -> Result<Mat3> {
    Separation::new(x, xp).map(|s| s.double_gradient())
}

/// Radiation kernel `theta theta^T - I` for a unit direction `theta`.
pub fn far_kernel(theta: &Vec3) -> Result<Mat3> {
    let n = theta.norm();
    if !((n - 1.0).abs() <= 1e-12) {
        return Err(invalid(format!("far kernel needs a unit vector, |theta| = {n}")));
    }
    Ok(theta * theta.transpose() - Mat3::identity())
}
