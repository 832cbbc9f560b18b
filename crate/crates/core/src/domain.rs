//! Source support regions.

use crate::error::{invalid, Result};
use crate::geometry::Vec3;

/// Closed region `D` carrying the current density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Box { min: Vec3, max: Vec3 },
    Ball { center: Vec3, radius: f64 },
}

impl Domain {
    pub fn cuboid(min: Vec3, max: Vec3) -> Result<Self> {
        let d = Domain::Box { min, max };
        d.validate()?;
        Ok(d)
    }

    pub fn ball(center: Vec3, radius: f64) -> Result<Self> {
        let d = Domain::Ball { center, radius };
        d.validate()?;
        Ok(d)
    }

    /// Axis-aligned cube of half-width `half` around `center`.
    pub fn cube(center: Vec3, half: f64) -> Result<Self> {
        let h = Vec3::repeat(half);
        Self::cuboid(center - h, center + h)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Box { min, max } => {
                if !(min.iter().chain(max.iter()).all(|v| v.is_finite())) {
                    return Err(invalid("box corners must be finite"));
                }
                if (0..3).any(|i| !(max[i] > min[i])) {
                    return Err(invalid(format!(
                        "degenerate box: min {:?} max {:?}",
                        min.as_slice(),
                        max.as_slice()
                    )));
                }
            }
            Domain::Ball { center, radius } => {
                if !center.iter().all(|v| v.is_finite()) {
                    return Err(invalid("ball center must be finite"));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(invalid(format!("ball radius must be positive, got {radius}")));
                }
            }
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        match self {
            Domain::Box { min, max } => (max - min).product(),
            Domain::Ball { radius, .. } => 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Box { min, max } => (max - min).norm(),
            Domain::Ball { radius, .. } => 2.0 * radius,
        }
    }

    pub fn centroid(&self) -> Vec3 {
        match self {
            Domain::Box { min, max } => 0.5 * (min + max),
            Domain::Ball { center, .. } => *center,
        }
    }

    /// Closed-set membership.
    pub fn contains(&self, x: &Vec3) -> bool {
        self.distance_to(x) == 0.0
    }

    /// Open-set membership.
    pub fn contains_strictly(&self, x: &Vec3) -> bool {
        match self {
            Domain::Box { min, max } => (0..3).all(|i| x[i] > min[i] && x[i] < max[i]),
            Domain::Ball { center, radius } => (x - center).norm() < *radius,
        }
    }

    /// Euclidean distance from `x` to the closed domain; zero inside.
    pub fn distance_to(&self, x: &Vec3) -> f64 {
        match self {
            Domain::Box { min, max } => {
                let d = Vec3::from_fn(|i, _| (min[i] - x[i]).max(0.0).max(x[i] - max[i]));
                d.norm()
            }
            Domain::Ball { center, radius } => ((x - center).norm() - radius).max(0.0),
        }
    }

    /// Distance from `x` to the boundary surface, whether `x` is inside or outside.
    pub fn distance_to_boundary(&self, x: &Vec3) -> f64 {
        if !self.contains(x) {
            return self.distance_to(x);
        }
        match self {
            Domain::Box { min, max } => (0..3)
                .map(|i| (x[i] - min[i]).min(max[i] - x[i]))
                .fold(f64::INFINITY, f64::min),
            Domain::Ball { center, radius } => radius - (x - center).norm(),
        }
    }

    /// Largest distance from `x` to any point of the domain.
    pub fn farthest_distance(&self, x: &Vec3) -> f64 {
        match self {
            Domain::Box { min, max } => {
                let d = Vec3::from_fn(|i, _| (x[i] - min[i]).abs().max((x[i] - max[i]).abs()));
                d.norm()
            }
            Domain::Ball { center, radius } => (x - center).norm() + radius,
        }
    }
}
