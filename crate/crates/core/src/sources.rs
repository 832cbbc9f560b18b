//! Separable current densities `J(x', t') = A p g(x') f(t')`.
//!
//! Every quantity the two field representations need (time derivative, time
//! primitive, charge density and its gradient) is available in closed form.
//! The charge density is rebuilt from the continuity equation with the
//! initial time taken as the pulse onset, so it vanishes identically there.

use std::f64::consts::{PI, TAU};

pub use crate::domain::Domain;
use crate::error::{invalid, Result};
use crate::geometry::{Mat3, Vec3};
use crate::quadrature::gauss_legendre;

/// Number of temporal standard deviations between the onset of a
/// differentiated-Gaussian pulse and its center.
const GAUSSIAN_PULSE_HALF_WIDTH: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseShape {
    /// `sin^2(pi (t - t_on) / tau)` on `[t_on, t_on + tau]`, zero elsewhere.
    SineSquared,
    /// `sqrt(e) u exp(-u^2/2)`, `u = (t - t_on - tau/2) / (tau/16)`, cut to zero for `t <= t_on`.
    DifferentiatedGaussian,
}

/// Temporal factor `f(t)` of the current, with `f'` and `F(t) = int_{t_on}^t f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeProfile {
    shape: PulseShape,
    t_on: f64,
    tau: f64,
}

impl TimeProfile {
    pub fn new(shape: PulseShape, t_on: f64, tau: f64) -> Result<Self> {
        if !t_on.is_finite() {
            return Err(invalid("pulse onset must be finite"));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(invalid(format!("pulse duration must be positive, got {tau}")));
        }
        Ok(Self { shape, t_on, tau })
    }

    pub fn sine_squared(t_on: f64, tau: f64) -> Result<Self> {
        Self::new(PulseShape::SineSquared, t_on, tau)
    }

    pub fn differentiated_gaussian(t_on: f64, tau: f64) -> Result<Self> {
        Self::new(PulseShape::DifferentiatedGaussian, t_on, tau)
    }

    pub fn shape(&self) -> PulseShape {
        self.shape
    }

    pub fn onset(&self) -> f64 {
        self.t_on
    }

    pub fn duration(&self) -> f64 {
        self.tau
    }

    /// End of the (effective) support.
    pub fn end(&self) -> f64 {
        self.t_on + self.tau
    }

    pub fn is_compact(&self) -> bool {
        self.shape == PulseShape::SineSquared
    }

    fn gaussian_width(&self) -> f64 {
        self.tau / (2.0 * GAUSSIAN_PULSE_HALF_WIDTH)
    }

    fn gaussian_u(&self, t: f64) -> f64 {
        (t - self.t_on - 0.5 * self.tau) / self.gaussian_width()
    }

    pub fn value(&self, t: f64) -> f64 {
        let s = t - self.t_on;
        if s <= 0.0 {
            return 0.0;
        }
        match self.shape {
            PulseShape::SineSquared => {
                if s >= self.tau {
                    0.0
                } else {
                    (PI * s / self.tau).sin().powi(2)
                }
            }
            PulseShape::DifferentiatedGaussian => {
                let u = self.gaussian_u(t);
                (0.5f64).exp() * u * (-0.5 * u * u).exp()
            }
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let s = t - self.t_on;
        if s <= 0.0 {
            return 0.0;
        }
        match self.shape {
            PulseShape::SineSquared => {
                if s >= self.tau {
                    0.0
                } else {
                    PI / self.tau * sin_two_pi(s / self.tau)
                }
            }
            PulseShape::DifferentiatedGaussian => {
                let u = self.gaussian_u(t);
                (0.5f64).exp() * (1.0 - u * u) * (-0.5 * u * u).exp() / self.gaussian_width()
            }
        }
    }

    pub fn primitive(&self, t: f64) -> f64 {
        let s = t - self.t_on;
        if s <= 0.0 {
            return 0.0;
        }
        match self.shape {
            PulseShape::SineSquared => {
                if s >= self.tau {
                    0.5 * self.tau
                } else {
                    0.5 * s - self.tau / (4.0 * PI) * sin_two_pi(s / self.tau)
                }
            }
            PulseShape::DifferentiatedGaussian => {
                let u = self.gaussian_u(t);
                let u0 = GAUSSIAN_PULSE_HALF_WIDTH;
                (0.5f64).exp()
                    * self.gaussian_width()
                    * ((-0.5 * u0 * u0).exp() - (-0.5 * u * u).exp())
            }
        }
    }

    /// `(F, f, f')` at one instant.
    pub fn sample(&self, t: f64) -> (f64, f64, f64) {
        (self.primitive(t), self.value(t), self.derivative(t))
    }
}

/// `sin(2 pi x)` for `x` in `[0, 1]`, reduced around the nearest zero so the
/// zeros at `x = 1/2` and `x = 1` come out exact.
fn sin_two_pi(x: f64) -> f64 {
    if x < 0.25 {
        (TAU * x).sin()
    } else if x < 0.75 {
        (PI * (1.0 - 2.0 * x)).sin()
    } else {
        (TAU * (x - 1.0)).sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvelopeKind {
    Gaussian,
    /// Gaussian set to zero beyond `cut_radius` from the center, with no smoothing.
    TruncatedGaussian { cut_radius: f64 },
}

/// Spatial factor `g(x') = exp(-|x' - c|^2 / (2 sigma^2))`, unit peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialEnvelope {
    kind: EnvelopeKind,
    center: Vec3,
    sigma: f64,
}

impl SpatialEnvelope {
    pub fn new(kind: EnvelopeKind, center: Vec3, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid(format!("envelope width must be positive, got {sigma}")));
        }
        if !center.iter().all(|c| c.is_finite()) {
            return Err(invalid("envelope center must be finite"));
        }
        if let EnvelopeKind::TruncatedGaussian { cut_radius } = kind {
            if !(cut_radius.is_finite() && cut_radius > 0.0) {
                return Err(invalid(format!("cut radius must be positive, got {cut_radius}")));
            }
        }
        Ok(Self { kind, center, sigma })
    }

    pub fn gaussian(center: Vec3, sigma: f64) -> Result<Self> {
        Self::new(EnvelopeKind::Gaussian, center, sigma)
    }

    pub fn truncated(center: Vec3, sigma: f64, cut_radius: f64) -> Result<Self> {
        Self::new(EnvelopeKind::TruncatedGaussian { cut_radius }, center, sigma)
    }

    pub fn kind(&self) -> EnvelopeKind {
        self.kind
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Envelope value at distance `d` from the center.
    pub fn radial_value(&self, d: f64) -> f64 {
        match self.kind {
            EnvelopeKind::TruncatedGaussian { cut_radius } if d > cut_radius => 0.0,
            _ => (-0.5 * (d / self.sigma).powi(2)).exp(),
        }
    }

    pub fn value(&self, xp: &Vec3) -> f64 {
        self.radial_value((xp - self.center).norm())
    }

    pub fn gradient(&self, xp: &Vec3) -> Vec3 {
        let d = xp - self.center;
        -d * (self.value(xp) / (self.sigma * self.sigma))
    }

    pub fn hessian(&self, xp: &Vec3) -> Mat3 {
        let d = xp - self.center;
        let s2 = self.sigma * self.sigma;
        (d * d.transpose() / (s2 * s2) - Mat3::identity() / s2) * self.value(xp)
    }

    /// `int g d^3x'` over all space.
    pub fn total_weight(&self) -> f64 {
        let gaussian = (TAU).powf(1.5) * self.sigma.powi(3);
        match self.kind {
            EnvelopeKind::Gaussian => gaussian,
            EnvelopeKind::TruncatedGaussian { cut_radius } => {
                let (x, w) = gauss_legendre(64);
                let half = 0.5 * cut_radius;
                x.iter()
                    .zip(&w)
                    .map(|(xi, wi)| {
                        let r = half * (xi + 1.0);
                        wi * half * 4.0 * PI * r * r * self.radial_value(r)
                    })
                    .sum()
            }
        }
    }
}

/// Retarded source data at one node: `(int J dt, J, dJ/dt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentSample {
    pub primitive: Vec3,
    pub current: Vec3,
    pub derivative: Vec3,
}

/// A current density with the closed-form companions the field integrals need.
pub trait CurrentSource: Sync {
    fn current(&self, xp: &Vec3, tp: f64) -> Vec3;
    fn current_time_derivative(&self, xp: &Vec3, tp: f64) -> Vec3;
    fn current_time_primitive(&self, xp: &Vec3, tp: f64) -> Vec3;
    fn charge_density(&self, xp: &Vec3, tp: f64) -> f64;
    /// Spatial gradient of the charge density at frozen time `tp`.
    fn charge_gradient(&self, xp: &Vec3, tp: f64) -> Vec3;

    /// Time before which the current vanishes identically.
    fn onset_time(&self) -> f64;
    /// Time after which the current has (effectively) switched off.
    fn settle_time(&self) -> f64;
    /// Distance from `x` to the support domain.
    fn distance_to_support(&self, x: &Vec3) -> f64;
    /// Largest distance from `x` to any support point.
    fn farthest_support_distance(&self, x: &Vec3) -> f64;
    fn support_diameter(&self) -> f64;

    fn sample(&self, xp: &Vec3, tp: f64) -> CurrentSample {
        CurrentSample {
            primitive: self.current_time_primitive(xp, tp),
            current: self.current(xp, tp),
            derivative: self.current_time_derivative(xp, tp),
        }
    }
}

/// Separable current `amplitude * polarization * g(x') * f(t')` supported on `domain`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    envelope: SpatialEnvelope,
    profile: TimeProfile,
    polarization: Vec3,
    amplitude: f64,
    domain: Domain,
}

impl SourceModel {
    pub fn new(
        envelope: SpatialEnvelope,
        profile: TimeProfile,
        polarization: Vec3,
        amplitude: f64,
        domain: Domain,
    ) -> Result<Self> {
        let n = polarization.norm();
        if !((n - 1.0).abs() <= 1e-12) {
            return Err(invalid(format!("polarization must be unit, |p| = {n}")));
        }
        if !amplitude.is_finite() {
            return Err(invalid("amplitude must be finite"));
        }
        domain.validate()?;
        Ok(Self {
            envelope,
            profile,
            polarization,
            amplitude,
            domain,
        })
    }

    pub fn envelope(&self) -> &SpatialEnvelope {
        &self.envelope
    }

    pub fn profile(&self) -> &TimeProfile {
        &self.profile
    }

    pub fn polarization(&self) -> Vec3 {
        self.polarization
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self {
            amplitude,
            ..self.clone()
        }
    }

    /// Divergence of the current at `(xp, tp)`.
    pub fn current_divergence(&self, xp: &Vec3, tp: f64) -> f64 {
        self.amplitude * self.polarization.dot(&self.envelope.gradient(xp)) * self.profile.value(tp)
    }

    /// Largest envelope value on the domain boundary relative to its largest
    /// value on the domain. Zero when the source vanishes on the domain.
    pub fn boundary_leakage(&self) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let c = self.envelope.center();
        let inside = self.envelope.radial_value(self.domain.distance_to(&c));
        if inside == 0.0 {
            return 0.0;
        }
        self.envelope.radial_value(self.domain.distance_to_boundary(&c)) / inside
    }
}

impl CurrentSource for SourceModel {
    fn current(&self, xp: &Vec3, tp: f64) -> Vec3 {
        self.polarization * (self.amplitude * self.envelope.value(xp) * self.profile.value(tp))
    }

    fn current_time_derivative(&self, xp: &Vec3, tp: f64) -> Vec3 {
        self.polarization * (self.amplitude * self.envelope.value(xp) * self.profile.derivative(tp))
    }

    fn current_time_primitive(&self, xp: &Vec3, tp: f64) -> Vec3 {
        self.polarization * (self.amplitude * self.envelope.value(xp) * self.profile.primitive(tp))
    }

    fn charge_density(&self, xp: &Vec3, tp: f64) -> f64 {
        -self.amplitude
            * self.polarization.dot(&self.envelope.gradient(xp))
            * self.profile.primitive(tp)
    }

    fn charge_gradient(&self, xp: &Vec3, tp: f64) -> Vec3 {
        -(self.envelope.hessian(xp) * self.polarization)
            * (self.amplitude * self.profile.primitive(tp))
    }

    fn onset_time(&self) -> f64 {
        self.profile.onset()
    }

    fn settle_time(&self) -> f64 {
        self.profile.end()
    }

    fn distance_to_support(&self, x: &Vec3) -> f64 {
        self.domain.distance_to(x)
    }

    fn farthest_support_distance(&self, x: &Vec3) -> f64 {
        self.domain.farthest_distance(x)
    }

    fn support_diameter(&self) -> f64 {
        self.domain.diameter()
    }

    fn sample(&self, xp: &Vec3, tp: f64) -> CurrentSample {
        let g = self.amplitude * self.envelope.value(xp);
        let (big_f, f, df) = self.profile.sample(tp);
        CurrentSample {
            primitive: self.polarization * (g * big_f),
            current: self.polarization * (g * f),
            derivative: self.polarization * (g * df),
        }
    }
}

/// Sum of several sources integrated over one enclosing domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Superposition {
    parts: Vec<SourceModel>,
    domain: Domain,
}

impl Superposition {
    pub fn new(parts: Vec<SourceModel>, domain: Domain) -> Result<Self> {
        if parts.is_empty() {
            return Err(invalid("superposition needs at least one source"));
        }
        domain.validate()?;
        Ok(Self { parts, domain })
    }

    pub fn parts(&self) -> &[SourceModel] {
        &self.parts
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
}

impl CurrentSource for Superposition {
    fn current(&self, xp: &Vec3, tp: f64) -> Vec3 {
        self.parts.iter().map(|s| s.current(xp, tp)).sum()
    }

    fn current_time_derivative(&self, xp: &Vec3, tp: f64) -> Vec3 {
        self.parts.iter().map(|s| s.current_time_derivative(xp, tp)).sum()
    }

    fn current_time_primitive(&self, xp: &Vec3, tp: f64) -> Vec3 {
        self.parts.iter().map(|s| s.current_time_primitive(xp, tp)).sum()
    }

    fn charge_density(&self, xp: &Vec3, tp: f64) -> f64 {
        self.parts.iter().map(|s| s.charge_density(xp, tp)).sum()
    }

    fn charge_gradient(&self, xp: &Vec3, tp: f64) -> Vec3 {
        self.parts.iter().map(|s| s.charge_gradient(xp, tp)).sum()
    }

    fn onset_time(&self) -> f64 {
        self.parts.iter().map(|s| s.onset_time()).fold(f64::INFINITY, f64::min)
    }

    fn settle_time(&self) -> f64 {
        self.parts.iter().map(|s| s.settle_time()).fold(f64::NEG_INFINITY, f64::max)
    }

    fn distance_to_support(&self, x: &Vec3) -> f64 {
        self.domain.distance_to(x)
    }

    fn farthest_support_distance(&self, x: &Vec3) -> f64 {
        self.domain.farthest_distance(x)
    }

    fn support_diameter(&self) -> f64 {
        self.domain.diameter()
    }

    fn sample(&self, xp: &Vec3, tp: f64) -> CurrentSample {
        let mut acc = CurrentSample {
            primitive: Vec3::zeros(),
            current: Vec3::zeros(),
            derivative: Vec3::zeros(),
        };
        for s in &self.parts {
            let one = s.sample(xp, tp);
            acc.primitive += one.primitive;
            acc.current += one.current;
            acc.derivative += one.derivative;
        }
        acc
    }
}
