//! Electric fields radiated by prescribed, compactly supported current densities.
//!
//! The field is computed from two integral representations over the source
//! domain, which agree whenever the current vanishes on the domain boundary:
//!
//! * near/intermediate/far: `1/R^3`, `1/R^2`, `1/R` kernels acting on the
//!   time-integrated current, the current and its time derivative;
//! * retarded current derivative plus retarded charge gradient.
//!
//! A closed-form point-dipole field serves as an independent check, and the
//! [`analysis`] module turns sampled waveforms into causality, scaling and
//! arrival-velocity measurements.

// `!(a > b)` is used on purpose so NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod domain;
pub mod error;
pub mod evaluators;
pub mod geometry;
pub mod quadrature;
pub mod sources;

pub use analysis::{
    feature_arrival_times, light_front_check, local_velocity, sample_waveforms, zone_scaling_fit,
    ComponentSelector, Feature, FrontCheck, Ray, ScalingWindow, VelocityProfile, WaveformSeries,
};
pub use domain::Domain;
pub use error::{FieldError, Result};
pub use evaluators::{
    budko_field, dipole_oracle_field, jefimenko_field, representation_residual, DipoleMoment,
    FieldDecomposition, ObservationPoint, Representation, TermKind,
};
pub use geometry::{Mat3, PhysicalConstants, Vec3};
pub use quadrature::{build_rule, integrate_vector, refine_estimate, QuadratureRule, RefinementLadder};
pub use sources::{
    CurrentSource, EnvelopeKind, PulseShape, SourceModel, SpatialEnvelope, Superposition, TimeProfile,
};
