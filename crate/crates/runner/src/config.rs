//! Run configuration.
//!
//! Configs are TOML. Every optional key is filled in by [`parse_config`], and
//! the resulting [`RunConfig`] serializes back to a document that parses to
//! the same value.
//!
//! ```toml
//! tasks = ["decompose", "frontcheck"]
//!
//! [constants]            # optional, natural units by default
//! c = 1.0
//! coulomb = 1.0          # 1 / (4 pi eps0)
//!
//! [source]
//! envelope = "gaussian"  # or "truncated"
//! sigma = 0.01
//! center = [0.0, 0.0, 0.0]
//! polarization = [0.0, 0.0, 1.0]
//! amplitude = 1.0
//! domain = { kind = "ball", radius = 0.08 }   # or { kind = "box", min = [..], max = [..] }
//!
//! [pulse]                # optional
//! kind = "sine_squared"  # or "differentiated_gaussian"
//! t_on = 0.0
//! tau = 1.0
//!
//! [observation]          # optional
//! origin = [0.0, 0.0, 0.0]
//! direction = [1.0, 0.0, 0.0]
//! radii = { start = 1.0, stop = 10.0, count = 10 }   # geometric, or an explicit list
//! times = { start = 0.0, stop = 20.0, count = 1001 }
//! ```

use std::fmt;

use emfield::analysis::{Feature, ScalingWindow};
use emfield::{ComponentSelector, Domain, EnvelopeKind, PhysicalConstants, PulseShape, Representation, SourceModel,
    SpatialEnvelope, TimeProfile, Vec3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The domain radius defaults to this many envelope widths.
pub const DEFAULT_SUPPORT_SIGMAS: f64 = 8.0;

/// Velocity runs want at least this many time samples per pulse duration.
pub const VELOCITY_SAMPLES_PER_TAU: f64 = 50.0;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("config field `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

fn bad(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Decompose,
    Compare,
    Frontcheck,
    Velocity,
    Scaling,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Decompose => "decompose",
            Task::Compare => "compare",
            Task::Frontcheck => "frontcheck",
            Task::Velocity => "velocity",
            Task::Scaling => "scaling",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeName {
    Gaussian,
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseName {
    SineSquared,
    DifferentiatedGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepresentationName {
    Budko,
    Jefimenko,
}

impl From<RepresentationName> for Representation {
    fn from(r: RepresentationName) -> Self {
        match r {
            RepresentationName::Budko => Representation::Budko,
            RepresentationName::Jefimenko => Representation::Jefimenko,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureName {
    Peak,
    ZeroCrossing,
}

impl From<FeatureName> for Feature {
    fn from(f: FeatureName) -> Self {
        match f {
            FeatureName::Peak => Feature::Peak,
            FeatureName::ZeroCrossing => Feature::ZeroCrossing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentName {
    Projection,
    Magnitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Ball { center: [f64; 3], radius: f64 },
    Box { min: [f64; 3], max: [f64; 3] },
}

/// Explicit radii or `count` geometrically spaced radii from `start` to `stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RadiiSpec {
    List(Vec<f64>),
    Geometric { start: f64, stop: f64, count: usize },
}

impl RadiiSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            RadiiSpec::List(v) => v.clone(),
            RadiiSpec::Geometric { start, stop, count } => {
                if *count == 1 {
                    return vec![*start];
                }
                let ratio = (stop / start).ln() / (*count - 1) as f64;
                (0..*count)
                    .map(|i| if i + 1 == *count { *stop } else { start * (ratio * i as f64).exp() })
                    .collect()
            }
        }
    }
}

/// `count` uniformly spaced times from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimesSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl TimesSpec {
    pub fn step(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.stop - self.start) / (self.count - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let dt = self.step();
        (0..self.count).map(|i| self.start + dt * i as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsConfig {
    pub c: f64,
    pub coulomb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    pub envelope: EnvelopeName,
    pub sigma: f64,
    pub center: [f64; 3],
    /// Only meaningful for the truncated envelope.
    pub cut_radius: f64,
    pub polarization: [f64; 3],
    pub amplitude: f64,
    pub normalize_polarization: bool,
    pub domain: DomainSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseConfig {
    pub kind: PulseName,
    pub t_on: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationConfig {
    pub origin: [f64; 3],
    pub direction: [f64; 3],
    pub radii: RadiiSpec,
    pub times: TimesSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Order of single-shot evaluations and first rung of the refinement ladder.
    pub base_order: usize,
    pub max_order: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub representation: RepresentationName,
    pub feature: FeatureName,
    /// Feature search window; defaults to the whole time grid.
    pub window: [f64; 2],
    pub component: ComponentName,
    /// Projection axis; defaults to the polarization.
    pub axis: [f64; 3],
    /// Retarded phase, in pulse durations, of the radiation-zone scaling window.
    pub retarded_phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub directory: String,
    pub formats: Vec<Format>,
}

/// A fully materialized and validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tasks: Vec<Task>,
    pub constants: ConstantsConfig,
    pub source: SourceConfig,
    pub pulse: PulseConfig,
    pub observation: ObservationConfig,
    pub quadrature: QuadratureConfig,
    pub analysis: AnalysisConfig,
    pub output: OutputConfig,
}

// Raw document, every optional key still optional.

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    tasks: Vec<Task>,
    constants: Option<RawConstants>,
    source: RawSource,
    pulse: Option<RawPulse>,
    observation: Option<RawObservation>,
    quadrature: Option<RawQuadrature>,
    analysis: Option<RawAnalysis>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstants {
    c: Option<f64>,
    coulomb: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    envelope: Option<EnvelopeName>,
    sigma: f64,
    center: Option<[f64; 3]>,
    cut_radius: Option<f64>,
    polarization: Option<[f64; 3]>,
    amplitude: Option<f64>,
    normalize_polarization: Option<bool>,
    domain: Option<RawDomain>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    kind: Option<String>,
    center: Option<[f64; 3]>,
    radius: Option<f64>,
    min: Option<[f64; 3]>,
    max: Option<[f64; 3]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPulse {
    kind: Option<PulseName>,
    t_on: Option<f64>,
    tau: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObservation {
    origin: Option<[f64; 3]>,
    direction: Option<[f64; 3]>,
    radii: Option<RadiiSpec>,
    times: Option<TimesSpec>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuadrature {
    base_order: Option<usize>,
    max_order: Option<usize>,
    tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    representation: Option<RepresentationName>,
    feature: Option<FeatureName>,
    window: Option<[f64; 2]>,
    component: Option<ComponentName>,
    axis: Option<[f64; 3]>,
    retarded_phase: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<String>,
    formats: Option<Vec<Format>>,
}

/// Parses, fills defaults and validates a TOML run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;
    let config = materialize(raw)?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

fn materialize(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let k = raw.constants.unwrap_or_default();
    let constants = ConstantsConfig {
        c: k.c.unwrap_or(PhysicalConstants::NATURAL.c()),
        coulomb: k.coulomb.unwrap_or(PhysicalConstants::NATURAL.inv_4pi_eps0()),
    };

    let s = raw.source;
    let envelope = s.envelope.unwrap_or(EnvelopeName::Gaussian);
    let center = s.center.unwrap_or([0.0; 3]);
    let cut_radius = s.cut_radius.unwrap_or(s.sigma);
    let d = s.domain.unwrap_or_default();
    let support = match envelope {
        EnvelopeName::Gaussian => DEFAULT_SUPPORT_SIGMAS * s.sigma,
        EnvelopeName::Truncated => cut_radius,
    };
    let domain = match d.kind.as_deref().unwrap_or("ball") {
        "ball" => {
            if d.min.is_some() || d.max.is_some() {
                return Err(bad("source.domain", "a ball takes `center` and `radius`"));
            }
            DomainSpec::Ball {
                center: d.center.unwrap_or(center),
                radius: d.radius.unwrap_or(support),
            }
        }
        "box" => {
            if d.center.is_some() || d.radius.is_some() {
                return Err(bad("source.domain", "a box takes `min` and `max`"));
            }
            let c = Vec3::from(center);
            DomainSpec::Box {
                min: d.min.unwrap_or((c - Vec3::repeat(support)).into()),
                max: d.max.unwrap_or((c + Vec3::repeat(support)).into()),
            }
        }
        other => return Err(bad("source.domain.kind", format!("unknown domain kind `{other}` (ball or box)"))),
    };
    let source = SourceConfig {
        envelope,
        sigma: s.sigma,
        center,
        cut_radius,
        polarization: s.polarization.unwrap_or([0.0, 0.0, 1.0]),
        amplitude: s.amplitude.unwrap_or(1.0),
        normalize_polarization: s.normalize_polarization.unwrap_or(false),
        domain,
    };

    let p = raw.pulse.unwrap_or_default();
    let pulse = PulseConfig {
        kind: p.kind.unwrap_or(PulseName::SineSquared),
        t_on: p.t_on.unwrap_or(0.0),
        tau: p.tau.unwrap_or(1.0),
    };

    let o = raw.observation.unwrap_or_default();
    let observation = ObservationConfig {
        origin: o.origin.unwrap_or(center),
        direction: o.direction.unwrap_or([1.0, 0.0, 0.0]),
        radii: o.radii.unwrap_or(RadiiSpec::Geometric {
            start: 1.0,
            stop: 10.0,
            count: 10,
        }),
        times: o.times.unwrap_or(TimesSpec {
            start: 0.0,
            stop: 20.0,
            count: 1001,
        }),
    };

    let q = raw.quadrature.unwrap_or_default();
    let quadrature = QuadratureConfig {
        base_order: q.base_order.unwrap_or(12),
        max_order: q.max_order.unwrap_or(24),
        tol: q.tol,
    };

    let a = raw.analysis.unwrap_or_default();
    let analysis = AnalysisConfig {
        representation: a.representation.unwrap_or(RepresentationName::Budko),
        feature: a.feature.unwrap_or(FeatureName::Peak),
        window: a.window.unwrap_or([observation.times.start, observation.times.stop]),
        component: a.component.unwrap_or(ComponentName::Projection),
        axis: a.axis.unwrap_or(source.polarization),
        retarded_phase: a.retarded_phase.unwrap_or(0.25),
    };

    let out = raw.output.unwrap_or_default();
    let output = OutputConfig {
        directory: out.directory.unwrap_or_else(|| "output".to_string()),
        formats: out.formats.unwrap_or_else(|| vec![Format::Csv, Format::Json]),
    };

    Ok(RunConfig {
        tasks: raw.tasks,
        constants,
        source,
        pulse,
        observation,
        quadrature,
        analysis,
        output,
    })
}

fn finite3(v: &[f64; 3]) -> bool {
    v.iter().all(|x| x.is_finite())
}

impl RunConfig {
    /// Semantic checks beyond the schema.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.physical_constants()?;
        let s = &self.source;
        if !finite3(&s.polarization) || !finite3(&s.center) || !s.amplitude.is_finite() {
            return Err(bad("source", "center, polarization and amplitude must be finite"));
        }
        let pn = Vec3::from(s.polarization).norm();
        if !s.normalize_polarization && (pn - 1.0).abs() > 1e-12 {
            return Err(bad("source.polarization", "polarization must be unit"));
        }
        if pn == 0.0 {
            return Err(bad("source.polarization", "polarization must be nonzero"));
        }
        let src = self.source_model()?;

        let o = &self.observation;
        if !finite3(&o.origin) {
            return Err(bad("observation.origin", "must be finite"));
        }
        let ray = self.ray()?;
        if let RadiiSpec::Geometric { start, stop, count } = o.radii {
            if !(start > 0.0 && stop > start && count >= 1) {
                return Err(bad("observation.radii", "geometric radii need 0 < start < stop and count >= 1"));
            }
        }
        let radii = o.radii.values();
        if radii.is_empty() {
            return Err(bad("observation.radii", "at least one radius is required"));
        }
        if radii.iter().any(|r| !r.is_finite()) || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("observation.radii", "radii must be finite and strictly increasing"));
        }
        for &r in &radii {
            let x = ray.at(r);
            let gap = src.domain().distance_to(&x);
            if gap <= emfield::evaluators::EXTERIOR_MARGIN * src.domain().diameter() {
                return Err(bad(
                    "observation.radii",
                    format!("radius {r} places the observation point inside the source domain"),
                ));
            }
        }
        let t = &o.times;
        if t.count == 0 || !t.start.is_finite() || !t.stop.is_finite() || (t.count > 1 && t.stop <= t.start) {
            return Err(bad("observation.times", "need count >= 1 and stop > start"));
        }

        let q = &self.quadrature;
        if q.base_order == 0 {
            return Err(bad("quadrature.base_order", "must be at least 1"));
        }
        if q.base_order >= q.max_order {
            return Err(bad("quadrature", "base_order must be smaller than max_order"));
        }
        if let Some(tol) = q.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(bad("quadrature.tol", "must be positive"));
            }
        }

        let a = &self.analysis;
        if !(a.window[0].is_finite() && a.window[1].is_finite() && a.window[1] > a.window[0]) {
            return Err(bad("analysis.window", "need two finite times with start < end"));
        }
        if a.component == ComponentName::Projection && Vec3::from(a.axis).norm() == 0.0 {
            return Err(bad("analysis.axis", "projection axis must be nonzero"));
        }
        if !a.retarded_phase.is_finite() {
            return Err(bad("analysis.retarded_phase", "must be finite"));
        }
        if self.output.directory.is_empty() {
            return Err(bad("output.directory", "must not be empty"));
        }
        Ok(())
    }

    /// Non-fatal findings worth echoing in the report.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let dt = self.observation.times.step();
        let limit = self.pulse.tau / VELOCITY_SAMPLES_PER_TAU;
        if self.tasks.contains(&Task::Velocity) && dt > limit {
            w.push(format!(
                "time step {dt} exceeds tau/{VELOCITY_SAMPLES_PER_TAU} = {limit}; arrival times may be under-resolved"
            ));
        }
        if self.pulse.kind == PulseName::DifferentiatedGaussian && self.tasks.contains(&Task::Frontcheck) {
            w.push("differentiated-Gaussian pulse is not compact in time; front check is informational".to_string());
        }
        if let Ok(src) = self.source_model() {
            let leak = src.boundary_leakage();
            if leak > 1e-13 && self.tasks.contains(&Task::Compare) {
                w.push(format!(
                    "envelope is {leak:e} of its peak on the domain boundary; representations are not expected to agree"
                ));
            }
        }
        w
    }

    pub fn physical_constants(&self) -> Result<PhysicalConstants, ConfigError> {
        PhysicalConstants::new(self.constants.c, self.constants.coulomb).map_err(|e| bad("constants", e.to_string()))
    }

    pub fn domain(&self) -> Result<Domain, ConfigError> {
        match self.source.domain {
            DomainSpec::Ball { center, radius } => Domain::ball(center.into(), radius),
            DomainSpec::Box { min, max } => Domain::cuboid(min.into(), max.into()),
        }
        .map_err(|e| bad("source.domain", e.to_string()))
    }

    pub fn time_profile(&self) -> Result<TimeProfile, ConfigError> {
        let shape = match self.pulse.kind {
            PulseName::SineSquared => PulseShape::SineSquared,
            PulseName::DifferentiatedGaussian => PulseShape::DifferentiatedGaussian,
        };
        TimeProfile::new(shape, self.pulse.t_on, self.pulse.tau).map_err(|e| bad("pulse", e.to_string()))
    }

    pub fn source_model(&self) -> Result<SourceModel, ConfigError> {
        let s = &self.source;
        let kind = match s.envelope {
            EnvelopeName::Gaussian => EnvelopeKind::Gaussian,
            EnvelopeName::Truncated => EnvelopeKind::TruncatedGaussian {
                cut_radius: s.cut_radius,
            },
        };
        let envelope = SpatialEnvelope::new(kind, s.center.into(), s.sigma).map_err(|e| bad("source", e.to_string()))?;
        let mut pol = Vec3::from(s.polarization);
        if s.normalize_polarization {
            pol /= pol.norm();
        }
        SourceModel::new(envelope, self.time_profile()?, pol, s.amplitude, self.domain()?)
            .map_err(|e| bad("source", e.to_string()))
    }

    pub fn ray(&self) -> Result<emfield::Ray, ConfigError> {
        emfield::Ray::new(self.observation.origin.into(), self.observation.direction.into())
            .map_err(|e| bad("observation.direction", e.to_string()))
    }

    pub fn selector(&self) -> ComponentSelector {
        match self.analysis.component {
            ComponentName::Magnitude => ComponentSelector::Magnitude,
            ComponentName::Projection => ComponentSelector::Projection(Vec3::from(self.analysis.axis).normalize()),
        }
    }

    /// Radiation-zone scaling window in absolute time units.
    pub fn radiation_window(&self) -> ScalingWindow {
        ScalingWindow::RetardedPhase(self.analysis.retarded_phase * self.pulse.tau)
    }

    pub fn wants(&self, format: Format) -> bool {
        self.output.formats.contains(&format)
    }

    /// TOML form of the materialized config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }
}
