//! Waveform sampling along a ray and the post-processing built on it:
//! light-front checks, feature arrival times, local velocities and radial
//! scaling fits.

use rayon::prelude::*;

use crate::error::{invalid, FieldError, Result};
use crate::evaluators::{
    dipole_oracle_field, evaluate, DipoleMoment, FieldDecomposition, ObservationPoint,
    Representation, TermKind,
};
use crate::geometry::{PhysicalConstants, Vec3};
use crate::quadrature::QuadratureRule;
use crate::sources::CurrentSource;

/// Precursors must stay below this fraction of the global peak.
pub const FRONT_TOLERANCE: f64 = 1e-10;

/// Arrival-time differences below this are treated as simultaneous.
pub const SIMULTANEITY_TOLERANCE: f64 = 1e-14;

/// Observation ray `origin + r * direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    origin: Vec3,
    direction: Vec3,
}

impl Ray {
    /// Normalizes `direction`.
    pub fn new(origin: Vec3, direction: Vec3) -> Result<Self> {
        let n = direction.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(invalid("ray direction must be a nonzero finite vector"));
        }
        Ok(Self {
            origin,
            direction: direction / n,
        })
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn at(&self, r: f64) -> Vec3 {
        self.origin + r * self.direction
    }
}

/// Reduction of a field vector to the scalar the analysis tracks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComponentSelector {
    /// Projection onto a fixed axis.
    Projection(Vec3),
    Magnitude,
}

impl ComponentSelector {
    pub fn apply(&self, v: &Vec3) -> f64 {
        match self {
            ComponentSelector::Projection(axis) => axis.dot(v),
            ComponentSelector::Magnitude => v.norm(),
        }
    }
}

/// Field decompositions on a `radius x time` grid along a ray.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformSeries {
    ray: Ray,
    radii: Vec<f64>,
    times: Vec<f64>,
    samples: Vec<FieldDecomposition>,
    selector: ComponentSelector,
}

impl WaveformSeries {
    pub fn ray(&self) -> &Ray {
        &self.ray
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn selector(&self) -> ComponentSelector {
        self.selector
    }

    pub fn with_selector(mut self, selector: ComponentSelector) -> Self {
        self.selector = selector;
        self
    }

    pub fn sample(&self, radius_index: usize, time_index: usize) -> &FieldDecomposition {
        &self.samples[radius_index * self.times.len() + time_index]
    }

    /// All samples, radius-major.
    pub fn samples(&self) -> &[FieldDecomposition] {
        &self.samples
    }

    /// Selected scalar of the total field at every time for one radius.
    pub fn selected(&self, radius_index: usize) -> Vec<f64> {
        let n = self.times.len();
        self.samples[radius_index * n..(radius_index + 1) * n]
            .iter()
            .map(|s| self.selector.apply(&s.total()))
            .collect()
    }

    pub fn representation(&self) -> Option<Representation> {
        self.samples.first().map(|s| s.representation())
    }
}

fn validate_grid(radii: &[f64], times: &[f64]) -> Result<()> {
    if radii.is_empty() || times.is_empty() {
        return Err(invalid("waveform grid needs at least one radius and one time"));
    }
    if !radii.iter().chain(times).all(|v| v.is_finite()) {
        return Err(invalid("waveform grid values must be finite"));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("radii must be strictly increasing"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("times must be strictly increasing"));
    }
    if times.len() > 2 {
        let step = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        let scale = times[0].abs().max(times[times.len() - 1].abs()).max(step);
        if times.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * scale) {
            return Err(invalid("times must form a uniform grid"));
        }
    }
    Ok(())
}

/// Evaluates `eval` on every `(radius, time)` cell, in parallel, returning
/// samples in radius-major order.
pub fn sample_with<F>(
    ray: &Ray,
    radii: &[f64],
    times: &[f64],
    selector: ComponentSelector,
    eval: F,
) -> Result<WaveformSeries>
where
    F: Fn(&ObservationPoint) -> Result<FieldDecomposition> + Sync,
{
    validate_grid(radii, times)?;
    let nt = times.len();
    let samples = (0..radii.len() * nt)
        .into_par_iter()
        .map(|i| {
            let (radius, time) = (radii[i / nt], times[i % nt]);
            eval(&ObservationPoint::new(ray.at(radius), time)).map_err(|e| FieldError::Sample {
                radius,
                time,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WaveformSeries {
        ray: *ray,
        radii: radii.to_vec(),
        times: times.to_vec(),
        samples,
        selector,
    })
}

/// Samples one quadrature representation along a ray. Every radius must put
/// the observation point outside the source support.
#[allow(clippy::too_many_arguments)]
pub fn sample_waveforms<S: CurrentSource + ?Sized>(
    src: &S,
    representation: Representation,
    ray: &Ray,
    radii: &[f64],
    times: &[f64],
    rule: &QuadratureRule,
    constants: &PhysicalConstants,
    selector: ComponentSelector,
) -> Result<WaveformSeries> {
    for &r in radii {
        ObservationPoint::new(ray.at(r), times.first().copied().unwrap_or(0.0))
            .ensure_exterior(src, crate::evaluators::EXTERIOR_MARGIN)
            .map_err(|e| FieldError::Sample {
                radius: r,
                time: f64::NAN,
                source: Box::new(e),
            })?;
    }
    sample_with(ray, radii, times, selector, |obs| {
        evaluate(representation, src, obs, rule, constants)
    })
}

/// Samples the closed-form point-dipole field along a ray.
pub fn sample_dipole_waveforms(
    dipole: &DipoleMoment,
    ray: &Ray,
    radii: &[f64],
    times: &[f64],
    constants: &PhysicalConstants,
    selector: ComponentSelector,
) -> Result<WaveformSeries> {
    sample_with(ray, radii, times, selector, |obs| {
        dipole_oracle_field(dipole, obs, constants)
    })
}

/// Outcome of a light-front check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontCheck {
    /// Largest selected value (absolute) strictly ahead of the front.
    pub max_precursor: f64,
    /// Largest selected value (absolute) over the whole series.
    pub global_peak: f64,
    pub samples_ahead: usize,
    pub pass: bool,
}

/// Earliest time any signal from `src` can reach `x`.
pub fn light_front_time<S: CurrentSource + ?Sized>(src: &S, x: &Vec3, constants: &PhysicalConstants) -> f64 {
    src.onset_time() + src.distance_to_support(x) / constants.c()
}

pub fn light_front_check<S: CurrentSource + ?Sized>(
    series: &WaveformSeries,
    src: &S,
    constants: &PhysicalConstants,
) -> FrontCheck {
    let mut max_precursor = 0.0f64;
    let mut global_peak = 0.0f64;
    let mut samples_ahead = 0;
    for (i, &r) in series.radii.iter().enumerate() {
        let front = light_front_time(src, &series.ray.at(r), constants);
        for (&t, v) in series.times.iter().zip(series.selected(i)) {
            let a = v.abs();
            global_peak = global_peak.max(a);
            if t < front {
                samples_ahead += 1;
                max_precursor = max_precursor.max(a);
            }
        }
    }
    let pass = max_precursor == 0.0 || max_precursor < FRONT_TOLERANCE * global_peak;
    FrontCheck {
        max_precursor,
        global_peak,
        samples_ahead,
        pass,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feature {
    Peak,
    ZeroCrossing,
}

impl Feature {
    pub fn name(&self) -> &'static str {
        match self {
            Feature::Peak => "peak",
            Feature::ZeroCrossing => "zero-crossing",
        }
    }
}

/// Vertex offset (in samples, within `[-0.5, 0.5]`) of the parabola through three points.
fn parabolic_offset(ym: f64, y0: f64, yp: f64) -> f64 {
    let denom = ym - 2.0 * y0 + yp;
    if denom >= 0.0 {
        return 0.0;
    }
    (0.5 * (ym - yp) / denom).clamp(-0.5, 0.5)
}

/// Feature time in `values` sampled at `times`, restricted to indices in `range`.
fn locate_feature(times: &[f64], values: &[f64], range: (usize, usize), feature: Feature) -> Option<f64> {
    let (lo, hi) = range;
    match feature {
        Feature::Peak => {
            let mut best = lo;
            for i in lo..hi {
                if values[i] > values[best] {
                    best = i;
                }
            }
            if (lo..hi).all(|i| values[i] == values[best]) {
                return None;
            }
            if best == 0 || best + 1 >= values.len() {
                return Some(times[best]);
            }
            let step = times[best + 1] - times[best];
            let d = parabolic_offset(values[best - 1], values[best], values[best + 1]);
            Some(times[best] + d * step)
        }
        Feature::ZeroCrossing => (lo..hi.saturating_sub(1)).find_map(|i| {
            let (a, b) = (values[i], values[i + 1]);
            if (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0) {
                Some(times[i] + (times[i + 1] - times[i]) * a / (a - b))
            } else {
                None
            }
        }),
    }
}

/// Feature arrival time at every radius, searching samples with `t` in `window`.
pub fn feature_arrival_times(series: &WaveformSeries, feature: Feature, window: (f64, f64)) -> Result<Vec<f64>> {
    let lo = series.times.partition_point(|&t| t < window.0);
    let hi = series.times.partition_point(|&t| t <= window.1);
    if lo >= hi {
        return Err(invalid(format!(
            "window [{}, {}] contains no sampled times",
            window.0, window.1
        )));
    }
    series
        .radii
        .iter()
        .enumerate()
        .map(|(i, &radius)| {
            locate_feature(&series.times, &series.selected(i), (lo, hi), feature).ok_or(
                FieldError::FeatureNotFound {
                    feature: feature.name(),
                    radius,
                },
            )
        })
        .collect()
}

/// Finite-difference velocities of a tracked feature between consecutive radii.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityProfile {
    pub radii: Vec<f64>,
    pub arrival_times: Vec<f64>,
    /// `(r[i+1] - r[i]) / (t[i+1] - t[i])`; infinite when the times coincide.
    pub local_velocity: Vec<f64>,
    pub feature: Feature,
}

impl VelocityProfile {
    /// Radial intervals `(r_lo, r_hi)` over which the velocity is negative.
    pub fn negative_segments(&self) -> Vec<(f64, f64)> {
        self.local_velocity
            .iter()
            .enumerate()
            .filter(|(_, v)| **v < 0.0)
            .map(|(i, _)| (self.radii[i], self.radii[i + 1]))
            .collect()
    }

    pub fn min_velocity(&self) -> f64 {
        self.local_velocity.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn local_velocity(radii: &[f64], arrival_times: &[f64], feature: Feature) -> Result<VelocityProfile> {
    if radii.len() != arrival_times.len() {
        return Err(invalid("radii and arrival times differ in length"));
    }
    if radii.len() < 2 {
        return Err(invalid("local velocity needs at least two radii"));
    }
    let local_velocity = radii
        .windows(2)
        .zip(arrival_times.windows(2))
        .map(|(r, t)| {
            let dt = t[1] - t[0];
            let dr = r[1] - r[0];
            if dt.abs() < SIMULTANEITY_TOLERANCE {
                f64::INFINITY.copysign(dr)
            } else {
                dr / dt
            }
        })
        .collect();
    Ok(VelocityProfile {
        radii: radii.to_vec(),
        arrival_times: arrival_times.to_vec(),
        local_velocity,
        feature,
    })
}

/// Least-squares slope of `log(amplitude)` against `log(r)`.
pub fn zone_scaling_fit(radii: &[f64], amplitudes: &[f64]) -> Result<f64> {
    if radii.len() != amplitudes.len() {
        return Err(invalid("radii and amplitudes differ in length"));
    }
    if radii.len() < 5 {
        return Err(invalid("scaling fit needs at least 5 radii"));
    }
    let (rmin, rmax) = radii
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    if !(rmin > 0.0 && rmax >= 10.0 * rmin * (1.0 - 1e-12)) {
        return Err(invalid("scaling fit radii must span at least one decade"));
    }
    if let Some(a) = amplitudes.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(FieldError::DegenerateFit(format!("non-positive amplitude {a}")));
    }
    let n = radii.len() as f64;
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = amplitudes.iter().map(|a| a.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Time at which a term is sampled for a radial scaling sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingWindow {
    /// After the current has switched off at every source point.
    Static,
    /// Fixed retarded phase `t - r/c - t_on`.
    RetardedPhase(f64),
}

impl ScalingWindow {
    pub fn time_at<S: CurrentSource + ?Sized>(&self, src: &S, ray: &Ray, r: f64, constants: &PhysicalConstants) -> f64 {
        match *self {
            ScalingWindow::Static => {
                let x = ray.at(r);
                src.settle_time() + (src.farthest_support_distance(&x) + src.support_diameter()) / constants.c()
            }
            ScalingWindow::RetardedPhase(u) => src.onset_time() + r / constants.c() + u,
        }
    }
}

/// Magnitude of one term of a representation at each radius, at the time chosen by `window`.
#[allow(clippy::too_many_arguments)]
pub fn radial_term_amplitudes<S: CurrentSource + ?Sized>(
    src: &S,
    representation: Representation,
    term: TermKind,
    ray: &Ray,
    radii: &[f64],
    window: ScalingWindow,
    rule: &QuadratureRule,
    constants: &PhysicalConstants,
) -> Result<Vec<f64>> {
    radii
        .par_iter()
        .map(|&r| {
            let t = window.time_at(src, ray, r, constants);
            let field = evaluate(representation, src, &ObservationPoint::new(ray.at(r), t), rule, constants)?;
            field
                .term(term)
                .map(|v| v.norm())
                .ok_or_else(|| invalid(format!("{representation} has no {} term", term.name())))
        })
        .collect()
}
