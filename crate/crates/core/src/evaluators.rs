//! Field evaluation from the two integral representations, plus a
//! closed-form point-dipole field used as an independent oracle.
//!
//! * [`budko_field`]: three integrals with `1/R^3`, `1/R^2` and `1/R`
//!   kernels acting on the time-integrated current, the current and its
//!   time derivative at retarded time. Reported as near, intermediate and
//!   far terms.
//! * [`jefimenko_field`]: retarded current derivative and retarded charge
//!   gradient (taken at frozen source time), both over `1/R`.

use std::fmt;

use crate::error::{invalid, FieldError, Result};
use crate::geometry::{PhysicalConstants, Separation, Vec3};
use crate::quadrature::{QuadratureRule, RefinementLadder};
use crate::sources::{CurrentSource, SourceModel, TimeProfile};

/// Residual denominators below this are treated as zero fields.
pub const RESIDUAL_FLOOR: f64 = 1e-30;

/// Default exterior margin as a fraction of the support diameter.
pub const EXTERIOR_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    Budko,
    Jefimenko,
    Dipole,
}

impl Representation {
    pub fn name(&self) -> &'static str {
        match self {
            Representation::Budko => "budko",
            Representation::Jefimenko => "jefimenko",
            Representation::Dipole => "dipole",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TermKind {
    Near,
    Intermediate,
    Far,
    Current,
    Charge,
}

impl TermKind {
    pub fn name(&self) -> &'static str {
        match self {
            TermKind::Near => "near",
            TermKind::Intermediate => "intermediate",
            TermKind::Far => "far",
            TermKind::Current => "current",
            TermKind::Charge => "charge",
        }
    }
}

/// Total field and its per-term breakdown. `total` is the in-order sum of `terms`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDecomposition {
    representation: Representation,
    terms: Vec<(TermKind, Vec3)>,
    total: Vec3,
    err_estimate: Option<f64>,
}

impl FieldDecomposition {
    pub fn new(representation: Representation, terms: Vec<(TermKind, Vec3)>) -> Result<Self> {
        let total = terms.iter().fold(Vec3::zeros(), |acc, (_, v)| acc + v);
        if !total.iter().all(|c| c.is_finite()) {
            return Err(FieldError::NonFiniteField(format!(
                "{representation} terms {terms:?}"
            )));
        }
        Ok(Self {
            representation,
            terms,
            total,
            err_estimate: None,
        })
    }

    pub fn with_err_estimate(mut self, err: f64) -> Self {
        self.err_estimate = Some(err);
        self
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn total(&self) -> Vec3 {
        self.total
    }

    pub fn terms(&self) -> &[(TermKind, Vec3)] {
        &self.terms
    }

    pub fn term(&self, kind: TermKind) -> Option<Vec3> {
        self.terms.iter().find(|(k, _)| *k == kind).map(|(_, v)| *v)
    }

    /// Quadrature error estimate on the total, when the field came from a refinement ladder.
    pub fn err_estimate(&self) -> Option<f64> {
        self.err_estimate
    }
}

/// Observation event `(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationPoint {
    pub x: Vec3,
    pub t: f64,
}

impl ObservationPoint {
    pub fn new(x: Vec3, t: f64) -> Self {
        Self { x, t }
    }

    /// Requires `x` to be farther than `margin` times the support diameter from the support.
    pub fn ensure_exterior<S: CurrentSource + ?Sized>(&self, src: &S, margin: f64) -> Result<()> {
        let distance = src.distance_to_support(&self.x);
        let margin = margin * src.support_diameter();
        if !(distance > margin) {
            return Err(FieldError::ObservationInsideDomain {
                point: [self.x.x, self.x.y, self.x.z],
                distance,
                margin,
            });
        }
        if !self.t.is_finite() {
            return Err(invalid("observation time must be finite"));
        }
        Ok(())
    }
}

/// Near/intermediate/far representation.
pub fn budko_field<S: CurrentSource + ?Sized>(
    src: &S,
    obs: &ObservationPoint,
    rule: &QuadratureRule,
    constants: &PhysicalConstants,
) -> Result<FieldDecomposition> {
    obs.ensure_exterior(src, EXTERIOR_MARGIN)?;
    let c = constants.c();
    let mut near = Vec3::zeros();
    let mut intermediate = Vec3::zeros();
    let mut far = Vec3::zeros();
    for (xp, w) in rule.iter() {
        let sep = Separation::new(&obs.x, xp)?;
        let r = sep.distance;
        let s = src.sample(xp, obs.t - r / c);
        near += w * sep.double_gradient_apply(&s.primitive);
        intermediate += (w * r) * sep.double_gradient_apply(&s.current);
        far += (w / r) * sep.far_apply(&s.derivative);
    }
    let k = constants.inv_4pi_eps0();
    FieldDecomposition::new(
        Representation::Budko,
        vec![
            (TermKind::Near, -k * near),
            (TermKind::Intermediate, -(k / c) * intermediate),
            (TermKind::Far, (k / (c * c)) * far),
        ],
    )
}

/// Retarded charge/current representation with the outer time derivative
/// moved onto the current.
pub fn jefimenko_field<S: CurrentSource + ?Sized>(
    src: &S,
    obs: &ObservationPoint,
    rule: &QuadratureRule,
    constants: &PhysicalConstants,
) -> Result<FieldDecomposition> {
    obs.ensure_exterior(src, EXTERIOR_MARGIN)?;
    let c = constants.c();
    let mut current = Vec3::zeros();
    let mut charge = Vec3::zeros();
    for (xp, w) in rule.iter() {
        let sep = Separation::new(&obs.x, xp)?;
        let r = sep.distance;
        let tr = obs.t - r / c;
        let wr = w / r;
        current += wr * src.current_time_derivative(xp, tr);
        charge += wr * src.charge_gradient(xp, tr);
    }
    let k = constants.inv_4pi_eps0();
    FieldDecomposition::new(
        Representation::Jefimenko,
        vec![
            (TermKind::Current, -(k / (c * c)) * current),
            (TermKind::Charge, -k * charge),
        ],
    )
}

/// [`jefimenko_field`] with the outer time derivative taken by a central
/// difference of step `dt` on the retarded current integral. Debug aid for
/// checking the commuted form.
pub fn jefimenko_field_uncommuted<S: CurrentSource + ?Sized>(
    src: &S,
    obs: &ObservationPoint,
    rule: &QuadratureRule,
    constants: &PhysicalConstants,
    dt: f64,
) -> Result<FieldDecomposition> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid("finite-difference step must be positive"));
    }
    let commuted = jefimenko_field(src, obs, rule, constants)?;
    let c = constants.c();
    let potential = |t: f64| -> Result<Vec3> {
        let mut acc = Vec3::zeros();
        for (xp, w) in rule.iter() {
            let sep = Separation::new(&obs.x, xp)?;
            acc += (w / sep.distance) * src.current(xp, t - sep.distance / c);
        }
        Ok(acc)
    };
    let d = (potential(obs.t + dt)? - potential(obs.t - dt)?) / (2.0 * dt);
    let k = constants.inv_4pi_eps0();
    let charge = commuted.term(TermKind::Charge).unwrap_or_default();
    FieldDecomposition::new(
        Representation::Jefimenko,
        vec![(TermKind::Current, -(k / (c * c)) * d), (TermKind::Charge, charge)],
    )
}

/// Evaluates one representation on a fixed rule. `Dipole` is not a quadrature
/// representation and is rejected.
pub fn evaluate<S: CurrentSource + ?Sized>(
    representation: Representation,
    src: &S,
    obs: &ObservationPoint,
    rule: &QuadratureRule,
    constants: &PhysicalConstants,
) -> Result<FieldDecomposition> {
    match representation {
        Representation::Budko => budko_field(src, obs, rule, constants),
        Representation::Jefimenko => jefimenko_field(src, obs, rule, constants),
        Representation::Dipole => Err(invalid("dipole field is not a quadrature representation")),
    }
}

/// Evaluates one representation up a refinement ladder; the returned
/// decomposition comes from the last order reached and carries its error estimate.
pub fn evaluate_refined<S: CurrentSource + ?Sized>(
    representation: Representation,
    src: &S,
    obs: &ObservationPoint,
    ladder: &RefinementLadder,
    constants: &PhysicalConstants,
) -> Result<FieldDecomposition> {
    let mut last = None;
    let refined = ladder.run(|rule| {
        let field = evaluate(representation, src, obs, rule, constants)?;
        let total = field.total();
        last = Some(field);
        Ok(total)
    })?;
    let field = last.expect("ladder evaluated at least once");
    Ok(field.with_err_estimate(refined.err_estimate))
}

/// Relative difference between the two representation totals.
pub fn relative_difference(a: &Vec3, b: &Vec3) -> f64 {
    let diff = (a - b).norm();
    if diff == 0.0 {
        return 0.0;
    }
    diff / a.norm().max(b.norm()).max(RESIDUAL_FLOOR)
}

/// `|E_budko - E_jefimenko| / max(|E_budko|, |E_jefimenko|, floor)`.
pub fn representation_residual<S: CurrentSource + ?Sized>(
    src: &S,
    obs: &ObservationPoint,
    rule: &QuadratureRule,
    constants: &PhysicalConstants,
) -> Result<f64> {
    let a = budko_field(src, obs, rule, constants)?;
    let b = jefimenko_field(src, obs, rule, constants)?;
    Ok(relative_difference(&a.total(), &b.total()))
}

/// Point dipole `p(t) = scale * direction * F(t)` at `position`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleMoment {
    pub position: Vec3,
    pub direction: Vec3,
    pub scale: f64,
    pub profile: TimeProfile,
}

impl DipoleMoment {
    /// Dipole moment of a separable source: `A p int g d^3x'` times the pulse primitive.
    pub fn from_source(src: &SourceModel) -> Self {
        Self {
            position: src.envelope().center(),
            direction: src.polarization(),
            scale: src.amplitude() * src.envelope().total_weight(),
            profile: *src.profile(),
        }
    }

    pub fn moment(&self, t: f64) -> Vec3 {
        self.direction * (self.scale * self.profile.primitive(t))
    }

    pub fn rate(&self, t: f64) -> Vec3 {
        self.direction * (self.scale * self.profile.value(t))
    }

    pub fn acceleration(&self, t: f64) -> Vec3 {
        self.direction * (self.scale * self.profile.derivative(t))
    }
}

/// Closed-form field of a point dipole, split into its `1/r^3`, `1/r^2` and `1/r` parts.
pub fn dipole_oracle_field(
    dipole: &DipoleMoment,
    obs: &ObservationPoint,
    constants: &PhysicalConstants,
) -> Result<FieldDecomposition> {
    let sep = Separation::new(&obs.x, &dipole.position)?;
    let r = sep.distance;
    let n = sep.direction;
    let c = constants.c();
    let tr = obs.t - r / c;
    let (p, pd, pdd) = (dipole.moment(tr), dipole.rate(tr), dipole.acceleration(tr));
    let k = constants.inv_4pi_eps0();
    FieldDecomposition::new(
        Representation::Dipole,
        vec![
            (TermKind::Near, k * (3.0 * n * n.dot(&p) - p) / r.powi(3)),
            (TermKind::Intermediate, k * (3.0 * n * n.dot(&pd) - pd) / (c * r * r)),
            (TermKind::Far, k * (n * n.dot(&pdd) - pdd) / (c * c * r)),
        ],
    )
}
