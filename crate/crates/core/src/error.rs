use thiserror::Error;

/// Errors raised by kernels, quadrature, evaluators and analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("observation and source points coincide at {0:?}")]
    CoincidentPoints([f64; 3]),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("observation point {point:?} is not outside the source domain (distance {distance:e}, margin {margin:e})")]
    ObservationInsideDomain {
        point: [f64; 3],
        distance: f64,
        margin: f64,
    },

    #[error("non-finite integrand value at node {index} ({node:?})")]
    NonFiniteIntegrand { index: usize, node: [f64; 3] },

    #[error("non-finite field value: {0}")]
    NonFiniteField(String),

    #[error("quadrature did not converge: error estimate {err_estimate:e} failed to decrease over three refinements (last order {order})")]
    NonConvergence { order: usize, err_estimate: f64 },

    #[error("evaluation failed at r = {radius}, t = {time}: {source}")]
    Sample {
        radius: f64,
        time: f64,
        #[source]
        source: Box<FieldError>,
    },

    #[error("no {feature} found in window at r = {radius}")]
    FeatureNotFound { feature: &'static str, radius: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T, E = FieldError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> FieldError {
    FieldError::InvalidArgument(msg.into())
}
