use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Variants map onto the failure classes of the command line driver:
/// parameter and precondition failures are validation errors, `Margin`
/// and `Domain` are window/domain errors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("model mismatch: {0}")]
    ModelMismatch(String),
    #[error("integration domain: {0}")]
    IntegrationDomain(String),
    #[error("degenerate window: {0}")]
    DegenerateWindow(String),
    #[error("boundary uncertainty: {0}")]
    BoundaryUncertainty(String),
    #[error("nesting violation: {0}")]
    NestingViolation(String),
    #[error("exhausted filtration: {0}")]
    ExhaustedFiltration(String),
    #[error("degenerate set: {0}")]
    Degenerate(String),
    #[error("domain: {0}")]
    Domain(String),
    #[error("positivity: {0}")]
    Positivity(String),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("criterion inapplicable: {0}")]
    CriterionInapplicable(String),
    #[error("sampler inapplicable: {0}")]
    SamplerInapplicable(String),
    #[error("margin: {0}")]
    Margin(String),
    #[error("nonsingularity: {0}")]
    Nonsingularity(String),
    #[error("parameter: {0}")]
    Parameter(String),
    #[error("rejected: {0}")]
    Rejected(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
