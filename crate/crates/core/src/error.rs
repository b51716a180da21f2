use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("requested derivative order {requested} exceeds supported order {supported}")]
    UnsupportedOrder { requested: usize, supported: usize },
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },
    #[error("finite-difference step underflow: step = {step}")]
    StepUnderflow { step: f64 },
    #[error("metric is singular or too ill-conditioned (det = {det})")]
    SingularMetric { det: f64 },
    #[error("vanishing gradient of the level-set function")]
    VanishingGradient,
    #[error("warping factor must be positive here (phi = {phi})")]
    NonPositivePhi { phi: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("root finding failed to converge: {0}")]
    NoConvergence(String),
    #[error("slice is not spacelike at r = {r}")]
    NotSpacelike { r: f64 },
    #[error("quadrature did not converge: refinement disagreement {disagreement} exceeds {tol}")]
    QuadratureNonconvergence { disagreement: f64, tol: f64 },
    #[error("mean curvature is not positive at r = {r} (H = {h}); flow would jump")]
    NonMonotoneFlow { r: f64, h: f64 },
    #[error("ODE integration hit a barrier at r = {r}: {detail}")]
    OdeBarrier { r: f64, detail: String },
    #[error("profile format error: {0}")]
    ProfileFormat(String),
    #[error("fit residual {residual} exceeds threshold {threshold}; data is not in the expected asymptotic family")]
    FitRejected { residual: f64, threshold: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
