use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstantsError {
    #[error("dimension n = {0} is below 5; the critical exponent is undefined or negative")]
    DimensionTooSmall(u32),
    #[error("dimension n = {0} exceeds the supported maximum {max}", max = crate::constants::MAX_DIMENSION)]
    DimensionTooLarge(u32),
    #[error("exponent p = {0} must exceed 1")]
    ExponentNotAboveOne(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("negative value v = {v:e} at t = {t} (fractional power undefined)")]
    Domain { t: f64, v: f64 },
    #[error("trajectory left the admissible cone at t = {t}: v = {v:e}")]
    BlowUp { t: f64, v: f64 },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("invalid integration request: {0}")]
    InvalidRequest(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PeriodicError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("shooting failed: {0}")]
    Shooting(#[from] DynamicsError),
    #[error("Newton converged to the constant solution (amplitude {amplitude:e})")]
    TrivialRoot { amplitude: f64 },
    #[error("Newton diverged after {iterations} iterations (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },
    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("orbit is not positive: min v = {min_v:e}")]
    NotPositive { min_v: f64 },
    #[error("singular Newton system")]
    SingularJacobian,
    #[error("mountain-pass relaxation stalled after {iterations} iterations (gradient {gradient:e})")]
    RelaxationStalled { iterations: usize, gradient: f64 },
    #[error("profile leaves the band [0, L] at index {index} (value {value:e})")]
    OutsideBand { index: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error("non-positive value v = {v:e} at t = {t}")]
    Domain { t: f64, v: f64 },
    #[error("invalid w-function parameters: {0}")]
    InvalidParams(String),
}

impl DynamicsError {
    /// Stable snake-case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Domain { .. } => "domain",
            Self::BlowUp { .. } => "blow_up",
            Self::StepUnderflow { .. } => "step_underflow",
            Self::InvalidRequest(_) => "invalid_request",
        }
    }
}

impl PeriodicError {
    /// Stable snake-case name of the variant; shooting failures report the
    /// underlying integrator error.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::InvalidRequest(_) => "invalid_request",
            Self::Shooting(e) => e.kind(),
            Self::TrivialRoot { .. } => "trivial_root",
            Self::Divergence { .. } => "divergence",
            Self::NoConvergence { .. } => "no_convergence",
            Self::NotPositive { .. } => "not_positive",
            Self::SingularJacobian => "singular_jacobian",
            Self::RelaxationStalled { .. } => "relaxation_stalled",
            Self::OutsideBand { .. } => "outside_band",
        }
    }
}
