//! Metric gradient flow h⁻¹ḣ = [h⁻¹φ*h, φ] − ρ on quiver representations.
//!
//! * [`staralg`]: block *-algebras, bimodules, commutators, the Laplacian and
//!   its Green's operator, reduction and gauge fixing.
//! * [`flow`]: right-hand side, energy, adaptive integration in log time,
//!   fixed points, monotonicity and sandwich checks.
//! * [`asymptotic`]: recursive construction of asymptotic solutions along an
//!   iterated filtration and their residuals.
//! * [`fit`]: iterated-logarithm exponent regression on trajectories.
//! * [`quiver`]: representation JSON and thin representations of DAGs.

pub mod asymptotic;
pub mod fit;
pub mod flow;
pub mod quiver;
pub mod staralg;

/// Errors raised by the numerical layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("singular metric")]
    SingularMetric,
    #[error("positivity lost near s = {0}")]
    PositivityLost(f64),
    #[error("step failure: {0}")]
    StepFailure(String),
    #[error("[φ₀*, φ₀] is not central (off-center norm {0:.3e})")]
    NotCentral(f64),
    #[error("gauge equations not satisfied (residual {0:.3e})")]
    NotHarmonic(f64),
    #[error("not semistable: {0}")]
    NotSemistable(String),
    #[error("recursion depth {0} exceeds the cap")]
    DepthExceeded(usize),
    #[error("insufficient range: {0}")]
    InsufficientRange(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] itlog_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
