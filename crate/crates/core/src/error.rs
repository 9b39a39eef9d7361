use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("integrator step failure at r = {radius:.6e}: {reason}")]
    StepFailure { radius: f64, reason: String },

    #[error("series seed with amplitude {amplitude} blows up before r = {radius:.3e}")]
    SeedBlowUp { amplitude: f64, radius: f64 },

    #[error("shooting dichotomy violated on bracket [{lo}, {hi}]: both ends classify as {class}")]
    DichotomyViolated { lo: f64, hi: f64, class: String },

    #[error("matching iteration for the profile did not converge (defect {defect:.3e})")]
    MatchingFailed { defect: f64 },

    #[error("fixed-point map is not contracting (radius {radius:.4e}, ratio {ratio:.3e})")]
    NonContraction { radius: f64, ratio: f64 },

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("degenerate basis: frame determinant {wronskian:.3e}")]
    DegenerateBasis { wronskian: f64 },

    #[error("ill-conditioned matching system (condition {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("no convergence after {iterations} iterations (last change {change:.3e})")]
    NoConvergence { iterations: usize, change: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("truncation tail {tail:.3e} exceeds 1% of the value {value:.3e}")]
    TailTooLarge { tail: f64, value: f64 },

    #[error("magnitude overflow near r = {radius:.4e}")]
    Overflow { radius: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
