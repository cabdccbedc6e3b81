use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The point lies where the reduction hypotheses fail (origin, or the
    /// symmetry axis of a cylindrical action).
    #[error("phase-space point lies in an excluded stratum: {0}")]
    Stratum(String),

    #[error("point is not on the zero level of the momentum map (residual {residual:.3e} >= {tol:.1e})")]
    Tolerance { residual: f64, tol: f64 },

    #[error("window [{e1}, {e2}] contains the critical value {critical} of the reduced Hamiltonian")]
    DegenerateWindow { e1: f64, e2: f64, critical: f64 },

    #[error("multiplicity average {value} is not an integer (residual {residual:.3e})")]
    NonIntegerMultiplicity { value: f64, residual: f64 },

    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("integrator could not reach tolerance {tol:.1e} within {max_steps} steps (drift {drift:.3e})")]
    StepSize { tol: f64, max_steps: usize, drift: f64 },

    #[error("no bounded classical motion at energy {energy}: {reason}")]
    NoTurningPoint { energy: f64, reason: String },

    #[error("grid of {points} points is below the resolution floor {floor} for h = {h}")]
    Grid { points: usize, floor: usize, h: f64 },

    #[error("eigenvalue {eigenvalue} lies within its error {error:.2e} of the window edge; count is {low} or {high}")]
    Ambiguity {
        eigenvalue: f64,
        error: f64,
        low: usize,
        high: usize,
    },

    #[error("phase unwrapping is ambiguous: consecutive 1/h step {step:.3} times action {action:.3} exceeds π")]
    PhaseUnwrap { step: f64, action: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported for this group: {0}")]
    Unsupported(String),

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
