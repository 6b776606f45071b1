use thiserror::Error;

/// Library-wide error type. Variants map onto the failure modes of the
/// construction pipeline: bad parameters, hypothesis violations detected on
/// grids, root-finding/quadrature breakdowns, and integration failures.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("unsupported form: {0}")]
    UnsupportedForm(String),

    #[error("point ({x}, {y}) is not on the critical curve (residual {residual:e})")]
    NotOnCriticalCurve { x: f64, y: f64, residual: f64 },

    #[error("contact point at x = {x}: slow vector field is singular and not removable")]
    ContactPoint { x: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition failed: {what} on [{lo}, {hi}]")]
    PreconditionFailed { what: String, lo: f64, hi: f64 },

    #[error("numeric failure in {what}: achieved {achieved:e}, requested {requested:e}")]
    Numeric {
        what: &'static str,
        achieved: f64,
        requested: f64,
    },

    #[error("no sign change for {what} in [{lo}, {hi}]")]
    NoBracket {
        what: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("orbit did not return to the section: {0}")]
    NoReturn(String),

    #[error("step size underflow at t = {t} (h = {h:e}); the problem looks stiff, try the implicit method")]
    Stiffness { t: f64, h: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
