use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("resource limit: {what} (requested {requested}, cap {cap})")]
    Resource {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("degenerate face {face}: {reason}")]
    DegenerateFace { face: usize, reason: String },

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("solvability: zero orders sum to {got}, expected {expected} (4g - 4)")]
    Solvability { got: u32, expected: u32 },

    #[error("invalid quadratic differential spec: {0}")]
    Spec(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("empty evaluation domain: {0}")]
    EmptyDomain(String),

    #[error("linear solve did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    LinearSolve { iterations: usize, residual: f64 },

    #[error("Newton iteration did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("at t = {t}: {source}")]
    AtRayParameter {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("disconnected lifted graph: {0}")]
    Disconnected(String),

    #[error("entropy window: {0}")]
    Window(String),

    #[error("non-hyperbolic element {word}: |trace| = {trace_abs}")]
    NonHyperbolic { word: String, trace_abs: f64 },

    #[error("invalid representation: {0}")]
    Representation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_t(self, t: f64) -> Self {
        Error::AtRayParameter {
            t,
            source: Box::new(self),
        }
    }
}
