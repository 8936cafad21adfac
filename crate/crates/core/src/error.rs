use thiserror::Error;

use crate::numerics::ode::OdeError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("y = {y} lies outside the profile domain [{lo}, {hi}]")]
    Domain { y: f64, lo: f64, hi: f64 },

    #[error("derivative requested at the breakpoint y = {y}; a side must be given")]
    AmbiguousSide { y: f64 },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("critical layer: wave speed c = {c} does not exceed {floor} (+ margin)")]
    CriticalLayer { c: f64, floor: f64 },

    #[error("wave speed c = {c} equals the current at the vorticity jump (U1 = {u1})")]
    SingularJump { c: f64, u1: f64 },

    #[error("density vanishes on the integration path (vacuum layer) near y = {y}")]
    VacuumLayer { y: f64 },

    #[error("degenerate mode at c = {c}, k = {k}: the shooting solution vanishes at the normalisation point")]
    DegenerateMode { c: f64, k: f64 },

    #[error("integrator failed: {0}")]
    Integrator(#[from] OdeError),

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("no sign change of the residual on the scanned interval [{lo}, {hi}] ({} samples)", scan.len())]
    NoRoot { lo: f64, hi: f64, scan: Vec<(f64, f64)> },

    #[error("quadrature failed: {0}")]
    Integration(String),

    #[error("mode/profile mismatch: {0}")]
    Consistency(String),

    #[error("bed transfer value {t0} is too small to invert")]
    IllConditioned { t0: f64 },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("degenerate coefficient: {0}")]
    DegenerateCoefficient(String),

    #[error("divergent integral: {0}")]
    Integrability(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
