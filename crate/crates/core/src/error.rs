use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("non-finite coordinate or radius")]
    NonFinite,
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("axis/normal vector is null")]
    NullAxis,
}

/// A violated configuration invariant; the message names it.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

impl ConfigError {
    pub fn new(msg: impl Into<String>) -> Self {
        ConfigError(msg.into())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(
        "RSA stagnated while placing {stuck_on}: placed {placed_spheres}/{target_spheres} spheres and \
         {placed_cylinders}/{target_cylinders} cylinders ({reason})"
    )]
    Stagnation {
        placed_spheres: usize,
        placed_cylinders: usize,
        target_spheres: usize,
        target_cylinders: usize,
        stuck_on: &'static str,
        reason: &'static str,
    },
    #[error("MD relaxation did not converge after {steps} steps (last E_pot = {last_energy:e}, {contacts} contacts left)")]
    NonConvergence {
        steps: usize,
        last_energy: f64,
        contacts: usize,
        trace: Vec<crate::md::TraceRow>,
    },
    #[error("MD integration blew up at step {step} with dt = {dt:e}")]
    BlowUp { step: usize, dt: f64 },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed sample file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
