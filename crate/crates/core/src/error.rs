use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("excitation number {m} out of range (max {max})")]
    ExcitationsOutOfRange { m: usize, max: usize },

    #[error("site {site} out of range for a lattice of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("sector mismatch: {0}")]
    SectorMismatch(String),

    #[error("basis mismatch between states")]
    BasisMismatch,

    #[error("n = 0 has no polariton doublet")]
    ZeroExcitationDoublet,

    #[error("ground state is degenerate (gap {gap:e})")]
    DegenerateGroundState { energy: f64, gap: f64 },

    #[error("zero photon density at site {site}")]
    ZeroPhotonDensity { site: usize },

    #[error("analytic oracle requires unit filling (sites {n_sites}, excitations {m})")]
    FillingMismatch { n_sites: usize, m: usize },

    #[error("zero-norm state vector")]
    ZeroNorm,

    #[error("time {t} outside schedule window [0, {total}]")]
    TimeOutOfRange { t: f64, total: f64 },

    #[error("norm drift {drift:e} exceeds {tolerance:e}; reduce the time step")]
    NormDrift { drift: f64, tolerance: f64 },

    #[error("trace drift {drift:e} exceeds {tolerance:e}; reduce the time step")]
    TraceDrift { drift: f64, tolerance: f64 },

    #[error("quantum speed limit undefined: average energy fluctuation is zero")]
    UndefinedSpeedLimit,

    #[error("no grid time reached fidelity {threshold}; best {best_fidelity} at T = {best_time}")]
    ThresholdNotFound {
        threshold: f64,
        best_time: f64,
        best_fidelity: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) => 1,
            Error::ThresholdNotFound { .. } => 3,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
