use thiserror::Error;

/// Errors raised by the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("charge point {index} lies inside or on the boundary (tau = {tau})")]
    ChargePlacement { index: usize, tau: f64 },

    #[error("argument outside the supported domain: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("filter assembly failed: {0}")]
    Assembly(String),

    #[error("boundary node {node} coincides with charge {charge} (distance {distance:e})")]
    SingularKernel {
        node: usize,
        charge: usize,
        distance: f64,
    },

    #[error("interior norm matrix has no positive spectrum (largest eigenvalue {0:e})")]
    DegenerateNorm(f64),

    #[error("stacked matrix has numerical rank zero")]
    RankCollapse,

    #[error("trial space has no interior mass (c_min = {0})")]
    NoInteriorMass(f64),

    #[error("minimum search did not converge after {evals} evaluations (best sqrtE = {best_sqrt_e})")]
    ConvergenceFailure {
        evals: usize,
        best_sqrt_e: f64,
        best: Option<Box<crate::search::EigenResult>>,
    },

    #[error("energies are not separated: |E - E*| = {0:e}")]
    IllSeparated(f64),

    #[error("mode enumeration incomplete: order cap {n_cap} reached below {freq_hi}")]
    IncompleteEnumeration { n_cap: u32, freq_hi: f64 },

    #[error("identity violated for mode (n={n}, l={l}): {detail}")]
    IdentityViolation { n: u32, l: u32, detail: String },

    #[error("mode (n={n}, l={l}) is outside the square-root regime of G_h")]
    RegimeViolation { n: u32, l: u32 },

    #[error("failed to parse {what}: {detail}")]
    Parse { what: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
