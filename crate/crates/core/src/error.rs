use thiserror::Error;

/// Errors raised while building or validating a meridional mesh.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("node {node} has negative radius {r}")]
    NegativeRadius { node: usize, r: f64 },
    #[error("triangle {triangle} has non-positive signed area {area:e}")]
    InvertedTriangle { triangle: usize, area: f64 },
    #[error("triangle {triangle} references node {node} but the mesh has {n_nodes} nodes")]
    BadConnectivity {
        triangle: usize,
        node: usize,
        n_nodes: usize,
    },
    #[error("boundary tagging error: {0}")]
    Tagging(String),
    #[error("{tag} is not connected: found {components} separate runs")]
    DisconnectedPort { tag: String, components: usize },
    #[error("mesh file line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Errors from the prescribed motion.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error(
        "degenerate motion at (r_m, z_m) = ({r:.6e}, {z:.6e}), t = {t}: \
         det F = {det_f:e}, radial factor = {radial_factor:e}"
    )]
    DegenerateMotion {
        r: f64,
        z: f64,
        t: f64,
        det_f: f64,
        radial_factor: f64,
    },
    #[error("invalid ramp: {0}")]
    InvalidRamp(String),
}

/// Errors from evaluating constitutive laws.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("{law} is not positive at theta = {theta} C (value {value:e})")]
    OutOfRange {
        law: &'static str,
        theta: f64,
        value: f64,
    },
    #[error("negative field modulus {0}")]
    NegativeField(f64),
}

/// Errors raised by the oracles when asked for something outside their range.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("oracle range: {0}")]
    Range(String),
    #[error("ODE integration failed: {0}")]
    Integration(String),
}

/// Top-level error type of the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("invalid port specification: {0}")]
    Ports(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("sparse factorization failed: {0}")]
    LinearSolve(String),
    #[error(
        "Newton did not converge in {iterations} iterations \
         (residual {final_residual:e}, initial {initial_residual:e})"
    )]
    NonConvergence {
        iterations: usize,
        initial_residual: f64,
        final_residual: f64,
        history: Vec<f64>,
    },
    #[error("time step to t = {t} failed after {halvings} halvings: {source}")]
    StepFailure {
        t: f64,
        halvings: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("configuration error: {0}")]
    Config(#[from] crate::io::config::ConfigError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True when the root cause is a Newton failure (CLI exit code 3).
    pub fn is_non_convergence(&self) -> bool {
        match self {
            Error::NonConvergence { .. } => true,
            Error::StepFailure { source, .. } => source.is_non_convergence(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
