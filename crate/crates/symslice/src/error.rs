use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not a rotation (orthogonality defect {orthogonality:.3e}, det {determinant})")]
    NotARotation { orthogonality: f64, determinant: f64 },
    #[error("rotation angle too close to pi for a unique logarithm (trace {trace})")]
    AngleNearPi { trace: f64 },
    #[error("matrix is not skew-symmetric (defect {0:.3e})")]
    NotSkew(f64),
    #[error("vector is not tangent to the coadjoint orbit (defect {0:.3e})")]
    NotTangent(f64),
    #[error("point outside the tube domain: nu = {nu}, |eta| = {eta_norm} (bound {bound})")]
    OutOfDomain { nu: f64, eta_norm: f64, bound: f64 },
    #[error("momentum is antipodal to the base point and has no slice preimage")]
    AntipodalPoint,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("trajectory left the tube domain at t = {time}")]
    LeftTubeDomain { time: f64 },
    #[error("energy drift {drift:.3e} in one step at t = {time}")]
    EnergyDrift { time: f64, drift: f64 },
    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { what: &'static str, iterations: usize, residual: f64 },
    #[error("singular block matrix: {0}")]
    SingularBlock(String),
    #[error("group action is not free at the base configuration")]
    NotFreeAction,
    #[error("expansion point is not an equilibrium (gradient norm {0:.3e})")]
    NotAnEquilibrium(f64),
    #[error("quadratic part is not diagonalizable (degree {0} homological operator is defective)")]
    NonDiagonalizableQuadraticPart(usize),
    #[error("eigenbasis condition number {0:.3e} exceeds limit")]
    IllConditionedEigenbasis(f64),
    #[error("jet system inconsistent at order {order} (residual {residual:.3e})")]
    InconsistentJetSystem { order: usize, residual: f64 },
    #[error("invalid Lie algebra: {0}")]
    InvalidLieAlgebra(String),
    #[error("Hamiltonian is not invariant (variation {0:.3e})")]
    NonInvariantHamiltonian(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Variant name, used in structured error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotARotation { .. } => "NotARotation",
            Error::AngleNearPi { .. } => "AngleNearPi",
            Error::NotSkew(_) => "NotSkew",
            Error::NotTangent(_) => "NotTangent",
            Error::OutOfDomain { .. } => "OutOfDomain",
            Error::AntipodalPoint => "AntipodalPoint",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::LeftTubeDomain { .. } => "LeftTubeDomain",
            Error::EnergyDrift { .. } => "EnergyDrift",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::SingularBlock(_) => "SingularBlock",
            Error::NotFreeAction => "NotFreeAction",
            Error::NotAnEquilibrium(_) => "NotAnEquilibrium",
            Error::NonDiagonalizableQuadraticPart(_) => "NonDiagonalizableQuadraticPart",
            Error::IllConditionedEigenbasis(_) => "IllConditionedEigenbasis",
            Error::InconsistentJetSystem { .. } => "InconsistentJetSystem",
            Error::InvalidLieAlgebra(_) => "InvalidLieAlgebra",
            Error::NonInvariantHamiltonian(_) => "NonInvariantHamiltonian",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
