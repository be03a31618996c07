use thiserror::Error;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("invalid mesh request: {0}")]
    InvalidMesh(String),
    #[error("level-set value at vertex {vertex} is not finite")]
    NonFiniteLevelSet { vertex: usize },
    #[error("no quadrature rule of degree {degree} on the {dim}-simplex")]
    UnsupportedQuadrature { dim: usize, degree: usize },
    #[error("discrete interface is empty: no tetrahedron is cut")]
    EmptyInterface,
    #[error("invalid problem parameters: {0}")]
    InvalidParams(String),
    #[error("non-finite matrix or load entry assembled in tetrahedron {tet}")]
    NonFiniteEntry { tet: usize },
    #[error("subdomain {tag} has zero volume")]
    EmptySubdomain { tag: u8 },
    #[error("convergence order needs positive errors, got {coarse} and {fine}")]
    NonPositiveError { coarse: f64, fine: f64 },
    #[error("GCR breakdown at iteration {iteration}: search direction has zero norm")]
    Breakdown { iteration: usize },
    #[error("solver did not converge: {iterations} iterations, relative residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = FemError> = std::result::Result<T, E>;
