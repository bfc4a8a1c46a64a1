use thiserror::Error;

/// Every failure mode of the library. The CLI maps these to exit code 1.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("degenerate facet {index} (measure {measure:e})")]
    DegenerateFacet { index: usize, measure: f64 },
    #[error("self-intersection between facets {0} and {1}")]
    SelfIntersection(usize, usize),
    #[error("surface is not orientable")]
    NonOrientable,
    #[error("edge ({0}, {1}) has more than two incident triangles")]
    NonManifoldEdge(usize, usize),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("point is not on the surface (distance {0:e})")]
    PointNotOnSurface(f64),
    #[error("point lies within {0:e} of the boundary")]
    BoundaryPoint(f64),
    #[error("Monte Carlo did not converge: {0}")]
    NonConvergent(String),
    #[error("graph function is not smooth enough: Hessian bound {found:e} > {limit:e}")]
    NotSmooth { found: f64, limit: f64 },
    #[error("surface is not contained in the domain")]
    NotContained,
    #[error("step rejected: max displacement {displacement:e} exceeds {limit:e}")]
    StepRejected { displacement: f64, limit: f64 },
    #[error("invalid flow state: {0}")]
    InvalidState(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
