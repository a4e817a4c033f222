use thiserror::Error;

use crate::mesh::MeshDiagnostics;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("triangle {triangle} references a vertex outside 0..{vertex_count}")]
    IndexOutOfRange { triangle: usize, vertex_count: usize },
    #[error("triangle {triangle} repeats a vertex index")]
    RepeatedIndex { triangle: usize },
    #[error("mesh failed validation: {0:?}")]
    Invalid(Box<MeshDiagnostics>),
    #[error("mesh has {components} connected components, expected 1")]
    Disconnected { components: usize },
    #[error("Euler characteristic {euler_char} with {boundary_components} boundary loops gives no valid genus")]
    InvalidGenus { euler_char: i64, boundary_components: usize },
    #[error("boundary is pinched at vertex {vertex}")]
    PinchedBoundary { vertex: usize, triangle: usize },
    #[error("boundary loop does not close at vertex {vertex}")]
    OpenBoundary { vertex: usize },
    #[error("projection failed for new vertex {vertex} on edge {edge:?}")]
    Projection { vertex: usize, edge: [usize; 2] },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("resolution {got} is below the minimum {min}")]
    Resolution { got: usize, min: usize },
    #[error("synthetic surfaces need at least one boundary component")]
    NoBoundary,
    #[error("chart point ({0}, {1}) lies outside the chart domain")]
    OutsideChart(f64, f64),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("vertex {vertex} has fewer than 3 independent one-ring directions")]
    IllConditionedStar { vertex: usize },
    #[error("triangle {triangle} is degenerate")]
    DegenerateTriangle { triangle: usize },
    #[error("field has {got} entries but the mesh has {expected} vertices")]
    DimensionMismatch { got: usize, expected: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("requested {requested} eigenpairs but the problem has {dofs} degrees of freedom")]
    TooManyEigenpairs { requested: usize, dofs: usize },
    #[error("mass matrix is not positive definite")]
    IndefiniteMass,
    #[error("factorization hit a zero pivot at row {row}")]
    ZeroPivot { row: usize },
    #[error("no shift below the spectrum found after {attempts} attempts")]
    NoShift { attempts: usize },
    #[error("eigensolver did not converge; worst relative residual {worst_residual:.3e}")]
    NotConverged { worst_residual: f64 },
    #[error("dense eigendecomposition failed")]
    Dense,
}

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("eigenvalue {value:.3e} lies within the kernel tolerance {tol:.3e}; refine the mesh")]
    AmbiguousZero { value: f64, tol: f64 },
    #[error("kernel gap ratio {ratio:.2} is below 10; refine the mesh")]
    AmbiguousKernel { ratio: f64 },
    #[error("test-form constraint system has no numerical null space (smallest singular value {sigma_min:.3e})")]
    TrivialNullSpace { sigma_min: f64 },
    #[error("need {needed} eigenvectors, got {got}")]
    NotEnoughEigenpairs { needed: usize, got: usize },
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("check {0} needs an analytic surface")]
    MissingAnalytic(&'static str),
    #[error("check {check} needs at least {needed} eigenpairs")]
    InsufficientEigenpairs { check: &'static str, needed: usize },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PipelineError {
    pub fn stage<E: std::error::Error + Send + Sync + 'static>(stage: &'static str) -> impl FnOnce(E) -> Self {
        move |e| PipelineError::Stage { stage, source: Box::new(e) }
    }
}
