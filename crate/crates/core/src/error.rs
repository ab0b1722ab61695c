use thiserror::Error;

pub type Result<T, E = WgError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum WgError {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh file line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("boundary interface {interface} changes inflow/outflow sign; split it at the sign change")]
    MixedBoundaryInterface { interface: usize },

    #[error("interface {interface} is characteristic on one side only")]
    AsymmetricClassification { interface: usize },

    #[error("singular local system on element {element}")]
    SingularLocalSystem { element: usize },

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("residual {residual:.3e} exceeds bound {bound:.3e}")]
    ResidualTooLarge { residual: f64, bound: f64 },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<WgError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl WgError {
    /// True for failures raised by the linear algebra rather than by input validation.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            WgError::SingularLocalSystem { .. }
            | WgError::SingularMatrix(_)
            | WgError::ResidualTooLarge { .. } => true,
            WgError::Context { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        WgError::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
