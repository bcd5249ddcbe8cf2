use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("immersion degenerates at node {node}")]
    RankDeficient { node: usize },
    #[error("unit-norm constraint broken at node {node} (|x|-1 = {residual:.3e})")]
    SphereViolation { node: usize, residual: f64 },
    #[error("flag dimensions jump at node {node}: expected {expected:?}, found {found:?}")]
    NotRegular { node: usize, expected: Vec<usize>, found: Vec<usize> },
    #[error("jet order {order} too low, need at least {needed}")]
    JetOrderTooLow { order: usize, needed: usize },
    #[error("alpha^{order} leaves its bundle by {residual:.3e}")]
    ProjectionDrift { order: usize, residual: f64 },
    #[error("no almost complex structure solves the ellipticity condition at node {node}")]
    NotElliptic { node: usize },
    #[error("order {order} out of range (max {max})")]
    OrderOutOfRange { order: usize, max: usize },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("ellipse of order {order} is not a circle (defect {defect:.3e})")]
    NotCircular { order: usize, defect: f64 },
    #[error("substantial dimension {dim} too small for this family")]
    AmbientTooSmall { dim: usize },
    #[error("cell holonomy {value:.3e} exceeds bound {bound:.3e} at cell {cell}")]
    HolonomyTooLarge { cell: usize, value: f64, bound: f64 },
    #[error("surface is not minimal (order-0 defect {defect:.3e})")]
    NotMinimal { defect: f64 },
    #[error("flag dimensions differ: {left:?} vs {right:?}")]
    FlagMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("charts live on different grids or ambient spaces")]
    GridMismatch,
    #[error("polar branch requires {expected} substantial dimension")]
    BranchMismatch { expected: &'static str },
    #[error("even-case polar integration residual {residual:.3e} exceeds {tol:.3e}")]
    IntegrationFailed { residual: f64, tol: f64 },
    #[error("cross-section solve residual {residual:.3e} exceeds {tol:.3e}")]
    SolveResidualTooLarge { residual: f64, tol: f64 },
    #[error("no regular sample in the rank-two chart")]
    AllSingular,
    #[error("holomorphic components are linearly dependent")]
    NotSubstantial,
    #[error("weights have squared norm {sum}, expected 1")]
    NotUnitNorm { sum: f64 },
    #[error("angles must be strictly increasing in [0, pi)")]
    AnglesNotSorted,
    #[error("invalid surface spec: {0}")]
    InvalidSpec(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl GeomError {
    /// Variant name, used to label failed gates in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            GeomError::RankDeficient { .. } => "RankDeficient",
            GeomError::SphereViolation { .. } => "SphereViolation",
            GeomError::NotRegular { .. } => "NotRegular",
            GeomError::JetOrderTooLow { .. } => "JetOrderTooLow",
            GeomError::ProjectionDrift { .. } => "ProjectionDrift",
            GeomError::NotElliptic { .. } => "NotElliptic",
            GeomError::OrderOutOfRange { .. } => "OrderOutOfRange",
            GeomError::PreconditionFailed(..) => "PreconditionFailed",
            GeomError::NotCircular { .. } => "NotCircular",
            GeomError::AmbientTooSmall { .. } => "AmbientTooSmall",
            GeomError::HolonomyTooLarge { .. } => "HolonomyTooLarge",
            GeomError::NotMinimal { .. } => "NotMinimal",
            GeomError::FlagMismatch { .. } => "FlagMismatch",
            GeomError::GridMismatch => "GridMismatch",
            GeomError::BranchMismatch { .. } => "BranchMismatch",
            GeomError::IntegrationFailed { .. } => "IntegrationFailed",
            GeomError::SolveResidualTooLarge { .. } => "SolveResidualTooLarge",
            GeomError::AllSingular => "AllSingular",
            GeomError::NotSubstantial => "NotSubstantial",
            GeomError::NotUnitNorm { .. } => "NotUnitNorm",
            GeomError::AnglesNotSorted => "AnglesNotSorted",
            GeomError::InvalidSpec(..) => "InvalidSpec",
            GeomError::Io(..) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, GeomError>;
