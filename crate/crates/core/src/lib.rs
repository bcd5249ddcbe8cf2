//! Moving-frame toolkit for elliptic surfaces: higher fundamental forms,
//! curvature ellipses, associated families, polar surfaces and rank-two
//! submanifolds built from them.
//!
//! Everything is computed from truncated Taylor jets of a chart sampled on
//! a rectangular grid.

pub mod ambient;
pub mod analysis;
pub mod assoc;
pub mod compat;
pub mod elliptic;
pub mod error;
pub mod flag;
pub mod gallery;
pub mod jet;
pub mod linalg;
pub mod polar;
pub mod ranktwo;

pub use ambient::{AmbientKind, AmbientSpace, Chart, ChartSource, GridParams};
pub use analysis::{Analysis, AnalysisParams};
pub use error::{GeomError, Result};
pub use gallery::SurfaceSpec;
