//! Specialty of linear systems of curves on P¹×P¹ with multiple base points,
//! and combinatorial non-specialty certificates built from unique tilings of
//! lattice diagrams.

pub mod classify;
pub mod diagram;
pub mod interp;
pub mod linalg;
pub mod render;
pub mod rng;
pub mod stability;
pub mod tiler;
pub mod tiling;

pub use classify::{predicted_special, ClassificationCase, SpecialFamily};
pub use diagram::{Axis, Diagram, DiagramError, Isometry, Point, Rational};
pub use interp::{EvalConfig, SpecialtyVerdict, SystemSpec, VerdictKind};
pub use linalg::{MatrixModP, PrimeField};
pub use stability::{is_stable, StabilityReport, TileCatalog};
pub use tiler::{Certificate, Mode, SearchOutcome, TilingProblem};
pub use tiling::{CongruenceMap, Tiling, TilingError};
