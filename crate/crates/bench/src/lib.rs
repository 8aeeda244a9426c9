//! Inputs shared by the benchmarks.

use tilecert_core::{Diagram, SystemSpec, TilingProblem};

/// `L_(d,e)(3^r)` on the full bidegree rectangle.
pub fn triple_point_system(d: u16, e: u16, r: usize) -> SystemSpec {
    SystemSpec::bidegree(d, e, vec![3; r])
}

/// Exact tiling of a `w × h` rectangle by `w·h/6` triple-point tiles.
pub fn rectangle_problem(w: u16, h: u16) -> TilingProblem {
    let n = usize::from(w) * usize::from(h) / 6;
    TilingProblem::auto(Diagram::rectangle(w, h), vec![3; n]).expect("default catalogs")
}
