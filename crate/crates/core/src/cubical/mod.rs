//! Dyadic cubes, admissible families, Whitney families and cubical complexes.

pub mod complex;
pub mod cube;
pub mod family;

pub use complex::{cubical_complex, obj_export, CubicalComplex};
pub use cube::{plan_order, DyadicCube};
pub use family::{whitney_family, CubeFamily, Truncation, Violation, WhitneyOptions};
