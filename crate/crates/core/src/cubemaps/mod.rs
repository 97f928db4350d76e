//! Smooth maps built on the cube `Q = [−1, 1]^n`.

pub mod convex;
pub mod face;
pub mod punctured;
pub mod retract;
pub mod unrect;

pub use convex::{central_projection, collared_projection, Ball, CollaredProjection, ConvexBody, Ellipsoid, Superellipsoid};
pub use face::{dist_to_cube, dist_to_cube_boundary, nearest_point_cube, FaceIndex};
pub use punctured::{punctured_cube_projection, PuncturedCubeProjection};
pub use retract::{retraction_with_collar, smooth_retraction, CollarRetraction, SmoothRetraction};
pub use unrect::{unrect_perturbation, UnrectOptions, UnrectPerturbation, UnrectReport};
