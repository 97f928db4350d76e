//! Deformation of sampled sets onto the skeleton of a cubical complex.

mod center;
mod estimate;
mod one_cube;
mod plan;
mod purge;
mod skeleton;

pub use center::{averaged_gamma, select_center, Alignment, CenterBranch, CenterChoice, CenterOptions};
pub use estimate::{image_mass_bound, ImageMassBound};
pub use one_cube::CubeDeformation;
pub use plan::{time_profile, DeformationPlan, HomotopySlice, PlanMap, Stage, StepRecipe};
pub use purge::{purge_unrectifiable, Purge, PurgeOptions, PurgeReport};
pub use skeleton::{
    deform_one_cube, deform_onto_skeleton, push_samples, skeleton_distance, CoverageAction, CoverageRecord, DeformOptions, DeformReport, SetReport,
    SkeletonDeformation,
};
