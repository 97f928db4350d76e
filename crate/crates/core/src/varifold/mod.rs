//! Discrete varifolds, anisotropic functionals, push-forward, slicing and
//! density ratios.

mod density;
mod discrete;
mod ellipticity;
mod functional;
mod integrand;
mod slice;

pub use density::{density_ratio, DensityPoint, RELIABLE_SPACINGS};
pub use discrete::{grid_patch, isotropic_from, sunflower_disc, DiscreteVarifold, Sample, Tangent};
pub use ellipticity::{ellipticity_probe, CandidateGap, Competitor, EllipticityReport, ProbeOptions};
pub use functional::{phi_f, psi_f, pullback_integrand, pushforward, HaarOptions, PhiValue, PsiValue};
pub use integrand::{sup_over_planes, Integrand, IntegrandSpec, MixTerm, SupOptions, TableSpec};
pub use slice::{
    blowup_map, blowup_residual, blowup_test_functions, linear_coordinate, radial_distance, slice, slice_study, SliceResult, SliceStudyRow, TestFn,
    COAREA_TOL,
};
