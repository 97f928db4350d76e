use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::operator_norm;
use crate::map::SmoothMap;
use crate::measure::{box_count, CoveringEstimate};
use crate::region::Region;
use crate::varifold::DiscreteVarifold;

/// Both sides of `H^m(g[S ∩ R]) ≤ ∫_{S ∩ R} ‖Dg‖^m dH^m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageMassBound {
    /// Covering estimate of the image of the samples in the region.
    pub lhs: CoveringEstimate,
    /// `Σ w·‖Dg‖^m` over the samples in the region.
    pub rhs: f64,
    /// `Σ w` over the same samples.
    pub mass: f64,
}

impl ImageMassBound {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs.value <= self.rhs * (1.0 + slack)
    }
}

pub fn image_mass_bound(g: &dyn SmoothMap, v: &DiscreteVarifold, region: &Region, resolution: f64) -> Result<ImageMassBound> {
    let m = v.dim();
    let mut images = Vec::new();
    let mut rhs = 0.0;
    let mut mass = 0.0;
    for s in v.samples() {
        if !region.contains(s.point.as_slice()) {
            continue;
        }
        let (y, d) = g.jet(&s.point)?;
        images.push(y);
        rhs += s.weight * operator_norm(&d).powi(m as i32);
        mass += s.weight;
    }
    Ok(ImageMassBound {
        lhs: box_count(&images, resolution, m),
        rhs,
        mass,
    })
}
