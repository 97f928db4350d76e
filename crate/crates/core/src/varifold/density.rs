use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::varifold::discrete::DiscreteVarifold;

/// Radii below this multiple of the sample spacing are flagged.
pub const RELIABLE_SPACINGS: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub radius: f64,
    /// `‖V‖B(x, r) / r^m` over the closed ball.
    pub ratio: f64,
    pub reliable: bool,
}

pub fn density_ratio(v: &DiscreteVarifold, x: &Vector, radii: &[f64]) -> Result<Vec<DensityPoint>> {
    Error::check_dim("density center", v.ambient_dim(), x.len())?;
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::param("radius", r, "radii must be positive"));
    }
    let spacing = v.spacing();
    let mut dist: Vec<(f64, f64)> = v.samples().iter().map(|s| ((&s.point - x).norm(), s.weight)).collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut prefix = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for (_, w) in &dist {
        acc += w;
        prefix.push(acc);
    }
    let m = v.dim() as i32;
    Ok(radii
        .iter()
        .map(|&r| {
            let k = dist.partition_point(|(d, _)| *d <= r);
            let mass = if k == 0 { 0.0 } else { prefix[k - 1] };
            DensityPoint {
                radius: r,
                ratio: mass / r.powi(m),
                reliable: r >= RELIABLE_SPACINGS * spacing,
            }
        })
        .collect())
}
