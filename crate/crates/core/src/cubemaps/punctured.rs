//! The punctured-cube projection `φ_{a,ε} = l ∘ q_a`, mapping `Q ∖ {a}`
//! onto `∂Q`: a collared central projection from `a` onto a smooth convex
//! body hugging `Q`, followed by the collared retraction onto `Q`.

use std::sync::Arc;

use crate::cubemaps::convex::{collared_projection_from, CollaredRayProjection, ConvexBody, Superellipsoid};
use crate::cubemaps::face::dist_to_cube_boundary;
use crate::cubemaps::retract::{retraction_with_collar, CollarRetraction};
use crate::error::{Error, Result};
use crate::linalg::{operator_norm, Matrix, Vector};
use crate::map::{check_point, Smoothness, SmoothMap, Support};

#[derive(Clone)]
pub struct PuncturedCubeProjection {
    center: Vector,
    eps: f64,
    project: CollaredRayProjection,
    retract: CollarRetraction,
}

pub fn punctured_cube_projection(a: &Vector, eps: f64) -> Result<PuncturedCubeProjection> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::param("eps", eps, "must lie in (0, 1/4)"));
    }
    if a.iter().any(|v| !(v.abs() < 1.0)) {
        return Err(Error::Domain {
            point: a.iter().cloned().collect(),
            reason: "puncture must lie in the open cube",
        });
    }
    let n = a.len();
    let retract = retraction_with_collar(n, 0.5 * eps)?;
    let iota = 0.99 * retract.eps() / (16.0 * (n as f64).sqrt());
    let body: Arc<dyn ConvexBody> = Arc::new(Superellipsoid::around_unit_cube(n, iota)?);
    let project = collared_projection_from(body, a.clone(), 0.99 * iota / 4.0)?;
    Ok(PuncturedCubeProjection {
        center: a.clone(),
        eps,
        project,
        retract,
    })
}

impl PuncturedCubeProjection {
    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `sup 2|x − a|·‖Dφ(x)‖·dist(a, ∂Q)` over probes in `Int Q ∖ {a}`.
    pub fn gamma_estimate(&self, probes: &[Vector]) -> f64 {
        let da = dist_to_cube_boundary(&self.center);
        probes
            .iter()
            .filter(|x| x.amax() < 1.0)
            .filter_map(|x| self.jacobian(x).ok().map(|d| 2.0 * (x - &self.center).norm() * operator_norm(&d) * da))
            .fold(0.0, f64::max)
    }
}

impl SmoothMap for PuncturedCubeProjection {
    fn domain_dim(&self) -> usize {
        self.center.len()
    }

    fn jet(&self, x: &Vector) -> Result<(Vector, Matrix)> {
        check_point(self, x)?;
        if x == &self.center {
            return Err(Error::Domain {
                point: x.iter().cloned().collect(),
                reason: "the puncture has no image",
            });
        }
        let (z, dz) = self.project.jet(x)?;
        let (w, dw) = self.retract.jet(&z)?;
        Ok((w, dw * dz))
    }

    fn support(&self) -> Support {
        Support::cube(&vec![0.0; self.center.len()], 1.0 + self.eps)
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Finite(1)
    }
}
