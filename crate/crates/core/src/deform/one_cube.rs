//! The deformation of a single cube `K`: the punctured projection of `K`
//! onto its relative boundary, computed in `K`'s own coordinates, kept the
//! identity near the puncture and cut off in the normal directions.

use crate::cubemaps::{punctured_cube_projection, PuncturedCubeProjection};
use crate::cubical::DyadicCube;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::map::{check_point, Smoothness, SmoothMap, Support};
use crate::profile::quintic_step;

/// Largest normalized collar handed to the punctured projection.
const MAX_UNIT_EPS: f64 = 0.24;

/// `α` with `α = 0` on `(−∞, 1/4]` and `α = 1` on `[7/8, ∞)`.
fn cutoff(t: f64) -> (f64, f64) {
    const LO: f64 = 0.25;
    const WIDTH: f64 = 0.625;
    let (v, d) = quintic_step((t - LO) / WIDTH);
    (v, d / WIDTH)
}

#[derive(Clone)]
pub struct CubeDeformation {
    cube: DyadicCube,
    center: Vector,
    eps: f64,
    iota: f64,
    blend: f64,
    origin: Vector,
    half: f64,
    normals: Vec<usize>,
    /// Puncture in the tangent coordinates of `K`, relative to its centre.
    puncture: Vector,
    projection: PuncturedCubeProjection,
}

impl CubeDeformation {
    /// `center` must lie in the relative interior of `K`; `blend` is the
    /// radius `d` of the ball around it on which the projection is switched
    /// off.
    pub fn new(cube: DyadicCube, center: Vector, eps: f64, blend: f64) -> Result<Self> {
        let n = cube.ambient_dim();
        let k = cube.dim();
        Error::check_dim("deformation center", n, center.len())?;
        if k == 0 {
            return Err(Error::param("cube", cube.id(), "cannot deform a vertex"));
        }
        let side = cube.side();
        if !(eps > 0.0 && eps < 0.25 * side) {
            return Err(Error::param("eps", eps, "must lie in (0, side/4)"));
        }
        if !(blend > 0.0 && blend.is_finite()) {
            return Err(Error::param("blend", blend, "must be positive"));
        }
        let origin = cube.center();
        let half = 0.5 * side;
        let axes = cube.axes().to_vec();
        let normals: Vec<usize> = (0..n).filter(|j| !cube.has_axis(*j)).collect();
        if normals.iter().any(|&j| (center[j] - origin[j]).abs() > 1e-12 * side) {
            return Err(Error::Domain {
                point: center.iter().cloned().collect(),
                reason: "center is off the cube's plane",
            });
        }
        let puncture = Vector::from_iterator(k, axes.iter().map(|&j| center[j] - origin[j]));
        if puncture.amax() >= half {
            return Err(Error::Domain {
                point: center.iter().cloned().collect(),
                reason: "center must lie in the relative interior of the cube",
            });
        }
        let iota = eps / std::f64::consts::SQRT_2;
        let unit_eps = (2.0 * iota / side).min(MAX_UNIT_EPS);
        let projection = punctured_cube_projection(&(&puncture / half), unit_eps)?;
        Ok(Self {
            cube,
            center,
            eps,
            iota,
            blend,
            origin,
            half,
            normals,
            puncture,
            projection,
        })
    }

    pub fn cube(&self) -> &DyadicCube {
        &self.cube
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn blend(&self) -> f64 {
        self.blend
    }

    /// Whether `x` lies in the closed box `K + [−ε, ε]^n` outside of which
    /// the map is the identity.
    pub fn may_move(&self, x: &Vector) -> bool {
        let lim = self.half + self.eps;
        x.iter().zip(self.origin.iter()).all(|(v, c)| (v - c).abs() <= lim)
    }

    /// `ψ` on the tangent coordinates `p` (relative to the centre of `K`).
    fn tangent_part(&self, p: &Vector) -> Result<(Vector, Matrix)> {
        let k = p.len();
        let rel = p - &self.puncture;
        let r = rel.norm();
        if r <= 0.25 * self.blend {
            return Ok((p.clone(), Matrix::identity(k, k)));
        }
        let (w, dw) = self.projection.jet(&(p / self.half))?;
        let psi_a = w * self.half;
        if r >= self.blend {
            return Ok((psi_a, dw));
        }
        let (b, db) = cutoff(r / self.blend);
        let grad = &rel * (db / (r * self.blend));
        let value = &psi_a * b + p * (1.0 - b);
        let jac = &dw * b + Matrix::identity(k, k) * (1.0 - b) + (&psi_a - p) * grad.transpose();
        Ok((value, jac))
    }
}

impl SmoothMap for CubeDeformation {
    fn domain_dim(&self) -> usize {
        self.cube.ambient_dim()
    }

    fn jet(&self, x: &Vector) -> Result<(Vector, Matrix)> {
        check_point(self, x)?;
        let n = x.len();
        if !self.may_move(x) {
            return Ok((x.clone(), Matrix::identity(n, n)));
        }
        let axes = self.cube.axes();
        let k = axes.len();
        let q = Vector::from_iterator(self.normals.len(), self.normals.iter().map(|&j| x[j] - self.origin[j]));
        let qn = q.norm();
        if qn >= 0.875 * self.iota {
            return Ok((x.clone(), Matrix::identity(n, n)));
        }
        let p = Vector::from_iterator(k, axes.iter().map(|&j| x[j] - self.origin[j]));
        let (psi, dpsi) = self.tangent_part(&p)?;
        let (g, dg) = cutoff(qn / self.iota);
        let moved = &p + (&psi - &p) * (1.0 - g);
        let mut y = x.clone();
        let mut d = Matrix::identity(n, n);
        for (i, &a) in axes.iter().enumerate() {
            y[a] = self.origin[a] + moved[i];
            for (j, &b) in axes.iter().enumerate() {
                let id = if i == j { 1.0 } else { 0.0 };
                d[(a, b)] = (1.0 - g) * dpsi[(i, j)] + g * id;
            }
            if qn > 0.0 {
                for (l, &c) in self.normals.iter().enumerate() {
                    d[(a, c)] = (p[i] - psi[i]) * dg * q[l] / (qn * self.iota);
                }
            }
        }
        Ok((y, d))
    }

    fn support(&self) -> Support {
        Support::cube(self.origin.as_slice(), self.half + self.eps)
    }

    fn smoothness(&self) -> Smoothness {
        self.projection.smoothness().min(Smoothness::Finite(2))
    }
}
