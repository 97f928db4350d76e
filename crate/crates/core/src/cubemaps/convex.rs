//! Convex bodies containing the origin and central projections onto their
//! boundaries.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::map::{check_point, Smoothness, SmoothMap, Support};
use crate::profile::RadialBlend;

/// A bounded open convex set with `0` in its interior, described by its
/// gauge (Minkowski functional) `g`, positively homogeneous of degree one.
pub trait ConvexBody: Send + Sync {
    fn dim(&self) -> usize;

    fn gauge(&self, x: &Vector) -> f64;

    /// Gradient of the gauge at `x ≠ 0`.
    fn gauge_grad(&self, x: &Vector) -> Vector;

    /// Outward unit normal at a boundary point.
    fn normal(&self, y: &Vector) -> Vector {
        self.gauge_grad(y).normalize()
    }

    fn inradius(&self) -> f64;

    fn circumradius(&self) -> f64;

    fn contains(&self, x: &Vector) -> bool {
        self.gauge(x) < 1.0
    }
}

/// Ball of the given radius centred at the origin.
#[derive(Clone, Copy, Debug)]
pub struct Ball {
    pub n: usize,
    pub radius: f64,
}

impl ConvexBody for Ball {
    fn dim(&self) -> usize {
        self.n
    }

    fn gauge(&self, x: &Vector) -> f64 {
        x.norm() / self.radius
    }

    fn gauge_grad(&self, x: &Vector) -> Vector {
        x / (x.norm() * self.radius)
    }

    fn inradius(&self) -> f64 {
        self.radius
    }

    fn circumradius(&self) -> f64 {
        self.radius
    }
}

/// Axis-aligned ellipsoid `Σ (x_i / a_i)² < 1`.
#[derive(Clone, Debug)]
pub struct Ellipsoid {
    semi_axes: Vec<f64>,
}

impl Ellipsoid {
    pub fn new(semi_axes: Vec<f64>) -> Result<Self> {
        if semi_axes.is_empty() || semi_axes.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::param("semi_axes", format!("{semi_axes:?}"), "must be positive"));
        }
        Ok(Self { semi_axes })
    }
}

impl ConvexBody for Ellipsoid {
    fn dim(&self) -> usize {
        self.semi_axes.len()
    }

    fn gauge(&self, x: &Vector) -> f64 {
        x.iter().zip(&self.semi_axes).map(|(v, a)| (v / a).powi(2)).sum::<f64>().sqrt()
    }

    fn gauge_grad(&self, x: &Vector) -> Vector {
        let g = self.gauge(x);
        Vector::from_iterator(x.len(), x.iter().zip(&self.semi_axes).map(|(v, a)| v / (a * a * g)))
    }

    fn inradius(&self) -> f64 {
        self.semi_axes.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    fn circumradius(&self) -> f64 {
        self.semi_axes.iter().cloned().fold(0.0, f64::max)
    }
}

/// Superellipsoid `‖x‖_p < r` for an exponent `p ≥ 2`. For large `p` it
/// approximates the cube of half side `r` while keeping a smooth boundary.
#[derive(Clone, Copy, Debug)]
pub struct Superellipsoid {
    n: usize,
    radius: f64,
    exponent: f64,
}

impl Superellipsoid {
    pub fn new(n: usize, radius: f64, exponent: f64) -> Result<Self> {
        if !(exponent >= 2.0) {
            return Err(Error::param("exponent", exponent, "must be at least 2"));
        }
        if !(radius > 0.0) {
            return Err(Error::param("radius", radius, "must be positive"));
        }
        Ok(Self { n, radius, exponent })
    }

    /// Smooth convex body `V` with `Q + B(0, ι/4) ⊆ V` and every boundary
    /// point within `ι` of `Q = [−1, 1]^n`, for `n ≤ 16`.
    pub fn around_unit_cube(n: usize, iota: f64) -> Result<Self> {
        if n > 16 {
            return Err(Error::param("n", n, "cube collars are built for n ≤ 16"));
        }
        let exponent = (4.0 * (n as f64).ln() / iota).ceil().max(2.0);
        let radius = (n as f64).powf(1.0 / exponent) * (1.0 + 0.26 * iota);
        Self::new(n, radius, exponent)
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn p_norm(&self, x: &Vector) -> f64 {
        let top = x.amax();
        if top == 0.0 {
            return 0.0;
        }
        let s: f64 = x.iter().map(|v| (v.abs() / top).powf(self.exponent)).sum();
        top * s.powf(1.0 / self.exponent)
    }
}

impl ConvexBody for Superellipsoid {
    fn dim(&self) -> usize {
        self.n
    }

    fn gauge(&self, x: &Vector) -> f64 {
        self.p_norm(x) / self.radius
    }

    fn gauge_grad(&self, x: &Vector) -> Vector {
        let norm = self.p_norm(x);
        x.map(|v| v.signum() * (v.abs() / norm).powf(self.exponent - 1.0) / self.radius)
    }

    fn inradius(&self) -> f64 {
        self.radius
    }

    fn circumradius(&self) -> f64 {
        self.radius * (self.n as f64).powf(0.5 - 1.0 / self.exponent)
    }
}

/// Full evaluation of the central projection at a point.
#[derive(Clone, Debug)]
pub struct CentralJet {
    pub p: Vector,
    pub t: f64,
    pub dp: Matrix,
    pub dt: Vector,
}

/// The central projection `p(x) = t(x)·x` onto `∂V`, `t(x) = 1 / gauge(x)`.
#[derive(Clone)]
pub struct CentralProjection {
    body: Arc<dyn ConvexBody>,
}

/// The scale factor `t` of a central projection as a map to `R`.
#[derive(Clone)]
pub struct CentralScale {
    body: Arc<dyn ConvexBody>,
}

pub fn central_projection(body: Arc<dyn ConvexBody>) -> (CentralProjection, CentralScale) {
    (CentralProjection { body: body.clone() }, CentralScale { body })
}

fn central_jet(body: &dyn ConvexBody, x: &Vector) -> Result<CentralJet> {
    let g = body.gauge(x);
    if !(g > 0.0) {
        return Err(Error::Domain {
            point: x.iter().cloned().collect(),
            reason: "central projection is undefined at the origin",
        });
    }
    let t = 1.0 / g;
    let dt = body.gauge_grad(x) * (-t * t);
    let p = x * t;
    let n = x.len();
    let dp = Matrix::identity(n, n) * t + x * dt.transpose();
    Ok(CentralJet { p, t, dp, dt })
}

impl CentralProjection {
    pub fn body(&self) -> &Arc<dyn ConvexBody> {
        &self.body
    }

    pub fn evaluate(&self, x: &Vector) -> Result<CentralJet> {
        central_jet(self.body.as_ref(), x)
    }

    /// `(|p(x)| / |x|)(1 + 1 / (ν(p(x))·x/|x|))`.
    pub fn derivative_bound(&self, x: &Vector) -> Result<f64> {
        let j = self.evaluate(x)?;
        let nu = self.body.normal(&j.p);
        let xn = x.norm();
        Ok(j.p.norm() / xn * (1.0 + 1.0 / (nu.dot(x) / xn)))
    }
}

impl SmoothMap for CentralProjection {
    fn domain_dim(&self) -> usize {
        self.body.dim()
    }

    fn jet(&self, x: &Vector) -> Result<(Vector, Matrix)> {
        check_point(self, x)?;
        let j = self.evaluate(x)?;
        Ok((j.p, j.dp))
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Infinite
    }
}

impl SmoothMap for CentralScale {
    fn domain_dim(&self) -> usize {
        self.body.dim()
    }

    fn codomain_dim(&self) -> usize {
        1
    }

    fn jet(&self, x: &Vector) -> Result<(Vector, Matrix)> {
        check_point(self, x)?;
        let j = central_jet(self.body.as_ref(), x)?;
        Ok((Vector::from_element(1, j.t), Matrix::from_row_slice(1, j.dt.len(), j.dt.as_slice())))
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Infinite
    }
}

/// `q(x) = β(t(x))·x`: the identity outside `V`, the central projection at
/// points of `V` at least `eps` from `∂V`.
#[derive(Clone)]
pub struct CollaredProjection {
    body: Arc<dyn ConvexBody>,
    blend: RadialBlend,
    eps: f64,
}

pub fn collared_projection(body: Arc<dyn ConvexBody>, eps: f64) -> Result<CollaredProjection> {
    let reach_radius = body.circumradius();
    if !(eps > 0.0 && eps < body.inradius()) {
        return Err(Error::param("eps", eps, "must lie in (0, inradius)"));
    }
    let reach = 1.0 / (1.0 - eps / reach_radius);
    Ok(CollaredProjection {
        body,
        blend: RadialBlend::new(reach),
        eps,
    })
}

impl CollaredProjection {
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn body(&self) -> &Arc<dyn ConvexBody> {
        &self.body
    }

    /// `Δ⁻¹ = inf ν(y)·y/|y|` over boundary probes along the given directions.
    pub fn obliqueness(&self, directions: &[Vector]) -> f64 {
        directions
            .iter()
            .filter(|d| d.norm() > 0.0)
            .map(|d| {
                let y = d / self.body.gauge(d);
                self.body.normal(&y).dot(&y) / y.norm()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

impl SmoothMap for CollaredProjection {
    fn domain_dim(&self) -> usize {
        self.body.dim()
    }

    fn jet(&self, x: &Vector) -> Result<(Vector, Matrix)> {
        check_point(self, x)?;
        let j = central_jet(self.body.as_ref(), x)?;
        let (beta, dbeta) = self.blend.eval(j.t);
        let n = x.len();
        let jac = Matrix::identity(n, n) * beta + x * (j.dt.transpose() * dbeta);
        Ok((x * beta, jac))
    }

    fn support(&self) -> Support {
        let r = self.body.circumradius();
        Support::Ball {
            center: vec![0.0; self.body.dim()],
            radius: r,
        }
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Finite(2)
    }
}

/// Collared central projection with respect to an interior point `a`:
/// `q(x) = a + β(τ(x))(x − a)` where `a + τ(x)(x − a) ∈ ∂V`.
#[derive(Clone)]
pub struct CollaredRayProjection {
    body: Arc<dyn ConvexBody>,
    center: Vector,
    blend: RadialBlend,
}

pub fn collared_projection_from(body: Arc<dyn ConvexBody>, center: Vector, eps: f64) -> Result<CollaredRayProjection> {
    Error::check_dim("projection center", body.dim(), center.len())?;
    if !body.contains(&center) {
        return Err(Error::Domain {
            point: center.iter().cloned().collect(),
            reason: "projection center must lie inside the body",
        });
    }
    let reach_radius = center.norm() + body.circumradius();
    if !(eps > 0.0 && eps < reach_radius) {
        return Err(Error::param("eps", eps, "must lie in (0, circumradius about the center)"));
    }
    Ok(CollaredRayProjection {
        body,
        center,
        blend: RadialBlend::new(1.0 / (1.0 - eps / reach_radius)),
    })
}

impl CollaredRayProjection {
    pub fn center(&self) -> &Vector {
        &self.center
    }

    /// Ray parameter `τ` with `a + τz ∈ ∂V` for `z ≠ 0`, by Newton's method
    /// from an upper bracket (the restriction of the gauge to the ray is
    /// convex and increasing past the root).
    fn ray_exit(&self, z: &Vector) -> f64 {
        let body = self.body.as_ref();
        let gz = body.gauge(z);
        let mut tau = (1.0 + body.gauge(&-&self.center)) / gz;
        for _ in 0..200 {
            let y = &self.center + z * tau;
            let h = body.gauge(&y) - 1.0;
            let slope = body.gauge_grad(&y).dot(z);
            if !(slope > 0.0) {
                break;
            }
            let step = h / slope;
            tau -= step;
            if step.abs() <= 4.0 * f64::EPSILON * tau {
                break;
            }
        }
        tau
    }
}

impl SmoothMap for CollaredRayProjection {
    fn domain_dim(&self) -> usize {
        self.body.dim()
    }

    fn jet(&self, x: &Vector) -> Result<(Vector, Matrix)> {
        check_point(self, x)?;
        let z = x - &self.center;
        if z.iter().all(|v| *v == 0.0) {
            return Err(Error::Domain {
                point: x.iter().cloned().collect(),
                reason: "central projection is undefined at its center",
            });
        }
        let n = x.len();
        let tau = self.ray_exit(&z);
        let grad = self.body.gauge_grad(&(&self.center + &z * tau));
        let dtau = &grad * (-tau / grad.dot(&z));
        let (beta, dbeta) = self.blend.eval(tau);
        if tau <= 1.0 {
            return Ok((x.clone(), Matrix::identity(n, n)));
        }
        let value = &self.center + &z * beta;
        let jac = Matrix::identity(n, n) * beta + &z * (dtau.transpose() * dbeta);
        Ok((value, jac))
    }

    fn support(&self) -> Support {
        Support::Ball {
            center: vec![0.0; self.body.dim()],
            radius: self.body.circumradius(),
        }
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Finite(2)
    }
}
