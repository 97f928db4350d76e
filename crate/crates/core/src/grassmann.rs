//! Planes in `R^n`, orthogonal projectors, the explicit rotation between two
//! planes, the tilt/measure-excess sandwich and Haar sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// Relative tolerance used when orthonormalizing user frames.
const FRAME_TOL: f64 = 1e-10;
/// Singular values of `SᵀT` at or below this are treated as exact zeros.
const RANK_TOL: f64 = 1e-9;
/// Rotation blocks with `sin α` at or below this are dropped.
const ANGLE_TOL: f64 = 1e-12;

/// An `m`-dimensional linear subspace of `R^n` held as an orthonormal frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlaneRecord", into = "PlaneRecord")]
pub struct Plane {
    frame: Matrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlaneRecord {
    n: usize,
    m: usize,
    frame: Vec<f64>,
}

impl From<Plane> for PlaneRecord {
    fn from(p: Plane) -> Self {
        let (n, m) = p.frame.shape();
        let mut frame = Vec::with_capacity(n * m);
        for i in 0..n {
            for j in 0..m {
                frame.push(p.frame[(i, j)]);
            }
        }
        PlaneRecord { n, m, frame }
    }
}

impl TryFrom<PlaneRecord> for Plane {
    type Error = Error;

    fn try_from(r: PlaneRecord) -> Result<Self> {
        Error::check_dim("plane frame length", r.n * r.m, r.frame.len())?;
        if r.m > r.n {
            return Err(Error::param("m", r.m, "plane dimension exceeds ambient dimension"));
        }
        let frame = Matrix::from_row_slice(r.n, r.m, &r.frame);
        let gram = frame.transpose() * &frame;
        if (gram - Matrix::identity(r.m, r.m)).amax() > 1e-9 {
            return Err(Error::Parse("plane frame is not orthonormal".into()));
        }
        Ok(Plane { frame })
    }
}

impl Plane {
    /// The plane spanned by the columns of `columns`.
    pub fn from_columns(columns: &Matrix) -> Result<Self> {
        let frame = linalg::orthonormalize(columns, FRAME_TOL).ok_or(Error::InvalidParameter {
            name: "columns",
            value: format!("{}x{} matrix", columns.nrows(), columns.ncols()),
            reason: "columns are linearly dependent",
        })?;
        Ok(Plane { frame })
    }

    pub fn from_vectors(n: usize, vectors: &[Vector]) -> Result<Self> {
        for v in vectors {
            Error::check_dim("plane spanning vector", n, v.len())?;
        }
        if vectors.is_empty() {
            return Ok(Plane::zero(n));
        }
        Plane::from_columns(&Matrix::from_columns(vectors))
    }

    /// Span of the listed standard basis vectors.
    pub fn coordinate(n: usize, axes: &[usize]) -> Self {
        let mut frame = Matrix::zeros(n, axes.len());
        for (j, &a) in axes.iter().enumerate() {
            frame[(a, j)] = 1.0;
        }
        Plane { frame }
    }

    pub fn zero(n: usize) -> Self {
        Plane {
            frame: Matrix::zeros(n, 0),
        }
    }

    pub fn full(n: usize) -> Self {
        Plane {
            frame: Matrix::identity(n, n),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &Matrix {
        &self.frame
    }

    /// Orthogonal projector `frame·frameᵀ`.
    pub fn projector(&self) -> Matrix {
        &self.frame * self.frame.transpose()
    }

    pub fn project(&self, x: &Vector) -> Vector {
        &self.frame * (self.frame.transpose() * x)
    }

    pub fn complement(&self) -> Plane {
        Plane {
            frame: linalg::orthogonal_complement(&self.frame),
        }
    }

    /// Image `A[T]` as a plane, or `None` if `A` drops rank on `T`.
    pub fn image(&self, a: &Matrix) -> Option<Plane> {
        if self.dim() == 0 {
            return Some(Plane::zero(a.nrows()));
        }
        let b = a * &self.frame;
        let scale = linalg::operator_norm(a).max(f64::MIN_POSITIVE);
        let sv = linalg::singular_values(&b);
        if sv.len() < self.dim() || sv[self.dim() - 1] <= 1e-12 * scale {
            return None;
        }
        linalg::orthonormalize(&b, 1e-12).map(|frame| Plane { frame })
    }

    /// `T ∩ ker A` for a linear map `A` on `R^n`.
    pub fn intersect_kernel(&self, a: &Matrix, rel_tol: f64) -> Plane {
        let n = self.ambient_dim();
        if self.dim() == 0 {
            return Plane::zero(n);
        }
        let b = a * &self.frame;
        let k = linalg::kernel_basis(&b, rel_tol);
        if k.ncols() == 0 {
            return Plane::zero(n);
        }
        let cols = &self.frame * k;
        Plane {
            frame: linalg::orthonormalize(&cols, 1e-12).unwrap_or_else(|| Matrix::zeros(n, 0)),
        }
    }

    /// `T + span{v}` embedded in one extra leading coordinate: the plane
    /// `e_0 ⊕ T` in `R × R^n`.
    pub fn with_leading_axis(&self) -> Plane {
        let n = self.ambient_dim();
        let m = self.dim();
        let mut frame = Matrix::zeros(n + 1, m + 1);
        frame[(0, 0)] = 1.0;
        frame.view_mut((1, 1), (n, m)).copy_from(&self.frame);
        Plane { frame }
    }

    fn check_pair(&self, other: &Plane, context: &'static str) -> Result<()> {
        Error::check_dim(context, self.ambient_dim(), other.ambient_dim())?;
        Error::check_dim(context, self.dim(), other.dim())
    }
}

/// Operator norm of `P_S − P_T`.
pub fn projector_distance(s: &Plane, t: &Plane) -> Result<f64> {
    s.check_pair(t, "projector_distance")?;
    let diff = s.projector() - t.projector();
    Ok(linalg::symmetric_norm(&diff).min(1.0))
}

/// Operator norm of `P_S − P_T` for planes of possibly different dimension.
pub fn projector_gap(s: &Plane, t: &Plane) -> Result<f64> {
    Error::check_dim("projector_gap", s.ambient_dim(), t.ambient_dim())?;
    Ok(linalg::symmetric_norm(&(s.projector() - t.projector())).min(1.0))
}

/// One rotation 2-plane `span{s, ŝ}` turned by `angle` at `τ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationBlock {
    pub angle: f64,
    pub s: Vector,
    pub s_hat: Vector,
}

/// The one-parameter family `M(τ)` of orthogonal maps with `M(0) = I` and
/// `M(1)` carrying `source` onto `target`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneRotation {
    source: Plane,
    target: Plane,
    blocks: Vec<RotationBlock>,
}

impl PlaneRotation {
    pub fn source(&self) -> &Plane {
        &self.source
    }

    pub fn target(&self) -> &Plane {
        &self.target
    }

    pub fn blocks(&self) -> &[RotationBlock] {
        &self.blocks
    }

    pub fn ambient_dim(&self) -> usize {
        self.source.ambient_dim()
    }

    /// Largest rotation angle; equals `‖M'(τ)‖` for every `τ`.
    pub fn max_angle(&self) -> f64 {
        self.blocks.iter().map(|b| b.angle).fold(0.0, f64::max)
    }

    pub fn evaluate(&self, tau: f64) -> Matrix {
        let n = self.ambient_dim();
        let mut m = Matrix::identity(n, n);
        for b in &self.blocks {
            let (sin, cos) = (tau * b.angle).sin_cos();
            let ss = &b.s * b.s.transpose();
            let hh = &b.s_hat * b.s_hat.transpose();
            let hs = &b.s_hat * b.s.transpose();
            m += (ss + hh) * (cos - 1.0) + (&hs - hs.transpose()) * sin;
        }
        m
    }

    /// `dM/dτ`.
    pub fn derivative(&self, tau: f64) -> Matrix {
        let n = self.ambient_dim();
        let mut m = Matrix::zeros(n, n);
        for b in &self.blocks {
            let (sin, cos) = (tau * b.angle).sin_cos();
            let ss = &b.s * b.s.transpose();
            let hh = &b.s_hat * b.s_hat.transpose();
            let hs = &b.s_hat * b.s.transpose();
            m += ((ss + hh) * (-sin) + (&hs - hs.transpose()) * cos) * b.angle;
        }
        m
    }
}

/// Rotation taking `S` onto `T` through principal angles.
///
/// The pairs `(s_i, t_i)` are principal vectors of `S` and `T`; each
/// `span{s_i, t_i}` is turned by the principal angle `α_i`. Directions common to
/// both planes are left fixed and orthogonal pairs use `ŝ_i = t_i`.
pub fn build_rotation(s: &Plane, t: &Plane) -> Result<PlaneRotation> {
    s.check_pair(t, "build_rotation")?;
    let m = s.dim();
    let mut blocks = Vec::new();
    if m > 0 {
        let w = s.frame().transpose() * t.frame();
        // Right singular vectors of the residual `(I − P_S)·frame_T` resolve
        // small angles that the cosines of `w` cannot.
        let residual = t.frame() - s.frame() * &w;
        let v = linalg::svd(&residual).v;
        let images: Vec<Vector> = (0..m).map(|i| &w * v.column(i)).collect();
        let live: Vec<usize> = (0..m).filter(|&i| images[i].norm() > RANK_TOL).collect();
        let mut u = Matrix::zeros(m, m);
        for &i in &live {
            u.set_column(i, &(&images[i] / images[i].norm()));
        }
        if live.len() < m {
            let fill = if live.is_empty() {
                Matrix::identity(m, m)
            } else {
                let kept: Vec<Vector> = live.iter().map(|&i| u.column(i).clone_owned()).collect();
                linalg::orthogonal_complement(&Matrix::from_columns(&kept))
            };
            for (k, i) in (0..m).filter(|i| !live.contains(i)).enumerate() {
                u.set_column(i, &fill.column(k));
            }
        }
        let s_dirs: Vec<Vector> = (0..m).map(|i| s.frame() * u.column(i)).collect();
        let mut basis: Vec<Vector> = s_dirs.clone();
        for i in 0..m {
            let si = s_dirs[i].clone();
            let ti = t.frame() * v.column(i);
            let sv = if live.contains(&i) { si.dot(&ti).clamp(0.0, 1.0) } else { 0.0 };
            let resid = &ti - &si * sv;
            let sin = resid.norm();
            if sin <= ANGLE_TOL {
                continue;
            }
            let mut s_hat = resid / sin;
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dot(&s_hat);
                    s_hat.axpy(-c, b, 1.0);
                }
            }
            let norm = s_hat.norm();
            if norm < 0.5 {
                continue;
            }
            s_hat /= norm;
            let angle = sin.atan2(sv);
            basis.push(s_hat.clone());
            blocks.push(RotationBlock { angle, s: si, s_hat });
        }
    }
    Ok(PlaneRotation {
        source: s.clone(),
        target: t.clone(),
        blocks,
    })
}

/// The three terms of the tilt/measure-excess sandwich.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiltExcess {
    /// `½‖P_P − P_Q‖²`
    pub lower: f64,
    /// `1 − ‖Λ_m P_P∘P_Q‖`
    pub mid: f64,
    /// `2^{2m+3}‖P_P − P_Q‖²`
    pub upper: f64,
}

impl TiltExcess {
    pub fn holds(&self, slack: f64) -> bool {
        self.lower <= self.mid + slack && self.mid <= self.upper + slack
    }
}

pub fn tilt_measure_excess(p: &Plane, q: &Plane) -> Result<TiltExcess> {
    let d = projector_distance(p, q)?;
    let m = p.dim();
    let w = p.frame().transpose() * q.frame();
    let det = if m == 0 { 1.0 } else { w.determinant().abs() };
    Ok(TiltExcess {
        lower: 0.5 * d * d,
        mid: (1.0 - det).max(0.0),
        upper: 2f64.powi(2 * m as i32 + 3) * d * d,
    })
}

/// Plane drawn from the orthogonally invariant distribution on `G(n, m)`.
pub fn haar_sample(n: usize, m: usize, seed: u64) -> Result<Plane> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_sample_with(&mut rng, n, m)
}

pub fn haar_sample_with<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Result<Plane> {
    if m == 0 || m > n {
        return Err(Error::param("m", m, "Haar sampling needs 0 < m <= n"));
    }
    loop {
        let g = Matrix::from_fn(n, m, |_, _| StandardNormal.sample(rng));
        if let Some(frame) = linalg::orthonormalize(&g, 1e-8) {
            return Ok(Plane { frame });
        }
    }
}

/// `‖Λ_m A∘P_T‖`: the factor by which `A` scales `m`-volume on `T`.
pub fn m_jacobian(a: &Matrix, t: &Plane) -> f64 {
    linalg::volume_factor(&(a * t.frame()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6};

    fn line(theta: f64) -> Plane {
        Plane::from_vectors(2, &[Vector::from_vec(vec![theta.cos(), theta.sin()])]).unwrap()
    }

    #[test]
    fn projector_distance_examples() {
        let e1 = Plane::coordinate(2, &[0]);
        let e2 = Plane::coordinate(2, &[1]);
        assert_eq!(projector_distance(&e1, &e1).unwrap(), 0.0);
        assert!((projector_distance(&e1, &e2).unwrap() - 1.0).abs() < 1e-15);
        assert!((projector_distance(&e1, &line(FRAC_PI_6)).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = Plane::coordinate(3, &[0]);
        let b = Plane::coordinate(3, &[0, 1]);
        assert!(matches!(projector_distance(&a, &b), Err(Error::DimensionMismatch { .. })));
        assert!(build_rotation(&a, &Plane::coordinate(2, &[0])).is_err());
    }

    #[test]
    fn axes_rotate_by_quarter_turn() {
        let r = build_rotation(&Plane::coordinate(2, &[0]), &Plane::coordinate(2, &[1])).unwrap();
        assert_eq!(r.blocks().len(), 1);
        assert!((r.max_angle() - FRAC_PI_2).abs() < 1e-12);
        for &tau in &[-1.0, 0.3, 1.0, 2.0] {
            let m = r.evaluate(tau);
            let a = tau * FRAC_PI_2;
            let expect = Matrix::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()]);
            assert!((m - expect).amax() < 1e-12);
            assert!((linalg::operator_norm(&r.derivative(tau)) - FRAC_PI_2).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_planes_have_no_blocks() {
        let s = haar_sample(5, 2, 7).unwrap();
        let r = build_rotation(&s, &s).unwrap();
        assert!(r.blocks().is_empty());
        assert_eq!(r.evaluate(1.7), Matrix::identity(5, 5));
    }

    #[test]
    fn orthogonal_planes_use_the_c_block() {
        let s = Plane::coordinate(4, &[0, 1]);
        let t = Plane::coordinate(4, &[2, 3]);
        let r = build_rotation(&s, &t).unwrap();
        let m1 = r.evaluate(1.0);
        let moved = &m1 * s.projector() * m1.transpose();
        assert!((moved - t.projector()).amax() < 1e-12);
    }

    #[test]
    fn tilt_example_for_lines() {
        let e = tilt_measure_excess(&line(0.0), &line(FRAC_PI_3)).unwrap();
        assert!((e.mid - 0.5).abs() < 1e-12);
        assert!((e.lower - 0.375).abs() < 1e-12);
        assert!((e.upper - 24.0).abs() < 1e-10);
        let z = tilt_measure_excess(&line(0.3), &line(0.3)).unwrap();
        assert!(z.lower.abs() < 1e-20 && z.mid.abs() < 1e-15 && z.upper.abs() < 1e-20);
    }

    #[test]
    fn haar_full_space_and_determinism() {
        let p = haar_sample(3, 3, 1).unwrap();
        assert!((p.projector() - Matrix::identity(3, 3)).amax() < 1e-12);
        assert_eq!(haar_sample(4, 2, 42).unwrap(), haar_sample(4, 2, 42).unwrap());
        assert!(haar_sample(2, 3, 0).is_err());
    }

    #[test]
    fn plane_json_roundtrip() {
        let p = haar_sample(4, 2, 3).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"n\":4"));
        let q: Plane = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        assert!(serde_json::from_str::<Plane>(r#"{"n":2,"m":1,"frame":[1.0,1.0]}"#).is_err());
    }

    #[test]
    fn kernel_intersection() {
        let t = Plane::coordinate(3, &[0, 1]);
        let df = Matrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let k = t.intersect_kernel(&df, 1e-10);
        assert_eq!(k.dim(), 1);
        assert!((k.frame()[(1, 0)].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn m_jacobian_of_scaling() {
        let t = haar_sample(3, 2, 11).unwrap();
        let a = Matrix::identity(3, 3) * 0.5;
        assert!((m_jacobian(&a, &t) - 0.25).abs() < 1e-14);
    }
}
