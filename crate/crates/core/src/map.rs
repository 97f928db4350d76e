//! Smooth maps with exact Jacobians, their supports and composition.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// Differentiability class recorded for a map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Smoothness {
    Finite(u32),
    Infinite,
}

impl Smoothness {
    pub fn min(self, other: Smoothness) -> Smoothness {
        std::cmp::min(self, other)
    }
}

impl fmt::Display for Smoothness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Smoothness::Finite(k) => write!(f, "C^{k}"),
            Smoothness::Infinite => write!(f, "C^inf"),
        }
    }
}

/// Closed convex region outside of which a map is the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Support {
    /// The map may move any point.
    Everywhere,
    /// The map is the identity.
    Empty,
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl Support {
    pub fn cube(center: &[f64], half_side: f64) -> Support {
        Support::Box {
            lo: center.iter().map(|c| c - half_side).collect(),
            hi: center.iter().map(|c| c + half_side).collect(),
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        match self {
            Support::Everywhere => true,
            Support::Empty => false,
            Support::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *v >= *l && *v <= *h),
            Support::Ball { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                d2 <= radius * radius
            }
        }
    }

    fn bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            Support::Box { lo, hi } => Some((lo.clone(), hi.clone())),
            Support::Ball { center, radius } => Some((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            _ => None,
        }
    }

    /// Smallest box (or trivial region) containing both supports.
    pub fn hull(&self, other: &Support) -> Support {
        match (self, other) {
            (Support::Empty, s) | (s, Support::Empty) => s.clone(),
            (Support::Everywhere, _) | (_, Support::Everywhere) => Support::Everywhere,
            (a, b) if a == b => a.clone(),
            (a, b) => {
                let (alo, ahi) = a.bounds().expect("bounded support");
                let (blo, bhi) = b.bounds().expect("bounded support");
                Support::Box {
                    lo: alo.iter().zip(&blo).map(|(x, y)| x.min(*y)).collect(),
                    hi: ahi.iter().zip(&bhi).map(|(x, y)| x.max(*y)).collect(),
                }
            }
        }
    }
}

/// A map `R^n → R^k` with value and Jacobian evaluated together.
pub trait SmoothMap: Send + Sync {
    fn domain_dim(&self) -> usize;

    fn codomain_dim(&self) -> usize {
        self.domain_dim()
    }

    /// Value and Jacobian (`codomain × domain`) at `x`.
    fn jet(&self, x: &Vector) -> Result<(Vector, Matrix)>;

    fn value(&self, x: &Vector) -> Result<Vector> {
        Ok(self.jet(x)?.0)
    }

    fn jacobian(&self, x: &Vector) -> Result<Matrix> {
        Ok(self.jet(x)?.1)
    }

    /// Region outside of which the map is the identity. Only meaningful for
    /// maps with equal domain and codomain.
    fn support(&self) -> Support {
        Support::Everywhere
    }

    fn smoothness(&self) -> Smoothness;
}

pub type MapRef = Arc<dyn SmoothMap>;

pub(crate) fn check_point(map: &dyn SmoothMap, x: &Vector) -> Result<()> {
    Error::check_dim("map argument", map.domain_dim(), x.len())
}

/// The identity of `R^n`.
#[derive(Clone, Copy, Debug)]
pub struct Identity {
    pub n: usize,
}

impl SmoothMap for Identity {
    fn domain_dim(&self) -> usize {
        self.n
    }

    fn jet(&self, x: &Vector) -> Result<(Vector, Matrix)> {
        check_point(self, x)?;
        Ok((x.clone(), Matrix::identity(self.n, self.n)))
    }

    fn support(&self) -> Support {
        Support::Empty
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Infinite
    }
}

/// `x ↦ A x + b`.
#[derive(Clone, Debug)]
pub struct Affine {
    pub linear: Matrix,
    pub offset: Vector,
}

impl Affine {
    pub fn new(linear: Matrix, offset: Vector) -> Result<Self> {
        Error::check_dim("affine offset", linear.nrows(), offset.len())?;
        Ok(Self { linear, offset })
    }

    pub fn scaling(n: usize, r: f64) -> Self {
        Self {
            linear: Matrix::identity(n, n) * r,
            offset: Vector::zeros(n),
        }
    }

    pub fn linear(linear: Matrix) -> Self {
        let k = linear.nrows();
        Self {
            linear,
            offset: Vector::zeros(k),
        }
    }
}

impl SmoothMap for Affine {
    fn domain_dim(&self) -> usize {
        self.linear.ncols()
    }

    fn codomain_dim(&self) -> usize {
        self.linear.nrows()
    }

    fn jet(&self, x: &Vector) -> Result<(Vector, Matrix)> {
        check_point(self, x)?;
        Ok((&self.linear * x + &self.offset, self.linear.clone()))
    }

    fn support(&self) -> Support {
        let n = self.linear.ncols();
        if self.linear.nrows() == n && self.linear == Matrix::identity(n, n) && self.offset.iter().all(|v| *v == 0.0) {
            Support::Empty
        } else {
            Support::Everywhere
        }
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Infinite
    }
}

/// Composition applying `maps[0]` first.
#[derive(Clone)]
pub struct Composite {
    maps: Vec<MapRef>,
}

impl Composite {
    pub fn new(maps: Vec<MapRef>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::param("maps", 0, "composite needs at least one map"));
        }
        for w in maps.windows(2) {
            Error::check_dim("composite chain", w[0].codomain_dim(), w[1].domain_dim())?;
        }
        Ok(Self { maps })
    }

    pub fn maps(&self) -> &[MapRef] {
        &self.maps
    }
}

impl SmoothMap for Composite {
    fn domain_dim(&self) -> usize {
        self.maps[0].domain_dim()
    }

    fn codomain_dim(&self) -> usize {
        self.maps.last().expect("nonempty").codomain_dim()
    }

    fn jet(&self, x: &Vector) -> Result<(Vector, Matrix)> {
        let (mut y, mut d) = self.maps[0].jet(x)?;
        for m in &self.maps[1..] {
            let (z, dz) = m.jet(&y)?;
            d = dz * d;
            y = z;
        }
        Ok((y, d))
    }

    fn support(&self) -> Support {
        self.maps.iter().fold(Support::Empty, |acc, m| acc.hull(&m.support()))
    }

    fn smoothness(&self) -> Smoothness {
        self.maps.iter().fold(Smoothness::Infinite, |acc, m| acc.min(m.smoothness()))
    }
}

type JetFn = dyn Fn(&Vector) -> Result<(Vector, Matrix)> + Send + Sync;

/// A map given by a jet closure.
#[derive(Clone)]
pub struct FnMap {
    domain: usize,
    codomain: usize,
    support: Support,
    smoothness: Smoothness,
    jet: Arc<JetFn>,
}

impl FnMap {
    pub fn new<F>(domain: usize, codomain: usize, support: Support, smoothness: Smoothness, jet: F) -> Self
    where
        F: Fn(&Vector) -> Result<(Vector, Matrix)> + Send + Sync + 'static,
    {
        Self {
            domain,
            codomain,
            support,
            smoothness,
            jet: Arc::new(jet),
        }
    }
}

impl SmoothMap for FnMap {
    fn domain_dim(&self) -> usize {
        self.domain
    }

    fn codomain_dim(&self) -> usize {
        self.codomain
    }

    fn jet(&self, x: &Vector) -> Result<(Vector, Matrix)> {
        check_point(self, x)?;
        (self.jet)(x)
    }

    fn support(&self) -> Support {
        self.support.clone()
    }

    fn smoothness(&self) -> Smoothness {
        self.smoothness
    }
}

/// Largest entrywise gap between the analytic Jacobian and central finite
/// differences over `probes`. Probes where the map is undefined are skipped.
pub fn jacobian_error(map: &dyn SmoothMap, probes: &[Vector], step: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for x in probes {
        let Ok(d) = map.jacobian(x) else { continue };
        let fd = linalg::finite_difference_jacobian(|y| map.value(y).unwrap_or_else(|_| y.clone() * f64::NAN), x, step);
        if fd.iter().any(|v| !v.is_finite()) {
            continue;
        }
        worst = worst.max((fd - d).amax());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_uses_chain_rule() {
        let a: MapRef = Arc::new(Affine::scaling(2, 3.0));
        let sq: MapRef = Arc::new(FnMap::new(2, 2, Support::Everywhere, Smoothness::Infinite, |x| {
            let v = Vector::from_vec(vec![x[0] * x[0], x[0] * x[1]]);
            let d = Matrix::from_row_slice(2, 2, &[2.0 * x[0], 0.0, x[1], x[0]]);
            Ok((v, d))
        }));
        let c = Composite::new(vec![a, sq]).unwrap();
        let x = Vector::from_vec(vec![0.3, -0.7]);
        let (v, _) = c.jet(&x).unwrap();
        assert!((v[0] - 0.81).abs() < 1e-15);
        assert!(jacobian_error(&c, &[x], 1e-6) < 1e-8);
    }

    #[test]
    fn support_hull_is_a_bounding_box() {
        let a = Support::cube(&[0.0, 0.0], 1.0);
        let b = Support::Ball {
            center: vec![3.0, 0.0],
            radius: 0.5,
        };
        let h = a.hull(&b);
        assert!(h.contains(&Vector::from_vec(vec![3.4, 0.9])));
        assert!(!h.contains(&Vector::from_vec(vec![3.6, 0.0])));
        assert_eq!(Support::Empty.hull(&a), a);
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let id = Identity { n: 3 };
        assert!(matches!(id.jet(&Vector::zeros(2)), Err(Error::DimensionMismatch { .. })));
    }
}
