use std::collections::BTreeMap;
use std::fmt::Write;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::cubical::DyadicCube;
use crate::error::{Error, Result};
use crate::grassmann::{projector_distance, Plane};
use crate::linalg::{Matrix, Vector};
use crate::measure::unit_ball_volume;
use crate::solver::complex::Chain2;
use crate::varifold::{density_ratio, DiscreteVarifold, Integrand, Sample, RELIABLE_SPACINGS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditOptions {
    /// Samples per cube side when the chain is turned into a varifold.
    pub subdivision: usize,
    /// Radius ladder in units of the cube side.
    pub radii: Vec<f64>,
    /// Density bounds `Γ⁻¹ ≤ ‖V‖B(x,r)/r^m ≤ Γ`.
    pub gamma: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            subdivision: 32,
            radii: vec![0.25, 0.375, 0.5, 0.75, 1.0, 1.5, 2.0],
            gamma: 8.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Interior,
    Boundary,
    Junction,
}

impl PointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PointKind::Interior => "interior",
            PointKind::Boundary => "boundary",
            PointKind::Junction => "junction",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    pub radius: f64,
    pub ratio: f64,
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditPoint {
    pub cell: String,
    pub position: Vec<f64>,
    pub kind: PointKind,
    /// Chain cells containing the point.
    pub incidence: usize,
    /// `incidence/2 · ω_m` on faces, `ω_m` at cell centres.
    pub expected: f64,
    /// Largest radius whose ball meets no other singular feature.
    pub clearance: f64,
    pub ratios: Vec<RatioSample>,
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    /// `Σ w‖P_T − P_fit‖² / r^m` in the largest valid ball.
    pub tilt_excess: Option<f64>,
    pub violation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub dim: usize,
    pub cells: usize,
    pub samples: usize,
    pub mass: f64,
    /// `Σ F(center Q, plane Q)·side^m`.
    pub phi: f64,
    pub gamma: f64,
    pub points: Vec<AuditPoint>,
    /// Extremes over valid radii at interior points.
    pub interior_min: Option<f64>,
    pub interior_max: Option<f64>,
    pub boundary_points: usize,
    pub junction_points: usize,
    pub violations: usize,
}

/// Each cube split into `subdivision^m` subcubes, one sample at each centre
/// with the cube's plane and weight `(side/subdivision)^m`.
pub fn chain_varifold(chain: &Chain2, subdivision: usize) -> Result<DiscreteVarifold> {
    if subdivision == 0 {
        return Err(Error::param("subdivision", 0, "must be positive"));
    }
    let n = chain.complex().ambient_dim();
    let m = chain.dim();
    let side = chain.complex().side();
    let h = side / subdivision as f64;
    let weight = h.powi(m as i32);
    let mut samples = Vec::with_capacity(chain.len() * subdivision.pow(m as u32));
    for c in chain.cubes() {
        let plane = Plane::coordinate(n, c.axes());
        let lo = c.lo();
        for code in 0..subdivision.pow(m as u32) {
            let mut x = lo.clone();
            let mut r = code;
            for &a in c.axes() {
                x[a] += h * ((r % subdivision) as f64 + 0.5);
                r /= subdivision;
            }
            samples.push(Sample::new(x, plane.clone(), weight));
        }
    }
    DiscreteVarifold::from_samples(n, m, samples)
}

fn cube_distance(c: &DyadicCube, x: &Vector) -> f64 {
    let lo = c.lo();
    let hi = c.hi();
    (0..x.len())
        .map(|j| {
            let d = (lo[j] - x[j]).max(x[j] - hi[j]).max(0.0);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn coplanar(a: &DyadicCube, b: &DyadicCube) -> bool {
    a.axes() == b.axes() && (0..a.ambient_dim()).filter(|j| !a.has_axis(*j)).all(|j| a.corner()[j] == b.corner()[j])
}

fn nearest<'a, I: IntoIterator<Item = &'a DyadicCube>>(cubes: I, x: &Vector) -> f64 {
    cubes.into_iter().map(|c| cube_distance(c, x)).fold(f64::INFINITY, f64::min)
}

fn fitted_plane(v: &DiscreteVarifold, x: &Vector, r: f64) -> Option<Plane> {
    let n = v.ambient_dim();
    let m = v.dim();
    let near: Vec<&Sample> = v.samples().iter().filter(|s| (&s.point - x).norm() <= r).collect();
    let mass: f64 = near.iter().map(|s| s.weight).sum();
    if near.len() <= m || !(mass > 0.0) {
        return None;
    }
    let mean = near.iter().fold(Vector::zeros(n), |acc, s| acc + &s.point * s.weight) / mass;
    let mut cov = Matrix::zeros(n, n);
    for s in &near {
        let d = &s.point - &mean;
        cov += &d * d.transpose() * s.weight;
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| eig.eigenvalues[*b].total_cmp(&eig.eigenvalues[*a]).then(a.cmp(b)));
    let cols: Vec<Vector> = order[..m].iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    Plane::from_vectors(n, &cols).ok()
}

pub fn audit_minimizer(chain: &Chain2, f: &Integrand, opts: &AuditOptions) -> Result<AuditReport> {
    if chain.is_empty() {
        return Err(Error::param("chain", "empty", "nothing to audit"));
    }
    if opts.radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::param("radii", format!("{:?}", opts.radii), "radii must be positive"));
    }
    if !(opts.gamma >= 1.0) {
        return Err(Error::param("gamma", opts.gamma, "must be at least 1"));
    }
    let complex = chain.complex();
    let n = complex.ambient_dim();
    let m = chain.dim();
    let side = complex.side();
    let omega = unit_ball_volume(m);
    let v = chain_varifold(chain, opts.subdivision)?;
    let reliable = RELIABLE_SPACINGS * side / opts.subdivision as f64;

    let mut incidence: BTreeMap<DyadicCube, usize> = BTreeMap::new();
    for c in chain.cubes() {
        for face in c.facets() {
            *incidence.entry(face).or_insert(0) += 1;
        }
    }
    let boundary: Vec<&DyadicCube> = incidence.iter().filter(|(_, k)| **k % 2 == 1).map(|(c, _)| c).collect();
    let junction: Vec<&DyadicCube> = incidence.iter().filter(|(_, k)| **k >= 3).map(|(c, _)| c).collect();
    let mut ridge: BTreeMap<DyadicCube, Vec<&DyadicCube>> = BTreeMap::new();
    for b in &boundary {
        for r in b.facets() {
            ridge.entry(r).or_default().push(b);
        }
    }
    let corners: Vec<&DyadicCube> = ridge
        .iter()
        .filter(|(_, bs)| !(bs.len() == 2 && bs[0].axes() == bs[1].axes()))
        .map(|(r, _)| r)
        .collect();

    let mut sites: Vec<(DyadicCube, usize)> = chain.cubes().map(|c| (c.clone(), 2)).collect();
    sites.extend(incidence.iter().map(|(c, k)| (c.clone(), *k)));
    let mut points = Vec::with_capacity(sites.len());
    for (cell, k) in sites {
        let x = cell.center();
        let kind = match k {
            1 => PointKind::Boundary,
            2 => PointKind::Interior,
            _ => PointKind::Junction,
        };
        let clearance = match kind {
            PointKind::Interior => nearest(boundary.iter().chain(&junction).copied(), &x),
            PointKind::Boundary => nearest(
                junction
                    .iter()
                    .chain(&corners)
                    .copied()
                    .chain(boundary.iter().copied().filter(|b| !coplanar(b, &cell))),
                &x,
            ),
            PointKind::Junction => nearest(boundary.iter().copied().chain(junction.iter().copied().filter(|j| !coplanar(j, &cell))), &x),
        };
        let expected = if cell.dim() == m { omega } else { omega * k as f64 / 2.0 };
        let radii: Vec<f64> = opts.radii.iter().map(|r| r * side).collect();
        let ratios: Vec<RatioSample> = density_ratio(&v, &x, &radii)?
            .into_iter()
            .map(|d| RatioSample {
                radius: d.radius,
                ratio: d.ratio,
                valid: d.radius >= reliable && d.radius <= clearance,
            })
            .collect();
        let valid: Vec<&RatioSample> = ratios.iter().filter(|r| r.valid).collect();
        let min_ratio = valid.iter().map(|r| r.ratio).reduce(f64::min);
        let max_ratio = valid.iter().map(|r| r.ratio).reduce(f64::max);
        let tilt_excess = match valid.last() {
            Some(r) => fitted_plane(&v, &x, r.radius)
                .map(|fit| -> Result<f64> {
                    let mut sum = 0.0;
                    for s in v.samples().iter().filter(|s| (&s.point - &x).norm() <= r.radius) {
                        if let Some(t) = s.plane() {
                            let d = projector_distance(t, &fit)?;
                            sum += s.weight * d * d;
                        }
                    }
                    Ok(sum / r.radius.powi(m as i32))
                })
                .transpose()?,
            None => None,
        };
        let low = if kind == PointKind::Boundary { 0.0 } else { 1.0 / opts.gamma };
        let violation = valid.iter().any(|r| r.ratio < low || r.ratio > opts.gamma);
        points.push(AuditPoint {
            cell: cell.id(),
            position: x.iter().copied().collect(),
            kind,
            incidence: k,
            expected,
            clearance,
            ratios,
            min_ratio,
            max_ratio,
            tilt_excess,
            violation,
        });
    }
    let interior = points.iter().filter(|p| p.kind == PointKind::Interior);
    let interior_min = interior.clone().filter_map(|p| p.min_ratio).reduce(f64::min);
    let interior_max = interior.filter_map(|p| p.max_ratio).reduce(f64::max);
    let side_m = side.powi(m as i32);
    let mut phi = 0.0;
    for c in chain.cubes() {
        phi += f.eval(&c.center(), &Plane::coordinate(n, c.axes()))? * side_m;
    }
    Ok(AuditReport {
        dim: m,
        cells: chain.len(),
        samples: v.len(),
        mass: v.mass(),
        phi,
        gamma: opts.gamma,
        interior_min,
        interior_max,
        boundary_points: points.iter().filter(|p| p.kind == PointKind::Boundary).count(),
        junction_points: points.iter().filter(|p| p.kind == PointKind::Junction).count(),
        violations: points.iter().filter(|p| p.violation).count(),
        points,
    })
}

impl AuditReport {
    /// One row per point and radius.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("point,cell,kind,incidence");
        let n = self.points.first().map_or(0, |p| p.position.len());
        for j in 0..n {
            let _ = write!(out, ",x{j}");
        }
        out.push_str(",radius,ratio,expected,valid\n");
        for (i, p) in self.points.iter().enumerate() {
            for r in &p.ratios {
                let _ = write!(out, "{i},\"{}\",{},{}", p.cell, p.kind.as_str(), p.incidence);
                for x in &p.position {
                    let _ = write!(out, ",{x}");
                }
                let _ = writeln!(out, ",{},{},{},{}", r.radius, r.ratio, p.expected, r.valid);
            }
        }
        out
    }
}
