//! Deformation of sampled sets onto the `m`-skeleton of a cubical complex.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::cubical::{CubeFamily, CubicalComplex, DyadicCube};
use crate::deform::center::{in_open_cube, select_center, CenterChoice, CenterOptions};
use crate::deform::one_cube::CubeDeformation;
use crate::deform::plan::{time_profile, DeformationPlan, Stage, StepRecipe};
use crate::error::{Error, Result};
use crate::grassmann::{m_jacobian, Plane};
use crate::linalg::{operator_norm, Matrix, Vector};
use crate::map::SmoothMap;
use crate::varifold::{DiscreteVarifold, Sample, Tangent};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeformOptions {
    pub center: CenterOptions,
    /// Skeleton-membership tolerance; `ε/4` when unset.
    pub skeleton_tol: Option<f64>,
    /// Coverage tolerance of the cleanup census; `ε/4` when unset.
    pub coverage_tol: Option<f64>,
    /// Fraction of probes within tolerance for an `m`-cube to count as covered.
    pub coverage_fraction: f64,
    /// Probes per side of an `m`-cube.
    pub coverage_grid: usize,
    pub cleanup: bool,
    /// Trapezoid nodes per step for the homotopy area.
    pub time_nodes: usize,
}

impl Default for DeformOptions {
    fn default() -> Self {
        Self {
            center: CenterOptions::default(),
            skeleton_tol: None,
            coverage_tol: None,
            coverage_fraction: 0.98,
            coverage_grid: 32,
            cleanup: true,
            time_nodes: 9,
        }
    }
}

/// Estimates for one input set; masses and integrals are over `G_ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetReport {
    pub dim: usize,
    pub samples: usize,
    pub mass: f64,
    /// `mass(g₁#V)`.
    pub image_mass: f64,
    pub mass_ratio: f64,
    /// `Σ w·‖Dg₁‖^m`.
    pub derivative_integral: f64,
    pub integral_ratio: f64,
    /// Largest `∫_{Σ∩Q} ‖Dg₁‖^m / H^m(Σ ∩ (Q̃ + ε))` over cubes `Q` of the family.
    pub cube_ratio: f64,
    /// Image samples of `g₁` inside `Int ⋃A`, and how many of them lie within
    /// the skeleton tolerance.
    pub interior_images: usize,
    pub within_skeleton: usize,
    pub max_skeleton_distance: f64,
    /// Time-sampled `H^{m+1}` of the descent homotopy (tangent sets only).
    pub homotopy_area: Option<f64>,
    /// `homotopy_area / (δ·mass)` with `δ` the largest side.
    pub homotopy_ratio: Option<f64>,
    /// `mass(f₁#V)`.
    pub final_mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageAction {
    Covered,
    Untouched,
    Cleaned,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageRecord {
    pub cube: String,
    pub fraction_before: f64,
    pub interior_before: usize,
    pub action: CoverageAction,
    pub fraction_after: f64,
    pub interior_after: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformReport {
    pub eps: f64,
    pub skeleton_tol: f64,
    pub coverage_tol: f64,
    pub steps: usize,
    pub descent_steps: usize,
    /// Largest number of samples left inside a cube right after its step.
    pub stage_leftovers: usize,
    pub centers: Vec<CenterChoice>,
    pub sets: Vec<SetReport>,
    pub coverage: Vec<CoverageRecord>,
}

#[derive(Clone, Debug)]
pub struct SkeletonDeformation {
    pub plan: DeformationPlan,
    pub report: DeformReport,
}

struct Track {
    set: usize,
    start: Vector,
    point: Vector,
    jac: Matrix,
    plane: Option<Plane>,
    weight: f64,
    homotopy: f64,
}

impl Track {
    fn current_weight(&self, m: usize) -> f64 {
        match &self.plane {
            Some(p) => self.weight * m_jacobian(&self.jac, p),
            None => self.weight * operator_norm(&self.jac).powi(m as i32),
        }
    }
}

/// Axis boxes of a family with the union-interior test.
pub(crate) struct BoxUnion {
    boxes: Vec<(Vector, Vector)>,
    delta: f64,
}

impl BoxUnion {
    pub(crate) fn new(family: &CubeFamily) -> Self {
        let boxes = family.cubes().iter().map(|c| (c.lo(), c.hi())).collect();
        Self {
            boxes,
            delta: 1e-7 * family.min_side(),
        }
    }

    fn covers(&self, x: &Vector) -> bool {
        self.boxes.iter().any(|(lo, hi)| x.iter().zip(lo.iter().zip(hi.iter())).all(|(v, (l, h))| v >= l && v <= h))
    }

    /// `x ∈ Int ⋃A`.
    pub(crate) fn interior_contains(&self, x: &Vector) -> bool {
        let n = x.len();
        (0..1usize << n).all(|bits| {
            let y = Vector::from_fn(n, |j, _| x[j] + if bits >> j & 1 == 1 { self.delta } else { -self.delta });
            self.covers(&y)
        })
    }

    pub(crate) fn distance(&self, x: &Vector) -> f64 {
        self.boxes.iter().map(|(lo, hi)| box_distance(x, lo, hi)).fold(f64::INFINITY, f64::min)
    }
}

fn box_distance(x: &Vector, lo: &Vector, hi: &Vector) -> f64 {
    x.iter()
        .zip(lo.iter().zip(hi.iter()))
        .map(|(v, (l, h))| {
            let d = (l - v).max(v - h).max(0.0);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn cube_distance(cube: &DyadicCube, x: &Vector) -> f64 {
    box_distance(x, &cube.lo(), &cube.hi())
}

/// Distance from `x` to the union of `cubes`.
pub fn skeleton_distance(cubes: &[DyadicCube], x: &Vector) -> f64 {
    cubes.iter().map(|c| cube_distance(c, x)).fold(f64::INFINITY, f64::min)
}

pub fn deform_onto_skeleton(
    family: &CubeFamily,
    complex: &CubicalComplex,
    sets: &[DiscreteVarifold],
    m: usize,
    eps: f64,
    opts: &DeformOptions,
) -> Result<SkeletonDeformation> {
    let n = family.ambient_dim();
    Error::check_dim("complex", n, complex.ambient_dim())?;
    if m == 0 || m >= n {
        return Err(Error::param("m", m, "need 1 <= m <= n - 1"));
    }
    for v in sets {
        Error::check_dim("set ambient", n, v.ambient_dim())?;
        if v.dim() > m || v.dim() == 0 {
            return Err(Error::param("set dim", v.dim(), "set dimensions must lie in 1..=m"));
        }
        if !v.mass().is_finite() {
            return Err(Error::param("set mass", v.mass(), "masses must be finite"));
        }
    }
    if family.is_empty() {
        return Err(Error::param("family", 0, "empty cube family"));
    }
    let eps0 = family.min_side() / 16.0;
    if !(eps > 0.0 && eps < eps0) {
        return Err(Error::param("eps", eps, "must lie in (0, min side / 16)"));
    }
    let skeleton_tol = opts.skeleton_tol.unwrap_or(0.25 * eps);
    let coverage_tol = opts.coverage_tol.unwrap_or(0.25 * eps);
    let union = BoxUnion::new(family);

    let mut tracks: Vec<Track> = Vec::new();
    for (i, v) in sets.iter().enumerate() {
        for s in v.samples() {
            tracks.push(Track {
                set: i,
                start: s.point.clone(),
                point: s.point.clone(),
                jac: Matrix::identity(n, n),
                plane: s.plane().cloned(),
                weight: s.weight,
                homotopy: 0.0,
            });
        }
    }
    let dims: Vec<usize> = sets.iter().map(|v| v.dim()).collect();

    let mut plan = DeformationPlan::identity(n, m, eps);
    let mut centers = Vec::new();
    let mut leftovers = 0;
    let mut descent: Vec<DyadicCube> = (m + 1..=n)
        .rev()
        .flat_map(|k| complex.skeleton(k).iter().cloned())
        .filter(|c| union.interior_contains(&c.center()))
        .collect();
    descent.sort();
    let ctx = StepContext {
        n,
        dims: &dims,
        opts,
        time_nodes: opts.time_nodes.max(2),
    };
    for cube in &descent {
        if !tracks.iter().any(|t| in_open_cube(cube, &t.point)) {
            continue;
        }
        let index = plan.len();
        let (choice, left) = ctx.step(&mut plan, &mut tracks, cube, Stage::Descent, eps, index, true)?;
        centers.push(choice);
        leftovers = leftovers.max(left);
    }

    let skeleton: Vec<DyadicCube> = complex.skeleton(m).iter().filter(|c| union.interior_contains(&c.center())).cloned().collect();
    let delta = family.cubes().iter().map(|c| c.side()).fold(0.0, f64::max);
    let mut reports = set_reports(&tracks, sets, family, &union, &skeleton, eps, skeleton_tol, delta);

    let mut coverage = Vec::new();
    let uniform = !sets.is_empty() && dims.iter().all(|&d| d == m);
    if opts.cleanup && uniform {
        for cube in &skeleton {
            let (fraction, interior) = census(cube, &tracks, coverage_tol, opts.coverage_grid);
            let action = if fraction > opts.coverage_fraction {
                CoverageAction::Covered
            } else if interior == 0 {
                CoverageAction::Untouched
            } else {
                CoverageAction::Cleaned
            };
            if action == CoverageAction::Cleaned {
                let index = plan.len();
                let (choice, left) = ctx.step(&mut plan, &mut tracks, cube, Stage::Cleanup, eps, index, false)?;
                centers.push(choice);
                leftovers = leftovers.max(left);
            }
            coverage.push(CoverageRecord {
                cube: cube.id(),
                fraction_before: fraction,
                interior_before: interior,
                action,
                fraction_after: f64::NAN,
                interior_after: 0,
            });
        }
        for (rec, cube) in coverage.iter_mut().zip(&skeleton) {
            let (fraction, interior) = census(cube, &tracks, coverage_tol, opts.coverage_grid);
            rec.fraction_after = fraction;
            rec.interior_after = interior;
        }
    }
    for (i, r) in reports.iter_mut().enumerate() {
        r.final_mass = tracks
            .iter()
            .filter(|t| t.set == i && union.distance(&t.start) < eps)
            .map(|t| t.current_weight(dims[i]))
            .sum();
    }

    let report = DeformReport {
        eps,
        skeleton_tol,
        coverage_tol,
        steps: plan.len(),
        descent_steps: plan.descent_len(),
        stage_leftovers: leftovers,
        centers,
        sets: reports,
        coverage,
    };
    Ok(SkeletonDeformation { plan, report })
}

struct StepContext<'a> {
    n: usize,
    dims: &'a [usize],
    opts: &'a DeformOptions,
    time_nodes: usize,
}

impl StepContext<'_> {
    /// Select a centre for `cube`, append the step, move the tracks. Returns
    /// the choice and the number of samples still inside the cube.
    #[allow(clippy::too_many_arguments)]
    fn step(
        &self,
        plan: &mut DeformationPlan,
        tracks: &mut [Track],
        cube: &DyadicCube,
        stage: Stage,
        eps: f64,
        index: usize,
        homotopy: bool,
    ) -> Result<(CenterChoice, usize)> {
        let wrap = |e: Error| Error::Stage {
            stage: index,
            cube: cube.id(),
            source: Box::new(e),
        };
        let reach = 0.5 * cube.side() + eps;
        let c = cube.center();
        let near: Vec<usize> = (0..tracks.len())
            .filter(|&i| tracks[i].point.iter().zip(c.iter()).all(|(v, w)| (v - w).abs() <= reach))
            .collect();
        let mut measures: Vec<DiscreteVarifold> = self
            .dims
            .iter()
            .map(|&d| DiscreteVarifold::new(self.n, d).expect("valid dims"))
            .collect();
        for &i in &near {
            let t = &tracks[i];
            let w = t.current_weight(self.dims[t.set]);
            measures[t.set].push(Sample::isotropic(t.point.clone(), w)).map_err(wrap)?;
        }
        let mut copts = self.opts.center.clone();
        copts.seed = copts.seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let choice = select_center(cube, &measures, eps, &copts).map_err(wrap)?;
        let center = Vector::from_vec(choice.center.clone());
        let iota = choice.eps / std::f64::consts::SQRT_2;
        let clearance = near.iter().map(|&i| (&tracks[i].point - &center).norm()).fold(f64::INFINITY, f64::min);
        let blend = 0.5 * iota.min(clearance);
        let map: std::sync::Arc<CubeDeformation> = plan
            .push(StepRecipe {
                id: cube.id(),
                cube: cube.clone(),
                stage,
                center: choice.center.clone(),
                eps: choice.eps,
                blend,
            })
            .map_err(wrap)?;
        for &i in &near {
            let t = &mut tracks[i];
            if !map.may_move(&t.point) {
                continue;
            }
            let (y, d) = map.jet(&t.point).map_err(wrap)?;
            let next = &d * &t.jac;
            if homotopy {
                if let Some(plane) = &t.plane {
                    let gap = (&y - &t.point).norm();
                    if gap > 0.0 {
                        t.homotopy += t.weight * gap * self.time_integral(&t.jac, &next, plane.frame(), self.dims[t.set]);
                    }
                }
            }
            t.point = y;
            t.jac = next;
        }
        let left = near.iter().filter(|&&i| in_open_cube(cube, &tracks[i].point)).count();
        Ok((choice, left))
    }

    /// `∫_0^1 s'(u)·‖((1 − s)J₀ + sJ₁)F‖^m du` by the trapezoid rule.
    fn time_integral(&self, j0: &Matrix, j1: &Matrix, frame: &Matrix, m: usize) -> f64 {
        let a = j0 * frame;
        let b = j1 * frame;
        let k = self.time_nodes - 1;
        let h = 1.0 / k as f64;
        (0..=k)
            .map(|r| {
                let u = r as f64 * h;
                let (s, ds) = time_profile(u);
                let w = if r == 0 || r == k { 0.5 * h } else { h };
                w * ds * operator_norm(&(&a * (1.0 - s) + &b * s)).powi(m as i32)
            })
            .sum()
    }
}

#[allow(clippy::too_many_arguments)]
fn set_reports(
    tracks: &[Track],
    sets: &[DiscreteVarifold],
    family: &CubeFamily,
    union: &BoxUnion,
    skeleton: &[DyadicCube],
    eps: f64,
    tol: f64,
    delta: f64,
) -> Vec<SetReport> {
    let cubes = family.cubes();
    let neighbours: Vec<Vec<usize>> = cubes
        .iter()
        .map(|q| (0..cubes.len()).filter(|&r| cubes[r].intersects(q)).collect())
        .collect();
    sets.iter()
        .enumerate()
        .map(|(i, v)| {
            let m = v.dim();
            let mut mass = 0.0;
            let mut image_mass = 0.0;
            let mut integral = 0.0;
            let mut homotopy = 0.0;
            let mut lhs = vec![0.0; cubes.len()];
            let mut rhs = vec![0.0; cubes.len()];
            let mut interior = 0;
            let mut within = 0;
            let mut worst: f64 = 0.0;
            for t in tracks.iter().filter(|t| t.set == i) {
                if union.distance(&t.start) >= eps {
                    continue;
                }
                mass += t.weight;
                image_mass += t.current_weight(m);
                let dn = t.weight * operator_norm(&t.jac).powi(m as i32);
                integral += dn;
                homotopy += t.homotopy;
                let close: HashSet<usize> = (0..cubes.len()).filter(|&r| cube_distance(&cubes[r], &t.start) < eps).collect();
                for (q, nb) in neighbours.iter().enumerate() {
                    if nb.iter().any(|r| close.contains(r)) {
                        rhs[q] += t.weight;
                    }
                    if cube_distance(&cubes[q], &t.start) == 0.0 {
                        lhs[q] += dn;
                    }
                }
                if union.interior_contains(&t.point) {
                    interior += 1;
                    let d = skeleton_distance(skeleton, &t.point);
                    worst = worst.max(d);
                    if d <= tol {
                        within += 1;
                    }
                }
            }
            let cube_ratio = lhs.iter().zip(&rhs).filter(|(_, r)| **r > 0.0).map(|(l, r)| l / r).fold(0.0, f64::max);
            let ratio = |x: f64| if mass > 0.0 { x / mass } else { 0.0 };
            let tangent = v.is_rectifiable();
            SetReport {
                dim: m,
                samples: v.len(),
                mass,
                image_mass,
                mass_ratio: ratio(image_mass),
                derivative_integral: integral,
                integral_ratio: ratio(integral),
                cube_ratio,
                interior_images: interior,
                within_skeleton: within,
                max_skeleton_distance: worst,
                homotopy_area: tangent.then_some(homotopy),
                homotopy_ratio: tangent.then_some(ratio(homotopy) / delta),
                final_mass: image_mass,
            }
        })
        .collect()
}

/// Fraction of the probe grid of `cube` within `tol` of a sample, and the
/// number of samples in its relative interior.
fn census(cube: &DyadicCube, tracks: &[Track], tol: f64, grid: usize) -> (f64, usize) {
    let near: Vec<&Vector> = tracks.iter().map(|t| &t.point).filter(|p| cube_distance(cube, p) <= tol).collect();
    let interior = near.iter().filter(|p| in_open_cube(cube, p)).count();
    let k = cube.dim();
    let g = grid.max(1);
    let total = g.pow(k as u32);
    let mut hit = 0;
    for mut idx in 0..total {
        let u = Vector::from_fn(k, |_, _| {
            let i = idx % g;
            idx /= g;
            -1.0 + (2 * i + 1) as f64 / g as f64
        });
        let probe = cube.from_unit(&u);
        if near.iter().any(|p| (*p - &probe).norm() <= tol) {
            hit += 1;
        }
    }
    (hit as f64 / total as f64, interior)
}

/// The pushed-forward varifold `g#V` sample by sample, with the weight of
/// isotropic samples scaled by `‖Dg‖^m`.
pub fn push_samples(g: &dyn SmoothMap, v: &DiscreteVarifold) -> Result<DiscreteVarifold> {
    let mut out = DiscreteVarifold::new(v.ambient_dim(), v.dim())?;
    for s in v.samples() {
        let (y, d) = g.jet(&s.point)?;
        match &s.tangent {
            Tangent::Plane(t) => match t.image(&d) {
                Some(img) => out.push(Sample::new(y, img, s.weight * m_jacobian(&d, t)))?,
                None => out.push(Sample::isotropic(y, 0.0))?,
            },
            Tangent::Isotropic => out.push(Sample::isotropic(y, s.weight * operator_norm(&d).powi(v.dim() as i32)))?,
        }
    }
    Ok(out)
}

/// The deformation of a single cube with a centre chosen for `measures`.
pub fn deform_one_cube(cube: &DyadicCube, measures: &[DiscreteVarifold], eps: f64, opts: &CenterOptions) -> Result<(CubeDeformation, CenterChoice)> {
    if !(eps > 0.0 && eps < 0.25 * cube.side()) {
        return Err(Error::param("eps", eps, "must lie in (0, side/4)"));
    }
    let choice = select_center(cube, measures, eps, opts)?;
    let iota = choice.eps / std::f64::consts::SQRT_2;
    let blend = 0.5 * iota.min(choice.clearance);
    let map = CubeDeformation::new(cube.clone(), Vector::from_vec(choice.center.clone()), choice.eps, blend)?;
    Ok((map, choice))
}
