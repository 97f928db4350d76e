//! Choice of the puncture for a one-cube deformation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cubemaps::punctured_cube_projection;
use crate::cubical::DyadicCube;
use crate::error::{Error, Result};
use crate::linalg::{operator_norm, Vector};
use crate::map::SmoothMap;
use crate::measure::unit_ball_volume;
use crate::varifold::DiscreteVarifold;

/// Relative tolerance for "lies on the plane of `K`".
pub(crate) const PLANE_TOL: f64 = 1e-9;

/// Directions along which a measure's set is known to project to small
/// measure; centres are preferred that see it along one of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Alignment {
    pub measure: usize,
    pub directions: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CenterOptions {
    /// Random candidates in the middle half of the cube.
    pub candidates: usize,
    pub seed: u64,
    /// Constant of the derivative bound `‖Dφ_a(x)‖ ≤ Γ/(2|x − a| dist(a, ∂Q))`.
    pub projection_gamma: f64,
    pub slack: f64,
    /// Probes per side when looking for a point off the support.
    pub grid: usize,
    pub align: Option<Alignment>,
}

impl Default for CenterOptions {
    fn default() -> Self {
        Self {
            candidates: 64,
            seed: 0,
            projection_gamma: 6.0,
            slack: 0.05,
            grid: 16,
            align: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterBranch {
    /// No mass on the cube: its centre.
    Empty,
    /// All measures of lower dimension: averaged derivative bound.
    Averaging,
    /// Measures of the cube's dimension: a point off their support.
    OffSupport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterChoice {
    pub center: Vec<f64>,
    /// The step's epsilon, reduced on the off-support branch.
    pub eps: f64,
    pub branch: CenterBranch,
    /// `∫_K ‖Dφ_a‖^{m_i} dμ_i / (l·Γ(k, m_i)·μ_i(K))` per measure (0 when
    /// `μ_i(K) = 0`).
    pub ratios: Vec<f64>,
    pub limit: f64,
    pub candidates: usize,
    /// Distance from the centre to the nearest sample.
    pub clearance: f64,
    /// Largest angle between a sample direction and the nearest preferred
    /// direction, for the aligned measure.
    pub misalignment: Option<f64>,
}

/// `Γ(k, m) = Γ·k·ω_k/(k − m)·k^{(k−m)/2}`.
pub fn averaged_gamma(projection_gamma: f64, k: usize, m: usize) -> f64 {
    let (kf, mf) = (k as f64, m as f64);
    projection_gamma * kf * unit_ball_volume(k) / (kf - mf) * kf.powf(0.5 * (kf - mf))
}

/// Whether `x` lies in the closed cube (within the plane tolerance).
pub(crate) fn in_cube(cube: &DyadicCube, x: &Vector) -> bool {
    let c = cube.center();
    let half = 0.5 * cube.side();
    let tol = PLANE_TOL * cube.side();
    (0..x.len()).all(|j| {
        let d = (x[j] - c[j]).abs();
        if cube.has_axis(j) {
            d <= half + tol
        } else {
            d <= tol
        }
    })
}

/// Whether `x` lies in the relative interior of the cube.
pub(crate) fn in_open_cube(cube: &DyadicCube, x: &Vector) -> bool {
    let c = cube.center();
    let half = 0.5 * cube.side();
    let tol = PLANE_TOL * cube.side();
    (0..x.len()).all(|j| {
        let d = (x[j] - c[j]).abs();
        if cube.has_axis(j) {
            d < half - tol
        } else {
            d <= tol
        }
    })
}

fn tangent_coords(cube: &DyadicCube, x: &Vector) -> Vector {
    let c = cube.center();
    Vector::from_iterator(cube.dim(), cube.axes().iter().map(|&j| x[j] - c[j]))
}

fn world_point(cube: &DyadicCube, u: &Vector) -> Vector {
    let mut x = cube.center();
    for (i, &j) in cube.axes().iter().enumerate() {
        x[j] += u[i];
    }
    x
}

pub fn select_center(cube: &DyadicCube, measures: &[DiscreteVarifold], eps: f64, opts: &CenterOptions) -> Result<CenterChoice> {
    let n = cube.ambient_dim();
    let k = cube.dim();
    if k == 0 {
        return Err(Error::param("cube", cube.id(), "cannot deform a vertex"));
    }
    for v in measures {
        Error::check_dim("measure ambient", n, v.ambient_dim())?;
        if v.dim() > k {
            return Err(Error::param("m", v.dim(), "measure dimension exceeds the cube dimension"));
        }
    }
    let side = cube.side();
    let half = 0.5 * side;
    let inside: Vec<Vec<(Vector, f64)>> = measures
        .iter()
        .map(|v| {
            v.samples()
                .iter()
                .filter(|s| in_cube(cube, &s.point))
                .map(|s| (tangent_coords(cube, &s.point), s.weight))
                .collect()
        })
        .collect();
    let all: Vec<&Vector> = measures.iter().flat_map(|v| v.points()).collect();
    let clearance = |a: &Vector| all.iter().map(|x| (*x - a).norm()).fold(f64::INFINITY, f64::min);
    let empty = CenterChoice {
        center: cube.center().iter().cloned().collect(),
        eps,
        branch: CenterBranch::Empty,
        ratios: vec![0.0; measures.len()],
        limit: 1.0 + opts.slack,
        candidates: 0,
        clearance: clearance(&cube.center()),
        misalignment: None,
    };
    let active: Vec<usize> = (0..measures.len()).filter(|&i| !inside[i].is_empty()).collect();
    if active.is_empty() {
        return Ok(empty);
    }
    let top = active.iter().filter(|&&i| measures[i].dim() == k).count();
    if top == active.len() {
        return off_support(cube, eps, opts, &clearance, measures.len());
    }
    if top > 0 {
        return Err(Error::param("measures", cube.id(), "mixes measures of the cube's dimension with lower ones"));
    }

    let l = measures.len() as f64;
    let unit_eps = (std::f64::consts::SQRT_2 * eps / side).min(0.24);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut candidates: Vec<Vector> = (0..opts.candidates)
        .map(|_| Vector::from_fn(k, |_, _| half * rng.random_range(-0.5..0.5)))
        .collect();
    let aligned = opts.align.as_ref().and_then(|a| {
        let pts = inside.get(a.measure)?;
        if pts.is_empty() {
            return None;
        }
        let dirs: Vec<Vector> = a
            .directions
            .iter()
            .filter(|d| d.len() == n)
            .map(|d| Vector::from_iterator(k, cube.axes().iter().map(|&j| d[j])))
            .filter(|d| d.norm() > 1e-12)
            .map(|d| d.normalize())
            .collect();
        (!dirs.is_empty()).then_some((pts, dirs))
    });
    if let Some((pts, dirs)) = &aligned {
        let centroid = pts.iter().fold(Vector::zeros(k), |acc, (p, _)| acc + p) / pts.len() as f64;
        for d in dirs {
            for i in 1..=16 {
                for sign in [-1.0, 1.0] {
                    let a = &centroid + d * (sign * side * i as f64 / 16.0);
                    if a.amax() <= 0.5 * half {
                        candidates.push(a);
                    }
                }
            }
        }
    }
    let limit = 1.0 + opts.slack;
    let mut best: Option<(f64, f64, Vector, Vec<f64>)> = None;
    let mut best_ratio = f64::INFINITY;
    for a in &candidates {
        let phi = punctured_cube_projection(&(a / half), unit_eps)?;
        let mut ratios = vec![0.0; measures.len()];
        for &i in &active {
            let m = measures[i].dim();
            let mut integral = 0.0;
            let mut mass = 0.0;
            for (p, w) in &inside[i] {
                mass += w;
                integral += match phi.jacobian(&(p / half)) {
                    Ok(d) => w * operator_norm(&d).powi(m as i32),
                    Err(_) => f64::INFINITY,
                };
            }
            ratios[i] = if mass > 0.0 {
                integral / (l * averaged_gamma(opts.projection_gamma, k, m) * mass)
            } else {
                0.0
            };
        }
        let worst = ratios.iter().cloned().fold(0.0, f64::max);
        best_ratio = best_ratio.min(worst);
        if worst > limit {
            continue;
        }
        let score = match &aligned {
            Some((pts, dirs)) => misalignment(a, pts, dirs),
            None => worst,
        };
        let better = match &best {
            None => true,
            Some((s, r, _, _)) => score < *s || (score == *s && worst < *r),
        };
        if better {
            best = Some((score, worst, a.clone(), ratios));
        }
    }
    let Some((score, _, a, ratios)) = best else {
        return Err(Error::SearchFailed {
            context: format!("center of {cube}"),
            best_ratio,
            limit,
        });
    };
    let center = world_point(cube, &a);
    Ok(CenterChoice {
        clearance: clearance(&center),
        center: center.iter().cloned().collect(),
        eps,
        branch: CenterBranch::Averaging,
        ratios,
        limit,
        candidates: candidates.len(),
        misalignment: aligned.is_some().then_some(score),
    })
}

fn misalignment(a: &Vector, pts: &[(Vector, f64)], dirs: &[Vector]) -> f64 {
    pts.iter()
        .map(|(p, _)| {
            let v = p - a;
            let r = v.norm();
            if r == 0.0 {
                return std::f64::consts::FRAC_PI_2;
            }
            let cos = dirs.iter().map(|d| (d.dot(&v) / r).abs()).fold(0.0, f64::max);
            cos.min(1.0).acos()
        })
        .fold(0.0, f64::max)
}

fn off_support(
    cube: &DyadicCube,
    eps: f64,
    opts: &CenterOptions,
    clearance: &dyn Fn(&Vector) -> f64,
    count: usize,
) -> Result<CenterChoice> {
    let k = cube.dim();
    let half = 0.5 * cube.side();
    let g = opts.grid.max(1);
    let total = g.pow(k as u32);
    let mut best: Option<(f64, Vector)> = None;
    for mut idx in 0..total {
        let u = Vector::from_fn(k, |_, _| {
            let i = idx % g;
            idx /= g;
            half * (-1.0 + (2 * i + 1) as f64 / g as f64)
        });
        let a = world_point(cube, &u);
        let c = clearance(&a);
        if best.as_ref().is_none_or(|(b, _)| c > *b) {
            best = Some((c, u));
        }
    }
    let (c, u) = best.expect("nonempty probe grid");
    if !(c > 0.0) {
        return Err(Error::SearchFailed {
            context: format!("point off the support in {cube}"),
            best_ratio: 0.0,
            limit: 0.0,
        });
    }
    let to_boundary = half - u.amax();
    let center = world_point(cube, &u);
    Ok(CenterChoice {
        center: center.iter().cloned().collect(),
        eps: eps.min(to_boundary / 256.0),
        branch: CenterBranch::OffSupport,
        ratios: vec![0.0; count],
        limit: 1.0 + opts.slack,
        candidates: total,
        clearance: c,
        misalignment: None,
    })
}
