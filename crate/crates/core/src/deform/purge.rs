//! Deformation onto the skeleton followed by small rotations that crush the
//! unrectifiable part.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cubemaps::{unrect_perturbation, UnrectOptions, UnrectPerturbation};
use crate::cubical::{cubical_complex, CubeFamily};
use crate::deform::center::Alignment;
use crate::deform::skeleton::{deform_onto_skeleton, DeformOptions, SkeletonDeformation};
use crate::error::{Error, Result};
use crate::linalg::{operator_norm, Matrix, Vector};
use crate::map::{Composite, MapRef, SmoothMap};
use crate::measure::{box_count, CoveringEstimate};
use crate::region::Region;
use crate::varifold::DiscreteVarifold;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PurgeOptions {
    /// Grid level of the cubes laid over the samples.
    pub level: i32,
    /// Epsilon of the skeleton deformation; `side/32` when unset.
    pub deform_eps: Option<f64>,
    /// Covering resolution of the unrectifiable set; its spacing when unset.
    pub resolution: Option<f64>,
    /// Covering resolution of the rectifiable set; its spacing when unset.
    pub rect_resolution: Option<f64>,
    /// Prefer centres that see the unrectifiable set along the axes.
    pub align_axes: bool,
    /// Probes per ball for the sampled `‖Dρ − I‖`.
    pub probes_per_ball: usize,
    pub deform: DeformOptions,
    pub unrect: UnrectOptions,
}

impl Default for PurgeOptions {
    fn default() -> Self {
        Self {
            level: 0,
            deform_eps: None,
            resolution: None,
            rect_resolution: None,
            align_axes: true,
            probes_per_ball: 64,
            deform: DeformOptions::default(),
            unrect: UnrectOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurgeReport {
    pub eps: f64,
    pub deform_eps: f64,
    pub cubes: usize,
    pub balls: usize,
    /// Covering estimates of `S_u`, of `g₁[S_u]` and of `g[S_u]`.
    pub unrect_input: CoveringEstimate,
    pub unrect_baseline: CoveringEstimate,
    pub unrect_image: CoveringEstimate,
    pub unrect_ratio: f64,
    /// Covering estimates of `S_r` and `g[S_r]`.
    pub rect_input: CoveringEstimate,
    pub rect_image: CoveringEstimate,
    /// `Γ_emp = H^m(g[S_r]) / H^m(S_r)`.
    pub rect_ratio: f64,
    /// Largest sampled `‖Dρ − I‖`.
    pub max_deviation: f64,
    /// Largest analytic bound on `‖Dρ − I‖` over the balls.
    pub deviation_bound: f64,
}

#[derive(Clone)]
pub struct Purge {
    pub deformation: SkeletonDeformation,
    pub perturbation: Arc<UnrectPerturbation>,
    pub report: PurgeReport,
    map: Arc<Composite>,
}

impl Purge {
    /// `g = g₁ ∘ ρ`.
    pub fn map(&self) -> MapRef {
        self.map.clone()
    }
}

/// Grid cubes over the bounding box of the points, with one extra ring.
fn cover_block(points: &[&Vector], n: usize, level: i32) -> (Vec<i64>, Vec<i64>) {
    let side = (2.0f64).powi(-level);
    let mut lo = vec![i64::MAX; n];
    let mut hi = vec![i64::MIN; n];
    for p in points {
        for j in 0..n {
            let c = (p[j] / side).floor() as i64;
            lo[j] = lo[j].min(c - 1);
            hi[j] = hi[j].max(c + 2);
        }
    }
    (lo, hi)
}

pub fn purge_unrectifiable(s_r: &DiscreteVarifold, s_u: &DiscreteVarifold, region: &Region, eps: f64, opts: &PurgeOptions) -> Result<Purge> {
    let n = s_r.ambient_dim();
    let m = s_r.dim();
    Error::check_dim("unrectifiable ambient", n, s_u.ambient_dim())?;
    Error::check_dim("unrectifiable dim", m, s_u.dim())?;
    if !(eps > 0.0) {
        return Err(Error::param("eps", eps, "must be positive"));
    }
    let points: Vec<&Vector> = s_r.points().chain(s_u.points()).collect();
    if points.is_empty() {
        return Err(Error::param("sets", 0, "nothing to purge"));
    }
    let side = (2.0f64).powi(-opts.level);
    let deform_eps = opts.deform_eps.unwrap_or(side / 32.0);
    let (lo, hi) = cover_block(&points, n, opts.level);
    let family = CubeFamily::grid(opts.level, &lo, &hi);
    let block_lo: Vec<f64> = lo.iter().map(|&c| c as f64 * side).collect();
    let block_hi: Vec<f64> = hi.iter().map(|&c| c as f64 * side).collect();
    let grown_lo: Vec<f64> = block_lo.iter().map(|v| v - deform_eps).collect();
    let grown_hi: Vec<f64> = block_hi.iter().map(|v| v + deform_eps).collect();
    if !region.contains_closed_box(&grown_lo, &grown_hi) {
        return Err(Error::NotAdmissible(format!(
            "cube block {:?}..{:?} plus eps does not fit in the region",
            block_lo, block_hi
        )));
    }
    let complex = cubical_complex(&family)?;
    let mut dopts = opts.deform.clone();
    if opts.align_axes && !s_u.is_empty() {
        dopts.center.align = Some(Alignment {
            measure: 1,
            directions: (0..n).map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect(),
        });
    }
    let deformation = deform_onto_skeleton(&family, &complex, &[s_r.clone(), s_u.clone()], m, deform_eps, &dopts)?;
    let g1: MapRef = Arc::new(deformation.plan.g1());

    let resolution = opts.resolution.unwrap_or_else(|| s_u.spacing());
    let sampled = s_u.support(resolution);
    let inner = Region::open_box(block_lo, block_hi);
    let rho = Arc::new(unrect_perturbation(&sampled, g1.as_ref(), &inner, eps, &opts.unrect)?);
    let map = Arc::new(Composite::new(vec![rho.clone() as MapRef, g1.clone()])?);

    let mut max_deviation: f64 = 0.0;
    let mut deviation = |x: &Vector| -> Result<()> {
        let d = rho.jacobian(x)?;
        max_deviation = max_deviation.max(operator_norm(&(d - Matrix::identity(n, n))));
        Ok(())
    };
    for x in &sampled.points {
        deviation(x)?;
    }
    let probes = opts.probes_per_ball.max(1);
    for ball in rho.balls() {
        for i in 0..probes {
            let r = ball.outer * (i as f64 + 0.5) / probes as f64;
            let mut x = ball.center.clone();
            let t = i as f64 * 2.399_963_229_728_653;
            x[0] += r * t.cos();
            if n > 1 {
                x[1] += r * t.sin();
            }
            deviation(&x)?;
        }
    }
    let deviation_bound = rho.balls().iter().map(|b| b.derivative_deviation_bound()).fold(0.0, f64::max);

    let report_u = *rho.report();
    let rect_resolution = opts.rect_resolution.unwrap_or_else(|| s_r.spacing());
    let (rect_input, rect_image) = if s_r.is_empty() || !(rect_resolution > 0.0) {
        let empty = box_count(std::iter::empty(), rect_resolution.max(f64::MIN_POSITIVE), m);
        (empty, empty)
    } else {
        let images = s_r.points().map(|x| map.value(x)).collect::<Result<Vec<_>>>()?;
        (box_count(s_r.points(), rect_resolution, m), box_count(&images, rect_resolution, m))
    };
    let rect_ratio = if rect_input.value > 0.0 { rect_image.value / rect_input.value } else { 0.0 };
    let report = PurgeReport {
        eps,
        deform_eps,
        cubes: family.len(),
        balls: rho.balls().len(),
        unrect_input: report_u.input,
        unrect_baseline: report_u.baseline_image,
        unrect_image: report_u.image,
        unrect_ratio: report_u.ratio(),
        rect_input,
        rect_image,
        rect_ratio,
        max_deviation,
        deviation_bound,
    };
    Ok(Purge {
        deformation,
        perturbation: rho,
        report,
        map,
    })
}
