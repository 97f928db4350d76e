//! Covering estimates of Hausdorff measure for sampled sets.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::linalg::Vector;

/// Volume of the unit ball in `R^m`.
pub fn unit_ball_volume(m: usize) -> f64 {
    match m {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / m as f64 * unit_ball_volume(m - 2),
    }
}

/// A box-counting estimate `N·δ^m` together with the resolution `δ` it was
/// taken at.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringEstimate {
    pub resolution: f64,
    pub boxes: usize,
    pub dim: usize,
    pub value: f64,
}

/// Count grid boxes of side `resolution` meeting the points.
pub fn box_count<'a, I>(points: I, resolution: f64, dim: usize) -> CoveringEstimate
where
    I: IntoIterator<Item = &'a Vector>,
{
    let mut cells: HashSet<Vec<i64>> = HashSet::new();
    for p in points {
        cells.insert(p.iter().map(|v| (v / resolution).floor() as i64).collect());
    }
    let boxes = cells.len();
    CoveringEstimate {
        resolution,
        boxes,
        dim,
        value: boxes as f64 * resolution.powi(dim as i32),
    }
}

/// A finite sample of an `m`-dimensional set, with the grid resolution at
/// which it is dense.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledSet {
    pub points: Vec<Vector>,
    pub dim: usize,
    pub resolution: f64,
}

impl SampledSet {
    pub fn new(points: Vec<Vector>, dim: usize, resolution: f64) -> Self {
        Self { points, dim, resolution }
    }

    pub fn ambient_dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn measure(&self) -> CoveringEstimate {
        box_count(&self.points, self.resolution, self.dim)
    }

    /// Covering estimate of the image under `f` at the same resolution.
    pub fn image_measure<F: Fn(&Vector) -> Vector>(&self, f: F) -> CoveringEstimate {
        let img: Vec<Vector> = self.points.iter().map(f).collect();
        box_count(&img, self.resolution, self.dim)
    }
}

/// Cell centers of the depth-`depth` four-corner Cantor set in `[0, 1]²`:
/// each square keeps its four corner subsquares of a quarter side.
pub fn four_corner_cantor(depth: u32) -> SampledSet {
    let mut cells = vec![(0.0f64, 0.0f64)];
    let mut side = 1.0;
    for _ in 0..depth {
        side /= 4.0;
        let mut next = Vec::with_capacity(cells.len() * 4);
        for (x, y) in cells {
            for (dx, dy) in [(0.0, 0.0), (3.0, 0.0), (0.0, 3.0), (3.0, 3.0)] {
                next.push((x + dx * side, y + dy * side));
            }
        }
        cells = next;
    }
    let points = cells
        .into_iter()
        .map(|(x, y)| Vector::from_vec(vec![x + 0.5 * side, y + 0.5 * side]))
        .collect();
    SampledSet::new(points, 1, side)
}
