use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;

/// A `k`-dimensional dyadic cube `corner·2^{−level} + [0, 2^{−level}]^axes`
/// in `R^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DyadicCube {
    level: i32,
    corner: Vec<i64>,
    axes: Vec<usize>,
}

/// Coordinate extent of a cube at a fixed fine level: `(lo, hi)` in grid
/// units, `lo == hi` along directions the cube is flat in.
pub type Extent = Vec<(i64, i64)>;

impl DyadicCube {
    pub fn new(level: i32, corner: Vec<i64>, mut axes: Vec<usize>) -> Result<Self> {
        axes.sort_unstable();
        axes.dedup();
        if axes.iter().any(|&a| a >= corner.len()) {
            return Err(Error::param("axes", format!("{axes:?}"), "axis index exceeds the ambient dimension"));
        }
        Ok(Self { level, corner, axes })
    }

    /// Top-dimensional cube.
    pub fn top(level: i32, corner: Vec<i64>) -> Self {
        let axes = (0..corner.len()).collect();
        Self { level, corner, axes }
    }

    /// Vertex at `corner·2^{−level}`.
    pub fn vertex(level: i32, corner: Vec<i64>) -> Self {
        Self {
            level,
            corner,
            axes: Vec::new(),
        }
    }

    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn corner(&self) -> &[i64] {
        &self.corner
    }

    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    pub fn ambient_dim(&self) -> usize {
        self.corner.len()
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn side(&self) -> f64 {
        (-self.level as f64).exp2()
    }

    pub fn has_axis(&self, j: usize) -> bool {
        self.axes.binary_search(&j).is_ok()
    }

    pub fn lo(&self) -> Vector {
        let s = self.side();
        Vector::from_iterator(self.corner.len(), self.corner.iter().map(|&c| c as f64 * s))
    }

    pub fn hi(&self) -> Vector {
        let s = self.side();
        Vector::from_fn(self.corner.len(), |j, _| {
            (self.corner[j] + i64::from(self.has_axis(j))) as f64 * s
        })
    }

    pub fn center(&self) -> Vector {
        let s = self.side();
        Vector::from_fn(self.corner.len(), |j, _| {
            (self.corner[j] as f64 + if self.has_axis(j) { 0.5 } else { 0.0 }) * s
        })
    }

    /// Integer extent at a level at least as fine as the cube's own.
    pub fn extent_at(&self, level: i32) -> Extent {
        debug_assert!(level >= self.level);
        let shift = (level - self.level) as u32;
        let unit = 1i64 << shift;
        (0..self.corner.len())
            .map(|j| {
                let lo = self.corner[j] << shift;
                (lo, if self.has_axis(j) { lo + unit } else { lo })
            })
            .collect()
    }

    /// Closed-set containment `other ⊆ self`.
    pub fn contains(&self, other: &DyadicCube) -> bool {
        let level = self.level.max(other.level);
        let a = self.extent_at(level);
        let b = other.extent_at(level);
        a.iter().zip(&b).all(|(x, y)| x.0 <= y.0 && y.1 <= x.1)
    }

    /// `L` is a face of `K` iff `L ⊆ K` at the same level.
    pub fn is_face_of(&self, other: &DyadicCube) -> bool {
        self.level == other.level && other.contains(self)
    }

    /// Whether the closed cubes meet.
    pub fn intersects(&self, other: &DyadicCube) -> bool {
        let level = self.level.max(other.level);
        let a = self.extent_at(level);
        let b = other.extent_at(level);
        a.iter().zip(&b).all(|(x, y)| x.0 <= y.1 && y.0 <= x.1)
    }

    /// Whether the relative interiors meet.
    pub fn interiors_meet(&self, other: &DyadicCube) -> bool {
        let level = self.level.max(other.level);
        let a = self.extent_at(level);
        let b = other.extent_at(level);
        a.iter().zip(&b).all(|(x, y)| match (x.0 < x.1, y.0 < y.1) {
            (true, true) => x.0 < y.1 && y.0 < x.1,
            (true, false) => x.0 < y.0 && y.0 < x.1,
            (false, true) => y.0 < x.0 && x.0 < y.1,
            (false, false) => x.0 == y.0,
        })
    }

    /// All faces (every dimension, the cube itself included).
    pub fn faces(&self) -> Vec<DyadicCube> {
        let k = self.axes.len();
        let mut out = Vec::with_capacity(3usize.pow(k as u32));
        for code in 0..3usize.pow(k as u32) {
            let mut c = code;
            let mut corner = self.corner.clone();
            let mut axes = Vec::with_capacity(k);
            for &a in &self.axes {
                match c % 3 {
                    0 => axes.push(a),
                    1 => {}
                    _ => corner[a] += 1,
                }
                c /= 3;
            }
            out.push(DyadicCube {
                level: self.level,
                corner,
                axes,
            });
        }
        out
    }

    /// Faces of dimension exactly `dim − 1`.
    pub fn facets(&self) -> Vec<DyadicCube> {
        let mut out = Vec::with_capacity(2 * self.axes.len());
        for (i, &a) in self.axes.iter().enumerate() {
            let mut axes = self.axes.clone();
            axes.remove(i);
            for shift in [0, 1] {
                let mut corner = self.corner.clone();
                corner[a] += shift;
                out.push(DyadicCube {
                    level: self.level,
                    corner,
                    axes: axes.clone(),
                });
            }
        }
        out
    }

    /// The `2^dim` cubes of the next level tiling this one.
    pub fn children(&self) -> Vec<DyadicCube> {
        let k = self.axes.len();
        (0..1usize << k)
            .map(|mask| {
                let mut corner: Vec<i64> = self.corner.iter().map(|c| c * 2).collect();
                for (i, &a) in self.axes.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        corner[a] += 1;
                    }
                }
                DyadicCube {
                    level: self.level + 1,
                    corner,
                    axes: self.axes.clone(),
                }
            })
            .collect()
    }

    /// The cube of the previous level containing this one with the same
    /// axes, if the flat coordinates lie on the coarser grid.
    pub fn parent(&self) -> Option<DyadicCube> {
        let mut corner = Vec::with_capacity(self.corner.len());
        for (j, &c) in self.corner.iter().enumerate() {
            if !self.has_axis(j) && c.rem_euclid(2) != 0 {
                return None;
            }
            corner.push(c.div_euclid(2));
        }
        Some(DyadicCube {
            level: self.level - 1,
            corner,
            axes: self.axes.clone(),
        })
    }

    /// Map `[−1, 1]^dim` onto the cube along its axes.
    pub fn from_unit(&self, u: &Vector) -> Vector {
        let mut x = self.center();
        let h = 0.5 * self.side();
        for (i, &a) in self.axes.iter().enumerate() {
            x[a] += h * u[i];
        }
        x
    }

    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let corner: Vec<String> = self.corner.iter().map(|c| c.to_string()).collect();
        let axes: String = self.axes.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "N{}[{}]({})", self.level, corner.join(","), axes)
    }
}

/// Order by dimension descending, side descending, then lexicographically.
pub fn plan_order(a: &DyadicCube, b: &DyadicCube) -> Ordering {
    b.dim()
        .cmp(&a.dim())
        .then(a.level.cmp(&b.level))
        .then_with(|| a.axes.cmp(&b.axes))
        .then_with(|| a.corner.cmp(&b.corner))
}

impl PartialOrd for DyadicCube {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicCube {
    fn cmp(&self, other: &Self) -> Ordering {
        plan_order(self, other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_faces() {
        let q = DyadicCube::top(0, vec![0, 0]);
        let faces = q.faces();
        assert_eq!(faces.len(), 9);
        assert_eq!(faces.iter().filter(|f| f.dim() == 1).count(), 4);
        assert_eq!(faces.iter().filter(|f| f.dim() == 0).count(), 4);
        assert!(faces.iter().all(|f| f.is_face_of(&q)));
        assert_eq!(q.facets().len(), 4);
    }

    #[test]
    fn containment_across_levels() {
        let q = DyadicCube::top(0, vec![0, 0]);
        let child = DyadicCube::top(1, vec![1, 0]);
        assert!(q.contains(&child));
        assert!(!child.is_face_of(&q));
        assert_eq!(child.parent().unwrap(), q);
        let edge = DyadicCube::new(1, vec![1, 0], vec![1]).unwrap();
        assert!(edge.parent().is_none());
        let neighbour = DyadicCube::top(0, vec![1, 0]);
        assert!(q.intersects(&neighbour));
        assert!(!q.interiors_meet(&neighbour));
        assert!(q.interiors_meet(&child));
        assert_eq!(q.children().len(), 4);
    }

    #[test]
    fn geometry() {
        let e = DyadicCube::new(2, vec![1, 3, 0], vec![1]).unwrap();
        assert_eq!(e.side(), 0.25);
        assert_eq!(e.center().as_slice(), &[0.25, 0.875, 0.0]);
        assert_eq!(e.hi().as_slice(), &[0.25, 1.0, 0.0]);
        assert_eq!(e.to_string(), "N2[1,3,0](1)");
    }
}
