//! Face combinatorics of the cube `Q = [−1, 1]^n`.

use serde::{Deserialize, Serialize};

use crate::grassmann::Plane;
use crate::linalg::Vector;

/// A sign vector `κ ∈ {−1, 0, 1}^n` naming a relatively open face of `Q`
/// and the region of points whose nearest point lies on it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaceIndex(Vec<i8>);

impl FaceIndex {
    pub fn new(kappa: Vec<i8>) -> Option<Self> {
        kappa.iter().all(|k| (-1..=1).contains(k)).then_some(Self(kappa))
    }

    /// The region index of `x`: `κ_j = 0` iff `|x_j| < 1`, otherwise the sign.
    pub fn of_point(x: &Vector) -> Self {
        Self(
            x.iter()
                .map(|&v| {
                    if v >= 1.0 {
                        1
                    } else if v <= -1.0 {
                        -1
                    } else {
                        0
                    }
                })
                .collect(),
        )
    }

    /// Every index of the `n`-cube, `3^n` of them.
    pub fn all(n: usize) -> Vec<FaceIndex> {
        let mut out = vec![Vec::with_capacity(n)];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|k| {
                    [-1i8, 0, 1].into_iter().map(move |s| {
                        let mut k = k.clone();
                        k.push(s);
                        k
                    })
                })
                .collect();
        }
        out.into_iter().map(FaceIndex).collect()
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn ambient_dim(&self) -> usize {
        self.0.len()
    }

    /// Dimension of the face, the number of free coordinates.
    pub fn dim(&self) -> usize {
        self.0.iter().filter(|&&k| k == 0).count()
    }

    pub fn free_axes(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&j| self.0[j] == 0).collect()
    }

    /// Center `c_κ = Σ κ_j e_j`.
    pub fn center(&self) -> Vector {
        Vector::from_iterator(self.0.len(), self.0.iter().map(|&k| k as f64))
    }

    /// Tangent space spanned by the free axes.
    pub fn tangent(&self) -> Plane {
        Plane::coordinate(self.0.len(), &self.free_axes())
    }

    /// `x ∈ C_κ`.
    pub fn region_contains(&self, x: &Vector) -> bool {
        self.0.iter().zip(x.iter()).all(|(&k, &v)| {
            if k == 0 {
                v.abs() < 1.0
            } else {
                v * k as f64 >= 1.0
            }
        })
    }

    /// `x` lies in the closure of `C_κ` up to `tol`.
    pub fn region_closure_contains(&self, x: &Vector, tol: f64) -> bool {
        self.0.iter().zip(x.iter()).all(|(&k, &v)| {
            if k == 0 {
                v.abs() <= 1.0 + tol
            } else {
                v * k as f64 >= 1.0 - tol
            }
        })
    }

    /// `x` lies in the closed face `Clos F_κ` up to `tol`.
    pub fn face_closure_contains(&self, x: &Vector, tol: f64) -> bool {
        self.0.iter().zip(x.iter()).all(|(&k, &v)| {
            if k == 0 {
                v.abs() <= 1.0 + tol
            } else {
                (v - k as f64).abs() <= tol
            }
        })
    }

    /// `x` lies in the relatively open face `F_κ`, fixed coordinates matched
    /// up to `tol`.
    pub fn face_contains(&self, x: &Vector, tol: f64) -> bool {
        self.0.iter().zip(x.iter()).all(|(&k, &v)| {
            if k == 0 {
                v.abs() < 1.0
            } else {
                (v - k as f64).abs() <= tol
            }
        })
    }

    /// Deviation of `x` from the affine space `c_κ + T_κ`.
    pub fn affine_offset(&self, x: &Vector) -> f64 {
        self.0
            .iter()
            .zip(x.iter())
            .filter(|(k, _)| **k != 0)
            .map(|(&k, &v)| (v - k as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Deviation of `x` from `T_κ`.
    pub fn tangent_offset(&self, x: &Vector) -> f64 {
        self.0
            .iter()
            .zip(x.iter())
            .filter(|(k, _)| **k != 0)
            .map(|(_, &v)| v.abs())
            .fold(0.0, f64::max)
    }
}

/// Nearest point of `Q` and the region index of `x`.
pub fn nearest_point_cube(x: &Vector) -> (Vector, FaceIndex) {
    (x.map(|v| v.clamp(-1.0, 1.0)), FaceIndex::of_point(x))
}

/// Euclidean distance from `x` to `Q`.
pub fn dist_to_cube(x: &Vector) -> f64 {
    x.iter().map(|v| (v.abs() - 1.0).max(0.0).powi(2)).sum::<f64>().sqrt()
}

/// Euclidean distance from `x` to `∂Q`.
pub fn dist_to_cube_boundary(x: &Vector) -> f64 {
    let outside = dist_to_cube(x);
    if outside > 0.0 {
        outside
    } else {
        x.iter().map(|v| 1.0 - v.abs()).fold(f64::INFINITY, f64::min)
    }
}

/// The neighbouring box `R_λ` for `λ ∈ {−2, −1, 1, 2}^n`.
pub fn neighbour_box_contains(lambda: &[i8], x: &Vector, tol: f64) -> bool {
    lambda.iter().zip(x.iter()).all(|(&l, &v)| {
        let s = v * l.signum() as f64;
        if l.abs() == 1 {
            (1.0 - tol..=2.0 + tol).contains(&s)
        } else {
            (-tol..=2.0 + tol).contains(&s)
        }
    })
}
