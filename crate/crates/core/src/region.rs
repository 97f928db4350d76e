//! Open regions of `R^n` given by closed-form oracles.

use serde::{Deserialize, Serialize};

use crate::linalg::Vector;
use crate::map::Support;

/// An open subset of `R^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Region {
    Whole { n: usize },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    /// `R^n` minus one point.
    Punctured { point: Vec<f64> },
    Union { parts: Vec<Region> },
}

const SUBDIVISION_DEPTH: u32 = 6;

impl Region {
    pub fn open_box(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Region::Box { lo, hi }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Whole { n } => *n,
            Region::Box { lo, .. } => lo.len(),
            Region::Ball { center, .. } => center.len(),
            Region::Punctured { point } => point.len(),
            Region::Union { parts } => parts.first().map_or(0, |p| p.dim()),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Whole { .. } => true,
            Region::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| l < v && v < h),
            Region::Ball { center, radius } => dist2(x, center) < radius * radius,
            Region::Punctured { point } => x != point.as_slice(),
            Region::Union { parts } => parts.iter().any(|p| p.contains(x)),
        }
    }

    /// Euclidean distance to the complement. Exact except for unions, where
    /// the largest part distance is returned (a lower bound).
    pub fn dist_to_complement(&self, x: &[f64]) -> f64 {
        match self {
            Region::Whole { .. } => f64::INFINITY,
            Region::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (l, h))| (v - l).min(h - v))
                .fold(f64::INFINITY, f64::min)
                .max(0.0),
            Region::Ball { center, radius } => (radius - dist2(x, center).sqrt()).max(0.0),
            Region::Punctured { point } => dist2(x, point).sqrt(),
            Region::Union { parts } => parts.iter().map(|p| p.dist_to_complement(x)).fold(0.0, f64::max),
        }
    }

    /// Whether the closed box `[lo, hi]` lies inside the region. Exact for
    /// every variant except unions containing balls or punctures, where the
    /// answer is conservative (`false` may be returned for a contained box).
    pub fn contains_closed_box(&self, lo: &[f64], hi: &[f64]) -> bool {
        match self {
            Region::Whole { .. } => true,
            Region::Box { lo: blo, hi: bhi } => (0..lo.len()).all(|i| blo[i] < lo[i] && hi[i] < bhi[i]),
            Region::Ball { center, radius } => {
                let far: f64 = (0..lo.len())
                    .map(|i| {
                        let d = (lo[i] - center[i]).abs().max((hi[i] - center[i]).abs());
                        d * d
                    })
                    .sum();
                far < radius * radius
            }
            Region::Punctured { point } => !(0..lo.len()).all(|i| lo[i] <= point[i] && point[i] <= hi[i]),
            Region::Union { parts } => {
                if parts.iter().any(|p| p.contains_closed_box(lo, hi)) {
                    return true;
                }
                if parts.iter().all(|p| matches!(p, Region::Box { .. })) {
                    union_of_boxes_contains(parts, lo, hi)
                } else {
                    subdivided_cover(parts, lo, hi, SUBDIVISION_DEPTH)
                }
            }
        }
    }

    /// Whether the closed box `[lo, hi]` may meet the region. Exact for boxes
    /// and balls, `true` for the other variants unless every part of a union
    /// misses the box.
    pub fn may_meet_closed_box(&self, lo: &[f64], hi: &[f64]) -> bool {
        match self {
            Region::Whole { .. } | Region::Punctured { .. } => true,
            Region::Box { lo: blo, hi: bhi } => (0..lo.len()).all(|i| blo[i] < hi[i] && lo[i] < bhi[i]),
            Region::Ball { center, radius } => {
                let near: f64 = (0..lo.len())
                    .map(|i| {
                        let d = center[i].clamp(lo[i], hi[i]) - center[i];
                        d * d
                    })
                    .sum();
                near < radius * radius
            }
            Region::Union { parts } => parts.iter().any(|p| p.may_meet_closed_box(lo, hi)),
        }
    }

    /// Whether the closed box `[lo, hi]` is tested exactly by
    /// [`Region::contains_closed_box`].
    pub fn box_test_is_exact(&self) -> bool {
        match self {
            Region::Union { parts } => parts.iter().all(|p| matches!(p, Region::Box { .. })),
            _ => true,
        }
    }

    /// Convex support hull used for maps built inside the region.
    pub fn support(&self) -> Support {
        match self {
            Region::Box { lo, hi } => Support::Box {
                lo: lo.clone(),
                hi: hi.clone(),
            },
            Region::Ball { center, radius } => Support::Ball {
                center: center.clone(),
                radius: *radius,
            },
            Region::Union { parts } => parts.iter().fold(Support::Empty, |acc, p| acc.hull(&p.support())),
            _ => Support::Everywhere,
        }
    }

    pub fn contains_vector(&self, x: &Vector) -> bool {
        self.contains(x.as_slice())
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Exact test for a closed box inside a union of open boxes. The breakpoints
/// of all box faces split `[lo, hi]` into strata (products of open intervals
/// and single breakpoints); each stratum lies wholly inside or outside every
/// open box, so testing one representative per stratum decides coverage.
fn union_of_boxes_contains(parts: &[Region], lo: &[f64], hi: &[f64]) -> bool {
    let n = lo.len();
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut cuts = vec![lo[i], hi[i]];
        for p in parts {
            if let Region::Box { lo: blo, hi: bhi } = p {
                for v in [blo[i], bhi[i]] {
                    if v > lo[i] && v < hi[i] {
                        cuts.push(v);
                    }
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut reps = Vec::with_capacity(2 * cuts.len());
        for (k, c) in cuts.iter().enumerate() {
            reps.push(*c);
            if let Some(next) = cuts.get(k + 1) {
                reps.push(0.5 * (c + next));
            }
        }
        axes.push(reps);
    }
    let mut idx = vec![0usize; n];
    let mut point = vec![0.0; n];
    loop {
        for i in 0..n {
            point[i] = axes[i][idx[i]];
        }
        if !parts.iter().any(|p| p.contains(&point)) {
            return false;
        }
        let mut k = 0;
        loop {
            if k == n {
                return true;
            }
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn subdivided_cover(parts: &[Region], lo: &[f64], hi: &[f64], depth: u32) -> bool {
    if parts.iter().any(|p| p.contains_closed_box(lo, hi)) {
        return true;
    }
    if depth == 0 {
        return false;
    }
    let n = lo.len();
    let mid: Vec<f64> = (0..n).map(|i| 0.5 * (lo[i] + hi[i])).collect();
    (0..1usize << n).all(|mask| {
        let mut clo = lo.to_vec();
        let mut chi = hi.to_vec();
        for i in 0..n {
            if mask >> i & 1 == 1 {
                clo[i] = mid[i];
            } else {
                chi[i] = mid[i];
            }
        }
        subdivided_cover(parts, &clo, &chi, depth - 1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlapping_open_boxes_cover_the_seam() {
        let u = Region::Union {
            parts: vec![
                Region::open_box(vec![0.0, 0.0], vec![2.0, 1.0]),
                Region::open_box(vec![1.0, 0.0], vec![3.0, 1.0]),
            ],
        };
        assert!(u.contains_closed_box(&[0.5, 0.25], &[2.5, 0.75]));
        assert!(!u.contains_closed_box(&[0.5, 0.25], &[2.5, 1.0]));
        let gap = Region::Union {
            parts: vec![
                Region::open_box(vec![0.0, 0.0], vec![1.0, 1.0]),
                Region::open_box(vec![1.0, 0.0], vec![2.0, 1.0]),
            ],
        };
        assert!(!gap.contains_closed_box(&[0.5, 0.25], &[1.5, 0.75]));
    }

    #[test]
    fn ball_and_puncture() {
        let b = Region::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        assert!(b.contains_closed_box(&[-0.7, -0.7], &[0.7, 0.7]));
        assert!(!b.contains_closed_box(&[-0.71, -0.71], &[0.71, 0.71]));
        let p = Region::Punctured { point: vec![0.0, 0.0] };
        assert!(!p.contains_closed_box(&[0.0, 0.0], &[1.0, 1.0]));
        assert!(p.contains_closed_box(&[0.25, 0.0], &[1.0, 1.0]));
        assert_eq!(p.dist_to_complement(&[3.0, 4.0]), 5.0);
    }

    #[test]
    fn region_json_roundtrip() {
        let u = Region::Union {
            parts: vec![Region::Ball {
                center: vec![0.0],
                radius: 1.0,
            }],
        };
        let s = serde_json::to_string(&u).unwrap();
        assert_eq!(serde_json::from_str::<Region>(&s).unwrap(), u);
        assert!(serde_json::from_str::<Region>(r#"{"kind":"whole","n":2,"extra":1}"#).is_err());
    }
}
