use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::cubical::cube::DyadicCube;
use crate::error::{Error, Result};
use crate::region::Region;

/// How a Whitney family was cut off.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub start_level: i32,
    pub finest_level: i32,
    /// Cubes at the finest level that still failed the distance condition.
    pub dropped: usize,
    /// Cubes split to restore the side-ratio condition after a conservative
    /// containment test.
    pub balanced: usize,
    /// Whether every containment test was exact.
    pub exact: bool,
}

/// A finite family of top-dimensional dyadic cubes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeFamily {
    ambient_dim: usize,
    cubes: Vec<DyadicCube>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truncation: Option<Truncation>,
}

/// A violation of the pairwise admissibility conditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Overlap(usize, usize),
    SideRatio(usize, usize),
}

impl CubeFamily {
    pub fn new(ambient_dim: usize, mut cubes: Vec<DyadicCube>) -> Result<Self> {
        for c in &cubes {
            Error::check_dim("cube", ambient_dim, c.ambient_dim())?;
            if c.dim() != ambient_dim {
                return Err(Error::NotAdmissible(format!("{c} is not top-dimensional")));
            }
        }
        cubes.sort();
        cubes.dedup();
        Ok(Self {
            ambient_dim,
            cubes,
            truncation: None,
        })
    }

    /// The unit-level grid `Π [lo_j, hi_j)` of cubes of side `2^{−level}`.
    pub fn grid(level: i32, lo: &[i64], hi: &[i64]) -> Self {
        let n = lo.len();
        let mut cubes = Vec::new();
        let mut corner = lo.to_vec();
        if lo.iter().zip(hi).any(|(l, h)| l >= h) {
            return Self {
                ambient_dim: n,
                cubes,
                truncation: None,
            };
        }
        loop {
            cubes.push(DyadicCube::top(level, corner.clone()));
            let mut j = 0;
            loop {
                if j == n {
                    cubes.sort();
                    return Self {
                        ambient_dim: n,
                        cubes,
                        truncation: None,
                    };
                }
                corner[j] += 1;
                if corner[j] < hi[j] {
                    break;
                }
                corner[j] = lo[j];
                j += 1;
            }
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn cubes(&self) -> &[DyadicCube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn truncation(&self) -> Option<&Truncation> {
        self.truncation.as_ref()
    }

    pub fn contains(&self, cube: &DyadicCube) -> bool {
        self.cubes.binary_search(cube).is_ok()
    }

    pub fn min_side(&self) -> f64 {
        self.cubes.iter().map(|c| c.side()).fold(f64::INFINITY, f64::min)
    }

    /// Pairs of cubes whose closures meet, found through a hash of the
    /// coarsest-level cells.
    fn touching_pairs(&self) -> Vec<(usize, usize)> {
        let Some(coarse) = self.cubes.iter().map(|c| c.level()).min() else {
            return Vec::new();
        };
        let n = self.ambient_dim;
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, c) in self.cubes.iter().enumerate() {
            let shift = (c.level() - coarse) as u32;
            let key: Vec<i64> = c.corner().iter().map(|v| v >> shift).collect();
            cells.entry(key).or_default().push(i);
        }
        let mut pairs = BTreeSet::new();
        for (key, members) in &cells {
            for code in 0..3usize.pow(n as u32) {
                let mut other = key.clone();
                let mut c = code;
                for v in other.iter_mut() {
                    *v += (c % 3) as i64 - 1;
                    c /= 3;
                }
                let Some(others) = cells.get(&other) else { continue };
                for &i in members {
                    for &j in others {
                        if i < j && self.cubes[i].intersects(&self.cubes[j]) {
                            pairs.insert((i, j));
                        }
                    }
                }
            }
        }
        pairs.into_iter().collect()
    }

    /// Violations of the interior-disjointness and side-ratio conditions.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (i, j) in self.touching_pairs() {
            let (a, b) = (&self.cubes[i], &self.cubes[j]);
            if a.interiors_meet(b) {
                out.push(Violation::Overlap(i, j));
            } else if (a.level() - b.level()).abs() > 1 {
                out.push(Violation::SideRatio(i, j));
            }
        }
        out
    }

    /// Check the pairwise admissibility conditions. The boundary-covering
    /// condition cannot hold for a finite family and is reported separately
    /// by [`CubeFamily::uncovered_facets`].
    pub fn check_admissible(&self) -> Result<()> {
        match self.violations().first() {
            None => Ok(()),
            Some(Violation::Overlap(i, j)) => Err(Error::NotAdmissible(format!(
                "{} and {} have overlapping interiors",
                self.cubes[*i], self.cubes[*j]
            ))),
            Some(Violation::SideRatio(i, j)) => Err(Error::NotAdmissible(format!(
                "{} and {} touch with side ratio {}",
                self.cubes[*i],
                self.cubes[*j],
                self.cubes[*i].side() / self.cubes[*j].side()
            ))),
        }
    }

    /// Number of facets of member cubes not covered by the other members:
    /// the frontier of the finite family.
    pub fn uncovered_facets(&self) -> usize {
        let mut count = 0;
        let members: HashSet<&DyadicCube> = self.cubes.iter().collect();
        for c in &self.cubes {
            for (idx, facet) in c.facets().iter().enumerate() {
                let axis = facet_normal(c, idx);
                let outward = if idx % 2 == 0 { -1 } else { 1 };
                let covered = [c.level() - 1, c.level(), c.level() + 1].into_iter().any(|level| {
                    facet_covered(facet, axis, outward, level, &members)
                });
                if !covered {
                    count += 1;
                }
            }
        }
        count
    }

    /// `rings`-fold closed neighbourhood of `cube` in the family.
    pub fn neighbors(&self, cube: &DyadicCube, rings: usize) -> Result<CubeFamily> {
        if !self.contains(cube) {
            return Err(Error::param("cube", cube, "is not a member of the family"));
        }
        let mut set: BTreeSet<DyadicCube> = BTreeSet::from([cube.clone()]);
        for _ in 0..rings {
            let next: Vec<DyadicCube> = self
                .cubes
                .iter()
                .filter(|c| !set.contains(*c) && set.iter().any(|f| f.intersects(c)))
                .cloned()
                .collect();
            if next.is_empty() {
                break;
            }
            set.extend(next);
        }
        Ok(CubeFamily {
            ambient_dim: self.ambient_dim,
            cubes: set.into_iter().collect(),
            truncation: None,
        })
    }
}

fn facet_normal(cube: &DyadicCube, facet_index: usize) -> usize {
    cube.axes()[facet_index / 2]
}

/// Whether the facet is covered by cubes of `level` on its outer side.
fn facet_covered(
    facet: &DyadicCube,
    axis: usize,
    outward: i64,
    level: i32,
    members: &HashSet<&DyadicCube>,
) -> bool {
    let fine = facet.level().max(level);
    let ext = facet.extent_at(fine);
    let shift = (fine - level) as u32;
    let unit = 1i64 << shift;
    let plane = ext[axis].0;
    if plane % unit != 0 {
        return false;
    }
    let n = ext.len();
    let mut ranges: Vec<(i64, i64)> = Vec::with_capacity(n);
    for (j, &(lo, hi)) in ext.iter().enumerate() {
        if j == axis {
            let c = if outward > 0 { plane >> shift } else { (plane >> shift) - 1 };
            ranges.push((c, c + 1));
        } else {
            ranges.push((lo.div_euclid(unit), (hi + unit - 1).div_euclid(unit).max(lo.div_euclid(unit) + 1)));
        }
    }
    let mut corner: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        if !members.contains(&DyadicCube::top(level, corner.clone())) {
            return false;
        }
        let mut j = 0;
        loop {
            if j == n {
                return true;
            }
            corner[j] += 1;
            if corner[j] < ranges[j].1 {
                break;
            }
            corner[j] = ranges[j].0;
            j += 1;
        }
    }
}

/// Options bounding the enumeration of a Whitney family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhitneyOptions {
    /// Level of the initial tiling; by default the coarsest level whose side
    /// does not exceed the smallest extent of the bounding box.
    #[serde(default)]
    pub start_level: Option<i32>,
    /// Cubes finer than `2^{−finest_level}` are not produced.
    pub finest_level: i32,
}

/// Cubes `K` with `dist_∞(K, R^n ∖ U) > 2·side K` whose parent fails the same
/// test, enumerated top-down inside the box `[lo, hi]`.
pub fn whitney_family(region: &Region, lo: &[f64], hi: &[f64], opts: &WhitneyOptions) -> Result<CubeFamily> {
    let n = lo.len();
    Error::check_dim("bounding box", n, hi.len())?;
    Error::check_dim("region", n, region.dim())?;
    if lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
        return Err(Error::param("bbox", format!("{lo:?}..{hi:?}"), "must have positive extent"));
    }
    let extent = lo.iter().zip(hi).map(|(l, h)| h - l).fold(f64::INFINITY, f64::min);
    let start = opts.start_level.unwrap_or_else(|| (-extent.log2()).ceil() as i32);
    if opts.finest_level < start {
        return Err(Error::param("finest_level", opts.finest_level, "is coarser than the start level"));
    }
    let side = (-start as f64).exp2();
    let first: Vec<i64> = lo.iter().map(|v| (v / side).floor() as i64).collect();
    let last: Vec<i64> = hi.iter().map(|v| (v / side).ceil() as i64).collect();
    let mut pending = CubeFamily::grid(start, &first, &last).cubes;
    let meets_box = |c: &DyadicCube| {
        let (clo, chi) = (c.lo(), c.hi());
        (0..n).all(|j| clo[j] < hi[j] && lo[j] < chi[j])
    };
    let mut out = Vec::new();
    let mut dropped = 0;
    while !pending.is_empty() {
        let mut next = Vec::new();
        for c in pending {
            if !meets_box(&c) {
                continue;
            }
            let pad = 2.0 * c.side();
            let (clo, chi) = (c.lo().add_scalar(-pad), c.hi().add_scalar(pad));
            if region.contains_closed_box(clo.as_slice(), chi.as_slice()) {
                out.push(c);
            } else if !region.may_meet_closed_box(c.lo().as_slice(), c.hi().as_slice()) {
                continue;
            } else if c.level() < opts.finest_level {
                next.extend(c.children());
            } else {
                dropped += 1;
            }
        }
        pending = next;
    }
    let mut family = CubeFamily::new(n, out)?;
    let balanced = family.balance();
    family.truncation = Some(Truncation {
        start_level: start,
        finest_level: opts.finest_level,
        dropped,
        balanced,
        exact: region.box_test_is_exact(),
    });
    Ok(family)
}

impl CubeFamily {
    /// Split cubes touching a cube more than twice smaller until the family
    /// satisfies the side-ratio condition. Returns the number of splits.
    fn balance(&mut self) -> usize {
        let mut splits = 0;
        loop {
            let bad: BTreeSet<usize> = self
                .violations()
                .into_iter()
                .filter_map(|v| match v {
                    Violation::SideRatio(i, j) => {
                        Some(if self.cubes[i].level() < self.cubes[j].level() { i } else { j })
                    }
                    Violation::Overlap(..) => None,
                })
                .collect();
            if bad.is_empty() {
                return splits;
            }
            let mut cubes = Vec::with_capacity(self.cubes.len() + bad.len() * (1 << self.ambient_dim));
            for (i, c) in self.cubes.drain(..).enumerate() {
                if bad.contains(&i) {
                    splits += 1;
                    cubes.extend(c.children());
                } else {
                    cubes.push(c);
                }
            }
            cubes.sort();
            self.cubes = cubes;
        }
    }
}
