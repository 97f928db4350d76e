use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cubical::cube::DyadicCube;
use crate::cubical::family::CubeFamily;
use crate::error::{Error, Result};

/// The cubical complex of an admissible family: faces of its cubes, with a
/// face replaced by its subdivision wherever a finer face of the same
/// dimension overlaps it.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicalComplex {
    ambient_dim: usize,
    by_dim: Vec<Vec<DyadicCube>>,
    members: HashSet<DyadicCube>,
}

pub fn cubical_complex(family: &CubeFamily) -> Result<CubicalComplex> {
    family.check_admissible()?;
    let n = family.ambient_dim();
    let mut faces: HashSet<DyadicCube> = HashSet::new();
    for c in family.cubes() {
        faces.extend(c.faces());
    }
    let coarsest = family.cubes().iter().map(|c| c.level()).min().unwrap_or(0);
    let mut covered: HashSet<DyadicCube> = HashSet::new();
    for f in &faces {
        if f.dim() == 0 {
            continue;
        }
        let mut up = f.parent();
        while let Some(p) = up {
            if p.level() < coarsest {
                break;
            }
            if faces.contains(&p) {
                covered.insert(p.clone());
            }
            up = p.parent();
        }
    }
    let members: HashSet<DyadicCube> = faces.into_iter().filter(|f| !covered.contains(f)).collect();
    let mut by_dim = vec![Vec::new(); n + 1];
    for m in &members {
        by_dim[m.dim()].push(m.clone());
    }
    for v in &mut by_dim {
        v.sort();
    }
    Ok(CubicalComplex {
        ambient_dim: n,
        by_dim,
        members,
    })
}

#[derive(Serialize, Deserialize)]
struct ComplexRecord {
    ambient_dim: usize,
    levels: BTreeMap<i32, Vec<DyadicCube>>,
}

impl CubicalComplex {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Cubes of dimension exactly `k`.
    pub fn skeleton(&self, k: usize) -> &[DyadicCube] {
        self.by_dim.get(k).map_or(&[], |v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, cube: &DyadicCube) -> bool {
        self.members.contains(cube)
    }

    /// All members, ordered by dimension descending, then side descending.
    pub fn cubes(&self) -> impl Iterator<Item = &DyadicCube> {
        self.by_dim.iter().rev().flatten()
    }

    /// Members of dimension `dim K − 1` tiling the relative boundary of `K`.
    pub fn boundary(&self, cube: &DyadicCube) -> Vec<DyadicCube> {
        let finest = self.members.iter().map(|m| m.level()).max().unwrap_or(cube.level());
        let mut out = Vec::new();
        let mut stack = cube.facets();
        while let Some(f) = stack.pop() {
            if self.members.contains(&f) {
                out.push(f);
            } else if f.level() < finest {
                stack.extend(f.children());
            }
        }
        out.sort();
        out
    }

    /// Facets of members not tiled by members: empty for a closed complex.
    pub fn unresolved_facets(&self) -> Vec<DyadicCube> {
        let mut out = Vec::new();
        for k in 1..=self.ambient_dim {
            for c in self.skeleton(k) {
                let got = self.boundary(c);
                let expected: f64 = c.facets().iter().map(|f| f.side().powi(f.dim() as i32)).sum();
                let found: f64 = got.iter().map(|f| f.side().powi(f.dim() as i32)).sum();
                if (expected - found).abs() > 1e-12 * expected.max(1.0) {
                    out.push(c.clone());
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut levels: BTreeMap<i32, Vec<DyadicCube>> = BTreeMap::new();
        for c in self.cubes() {
            levels.entry(c.level()).or_default().push(c.clone());
        }
        let record = ComplexRecord {
            ambient_dim: self.ambient_dim,
            levels,
        };
        serde_json::to_string_pretty(&record).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: ComplexRecord = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut by_dim = vec![Vec::new(); record.ambient_dim + 1];
        let mut members = HashSet::new();
        for c in record.levels.into_values().flatten() {
            Error::check_dim("cube", record.ambient_dim, c.ambient_dim())?;
            by_dim[c.dim()].push(c.clone());
            members.insert(c);
        }
        for v in &mut by_dim {
            v.sort();
        }
        Ok(Self {
            ambient_dim: record.ambient_dim,
            by_dim,
            members,
        })
    }

    /// Wavefront OBJ of the skeleta of dimension ≤ `max_dim` (vertices, edges
    /// as lines, squares as quads) for ambient dimension 2 or 3.
    pub fn to_obj(&self, max_dim: usize) -> Result<String> {
        obj_export(self.cubes().filter(|c| c.dim() <= max_dim && c.dim() >= 1), self.ambient_dim)
    }
}

/// OBJ text for edges and squares in `R^2` or `R^3`.
pub fn obj_export<'a, I>(cubes: I, ambient_dim: usize) -> Result<String>
where
    I: IntoIterator<Item = &'a DyadicCube>,
{
    if !(2..=3).contains(&ambient_dim) {
        return Err(Error::param("ambient_dim", ambient_dim, "OBJ export needs dimension 2 or 3"));
    }
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut vertices = String::new();
    let mut elements = String::new();
    let mut vertex = |p: Vec<f64>, vertices: &mut String| -> usize {
        let key: Vec<u64> = p.iter().map(|v| v.to_bits()).collect();
        let next = index.len() + 1;
        *index.entry(key).or_insert_with(|| {
            let z = p.get(2).copied().unwrap_or(0.0);
            let _ = writeln!(vertices, "v {} {} {}", p[0], p[1], z);
            next
        })
    };
    for c in cubes {
        let lo = c.lo();
        let s = c.side();
        let at = |offsets: &[usize]| {
            let mut p: Vec<f64> = lo.iter().copied().collect();
            for &a in offsets {
                p[a] += s;
            }
            p
        };
        match c.axes() {
            [a] => {
                let i = vertex(at(&[]), &mut vertices);
                let j = vertex(at(&[*a]), &mut vertices);
                let _ = writeln!(elements, "l {i} {j}");
            }
            [a, b] => {
                let ids = [at(&[]), at(&[*a]), at(&[*a, *b]), at(&[*b])].map(|p| vertex(p, &mut vertices));
                let _ = writeln!(elements, "f {} {} {} {}", ids[0], ids[1], ids[2], ids[3]);
            }
            _ => {}
        }
    }
    Ok(format!("{vertices}{elements}"))
}
