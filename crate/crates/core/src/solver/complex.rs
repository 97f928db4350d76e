use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use bitvec::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cubical::DyadicCube;
use crate::error::{Error, Result};

pub type Bits = BitVec<u64, Lsb0>;

/// Cells allowed in one complex before construction is refused.
pub const MAX_CELLS: usize = 4_000_000;

/// Axis-aligned box with corners on the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// All cubes of the dyadic grid at one level inside a box, with the mod-2
/// boundary operators.
#[derive(Debug)]
pub struct GridComplex {
    level: i32,
    lo: Vec<i64>,
    hi: Vec<i64>,
    cells: Vec<Vec<DyadicCube>>,
    index: Vec<HashMap<DyadicCube, usize>>,
    /// `facets[k][i]`: indices of the `(k−1)`-faces of the `i`-th `k`-cube.
    facets: Vec<Vec<Vec<usize>>>,
    /// `cofacets[k][i]`: indices of the `(k+1)`-cubes having the `i`-th `k`-cube as a face.
    cofacets: Vec<Vec<Vec<usize>>>,
}

impl GridComplex {
    /// Box `[lo, hi]` in units of `2^{−level}`.
    pub fn new(level: i32, lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        Error::check_dim("grid box", lo.len(), hi.len())?;
        let n = lo.len();
        if n == 0 {
            return Err(Error::param("box", "[]", "ambient dimension must be positive"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l >= h) {
            return Err(Error::param("box", format!("{lo:?}..{hi:?}"), "box must have positive extent"));
        }
        let mut total: usize = 0;
        for mask in 0..1usize << n {
            let mut count: usize = 1;
            for j in 0..n {
                let e = (hi[j] - lo[j]) as usize + usize::from(mask >> j & 1 == 0);
                count = count.saturating_mul(e);
            }
            total = total.saturating_add(count);
        }
        if total > MAX_CELLS {
            return Err(Error::param("box", total, "grid complex is too large"));
        }
        let mut cells: Vec<Vec<DyadicCube>> = vec![Vec::new(); n + 1];
        for mask in 0..1usize << n {
            let axes: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
            let top: Vec<i64> = (0..n).map(|j| if mask >> j & 1 == 1 { hi[j] - 1 } else { hi[j] }).collect();
            let mut corner = lo.clone();
            'outer: loop {
                cells[axes.len()].push(DyadicCube::new(level, corner.clone(), axes.clone())?);
                for j in 0..n {
                    if corner[j] < top[j] {
                        corner[j] += 1;
                        continue 'outer;
                    }
                    corner[j] = lo[j];
                }
                break;
            }
        }
        for list in &mut cells {
            list.sort();
        }
        let index: Vec<HashMap<DyadicCube, usize>> = cells
            .iter()
            .map(|list| list.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect())
            .collect();
        let mut facets = vec![Vec::new()];
        let mut cofacets: Vec<Vec<Vec<usize>>> = cells.iter().map(|l| vec![Vec::new(); l.len()]).collect();
        for k in 1..=n {
            let mut rows = Vec::with_capacity(cells[k].len());
            for (i, c) in cells[k].iter().enumerate() {
                let mut f: Vec<usize> = c.facets().iter().map(|f| index[k - 1][f]).collect();
                f.sort_unstable();
                for &j in &f {
                    cofacets[k - 1][j].push(i);
                }
                rows.push(f);
            }
            facets.push(rows);
        }
        Ok(Self {
            level,
            lo,
            hi,
            cells,
            index,
            facets,
            cofacets,
        })
    }

    /// Box given in coordinates, which must lie on the grid of `level`.
    pub fn from_box(level: i32, bx: &GridBox) -> Result<Self> {
        Error::check_dim("grid box", bx.lo.len(), bx.hi.len())?;
        let scale = (2.0f64).powi(level);
        let snap = |v: f64| -> Result<i64> {
            let u = v * scale;
            if !u.is_finite() || (u - u.round()).abs() > 1e-9 {
                return Err(Error::param("box", v, "corner is not on the grid"));
            }
            Ok(u.round() as i64)
        };
        let lo = bx.lo.iter().map(|&v| snap(v)).collect::<Result<Vec<_>>>()?;
        let hi = bx.hi.iter().map(|&v| snap(v)).collect::<Result<Vec<_>>>()?;
        Self::new(level, lo, hi)
    }

    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn side(&self) -> f64 {
        (2.0f64).powi(-self.level)
    }

    pub fn ambient_dim(&self) -> usize {
        self.lo.len()
    }

    pub fn grid_lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn grid_hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn grid_box(&self) -> GridBox {
        let s = self.side();
        GridBox {
            lo: self.lo.iter().map(|&c| c as f64 * s).collect(),
            hi: self.hi.iter().map(|&c| c as f64 * s).collect(),
        }
    }

    /// Same cells at `level + k`, that is, the geometry scaled by `2^{−k}`.
    pub fn refined_scale(&self, k: i32) -> Result<Self> {
        Self::new(self.level + k, self.lo.clone(), self.hi.clone())
    }

    /// Sorted `k`-cubes.
    pub fn cells(&self, k: usize) -> &[DyadicCube] {
        self.cells.get(k).map_or(&[], |v| v.as_slice())
    }

    pub fn count(&self, k: usize) -> usize {
        self.cells(k).len()
    }

    pub fn index_of(&self, cube: &DyadicCube) -> Option<usize> {
        self.index.get(cube.dim())?.get(cube).copied()
    }

    pub fn facets(&self, k: usize, i: usize) -> &[usize] {
        &self.facets[k][i]
    }

    pub fn cofacets(&self, k: usize, i: usize) -> &[usize] {
        &self.cofacets[k][i]
    }

    pub fn zero_chain(&self, k: usize) -> Bits {
        bitvec![u64, Lsb0; 0; self.count(k)]
    }

    /// `∂_k` applied to a `k`-chain.
    pub fn boundary(&self, k: usize, chain: &Bits) -> Bits {
        if k == 0 {
            return Bits::new();
        }
        let mut out = self.zero_chain(k - 1);
        for i in chain.iter_ones() {
            for &f in &self.facets[k][i] {
                let b = !out[f];
                out.set(f, b);
            }
        }
        out
    }

    /// `∂_k` as a dense matrix, one row per `(k−1)`-cube.
    pub fn boundary_matrix(&self, k: usize) -> Vec<Bits> {
        let mut rows = vec![self.zero_chain(k); if k == 0 { 0 } else { self.count(k - 1) }];
        if k > 0 {
            for (i, f) in self.facets[k].iter().enumerate() {
                for &j in f {
                    rows[j].set(i, true);
                }
            }
        }
        rows
    }

    /// Chain of the listed cubes, which must all have dimension `k` and lie
    /// in the complex. Repeats cancel.
    pub fn chain_of(&self, k: usize, cubes: &[DyadicCube]) -> Result<Bits> {
        let mut out = self.zero_chain(k);
        for c in cubes {
            Error::check_dim("chain cube", k, c.dim())?;
            let i = self.index_of(c).ok_or_else(|| Error::param("cube", c, "not a cell of the grid complex"))?;
            let b = !out[i];
            out.set(i, b);
        }
        Ok(out)
    }

    pub fn cubes_of<'a>(&'a self, k: usize, chain: &'a Bits) -> impl Iterator<Item = &'a DyadicCube> + 'a {
        chain.iter_ones().map(move |i| &self.cells[k][i])
    }
}

/// Chain of `m`-cubes of a grid complex.
#[derive(Clone, Debug)]
pub struct Chain2 {
    complex: Arc<GridComplex>,
    dim: usize,
    bits: Bits,
}

impl PartialEq for Chain2 {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.complex, &other.complex) && self.dim == other.dim && self.bits == other.bits
    }
}

impl Chain2 {
    pub fn new(complex: Arc<GridComplex>, dim: usize, bits: Bits) -> Result<Self> {
        if dim > complex.ambient_dim() {
            return Err(Error::param("dim", dim, "chain dimension exceeds the ambient dimension"));
        }
        Error::check_dim("chain length", complex.count(dim), bits.len())?;
        Ok(Self { complex, dim, bits })
    }

    pub fn empty(complex: Arc<GridComplex>, dim: usize) -> Result<Self> {
        let bits = complex.zero_chain(dim);
        Self::new(complex, dim, bits)
    }

    pub fn from_cubes(complex: Arc<GridComplex>, dim: usize, cubes: &[DyadicCube]) -> Result<Self> {
        let bits = complex.chain_of(dim, cubes)?;
        Self::new(complex, dim, bits)
    }

    pub fn complex(&self) -> &Arc<GridComplex> {
        &self.complex
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.not_any()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones()
    }

    pub fn cubes(&self) -> impl Iterator<Item = &DyadicCube> {
        self.complex.cubes_of(self.dim, &self.bits)
    }

    pub fn ids(&self) -> Vec<String> {
        self.cubes().map(|c| c.id()).collect()
    }

    pub fn boundary(&self) -> Bits {
        self.complex.boundary(self.dim, &self.bits)
    }

    /// Does `self ⊆ other`?
    pub fn is_subset(&self, other: &Chain2) -> bool {
        self.bits.iter_ones().all(|i| other.bits[i])
    }
}

/// Row-echelon store over the two-element field. Each row carries the
/// combination of inserted columns that produced it.
#[derive(Clone, Debug)]
pub(crate) struct Echelon {
    rows: BTreeMap<usize, (Bits, Bits)>,
    combos: usize,
}

impl Echelon {
    pub(crate) fn new(combos: usize) -> Self {
        Self {
            rows: BTreeMap::new(),
            combos,
        }
    }

    fn reduce(&self, v: &mut Bits, combo: &mut Bits) {
        let mut start = 0;
        while let Some(p) = v[start..].first_one().map(|i| i + start) {
            if let Some((row, c)) = self.rows.get(&p) {
                *v ^= row.as_bitslice();
                *combo ^= c.as_bitslice();
            }
            start = p + 1;
        }
    }

    /// Insert column `col` tagged with combination slot `tag`. Returns the
    /// kernel combination when the column is dependent.
    pub(crate) fn insert(&mut self, mut v: Bits, tag: usize) -> Option<Bits> {
        let mut combo = bitvec![u64, Lsb0; 0; self.combos];
        combo.set(tag, true);
        self.reduce(&mut v, &mut combo);
        match v.first_one() {
            Some(p) => {
                self.rows.insert(p, (v, combo));
                None
            }
            None => Some(combo),
        }
    }

    /// Combination of inserted columns summing to `z`, if any.
    pub(crate) fn solve(&self, z: &Bits) -> Option<Bits> {
        let mut v = z.clone();
        let mut combo = bitvec![u64, Lsb0; 0; self.combos];
        self.reduce(&mut v, &mut combo);
        v.not_any().then_some(combo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_counts_of_the_unit_cube() {
        let k = GridComplex::new(0, vec![0, 0, 0], vec![1, 1, 1]).unwrap();
        let counts: Vec<usize> = (0..=3).map(|d| k.count(d)).collect();
        assert_eq!(counts, vec![8, 12, 6, 1]);
    }

    #[test]
    fn boundary_of_boundary_vanishes() {
        let k = GridComplex::new(1, vec![0, 0, 0], vec![2, 2, 1]).unwrap();
        for d in 2..=3 {
            for i in 0..k.count(d) {
                let mut c = k.zero_chain(d);
                c.set(i, true);
                assert!(k.boundary(d - 1, &k.boundary(d, &c)).not_any());
            }
        }
    }

    #[test]
    fn echelon_solves_and_finds_kernels() {
        let k = GridComplex::new(0, vec![0, 0], vec![1, 1]).unwrap();
        let mut e = Echelon::new(k.count(1));
        let mut kernel = Vec::new();
        for i in 0..k.count(1) {
            let mut c = k.zero_chain(1);
            c.set(i, true);
            if let Some(z) = e.insert(k.boundary(1, &c), i) {
                kernel.push(z);
            }
        }
        assert_eq!(kernel.len(), 1);
        assert_eq!(kernel[0].count_ones(), 4);
    }

    #[test]
    fn off_grid_box_is_rejected() {
        let bx = GridBox {
            lo: vec![0.0, 0.1],
            hi: vec![1.0, 1.0],
        };
        assert!(GridComplex::from_box(1, &bx).is_err());
    }
}
