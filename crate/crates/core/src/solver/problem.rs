use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cubical::DyadicCube;
use crate::error::{Error, Result};
use crate::grassmann::Plane;
use crate::solver::complex::{Bits, Chain2, Echelon, GridBox, GridComplex};
use crate::varifold::{Integrand, IntegrandSpec};

/// Annealing schedule and oracle budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinimizeOptions {
    pub seed: u64,
    pub restarts: usize,
    /// Proposed moves per restart.
    pub steps: usize,
    /// Start and end temperatures, in units of the mean cell weight.
    pub t_start: f64,
    pub t_end: f64,
    /// Finish each restart with zero-temperature sweeps.
    pub polish: bool,
    /// Largest enumerated dimension for the exhaustive oracle.
    pub oracle_budget: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 4,
            steps: 20_000,
            t_start: 1.0,
            t_end: 1e-3,
            polish: true,
            oracle_budget: 24,
        }
    }
}

impl MinimizeOptions {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::param("restarts", 0, "need at least one restart"));
        }
        if !(self.t_start > 0.0 && self.t_end > 0.0 && self.t_end <= self.t_start) {
            return Err(Error::param("t_end", self.t_end, "temperatures must satisfy 0 < t_end <= t_start"));
        }
        Ok(())
    }
}

fn area_spec() -> IntegrandSpec {
    IntegrandSpec::Area {}
}

/// Serialized spanning problem. Cubes are given at the grid level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(rename = "box")]
    pub grid_box: GridBox,
    #[serde(rename = "N")]
    pub level: i32,
    pub dim: usize,
    /// Cubes generating the boundary subcomplex; faces are added.
    #[serde(default)]
    pub boundary: Vec<DyadicCube>,
    /// Target class generators as lists of `(dim − 1)`-cubes.
    #[serde(default)]
    pub generators: Vec<Vec<DyadicCube>>,
    #[serde(default = "area_spec")]
    pub integrand: IntegrandSpec,
    #[serde(default)]
    pub options: MinimizeOptions,
}

/// Boundary subcomplex `B`, target class `L ⊆ Z_{m−1}(B)` and integrand.
#[derive(Clone, Debug)]
pub struct SpanningProblem {
    complex: Arc<GridComplex>,
    dim: usize,
    boundary: Vec<Bits>,
    generators: Vec<Bits>,
    integrand: Integrand,
    weights: Vec<f64>,
    pub options: MinimizeOptions,
}

impl SpanningProblem {
    pub fn new(
        complex: Arc<GridComplex>,
        dim: usize,
        boundary: &[DyadicCube],
        generators: &[Vec<DyadicCube>],
        integrand: Integrand,
        options: MinimizeOptions,
    ) -> Result<Self> {
        let n = complex.ambient_dim();
        if !(1..=n).contains(&dim) {
            return Err(Error::param("dim", dim, "spanning dimension must lie in 1..=n"));
        }
        options.validate()?;
        let mut b: Vec<Bits> = (0..=n).map(|k| complex.zero_chain(k)).collect();
        for c in boundary {
            if c.level() != complex.level() {
                return Err(Error::param("boundary", c, "cube is not at the grid level"));
            }
            if complex.index_of(c).is_none() {
                return Err(Error::param("boundary", c, "cube lies outside the grid box"));
            }
            for f in c.faces() {
                let i = complex.index_of(&f).expect("faces of a grid cell are cells");
                b[f.dim()].set(i, true);
            }
        }
        let mut z = Vec::with_capacity(generators.len());
        for (index, g) in generators.iter().enumerate() {
            let chain = complex.chain_of(dim - 1, g)?;
            if chain.iter_ones().any(|i| !b[dim - 1][i]) {
                return Err(Error::param("generators", index, "generator leaves the boundary subcomplex"));
            }
            if dim >= 2 && complex.boundary(dim - 1, &chain).any() {
                return Err(Error::NotACycle { index });
            }
            z.push(chain);
        }
        let weights = cell_weights(&complex, dim, &integrand, &b[dim])?;
        Ok(Self {
            complex,
            dim,
            boundary: b,
            generators: z,
            integrand,
            weights,
            options,
        })
    }

    pub fn from_spec(spec: &ProblemSpec) -> Result<Self> {
        let complex = Arc::new(GridComplex::from_box(spec.level, &spec.grid_box)?);
        let n = complex.ambient_dim();
        if !(1..=n).contains(&spec.dim) {
            return Err(Error::param("dim", spec.dim, "spanning dimension must lie in 1..=n"));
        }
        let f = spec.integrand.build(n, spec.dim)?;
        Self::new(complex, spec.dim, &spec.boundary, &spec.generators, f, spec.options.clone())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ProblemSpec = serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {}: {e}", e.line())))?;
        Self::from_spec(&spec)
    }

    /// Same combinatorics on the geometry scaled by `2^{−k}`, with a new integrand.
    pub fn rescaled(&self, k: i32, integrand: Integrand) -> Result<Self> {
        let complex = Arc::new(self.complex.refined_scale(k)?);
        let weights = cell_weights(&complex, self.dim, &integrand, &self.boundary[self.dim])?;
        Ok(Self {
            complex,
            dim: self.dim,
            boundary: self.boundary.clone(),
            generators: self.generators.clone(),
            integrand,
            weights,
            options: self.options.clone(),
        })
    }

    /// Same problem with another integrand.
    pub fn with_integrand(&self, integrand: Integrand) -> Result<Self> {
        self.rescaled(0, integrand)
    }

    pub fn complex(&self) -> &Arc<GridComplex> {
        &self.complex
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn integrand(&self) -> &Integrand {
        &self.integrand
    }

    pub fn generators(&self) -> &[Bits] {
        &self.generators
    }

    /// `k`-cells of `B`.
    pub fn boundary_cells(&self, k: usize) -> &Bits {
        &self.boundary[k]
    }

    /// `F(center Q, plane Q)·side^m` per `m`-cube, zero on cells of `B`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Φ_F` of the cells of `E` outside `B`, summed in cell order.
    pub fn value(&self, e: &Chain2) -> f64 {
        e.indices().map(|i| self.weights[i]).sum()
    }

    pub(crate) fn value_of(&self, bits: &Bits) -> f64 {
        bits.iter_ones().map(|i| self.weights[i]).sum()
    }

    pub fn chain(&self, bits: Bits) -> Result<Chain2> {
        Chain2::new(self.complex.clone(), self.dim, bits)
    }

    fn check_chain(&self, e: &Chain2) -> Result<()> {
        if !Arc::ptr_eq(e.complex(), &self.complex) {
            return Err(Error::param("chain", "foreign", "chain belongs to another complex"));
        }
        Error::check_dim("chain dimension", self.dim, e.dim())
    }

    /// Per generator, a chain `c` with `∂c = z` supported in `B ∪ E`.
    pub fn witnesses(&self, e: &Chain2) -> Result<Option<Vec<Bits>>> {
        self.check_chain(e)?;
        let mut allowed = self.boundary[self.dim].clone();
        allowed |= e.bits().as_bitslice();
        Ok(self.solve_within(&allowed))
    }

    fn solve_within(&self, allowed: &Bits) -> Option<Vec<Bits>> {
        if self.generators.is_empty() {
            return Some(Vec::new());
        }
        let count = self.complex.count(self.dim);
        let mut ech = Echelon::new(count);
        for i in allowed.iter_ones() {
            let mut col = self.complex.zero_chain(self.dim);
            col.set(i, true);
            ech.insert(self.complex.boundary(self.dim, &col), i);
        }
        self.generators.iter().map(|z| ech.solve(z)).collect()
    }

    /// Solutions of `∂c = z` over the whole grid, one per generator.
    pub fn initial_witnesses(&self) -> Result<Vec<Bits>> {
        let all = {
            let mut b = self.complex.zero_chain(self.dim);
            b.fill(true);
            b
        };
        self.solve_within(&all)
            .ok_or_else(|| Error::Infeasible("a generator is not a boundary in the grid box".into()))
    }

    /// Cells of `⋃ supp c_i` outside `B`.
    pub fn support_of(&self, witnesses: &[Bits]) -> Bits {
        let mut e = self.complex.zero_chain(self.dim);
        for c in witnesses {
            e |= c.as_bitslice();
        }
        let b = &self.boundary[self.dim];
        for i in b.iter_ones() {
            e.set(i, false);
        }
        e
    }
}

/// Does `E` span the target class of `P`?
pub fn spans(e: &Chain2, p: &SpanningProblem) -> Result<bool> {
    Ok(p.witnesses(e)?.is_some())
}

fn cell_weights(complex: &GridComplex, m: usize, f: &Integrand, free: &Bits) -> Result<Vec<f64>> {
    let n = complex.ambient_dim();
    let side_m = complex.side().powi(m as i32);
    complex
        .cells(m)
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if free[i] {
                return Ok(0.0);
            }
            let w = f.eval(&c.center(), &Plane::coordinate(n, c.axes()))? * side_m;
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::param("integrand", w, "cell weight must be finite and nonnegative"));
            }
            Ok(w)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_cycle_and_its_filling() {
        let complex = Arc::new(GridComplex::new(0, vec![0, 0], vec![1, 1]).unwrap());
        let sq = DyadicCube::top(0, vec![0, 0]);
        let edges = sq.facets();
        let p = SpanningProblem::new(complex.clone(), 2, &edges, std::slice::from_ref(&edges), Integrand::area(), MinimizeOptions::default()).unwrap();
        let full = Chain2::from_cubes(complex.clone(), 2, &[sq]).unwrap();
        assert!(spans(&full, &p).unwrap());
        assert!(!spans(&Chain2::empty(complex, 2).unwrap(), &p).unwrap());
        assert_eq!(p.value(&full), 1.0);
    }

    #[test]
    fn open_path_is_not_a_cycle() {
        let complex = Arc::new(GridComplex::new(0, vec![0, 0, 0], vec![1, 1, 1]).unwrap());
        let sq = DyadicCube::new(0, vec![0, 0, 0], vec![0, 1]).unwrap();
        let mut edges = sq.facets();
        let b = edges.clone();
        edges.pop();
        let err = SpanningProblem::new(complex, 2, &b, &[edges], Integrand::area(), MinimizeOptions::default()).unwrap_err();
        assert_eq!(err, Error::NotACycle { index: 0 });
    }
}
