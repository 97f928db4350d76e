//! Discrete spanning problems on dyadic grid complexes with mod-2
//! coefficients: spanning test, annealed descent, exhaustive oracle and
//! density audits.

mod anneal;
mod audit;
mod complex;
mod oracle;
mod problem;

use serde::{Deserialize, Serialize};

pub use anneal::{minimize, Minimum, Move};
pub use audit::{audit_minimizer, chain_varifold, AuditOptions, AuditPoint, AuditReport, PointKind, RatioSample};
pub use complex::{Bits, Chain2, GridBox, GridComplex, MAX_CELLS};
pub use oracle::{exhaustive_oracle, OracleMethod, OracleResult};
pub use problem::{spans, MinimizeOptions, ProblemSpec, SpanningProblem};

use crate::cubical::{obj_export, DyadicCube};
use crate::error::Result;

/// Oracle cross-check stored with a solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub value: f64,
    pub method: OracleMethod,
    pub dimension: usize,
    pub equal: bool,
}

/// Serialized minimizer output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    #[serde(rename = "box")]
    pub grid_box: GridBox,
    pub level: i32,
    pub dim: usize,
    pub value: f64,
    pub initial_value: f64,
    pub cells: usize,
    pub seed: u64,
    pub restarts: usize,
    pub best_restart: usize,
    pub accepted_moves: usize,
    pub chain: Vec<DyadicCube>,
    pub oracle: Option<OracleCheck>,
}

impl SolutionRecord {
    pub fn new(p: &SpanningProblem, min: &Minimum, oracle: Option<&OracleResult>) -> Self {
        Self {
            grid_box: p.complex().grid_box(),
            level: p.complex().level(),
            dim: p.dim(),
            value: min.value,
            initial_value: min.initial_value,
            cells: min.chain.len(),
            seed: p.options.seed,
            restarts: p.options.restarts,
            best_restart: min.restart,
            accepted_moves: min.trace.len(),
            chain: min.chain.cubes().cloned().collect(),
            oracle: oracle.map(|o| OracleCheck {
                value: o.value,
                method: o.method,
                dimension: o.dimension,
                equal: o.value == min.value,
            }),
        }
    }
}

impl SolutionRecord {
    /// The stored chain on a fresh copy of its grid complex.
    pub fn to_chain(&self) -> Result<Chain2> {
        let complex = std::sync::Arc::new(GridComplex::from_box(self.level, &self.grid_box)?);
        Chain2::from_cubes(complex, self.dim, &self.chain)
    }
}

/// OBJ quads (or segments) of a chain in dimension 2 or 3.
pub fn chain_obj(chain: &Chain2) -> Result<String> {
    let cubes: Vec<DyadicCube> = chain.cubes().cloned().collect();
    obj_export(&cubes, chain.complex().ambient_dim())
}
