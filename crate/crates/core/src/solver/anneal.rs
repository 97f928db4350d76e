use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::complex::{Bits, Chain2};
use crate::solver::problem::SpanningProblem;

/// One accepted move: `∂Q` added to the witness of one generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub restart: usize,
    pub step: usize,
    pub cube: String,
    pub generator: usize,
    pub value: f64,
    pub cells: usize,
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub chain: Chain2,
    pub value: f64,
    pub initial_value: f64,
    /// Chains `c_i ⊆ B ∪ E` with `∂c_i = z_i`.
    pub witnesses: Vec<Bits>,
    pub restart: usize,
    pub trace: Vec<Move>,
}

/// Order by value, then cell count, then cell indices.
pub(crate) fn compare_chains(a: (f64, &Bits), b: (f64, &Bits)) -> Ordering {
    a.0.total_cmp(&b.0)
        .then_with(|| a.1.count_ones().cmp(&b.1.count_ones()))
        .then_with(|| a.1.iter_ones().cmp(b.1.iter_ones()))
}

struct State<'a> {
    p: &'a SpanningProblem,
    witnesses: Vec<Bits>,
    counts: Vec<u32>,
    value: f64,
    cells: usize,
}

impl<'a> State<'a> {
    fn new(p: &'a SpanningProblem, witnesses: Vec<Bits>) -> Self {
        let free = p.boundary_cells(p.dim());
        let mut counts = vec![0u32; p.complex().count(p.dim())];
        for c in &witnesses {
            for i in c.iter_ones() {
                counts[i] += 1;
            }
        }
        let e: Bits = counts.iter().enumerate().map(|(i, &k)| k > 0 && !free[i]).collect();
        Self {
            p,
            value: p.value_of(&e),
            cells: e.count_ones(),
            witnesses,
            counts,
        }
    }

    /// Change of value and cell count if `∂Q` is added to witness `g`.
    fn delta(&self, q: usize, g: usize) -> (f64, isize) {
        let m = self.p.dim();
        let free = self.p.boundary_cells(m);
        let w = self.p.weights();
        let mut dv = 0.0;
        let mut dc = 0isize;
        for &f in self.p.complex().facets(m + 1, q) {
            if free[f] {
                continue;
            }
            let had = self.witnesses[g][f];
            let k = self.counts[f];
            if had && k == 1 {
                dv -= w[f];
                dc -= 1;
            } else if !had && k == 0 {
                dv += w[f];
                dc += 1;
            }
        }
        (dv, dc)
    }

    fn apply(&mut self, q: usize, g: usize, dv: f64, dc: isize) {
        let m = self.p.dim();
        for &f in self.p.complex().facets(m + 1, q) {
            let had = self.witnesses[g][f];
            self.witnesses[g].set(f, !had);
            if had {
                self.counts[f] -= 1;
            } else {
                self.counts[f] += 1;
            }
        }
        self.value += dv;
        self.cells = (self.cells as isize + dc) as usize;
        debug_assert!(self
            .witnesses
            .iter()
            .zip(self.p.generators())
            .all(|(c, z)| &self.p.complex().boundary(m, c) == z));
    }

    fn support(&self) -> Bits {
        self.p.support_of(&self.witnesses)
    }
}

struct Run {
    support: Bits,
    value: f64,
    witnesses: Vec<Bits>,
    trace: Vec<Move>,
}

fn run_restart(p: &SpanningProblem, start: &[Bits], restart: usize) -> Run {
    let opts = &p.options;
    let m = p.dim();
    let complex = p.complex();
    let moves = complex.count(m + 1);
    let gens = start.len();
    let mut state = State::new(p, start.to_vec());
    let mut best_support = state.support();
    let mut best_value = p.value_of(&best_support);
    let mut best_witnesses = state.witnesses.clone();
    let mut trace = Vec::new();
    if moves == 0 || gens == 0 {
        return Run {
            support: best_support,
            value: best_value,
            witnesses: best_witnesses,
            trace,
        };
    }
    let positive: Vec<f64> = p.weights().iter().copied().filter(|w| *w > 0.0).collect();
    let scale = if positive.is_empty() { 1.0 } else { positive.iter().sum::<f64>() / positive.len() as f64 };
    let tol = 1e-12 * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(restart as u64);
    let ratio = opts.t_end / opts.t_start;
    let record = |state: &State, step: usize, q: usize, g: usize, trace: &mut Vec<Move>| {
        trace.push(Move {
            restart,
            step,
            cube: complex.cells(m + 1)[q].id(),
            generator: g,
            value: state.value,
            cells: state.cells,
        });
    };
    let mut consider = |state: &State| {
        if state.value <= best_value + tol {
            let support = state.support();
            let value = p.value_of(&support);
            if compare_chains((value, &support), (best_value, &best_support)) == Ordering::Less {
                best_value = value;
                best_support = support;
                best_witnesses = state.witnesses.clone();
            }
        }
    };
    for step in 0..opts.steps {
        let t = opts.t_start * scale * ratio.powf(step as f64 / opts.steps.max(1) as f64);
        let q = rng.random_range(0..moves);
        let g = rng.random_range(0..gens);
        let (dv, dc) = state.delta(q, g);
        let accept = dv < -tol || (dv <= tol && dc <= 0) || rng.random::<f64>() < (-dv / t).exp();
        if accept {
            state.apply(q, g, dv, dc);
            record(&state, step, q, g, &mut trace);
            consider(&state);
        }
    }
    if opts.polish {
        let mut step = opts.steps;
        loop {
            let mut improved = false;
            for q in 0..moves {
                for g in 0..gens {
                    let (dv, dc) = state.delta(q, g);
                    if dv < -tol || (dv <= tol && dc < 0) {
                        state.apply(q, g, dv, dc);
                        record(&state, step, q, g, &mut trace);
                        consider(&state);
                        improved = true;
                    }
                    step += 1;
                }
            }
            if !improved {
                break;
            }
        }
    }
    Run {
        support: best_support,
        value: best_value,
        witnesses: best_witnesses,
        trace,
    }
}

/// Simulated annealing over `E ↦ E + ∂Q` from the elimination solution.
/// Restarts run in parallel with streams `0..restarts` of the seed.
pub fn minimize(p: &SpanningProblem) -> Result<Minimum> {
    p.options.validate()?;
    let start = p.initial_witnesses()?;
    let initial_support = p.support_of(&start);
    let initial_value = p.value_of(&initial_support);
    let runs: Vec<Run> = (0..p.options.restarts).into_par_iter().map(|r| run_restart(p, &start, r)).collect();
    let (restart, best) = runs
        .iter()
        .enumerate()
        .min_by(|a, b| compare_chains((a.1.value, &a.1.support), (b.1.value, &b.1.support)).then(a.0.cmp(&b.0)))
        .expect("at least one restart");
    let chain = p.chain(best.support.clone())?;
    if p.witnesses(&chain)?.is_none() {
        return Err(Error::Infeasible("descent lost the spanning property".into()));
    }
    let value = best.value;
    let witnesses = best.witnesses.clone();
    let trace = runs.into_iter().flat_map(|r| r.trace).collect();
    Ok(Minimum {
        chain,
        value,
        initial_value,
        witnesses,
        restart,
        trace,
    })
}
