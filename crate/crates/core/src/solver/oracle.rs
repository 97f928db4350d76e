use std::cmp::Ordering;

use bitvec::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::anneal::compare_chains;
use crate::solver::complex::{Bits, Chain2, Echelon};
use crate::solver::problem::SpanningProblem;

/// Memory cap, in bits, for the transfer-matrix back pointers.
const TRANSFER_BITS: usize = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    /// Nothing to span.
    Trivial,
    /// Gray-code walk over the whole coset.
    Enumeration,
    /// Layer-by-layer minimization over all labelings of the top cubes,
    /// for codimension one.
    Transfer,
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub chain: Chain2,
    pub value: f64,
    pub method: OracleMethod,
    /// Enumerated dimension: coset bits, or frontier bits for the transfer method.
    pub dimension: usize,
}

/// Sparse basis of `ker ∂_m`: boundaries of `(m+1)`-cubes first, completed
/// by elimination when homology is present.
fn kernel_basis(p: &SpanningProblem) -> Vec<Vec<usize>> {
    let complex = p.complex();
    let m = p.dim();
    let count = complex.count(m);
    let mut span = Echelon::new(complex.count(m + 1).max(1));
    let mut basis = Vec::new();
    for q in 0..complex.count(m + 1) {
        let f = complex.facets(m + 1, q);
        let mut v = complex.zero_chain(m);
        for &i in f {
            v.set(i, true);
        }
        if span.insert(v, q).is_none() {
            basis.push(f.to_vec());
        }
    }
    let mut cols = Echelon::new(count);
    let mut extra = Vec::new();
    for i in 0..count {
        let mut c = complex.zero_chain(m);
        c.set(i, true);
        if let Some(k) = cols.insert(complex.boundary(m, &c), i) {
            extra.push(k);
        }
    }
    if extra.len() > basis.len() {
        let mut tags = Echelon::new(1);
        for b in &basis {
            let mut v = complex.zero_chain(m);
            for &i in b {
                v.set(i, true);
            }
            tags.insert(v, 0);
        }
        for k in extra {
            let cells: Vec<usize> = k.iter_ones().collect();
            if tags.insert(k, 0).is_none() {
                basis.push(cells);
            }
        }
    }
    basis
}

/// Global minimum of `Φ_F(E)` over all spanning `E`, by exhaustive search.
pub fn exhaustive_oracle(p: &SpanningProblem, budget: usize) -> Result<OracleResult> {
    let m = p.dim();
    let complex = p.complex();
    if p.generators().is_empty() {
        return Ok(OracleResult {
            chain: p.chain(complex.zero_chain(m))?,
            value: 0.0,
            method: OracleMethod::Trivial,
            dimension: 0,
        });
    }
    let start = p.initial_witnesses()?;
    let basis = kernel_basis(p);
    let dimension = basis.len() * start.len();
    if dimension <= budget {
        return enumerate(p, start, &basis);
    }
    let n = complex.ambient_dim();
    if m + 1 == n && start.len() == 1 {
        let frontier: usize = (0..n - 1).map(|j| (complex.grid_hi()[j] - complex.grid_lo()[j]) as usize).product();
        let cubes = complex.count(n);
        if frontier <= budget && frontier < usize::BITS as usize - 1 && (1usize << frontier).saturating_mul(cubes) <= TRANSFER_BITS {
            return transfer(p, &start[0], frontier);
        }
    }
    Err(Error::BudgetExceeded { dimension, budget })
}

fn enumerate(p: &SpanningProblem, start: Vec<Bits>, basis: &[Vec<usize>]) -> Result<OracleResult> {
    let m = p.dim();
    let w = p.weights();
    let free = p.boundary_cells(m);
    let k = basis.len();
    let dimension = k * start.len();
    let mut witnesses = start;
    let mut counts = vec![0u32; w.len()];
    for c in &witnesses {
        for i in c.iter_ones() {
            counts[i] += 1;
        }
    }
    let mut best_support = p.support_of(&witnesses);
    let mut best_value = p.value_of(&best_support);
    let mut value = best_value;
    let scale = w.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tol = 1e-9 * scale;
    let total: u64 = 1u64 << dimension;
    for code in 1..total {
        let bit = code.trailing_zeros() as usize;
        let (g, b) = (bit / k, bit % k);
        for &f in &basis[b] {
            let had = witnesses[g][f];
            witnesses[g].set(f, !had);
            if had {
                counts[f] -= 1;
                if counts[f] == 0 && !free[f] {
                    value -= w[f];
                }
            } else {
                if counts[f] == 0 && !free[f] {
                    value += w[f];
                }
                counts[f] += 1;
            }
        }
        if value <= best_value + tol {
            let support = p.support_of(&witnesses);
            let exact = p.value_of(&support);
            value = exact;
            if compare_chains((exact, &support), (best_value, &best_support)) == Ordering::Less {
                best_value = exact;
                best_support = support;
            }
        }
    }
    Ok(OracleResult {
        chain: p.chain(best_support)?,
        value: best_value,
        method: OracleMethod::Enumeration,
        dimension,
    })
}

/// `c = c₀ + ∂S` over all sets `S` of top cubes, scanned in lexicographic
/// order with the last layer of labels as state.
fn transfer(p: &SpanningProblem, c0: &Bits, frontier: usize) -> Result<OracleResult> {
    let complex = p.complex();
    let n = complex.ambient_dim();
    let m = n - 1;
    let lo = complex.grid_lo();
    let ext: Vec<i64> = (0..n).map(|j| complex.grid_hi()[j] - lo[j]).collect();
    let mut stride = vec![1usize; n];
    for j in 1..n {
        stride[j] = stride[j - 1] * ext[j - 1] as usize;
    }
    let cubes = complex.count(n);
    let linear = |i: usize| -> usize {
        let c = &complex.cells(n)[i];
        (0..n).map(|j| (c.corner()[j] - lo[j]) as usize * stride[j]).sum()
    };
    let order: Vec<usize> = (0..cubes).map(linear).collect();
    let mut by_linear = vec![0usize; cubes];
    for (i, &u) in order.iter().enumerate() {
        by_linear[u] = i;
    }
    // Per top cube, the faces charged when it is labelled: (weight, c₀ bit, offset of the earlier neighbour).
    let w = p.weights();
    let mut charges: Vec<Vec<(f64, bool, Option<usize>)>> = vec![Vec::new(); cubes];
    for f in 0..complex.count(m) {
        let mut nb: Vec<usize> = complex.cofacets(m, f).iter().map(|&i| order[i]).collect();
        nb.sort_unstable();
        match nb.as_slice() {
            [u] => charges[*u].push((w[f], c0[f], None)),
            [a, b] => charges[*b].push((w[f], c0[f], Some(b - a))),
            _ => unreachable!("a codimension-one cell has one or two top cubes"),
        }
    }
    let states = 1usize << frontier;
    let top = frontier - 1;
    let mut cost = vec![f64::INFINITY; states];
    cost[0] = 0.0;
    let mut next = vec![f64::INFINITY; states];
    let mut back: Vec<Bits> = Vec::with_capacity(cubes);
    for charge in charges.iter() {
        next.fill(f64::INFINITY);
        let mut dropped = bitvec![u64, Lsb0; 0; states];
        for (s, &c) in cost.iter().enumerate() {
            if c == f64::INFINITY {
                continue;
            }
            for label in [false, true] {
                let mut add = 0.0;
                for &(wf, in_c0, off) in charge {
                    let other = off.is_some_and(|d| s >> (frontier - d) & 1 == 1);
                    if in_c0 ^ (label ^ other) {
                        add += wf;
                    }
                }
                let t = (s >> 1) | (usize::from(label) << top);
                let total = c + add;
                // Ties keep the state reached with the lower dropped label.
                if total < next[t] {
                    next[t] = total;
                    dropped.set(t, s & 1 == 1);
                }
            }
        }
        std::mem::swap(&mut cost, &mut next);
        back.push(dropped);
    }
    let (mut s, _) = cost
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .expect("nonempty state space");
    let mut labels = vec![false; cubes];
    for u in (0..cubes).rev() {
        labels[u] = s >> top & 1 == 1;
        let d = back[u][s];
        s = ((s << 1) & (states - 1)) | usize::from(d);
    }
    let mut chain = c0.clone();
    for (u, &l) in labels.iter().enumerate() {
        if l {
            for &f in complex.facets(n, by_linear[u]) {
                let b = !chain[f];
                chain.set(f, b);
            }
        }
    }
    let support = p.support_of(std::slice::from_ref(&chain));
    let value = p.value_of(&support);
    Ok(OracleResult {
        chain: p.chain(support)?,
        value,
        method: OracleMethod::Transfer,
        dimension: frontier,
    })
}
