use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{projector_distance, Plane};
use crate::linalg::{self, Matrix, Vector};
use crate::map::Smoothness;

type EvalFn = dyn Fn(&Vector, &Plane) -> Result<f64> + Send + Sync;

/// A weight `F(x, T)` on position and tangent plane, with recorded bounds.
#[derive(Clone)]
pub struct Integrand {
    name: String,
    eval: Arc<EvalFn>,
    inf_bound: f64,
    sup_bound: f64,
    smoothness: Smoothness,
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("name", &self.name)
            .field("inf_bound", &self.inf_bound)
            .field("sup_bound", &self.sup_bound)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl Integrand {
    /// `0 ≤ inf_bound ≤ sup_bound`; `sup_bound` may be infinite.
    pub fn new<F>(name: impl Into<String>, inf_bound: f64, sup_bound: f64, smoothness: Smoothness, eval: F) -> Result<Self>
    where
        F: Fn(&Vector, &Plane) -> Result<f64> + Send + Sync + 'static,
    {
        if !(inf_bound >= 0.0 && inf_bound <= sup_bound) {
            return Err(Error::param("inf_bound", inf_bound, "bounds must satisfy 0 <= inf <= sup"));
        }
        Ok(Self {
            name: name.into(),
            eval: Arc::new(eval),
            inf_bound,
            sup_bound,
            smoothness,
        })
    }

    pub fn area() -> Self {
        Self {
            name: "area".into(),
            eval: Arc::new(|_, _| Ok(1.0)),
            inf_bound: 1.0,
            sup_bound: 1.0,
            smoothness: Smoothness::Infinite,
        }
    }

    /// `1 + λ‖P_T − P_H‖²`, `λ > −1`.
    pub fn tilt(plane: Plane, lambda: f64) -> Result<Self> {
        if !(lambda > -1.0 && lambda.is_finite()) {
            return Err(Error::param("lambda", lambda, "tilt weight must exceed -1"));
        }
        let (lo, hi) = if lambda < 0.0 { (1.0 + lambda, 1.0) } else { (1.0, 1.0 + lambda) };
        Self::new(format!("tilt({lambda})"), lo, hi, Smoothness::Infinite, move |_, t| {
            let d = projector_distance(t, &plane)?;
            Ok(1.0 + lambda * d * d)
        })
    }

    /// `√det(Bᵀ G B)` for a constant symmetric positive definite `G` and an
    /// orthonormal frame `B` of `T`.
    pub fn metric(g: Matrix, m: usize) -> Result<Self> {
        let n = g.nrows();
        Error::check_dim("metric", n, g.ncols())?;
        if (&g - g.transpose()).amax() > 1e-12 * g.amax().max(1.0) {
            return Err(Error::param("metric", "asymmetric", "metric must be symmetric"));
        }
        let eig = g.clone().symmetric_eigen();
        let lo = eig.eigenvalues.min();
        let hi = eig.eigenvalues.max();
        if lo <= 0.0 {
            return Err(Error::param("metric", lo, "metric must be positive definite"));
        }
        let p = m as f64 / 2.0;
        Self::new("metric", lo.powf(p), hi.powf(p), Smoothness::Infinite, move |_, t| {
            let b = t.frame();
            let gram = b.transpose() * &g * b;
            Ok(gram.determinant().max(0.0).sqrt())
        })
    }

    /// Nonnegative combination `Σ w_i F_i`.
    pub fn mix(terms: Vec<(f64, Integrand)>) -> Result<Self> {
        if terms.is_empty() || terms.iter().any(|(w, _)| !(*w >= 0.0)) {
            return Err(Error::param("terms", terms.len(), "mix needs nonnegative weights"));
        }
        let inf = terms.iter().map(|(w, f)| w * f.inf_bound).sum();
        let sup = terms.iter().map(|(w, f)| w * f.sup_bound).sum();
        let smooth = terms.iter().map(|(_, f)| f.smoothness).min().unwrap_or(Smoothness::Infinite);
        let name = terms.iter().map(|(w, f)| format!("{w}*{}", f.name)).collect::<Vec<_>>().join("+");
        Self::new(name, inf, sup, smooth, move |x, t| {
            let mut acc = 0.0;
            for (w, f) in &terms {
                acc += w * f.eval(x, t)?;
            }
            Ok(acc)
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: &Vector, t: &Plane) -> Result<f64> {
        (self.eval)(x, t)
    }

    pub fn inf_bound(&self) -> f64 {
        self.inf_bound
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    /// Bounded iff `0 < inf` and `sup < ∞`.
    pub fn is_bounded(&self) -> bool {
        self.inf_bound > 0.0 && self.sup_bound.is_finite()
    }

    /// `F^x(y, T) = F(x, T)`.
    pub fn frozen(&self, x: &Vector) -> Integrand {
        let inner = self.eval.clone();
        let x = x.clone();
        Integrand {
            name: format!("{}@x", self.name),
            eval: Arc::new(move |_, t| inner(&x, t)),
            inf_bound: self.inf_bound,
            sup_bound: self.sup_bound,
            smoothness: self.smoothness,
        }
    }
}

/// Integrand selection as stored in config files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntegrandSpec {
    Area {},
    Metric { matrix: Vec<Vec<f64>> },
    Tilt { plane: Plane, lambda: f64 },
    Table(TableSpec),
    Mix { terms: Vec<MixTerm> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixTerm {
    pub weight: f64,
    pub integrand: IntegrandSpec,
}

/// Position weight sampled on a regular grid over `[lo, hi]`, row-major with
/// the last axis fastest, interpolated multilinearly and clamped outside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl IntegrandSpec {
    /// Build for `m`-planes in `R^n`.
    pub fn build(&self, n: usize, m: usize) -> Result<Integrand> {
        match self {
            IntegrandSpec::Area {} => Ok(Integrand::area()),
            IntegrandSpec::Metric { matrix } => {
                Error::check_dim("metric rows", n, matrix.len())?;
                let mut g = Matrix::zeros(n, n);
                for (i, row) in matrix.iter().enumerate() {
                    Error::check_dim("metric columns", n, row.len())?;
                    for (j, v) in row.iter().enumerate() {
                        g[(i, j)] = *v;
                    }
                }
                Integrand::metric(g, m)
            }
            IntegrandSpec::Tilt { plane, lambda } => {
                Error::check_dim("tilt plane ambient", n, plane.ambient_dim())?;
                Error::check_dim("tilt plane", m, plane.dim())?;
                Integrand::tilt(plane.clone(), *lambda)
            }
            IntegrandSpec::Table(table) => table.build(n),
            IntegrandSpec::Mix { terms } => {
                let built = terms
                    .iter()
                    .map(|t| Ok((t.weight, t.integrand.build(n, m)?)))
                    .collect::<Result<Vec<_>>>()?;
                Integrand::mix(built)
            }
        }
    }
}

impl TableSpec {
    fn build(&self, n: usize) -> Result<Integrand> {
        Error::check_dim("table lo", n, self.lo.len())?;
        Error::check_dim("table hi", n, self.hi.len())?;
        Error::check_dim("table shape", n, self.shape.len())?;
        if self.shape.iter().any(|&s| s < 2) {
            return Err(Error::param("shape", format!("{:?}", self.shape), "each axis needs at least 2 nodes"));
        }
        if self.lo.iter().zip(&self.hi).any(|(l, h)| !(l < h)) {
            return Err(Error::param("hi", format!("{:?}", self.hi), "table box must have lo < hi"));
        }
        let count: usize = self.shape.iter().product();
        Error::check_dim("table values", count, self.values.len())?;
        if self.values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::param("values", "nonpositive", "table values must be positive"));
        }
        let lo = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().cloned().fold(0.0, f64::max);
        let table = self.clone();
        Integrand::new("table", lo, hi, Smoothness::Finite(0), move |x, _| Ok(table.interpolate(x)))
    }

    fn interpolate(&self, x: &Vector) -> f64 {
        let n = self.shape.len();
        let mut base = vec![0usize; n];
        let mut frac = vec![0.0; n];
        for j in 0..n {
            let cells = (self.shape[j] - 1) as f64;
            let u = ((x[j] - self.lo[j]) / (self.hi[j] - self.lo[j])).clamp(0.0, 1.0) * cells;
            let i = (u.floor() as usize).min(self.shape[j] - 2);
            base[j] = i;
            frac[j] = u - i as f64;
        }
        let mut acc = 0.0;
        for corner in 0..1usize << n {
            let mut w = 1.0;
            let mut flat = 0;
            for j in 0..n {
                let bit = corner >> j & 1;
                w *= if bit == 1 { frac[j] } else { 1.0 - frac[j] };
                flat = flat * self.shape[j] + base[j] + bit;
            }
            acc += w * self.values[flat];
        }
        acc
    }
}

/// Largest `F(x, ·)` over a plane sample: coordinate planes, Haar draws and
/// a shrinking random-perturbation ascent from the best of them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SupOptions {
    pub grid: usize,
    pub refine_steps: usize,
    pub seed: u64,
}

impl Default for SupOptions {
    fn default() -> Self {
        Self {
            grid: 512,
            refine_steps: 200,
            seed: 0,
        }
    }
}

pub fn sup_over_planes(f: &Integrand, x: &Vector, m: usize, opts: &SupOptions) -> Result<f64> {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    let n = x.len();
    if m == 0 || m > n {
        return Err(Error::param("m", m, "need 0 < m <= n"));
    }
    let mut best: Option<(f64, Plane)> = None;
    let consider = |p: Plane, best: &mut Option<(f64, Plane)>| -> Result<()> {
        let v = f.eval(x, &p)?;
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            *best = Some((v, p));
        }
        Ok(())
    };
    for axes in subsets(n, m).into_iter().take(256) {
        consider(Plane::coordinate(n, &axes), &mut best)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.grid {
        consider(crate::grassmann::haar_sample_with(&mut rng, n, m)?, &mut best)?;
    }
    let (mut top, mut plane) = best.expect("at least one coordinate plane");
    let mut step = 0.2;
    let mut misses = 0;
    for _ in 0..opts.refine_steps {
        let noise = Matrix::from_fn(n, m, |_, _| StandardNormal.sample(&mut rng));
        let cand = plane.frame() + noise * step;
        let Some(frame) = linalg::orthonormalize(&cand, 1e-8) else { continue };
        let p = Plane::from_columns(&frame)?;
        let v = f.eval(x, &p)?;
        if v > top {
            top = v;
            plane = p;
            misses = 0;
        } else {
            misses += 1;
            if misses >= 8 {
                step *= 0.5;
                misses = 0;
            }
        }
    }
    Ok(top)
}

fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn rec(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, m, cur, out);
            cur.pop();
        }
    }
    rec(0, n, m, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tilt_sup_is_one_plus_lambda() {
        let h = Plane::coordinate(3, &[0, 1]);
        let f = Integrand::tilt(h, 1.0).unwrap();
        let s = sup_over_planes(&f, &Vector::zeros(3), 2, &SupOptions::default()).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn table_interpolates_linearly() {
        let spec = IntegrandSpec::Table(TableSpec {
            lo: vec![0.0, 0.0],
            hi: vec![1.0, 1.0],
            shape: vec![2, 2],
            values: vec![1.0, 2.0, 3.0, 4.0],
        });
        let f = spec.build(2, 1).unwrap();
        let t = Plane::coordinate(2, &[0]);
        let at = |a: f64, b: f64| f.eval(&Vector::from_vec(vec![a, b]), &t).unwrap();
        assert!((at(0.0, 1.0) - 2.0).abs() < 1e-15);
        assert!((at(1.0, 0.0) - 3.0).abs() < 1e-15);
        assert!((at(0.5, 0.5) - 2.5).abs() < 1e-15);
        assert!((at(-3.0, 9.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn spec_json_roundtrip() {
        let spec = IntegrandSpec::Mix {
            terms: vec![
                MixTerm {
                    weight: 0.5,
                    integrand: IntegrandSpec::Area {},
                },
                MixTerm {
                    weight: 0.5,
                    integrand: IntegrandSpec::Tilt {
                        plane: Plane::coordinate(3, &[0, 1]),
                        lambda: 9.0,
                    },
                },
            ],
        };
        let text = serde_json::to_string(&spec).unwrap();
        let back: IntegrandSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let f = back.build(3, 2).unwrap();
        assert_eq!((f.inf_bound(), f.sup_bound()), (1.0, 5.5));
        assert!(serde_json::from_str::<IntegrandSpec>(r#"{"kind":"area","extra":1}"#).is_err());
    }

    #[test]
    fn metric_bounds_and_value() {
        let g = Matrix::from_diagonal(&Vector::from_vec(vec![4.0, 1.0, 9.0]));
        let f = Integrand::metric(g, 2).unwrap();
        let v = f.eval(&Vector::zeros(3), &Plane::coordinate(3, &[0, 2])).unwrap();
        assert!((v - 6.0).abs() < 1e-12);
        assert_eq!((f.inf_bound(), f.sup_bound()), (1.0, 9.0));
    }
}
