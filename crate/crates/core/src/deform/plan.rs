//! Deformation plans: the ordered one-cube steps, their compositions and
//! the homotopy through them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cubical::DyadicCube;
use crate::deform::one_cube::CubeDeformation;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::map::{check_point, Smoothness, SmoothMap, Support};
use crate::profile::quintic_step;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Cubes of dimension above `m`, pushed onto their boundaries.
    Descent,
    /// Partly covered `m`-cubes, emptied onto their boundaries.
    Cleanup,
}

/// Everything needed to rebuild one step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRecipe {
    pub id: String,
    pub cube: DyadicCube,
    pub stage: Stage,
    pub center: Vec<f64>,
    pub eps: f64,
    pub blend: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanRecord {
    ambient_dim: usize,
    m: usize,
    eps: f64,
    steps: Vec<StepRecipe>,
}

#[derive(Clone)]
pub struct DeformationPlan {
    ambient_dim: usize,
    m: usize,
    eps: f64,
    steps: Vec<StepRecipe>,
    maps: Vec<Arc<CubeDeformation>>,
    descent: usize,
}

impl std::fmt::Debug for DeformationPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DeformationPlan")
            .field("ambient_dim", &self.ambient_dim)
            .field("m", &self.m)
            .field("eps", &self.eps)
            .field("steps", &self.steps)
            .finish()
    }
}

impl DeformationPlan {
    pub fn identity(ambient_dim: usize, m: usize, eps: f64) -> Self {
        Self {
            ambient_dim,
            m,
            eps,
            steps: Vec::new(),
            maps: Vec::new(),
            descent: 0,
        }
    }

    /// Rebuild the maps of a recipe list. Descent steps must come first.
    pub fn from_steps(ambient_dim: usize, m: usize, eps: f64, steps: Vec<StepRecipe>) -> Result<Self> {
        let mut plan = Self::identity(ambient_dim, m, eps);
        for s in steps {
            plan.push(s)?;
        }
        Ok(plan)
    }

    pub(crate) fn push(&mut self, step: StepRecipe) -> Result<Arc<CubeDeformation>> {
        Error::check_dim("step cube", self.ambient_dim, step.cube.ambient_dim())?;
        if step.stage == Stage::Descent && self.descent != self.steps.len() {
            return Err(Error::Parse(format!("descent step {} follows a cleanup step", step.id)));
        }
        let map = Arc::new(CubeDeformation::new(step.cube.clone(), Vector::from_vec(step.center.clone()), step.eps, step.blend)?);
        if step.stage == Stage::Descent {
            self.descent += 1;
        }
        self.steps.push(step);
        self.maps.push(map.clone());
        Ok(map)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn steps(&self) -> &[StepRecipe] {
        &self.steps
    }

    pub fn step_maps(&self) -> &[Arc<CubeDeformation>] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Number of descent steps `N_0`.
    pub fn descent_len(&self) -> usize {
        self.descent
    }

    /// `ψ_j = φ_j ∘ … ∘ φ_1`.
    pub fn partial(&self, j: usize) -> PlanMap {
        PlanMap {
            n: self.ambient_dim,
            maps: self.maps[..j.min(self.maps.len())].to_vec(),
        }
    }

    /// `g(1, ·)`: the descent steps.
    pub fn g1(&self) -> PlanMap {
        self.partial(self.descent)
    }

    /// `f(1, ·)`: all steps.
    pub fn f1(&self) -> PlanMap {
        self.partial(self.maps.len())
    }

    /// `f(t, ·)`, passing through step `j` during `t ∈ [j/N, (j+1)/N]`.
    pub fn f_at(&self, t: f64) -> HomotopySlice {
        self.slice(t, self.maps.len())
    }

    /// `g(t, ·)`, the same homotopy run over the descent steps only.
    pub fn g_at(&self, t: f64) -> HomotopySlice {
        self.slice(t, self.descent)
    }

    fn slice(&self, t: f64, count: usize) -> HomotopySlice {
        if count == 0 || t <= 0.0 {
            return HomotopySlice {
                before: self.partial(0),
                step: None,
                s: 0.0,
            };
        }
        if t >= 1.0 {
            return HomotopySlice {
                before: self.partial(count),
                step: None,
                s: 0.0,
            };
        }
        let scaled = t * count as f64;
        let j = (scaled.floor() as usize).min(count - 1);
        HomotopySlice {
            before: self.partial(j),
            step: Some(self.maps[j].clone()),
            s: time_profile(scaled - j as f64).0,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let record = PlanRecord {
            ambient_dim: self.ambient_dim,
            m: self.m,
            eps: self.eps,
            steps: self.steps.clone(),
        };
        serde_json::to_string_pretty(&record).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: PlanRecord = serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {}: {e}", e.line())))?;
        Self::from_steps(r.ambient_dim, r.m, r.eps, r.steps)
    }
}

/// The time profile `s`: `s(0) = 0`, `s(1) = 1`, `0 ≤ s' ≤ 2`.
pub fn time_profile(u: f64) -> (f64, f64) {
    quintic_step(u)
}

/// A composition of one-cube steps, applied in order.
#[derive(Clone)]
pub struct PlanMap {
    n: usize,
    maps: Vec<Arc<CubeDeformation>>,
}

impl PlanMap {
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }
}

impl SmoothMap for PlanMap {
    fn domain_dim(&self) -> usize {
        self.n
    }

    fn jet(&self, x: &Vector) -> Result<(Vector, Matrix)> {
        check_point(self, x)?;
        let mut y = x.clone();
        let mut d = Matrix::identity(self.n, self.n);
        for m in &self.maps {
            if m.may_move(&y) {
                let (z, dz) = m.jet(&y)?;
                d = dz * d;
                y = z;
            }
        }
        Ok((y, d))
    }

    fn support(&self) -> Support {
        self.maps.iter().fold(Support::Empty, |acc, m| acc.hull(&m.support()))
    }

    fn smoothness(&self) -> Smoothness {
        self.maps.iter().fold(Smoothness::Infinite, |acc, m| acc.min(m.smoothness()))
    }
}

/// `(1 − s)·ψ_j + s·ψ_{j+1}` at a fixed time.
#[derive(Clone)]
pub struct HomotopySlice {
    before: PlanMap,
    step: Option<Arc<CubeDeformation>>,
    s: f64,
}

impl SmoothMap for HomotopySlice {
    fn domain_dim(&self) -> usize {
        self.before.n
    }

    fn jet(&self, x: &Vector) -> Result<(Vector, Matrix)> {
        let (y, d) = self.before.jet(x)?;
        match &self.step {
            Some(step) if step.may_move(&y) => {
                let (z, dz) = step.jet(&y)?;
                let dz = dz * &d;
                Ok((&y + (z - &y) * self.s, &d + (dz - &d) * self.s))
            }
            _ => Ok((y, d)),
        }
    }

    fn support(&self) -> Support {
        match &self.step {
            Some(step) => self.before.support().hull(&step.support()),
            None => self.before.support(),
        }
    }

    fn smoothness(&self) -> Smoothness {
        self.before.smoothness()
    }
}
