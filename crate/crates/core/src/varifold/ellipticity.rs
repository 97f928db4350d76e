//! One-sided ellipticity probe: compare the flat unit disc in `T` with a
//! family of competitors sharing its boundary. A negative gap refutes
//! ellipticity at `(x, T)`; no finite family can certify it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::Plane;
use crate::linalg::{volume_factor, Matrix, Vector};
use crate::varifold::integrand::{sup_over_planes, Integrand, SupOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Competitor {
    /// Graph of `h·(1 − |y|²)²` over the disc.
    Bump { height: f64 },
    /// Cone over the boundary circle with apex at height `h`.
    Cone { height: f64 },
    /// Triangle-wave graph with facets tilted by `angle` from `T`, period
    /// `period`, tapered to zero on an outer ring of width `2·period`.
    Sawtooth { angle: f64, period: f64 },
    /// The disc plus unrectifiable mass.
    UnrectifiablePatch { mass: f64 },
}

impl Competitor {
    pub fn default_family() -> Vec<Competitor> {
        let mut out = vec![
            Competitor::Bump { height: 0.1 },
            Competitor::Bump { height: 0.3 },
            Competitor::Cone { height: 0.2 },
            Competitor::Cone { height: 0.5 },
        ];
        for deg in [30.0f64, 45.0, 60.0] {
            out.push(Competitor::Sawtooth {
                angle: deg.to_radians(),
                period: 0.1,
            });
        }
        out.push(Competitor::UnrectifiablePatch { mass: 0.1 });
        out
    }

    fn label(&self) -> String {
        match self {
            Competitor::Bump { height } => format!("bump(h={height})"),
            Competitor::Cone { height } => format!("cone(h={height})"),
            Competitor::Sawtooth { angle, period } => format!("sawtooth(angle={:.1}deg,p={period})", angle.to_degrees()),
            Competitor::UnrectifiablePatch { mass } => format!("unrectifiable_patch(mass={mass})"),
        }
    }

    /// Height and gradient over the unit disc at `y`.
    fn graph(&self, y: &[f64]) -> (f64, Vec<f64>) {
        let r2: f64 = y.iter().map(|v| v * v).sum();
        let r = r2.sqrt();
        match *self {
            Competitor::Bump { height } => {
                let g = 1.0 - r2;
                (height * g * g, y.iter().map(|v| -4.0 * height * g * v).collect())
            }
            Competitor::Cone { height } => {
                let grad = if r > 0.0 { y.iter().map(|v| -height * v / r).collect() } else { vec![0.0; y.len()] };
                (height * (1.0 - r), grad)
            }
            Competitor::Sawtooth { angle, period } => {
                let u = y[0] / period;
                let frac = u - u.floor();
                let tri = frac.min(1.0 - frac);
                let dtri = if frac < 0.5 { 1.0 } else { -1.0 } / period;
                let amp = period * angle.tan();
                let ring = 2.0 * period;
                let (c, dc) = if 1.0 - r >= ring { (1.0, 0.0) } else { ((1.0 - r) / ring, -1.0 / ring) };
                let mut grad: Vec<f64> = y.iter().map(|v| if r > 0.0 { amp * tri * dc * v / r } else { 0.0 }).collect();
                grad[0] += amp * dtri * c;
                (amp * tri * c, grad)
            }
            Competitor::UnrectifiablePatch { .. } => (0.0, vec![0.0; y.len()]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateGap {
    pub competitor: String,
    pub psi_gap: f64,
    pub measure_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticityReport {
    /// Smallest `Ψ-gap / measure-gap` over candidates with positive
    /// measure gap.
    pub margin: Option<f64>,
    pub gaps: Vec<CandidateGap>,
    /// Competitors with a negative `Ψ` gap.
    pub counterexamples: Vec<String>,
}

/// Polar quadrature resolution of the disc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeOptions {
    pub rings: usize,
    pub sectors: usize,
    pub sup: SupOptions,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            rings: 96,
            sectors: 192,
            sup: SupOptions::default(),
        }
    }
}

pub fn ellipticity_probe(f: &Integrand, x: &Vector, t: &Plane, candidates: &[Competitor], opts: &ProbeOptions) -> Result<EllipticityReport> {
    if candidates.is_empty() {
        return Err(Error::param("candidates", 0, "need at least one competitor"));
    }
    let n = t.ambient_dim();
    let m = t.dim();
    Error::check_dim("probe point", n, x.len())?;
    if m == 0 || m >= n {
        return Err(Error::param("m", m, "probe needs 0 < m < n"));
    }
    let fx = f.frozen(x);
    let normal = t.complement().frame().column(0).into_owned();
    let nodes = disc_nodes(m, opts.rings, opts.sectors);
    let base = fx.eval(x, t)?;
    let mut gaps = Vec::with_capacity(candidates.len());
    for c in candidates {
        let (psi_gap, measure_gap) = match c {
            Competitor::UnrectifiablePatch { mass } => (mass * sup_over_planes(&fx, x, m, &opts.sup)?, *mass),
            _ => {
                let mut psi = 0.0;
                let mut meas = 0.0;
                for (y, da) in &nodes {
                    let (_, grad) = c.graph(y);
                    let g = Vector::from_vec(grad);
                    let cols: Matrix = t.frame() + &normal * g.transpose();
                    let jac = volume_factor(&cols);
                    let tangent = Plane::from_columns(&cols)?;
                    psi += (fx.eval(x, &tangent)? * jac - base) * da;
                    meas += (jac - 1.0) * da;
                }
                (psi, meas)
            }
        };
        gaps.push(CandidateGap {
            competitor: c.label(),
            psi_gap,
            measure_gap,
        });
    }
    let margin = gaps
        .iter()
        .filter(|g| g.measure_gap > 0.0)
        .map(|g| g.psi_gap / g.measure_gap)
        .min_by(f64::total_cmp);
    let counterexamples = gaps.iter().filter(|g| g.psi_gap < 0.0).map(|g| g.competitor.clone()).collect();
    Ok(EllipticityReport {
        margin,
        gaps,
        counterexamples,
    })
}

/// Midpoint nodes and area weights on the unit `m`-disc (polar for `m = 2`,
/// a cartesian grid clipped to the disc otherwise).
fn disc_nodes(m: usize, rings: usize, sectors: usize) -> Vec<(Vec<f64>, f64)> {
    if m == 2 {
        let dr = 1.0 / rings as f64;
        let dth = std::f64::consts::TAU / sectors as f64;
        let mut out = Vec::with_capacity(rings * sectors);
        for i in 0..rings {
            let r = (i as f64 + 0.5) * dr;
            for j in 0..sectors {
                let th = (j as f64 + 0.5) * dth;
                out.push((vec![r * th.cos(), r * th.sin()], r * dr * dth));
            }
        }
        return out;
    }
    let k = 2 * rings;
    let h = 2.0 / k as f64;
    let total = k.pow(m as u32);
    let mut out = Vec::new();
    for mut idx in 0..total {
        let mut y = Vec::with_capacity(m);
        for _ in 0..m {
            y.push(-1.0 + (idx % k) as f64 * h + 0.5 * h);
            idx /= k;
        }
        if y.iter().map(|v| v * v).sum::<f64>() < 1.0 {
            out.push((y, h.powi(m as i32)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_gradients_match_finite_differences() {
        let h = 1e-6;
        for c in Competitor::default_family() {
            for y in [[0.31, -0.22], [-0.53, 0.4], [0.07, 0.9]] {
                let (_, g) = c.graph(&y);
                for j in 0..2 {
                    let mut yp = y;
                    let mut ym = y;
                    yp[j] += h;
                    ym[j] -= h;
                    let fd = (c.graph(&yp).0 - c.graph(&ym).0) / (2.0 * h);
                    assert!((fd - g[j]).abs() < 1e-5, "{c:?} {y:?}");
                }
            }
        }
    }
}
