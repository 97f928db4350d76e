use std::sync::Arc;

use gmtk::cubemaps::{central_projection, Ball, ConvexBody, Ellipsoid};
use gmtk::linalg::{operator_norm, Matrix, Vector};
use gmtk::map::SmoothMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fmt_vec;
use crate::config::load;
use crate::error::CliResult;
use crate::output::{csv_table, require, Format};
use crate::Ctx;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Ball { n: usize, radius: f64 },
    Ellipsoid { semi_axes: Vec<f64> },
}

impl BodySpec {
    fn build(&self) -> CliResult<Arc<dyn ConvexBody>> {
        Ok(match self {
            BodySpec::Ball { n, radius } => {
                if !(*radius > 0.0) || *n == 0 {
                    return Err(crate::error::input("ball needs n >= 1 and a positive radius"));
                }
                Arc::new(Ball { n: *n, radius: *radius })
            }
            BodySpec::Ellipsoid { semi_axes } => Arc::new(Ellipsoid::new(semi_axes.clone())?),
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectConfig {
    pub body: BodySpec,
    pub probes: usize,
    /// Probe norms are uniform in this range, directions uniform on the sphere.
    pub radii: [f64; 2],
    /// Central difference step for the Jacobian check.
    pub step: f64,
    pub seed: u64,
}

impl Default for ProjectConfig {
    fn default() -> Self {
        Self {
            body: BodySpec::Ellipsoid { semi_axes: vec![2.0, 1.0] },
            probes: 100,
            radii: [0.2, 3.0],
            step: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ProjectReport {
    pub probes: usize,
    pub max_fd_error: f64,
    pub bound_violations: usize,
    pub max_boundary_residual: f64,
}

pub fn run(ctx: &mut Ctx) -> CliResult<()> {
    require(ctx.format, &[Format::Csv], "project")?;
    let cfg: ProjectConfig = load(ctx.config.as_deref(), ctx.seed)?;
    let body = cfg.body.build()?;
    let n = body.dim();
    let (proj, _) = central_projection(body.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::with_capacity(cfg.probes);
    let mut report = ProjectReport {
        probes: cfg.probes,
        max_fd_error: 0.0,
        bound_violations: 0,
        max_boundary_residual: 0.0,
    };
    for _ in 0..cfg.probes {
        let dir = loop {
            let g = Vector::from_iterator(n, (0..n).map(|_| rng.random_range(-1.0..1.0)));
            let r = g.norm();
            if r > 1e-3 && r <= 1.0 {
                break g / r;
            }
        };
        let x = dir * rng.random_range(cfg.radii[0]..=cfg.radii[1]);
        let jet = proj.evaluate(&x)?;
        let mut fd = Matrix::zeros(n, n);
        for j in 0..n {
            let mut e = Vector::zeros(n);
            e[j] = cfg.step;
            let col = (proj.value(&(&x + &e))? - proj.value(&(&x - &e))?) / (2.0 * cfg.step);
            fd.set_column(j, &col);
        }
        let fd_error = (&fd - &jet.dp).abs().max();
        let norm = operator_norm(&jet.dp);
        let bound = proj.derivative_bound(&x)?;
        let residual = (body.gauge(&jet.p) - 1.0).abs();
        report.max_fd_error = report.max_fd_error.max(fd_error);
        report.bound_violations += usize::from(norm > bound * (1.0 + 1e-12));
        report.max_boundary_residual = report.max_boundary_residual.max(residual);
        let mut row = fmt_vec(&x);
        row.extend(fmt_vec(&jet.p));
        row.extend([jet.t.to_string(), norm.to_string(), bound.to_string(), fd_error.to_string()]);
        rows.push(row);
    }
    let mut header: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    header.extend((0..n).map(|i| format!("p{i}")));
    header.extend(["t", "jacobian_norm", "bound", "fd_error"].map(String::from));
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    ctx.out.write("project.csv", &csv_table(&h, rows)?)?;
    ctx.out.write_json("project_report.json", &report)?;
    println!(
        "probes {} max fd error {} bound violations {} boundary residual {}",
        report.probes, report.max_fd_error, report.bound_violations, report.max_boundary_residual
    );
    Ok(())
}
