use gmtk::cubemaps::{dist_to_cube, retraction_with_collar, smooth_retraction};
use gmtk::linalg::operator_norm;
use gmtk::map::MapRef;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::{fmt_vec, uniform_point};
use crate::config::load;
use crate::error::CliResult;
use crate::output::{csv_table, require, Format};
use crate::Ctx;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetractionKind {
    /// Identity beyond `ε`, moves points by at most `ε`.
    Collar,
    /// Onto `Q`.
    Smooth,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetractConfig {
    pub n: usize,
    pub eps: f64,
    pub map: RetractionKind,
    pub probes: usize,
    /// Probes are uniform in `[−half_width, half_width]^n`.
    pub half_width: f64,
    pub seed: u64,
}

impl Default for RetractConfig {
    fn default() -> Self {
        Self {
            n: 2,
            eps: 0.25,
            map: RetractionKind::Collar,
            probes: 1000,
            half_width: 1.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RetractReport {
    pub n: usize,
    pub eps: f64,
    pub probes: usize,
    pub max_displacement: f64,
    pub max_jacobian_norm: f64,
    pub jacobian_bound: f64,
    /// Probes farther than `ε` from `Q` that moved (collar map only).
    pub identity_violations: usize,
    /// Probes moved by more than `ε` (collar map only).
    pub displacement_violations: usize,
    /// Images outside `Q` (smooth map only).
    pub outside_cube: usize,
}

pub fn run(ctx: &mut Ctx) -> CliResult<()> {
    require(ctx.format, &[Format::Csv, Format::Json], "retract")?;
    let cfg: RetractConfig = load(ctx.config.as_deref(), ctx.seed)?;
    let map: MapRef = match cfg.map {
        RetractionKind::Collar => Arc::new(retraction_with_collar(cfg.n, cfg.eps)?),
        RetractionKind::Smooth => Arc::new(smooth_retraction(cfg.n, cfg.eps)?),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::with_capacity(cfg.probes);
    let mut report = RetractReport {
        n: cfg.n,
        eps: cfg.eps,
        probes: cfg.probes,
        max_displacement: 0.0,
        max_jacobian_norm: 0.0,
        jacobian_bound: 16.0 * (cfg.n as f64).sqrt(),
        identity_violations: 0,
        displacement_violations: 0,
        outside_cube: 0,
    };
    for _ in 0..cfg.probes {
        let x = uniform_point(&mut rng, cfg.n, cfg.half_width);
        let (y, d) = map.jet(&x)?;
        let moved = (&y - &x).norm();
        let dist = dist_to_cube(&x);
        let jac = operator_norm(&d);
        report.max_displacement = report.max_displacement.max(moved);
        report.max_jacobian_norm = report.max_jacobian_norm.max(jac);
        match cfg.map {
            RetractionKind::Collar => {
                report.identity_violations += usize::from(dist > cfg.eps && moved != 0.0);
                report.displacement_violations += usize::from(moved > cfg.eps);
            }
            RetractionKind::Smooth => report.outside_cube += usize::from(dist_to_cube(&y) > 0.0),
        }
        let mut row = fmt_vec(&x);
        row.extend(fmt_vec(&y));
        row.extend([moved.to_string(), dist.to_string(), jac.to_string()]);
        rows.push(row);
    }
    let mut header: Vec<String> = (0..cfg.n).map(|i| format!("x{i}")).collect();
    header.extend((0..cfg.n).map(|i| format!("y{i}")));
    header.extend(["displacement", "dist_to_cube", "jacobian_norm"].map(String::from));
    match ctx.format {
        Format::Json => {
            let objs: Vec<serde_json::Map<String, serde_json::Value>> = rows
                .iter()
                .map(|r| header.iter().cloned().zip(r.iter().map(|v| serde_json::Value::from(v.parse::<f64>().unwrap_or(f64::NAN)))).collect())
                .collect();
            ctx.out.write_json("retract.json", &objs)?
        }
        _ => {
            let h: Vec<&str> = header.iter().map(String::as_str).collect();
            ctx.out.write("retract.csv", &csv_table(&h, rows)?)?
        }
    }
    ctx.out.write_json("retract_report.json", &report)?;
    println!(
        "probes {} max displacement {} max jacobian {} (bound {}) identity violations {} displacement violations {}",
        report.probes, report.max_displacement, report.max_jacobian_norm, report.jacobian_bound, report.identity_violations, report.displacement_violations
    );
    Ok(())
}
