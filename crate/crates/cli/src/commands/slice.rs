use std::path::PathBuf;

use gmtk::grassmann::Plane;
use gmtk::linalg::Vector;
use gmtk::varifold::{blowup_residual, blowup_test_functions, radial_distance, slice_study, sunflower_disc, DiscreteVarifold};
use serde::{Deserialize, Serialize};

use crate::config::{load, read_text};
use crate::error::{input, CliResult};
use crate::output::{csv_table, require, Format};
use crate::Ctx;

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SliceConfig {
    /// Sample file of a 2-dimensional set in `R^3`; a sunflower disc in the
    /// `x₀x₁` plane when unset.
    pub set: Option<PathBuf>,
    pub radius: f64,
    pub samples: usize,
    pub t: f64,
    pub bins: Vec<f64>,
    /// Reference slice mass; `2πt` when unset.
    pub exact: Option<f64>,
    pub deltas: Vec<f64>,
    /// Bin of the slices inside the blow-up residual.
    pub blowup_bin: f64,
}

impl Default for SliceConfig {
    fn default() -> Self {
        Self {
            set: None,
            radius: 1.0,
            samples: 25_600,
            t: 0.5,
            bins: vec![0.1, 0.05, 0.025],
            exact: None,
            deltas: vec![0.2, 0.1, 0.05],
            blowup_bin: 0.01,
        }
    }
}

pub fn run(ctx: &mut Ctx) -> CliResult<()> {
    require(ctx.format, &[Format::Csv, Format::Json], "slice")?;
    let cfg: SliceConfig = load(ctx.config.as_deref(), ctx.seed)?;
    let v = match &cfg.set {
        Some(p) => DiscreteVarifold::from_csv(&read_text(p)?, 3, 2).map_err(|e| input(format!("{}: {e}", p.display())))?,
        None => sunflower_disc(&Vector::zeros(3), &Plane::coordinate(3, &[0, 1]), cfg.radius, cfg.samples)?,
    };
    let rho = radial_distance(Vector::zeros(3));
    let exact = cfg.exact.unwrap_or(2.0 * std::f64::consts::PI * cfg.t);
    let rows = slice_study(&v, rho.as_ref(), &[cfg.t], &cfg.bins, exact)?;
    let tests = blowup_test_functions();
    let residuals = cfg
        .deltas
        .iter()
        .map(|&d| Ok((d, blowup_residual(&v, rho.clone(), cfg.t, d, cfg.blowup_bin, &tests)?)))
        .collect::<CliResult<Vec<(f64, f64)>>>()?;
    match ctx.format {
        Format::Json => {
            ctx.out.write_json("slice.json", &rows)?;
            ctx.out.write_json("blowup.json", &residuals)?;
        }
        _ => {
            let table = csv_table(
                &["bin", "mass", "rel_error"],
                rows.iter().map(|r| vec![r.bin.to_string(), r.mass.to_string(), r.rel_error.to_string()]),
            )?;
            ctx.out.write("slice.csv", &table)?;
            let table = csv_table(&["delta", "residual"], residuals.iter().map(|(d, r)| vec![d.to_string(), r.to_string()]))?;
            ctx.out.write("blowup.csv", &table)?;
        }
    }
    for r in &rows {
        println!("bin {} mass {} rel error {}", r.bin, r.mass, r.rel_error);
    }
    for (d, r) in &residuals {
        println!("delta {d} residual {r}");
    }
    Ok(())
}
