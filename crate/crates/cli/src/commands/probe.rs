use gmtk::grassmann::Plane;
use gmtk::linalg::Vector;
use gmtk::varifold::{ellipticity_probe, Competitor, IntegrandSpec, ProbeOptions};
use serde::{Deserialize, Serialize};

use crate::config::load;
use crate::error::CliResult;
use crate::output::{csv_table, require, Format};
use crate::Ctx;

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub integrand: IntegrandSpec,
    pub point: Vec<f64>,
    pub plane: Plane,
    pub competitors: Vec<Competitor>,
    pub seed: u64,
    pub options: ProbeOptions,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            integrand: IntegrandSpec::Tilt {
                plane: Plane::coordinate(3, &[0, 1]),
                lambda: 1.0,
            },
            point: vec![0.0; 3],
            plane: Plane::coordinate(3, &[0, 1]),
            competitors: Competitor::default_family(),
            seed: 0,
            options: ProbeOptions::default(),
        }
    }
}

pub fn run(ctx: &mut Ctx) -> CliResult<()> {
    require(ctx.format, &[Format::Csv, Format::Json], "probe-ellipticity")?;
    let cfg: ProbeConfig = load(ctx.config.as_deref(), ctx.seed)?;
    let n = cfg.point.len();
    let f = cfg.integrand.build(n, cfg.plane.dim())?;
    let mut opts = cfg.options;
    opts.sup.seed = cfg.seed;
    let report = ellipticity_probe(&f, &Vector::from_vec(cfg.point.clone()), &cfg.plane, &cfg.competitors, &opts)?;
    if ctx.format == Format::Csv {
        let table = csv_table(
            &["competitor", "psi_gap", "measure_gap"],
            report.gaps.iter().map(|g| vec![g.competitor.clone(), g.psi_gap.to_string(), g.measure_gap.to_string()]),
        )?;
        ctx.out.write("ellipticity.csv", &table)?;
    }
    ctx.out.write_json("ellipticity.json", &report)?;
    match report.margin {
        Some(m) => println!("margin {m} counterexamples {}", report.counterexamples.len()),
        None => println!("margin undefined counterexamples {}", report.counterexamples.len()),
    }
    Ok(())
}
