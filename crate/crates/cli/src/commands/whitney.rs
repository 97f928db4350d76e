use gmtk::cubical::{obj_export, whitney_family, WhitneyOptions};
use gmtk::region::Region;
use serde::{Deserialize, Serialize};

use crate::config::load;
use crate::error::CliResult;
use crate::output::{csv_table, Format};
use crate::Ctx;

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WhitneyConfig {
    pub region: Region,
    /// Bounding box of the enumeration.
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub start_level: Option<i32>,
    pub finest_level: i32,
}

impl Default for WhitneyConfig {
    fn default() -> Self {
        Self {
            region: Region::Ball {
                center: vec![0.0, 0.0],
                radius: 1.0,
            },
            lo: vec![-1.0, -1.0],
            hi: vec![1.0, 1.0],
            start_level: None,
            finest_level: 5,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct WhitneyReport {
    pub cubes: usize,
    pub min_side: f64,
    pub violations: usize,
    pub uncovered_facets: usize,
    pub truncation: Option<gmtk::cubical::Truncation>,
}

pub fn run(ctx: &mut Ctx) -> CliResult<()> {
    let cfg: WhitneyConfig = load(ctx.config.as_deref(), ctx.seed)?;
    let opts = WhitneyOptions {
        start_level: cfg.start_level,
        finest_level: cfg.finest_level,
    };
    let family = whitney_family(&cfg.region, &cfg.lo, &cfg.hi, &opts)?;
    let n = family.ambient_dim();
    match ctx.format {
        Format::Json => ctx.out.write_json("whitney.json", family.cubes())?,
        Format::Obj => ctx.out.write("whitney.obj", &obj_export(family.cubes(), n)?)?,
        Format::Csv => {
            let mut header = vec!["id".to_string(), "level".into(), "side".into()];
            header.extend((0..n).map(|i| format!("lo{i}")));
            let h: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows = family.cubes().iter().map(|c| {
                let mut r = vec![c.id(), c.level().to_string(), c.side().to_string()];
                r.extend(c.lo().iter().map(|v| v.to_string()));
                r
            });
            ctx.out.write("whitney.csv", &csv_table(&h, rows)?)?
        }
    }
    let report = WhitneyReport {
        cubes: family.len(),
        min_side: family.min_side(),
        violations: family.violations().len(),
        uncovered_facets: family.uncovered_facets(),
        truncation: family.truncation().cloned(),
    };
    ctx.out.write_json("whitney_report.json", &report)?;
    println!("cubes {} violations {}", report.cubes, report.violations);
    Ok(())
}
