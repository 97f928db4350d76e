use std::path::Path;

use gmtk::solver::{audit_minimizer, AuditOptions, SolutionRecord};
use gmtk::varifold::IntegrandSpec;
use serde::{Deserialize, Serialize};

use crate::config::{load, read_text};
use crate::error::{json_error, CliResult};
use crate::output::{require, Format};
use crate::Ctx;

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditConfig {
    pub integrand: IntegrandSpec,
    pub options: AuditOptions,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            integrand: IntegrandSpec::Area {},
            options: AuditOptions::default(),
        }
    }
}

pub fn run(ctx: &mut Ctx, solution: &Path) -> CliResult<()> {
    require(ctx.format, &[Format::Json, Format::Csv], "audit")?;
    let cfg: AuditConfig = load(ctx.config.as_deref(), None)?;
    let text = read_text(solution)?;
    let record: SolutionRecord = serde_json::from_str(&text).map_err(|e| json_error(&solution.display().to_string(), e))?;
    let chain = record.to_chain()?;
    let f = cfg.integrand.build(chain.complex().ambient_dim(), chain.dim())?;
    let report = audit_minimizer(&chain, &f, &cfg.options)?;
    match ctx.format {
        Format::Json => ctx.out.write_json("audit.json", &report)?,
        _ => ctx.out.write("audit.csv", &report.to_csv())?,
    }
    println!(
        "points {} interior [{}, {}] violations {}",
        report.points.len(),
        report.interior_min.map_or("-".into(), |v| v.to_string()),
        report.interior_max.map_or("-".into(), |v| v.to_string()),
        report.violations
    );
    Ok(())
}
