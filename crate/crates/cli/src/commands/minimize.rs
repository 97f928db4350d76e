use std::path::Path;

use gmtk::solver::{audit_minimizer, chain_obj, exhaustive_oracle, minimize, AuditOptions, SolutionRecord, SpanningProblem};
use serde::{Deserialize, Serialize};

use crate::config::{load, read_text};
use crate::error::CliResult;
use crate::output::{csv_table, require, Format};
use crate::Ctx;

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinimizeConfig {
    /// Run the exhaustive oracle; over budget it is skipped.
    pub oracle: bool,
    pub audit: Option<AuditOptions>,
    pub trace: bool,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        Self {
            oracle: true,
            audit: Some(AuditOptions::default()),
            trace: true,
        }
    }
}

pub fn run(ctx: &mut Ctx, problem: &Path) -> CliResult<()> {
    require(ctx.format, &[Format::Json, Format::Csv, Format::Obj], "minimize")?;
    let cfg: MinimizeConfig = load(ctx.config.as_deref(), None)?;
    let mut p = SpanningProblem::from_json(&read_text(problem)?)?;
    if let Some(seed) = ctx.seed {
        p.options.seed = seed;
    }
    let min = minimize(&p)?;
    let oracle = if cfg.oracle {
        match exhaustive_oracle(&p, p.options.oracle_budget) {
            Ok(o) => Some(o),
            Err(gmtk::Error::BudgetExceeded { dimension, budget }) => {
                eprintln!("oracle skipped: dimension {dimension} over budget {budget}");
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let record = SolutionRecord::new(&p, &min, oracle.as_ref());
    ctx.out.write_json("solution.json", &record)?;
    if (2..=3).contains(&p.complex().ambient_dim()) {
        ctx.out.write("chain.obj", &chain_obj(&min.chain)?)?;
    }
    if let Some(opts) = &cfg.audit {
        if p.dim() >= 1 && !min.chain.is_empty() {
            let report = audit_minimizer(&min.chain, p.integrand(), opts)?;
            ctx.out.write_json("audit.json", &report)?;
            ctx.out.write("audit.csv", &report.to_csv())?;
            println!("audit violations {}", report.violations);
        }
    }
    if cfg.trace {
        let table = csv_table(
            &["restart", "step", "cube", "generator", "value", "cells"],
            min.trace.iter().map(|m| {
                vec![
                    m.restart.to_string(),
                    m.step.to_string(),
                    m.cube.clone(),
                    m.generator.to_string(),
                    m.value.to_string(),
                    m.cells.to_string(),
                ]
            }),
        )?;
        ctx.out.write("trace.csv", &table)?;
    }
    println!("value {} initial {} cells {}", record.value, record.initial_value, record.cells);
    if let Some(o) = &record.oracle {
        println!("oracle {} ({:?}, dimension {}) equal {}", o.value, o.method, o.dimension, o.equal);
    }
    Ok(())
}
