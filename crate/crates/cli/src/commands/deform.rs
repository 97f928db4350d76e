use std::path::{Path, PathBuf};

use gmtk::cubical::{cubical_complex, CubeFamily};
use gmtk::deform::{deform_onto_skeleton, push_samples, DeformOptions, DeformReport, DeformationPlan};
use gmtk::varifold::DiscreteVarifold;
use serde::{Deserialize, Serialize};

use crate::config::{load, read_text};
use crate::error::{input, CliResult};
use crate::output::{require, Format};
use crate::Ctx;

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeformConfig {
    /// Ambient dimension and dimension of the sample file.
    pub ambient_dim: usize,
    pub dim: usize,
    /// Target skeleton dimension; the set dimension when unset.
    pub m: Option<usize>,
    /// Grid `[lo, hi)` in cube units at `level`.
    pub level: i32,
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
    pub eps: f64,
    pub seed: u64,
    pub options: DeformOptions,
    /// Replay this plan instead of building one.
    pub plan: Option<PathBuf>,
}

impl Default for DeformConfig {
    fn default() -> Self {
        Self {
            ambient_dim: 3,
            dim: 2,
            m: None,
            level: 0,
            lo: vec![0, 0, 0],
            hi: vec![4, 4, 4],
            eps: 0.05,
            seed: 0,
            options: DeformOptions::default(),
            plan: None,
        }
    }
}

#[derive(Debug, Serialize)]
struct Constants {
    samples: usize,
    mass: f64,
    image_mass: f64,
    /// `mass(g₁#V) / mass(V)`.
    mass_ratio: Option<f64>,
    replayed: bool,
    report: Option<DeformReport>,
}

pub fn run(ctx: &mut Ctx, set: &Path) -> CliResult<()> {
    require(ctx.format, &[Format::Csv], "deform")?;
    let cfg: DeformConfig = load(ctx.config.as_deref(), ctx.seed)?;
    let text = read_text(set)?;
    let v = DiscreteVarifold::from_csv(&text, cfg.ambient_dim, cfg.dim).map_err(|e| input(format!("{}: {e}", set.display())))?;
    let (plan, report) = match &cfg.plan {
        Some(path) => {
            let plan = DeformationPlan::from_json(&read_text(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
            (plan, None)
        }
        None => {
            let family = CubeFamily::grid(cfg.level, &cfg.lo, &cfg.hi);
            if family.ambient_dim() != cfg.ambient_dim {
                return Err(input("grid corners must have ambient_dim entries"));
            }
            let complex = cubical_complex(&family)?;
            let mut opts = cfg.options.clone();
            opts.center.seed = cfg.seed;
            let m = cfg.m.unwrap_or(cfg.dim);
            let d = deform_onto_skeleton(&family, &complex, std::slice::from_ref(&v), m, cfg.eps, &opts)?;
            (d.plan, Some(d.report))
        }
    };
    let image = push_samples(&plan.g1(), &v)?;
    ctx.out.write("deformed.csv", &image.to_csv()?)?;
    let mut plan_text = plan.to_json()?;
    plan_text.push('\n');
    ctx.out.write("plan.json", &plan_text)?;
    let constants = Constants {
        samples: v.len(),
        mass: v.mass(),
        image_mass: image.mass(),
        mass_ratio: (v.mass() > 0.0).then(|| image.mass() / v.mass()),
        replayed: cfg.plan.is_some(),
        report,
    };
    ctx.out.write_json("constants.json", &constants)?;
    match constants.report.as_ref().and_then(|r| r.sets.first()) {
        Some(s) => println!(
            "steps {} samples {} within skeleton {} of {} mass ratio {}",
            plan.len(),
            v.len(),
            s.within_skeleton,
            s.samples,
            s.mass_ratio
        ),
        None => println!("steps {} samples {}", plan.len(), v.len()),
    }
    Ok(())
}
