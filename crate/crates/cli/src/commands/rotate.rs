use std::path::Path;

use gmtk::grassmann::{build_rotation, projector_distance, Plane};
use gmtk::linalg::{operator_norm, Matrix};
use serde::{Deserialize, Serialize};

use crate::config::{load, read_text};
use crate::error::{input, CliResult};
use crate::output::{csv_table, require, Format};
use crate::Ctx;

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RotateConfig {
    pub taus: Vec<f64>,
    /// `C` in `‖M(τ) − I‖ ≤ C|τ|d`.
    pub constant: f64,
    /// Relative slack of the bound check.
    pub slack: f64,
}

impl Default for RotateConfig {
    fn default() -> Self {
        Self {
            taus: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            constant: 8.0,
            slack: 1e-12,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RotateRow {
    pub pair: usize,
    pub tau: f64,
    pub deviation: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Lines `n, m, S (n·m entries, row-major), T (n·m entries)`; `#` starts a comment.
pub fn parse_pairs(text: &str, origin: &str) -> CliResult<Vec<(Plane, Plane)>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| input(format!("{origin}: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |what: String| input(format!("{origin}: line {line}: {what}"));
        let nums = rec
            .iter()
            .enumerate()
            .map(|(i, f)| f.parse::<f64>().map_err(|_| bad(format!("field {} `{f}` is not a number", i + 1))))
            .collect::<CliResult<Vec<f64>>>()?;
        if nums.len() < 2 || nums[0].fract() != 0.0 || nums[1].fract() != 0.0 || nums[0] < 1.0 || nums[1] < 0.0 {
            return Err(bad("expected integer dimensions n, m first".into()));
        }
        let (n, m) = (nums[0] as usize, nums[1] as usize);
        if m > n || nums.len() != 2 + 2 * n * m {
            return Err(bad(format!("expected {} fields for n = {n}, m = {m}, found {}", 2 + 2 * n * m, nums.len())));
        }
        let plane = |off: usize| -> CliResult<Plane> {
            let frame = Matrix::from_row_slice(n, m, &nums[off..off + n * m]);
            Plane::from_columns(&frame).map_err(|e| bad(e.to_string()))
        };
        out.push((plane(2)?, plane(2 + n * m)?));
    }
    Ok(out)
}

pub fn rotate_rows(pairs: &[(Plane, Plane)], cfg: &RotateConfig) -> CliResult<Vec<RotateRow>> {
    let mut rows = Vec::with_capacity(pairs.len() * cfg.taus.len());
    for (i, (s, t)) in pairs.iter().enumerate() {
        let rot = build_rotation(s, t)?;
        let d = projector_distance(s, t)?;
        let n = s.ambient_dim();
        for &tau in &cfg.taus {
            let deviation = operator_norm(&(rot.evaluate(tau) - Matrix::identity(n, n)));
            let bound = cfg.constant * tau.abs() * d;
            rows.push(RotateRow {
                pair: i,
                tau,
                deviation,
                bound,
                pass: deviation <= bound * (1.0 + cfg.slack) + cfg.slack,
            });
        }
    }
    Ok(rows)
}

pub fn run(ctx: &mut Ctx, planes: &Path) -> CliResult<()> {
    require(ctx.format, &[Format::Csv, Format::Json], "rotate")?;
    let cfg: RotateConfig = load(ctx.config.as_deref(), ctx.seed)?;
    let pairs = parse_pairs(&read_text(planes)?, &planes.display().to_string())?;
    let rows = rotate_rows(&pairs, &cfg)?;
    let failures = rows.iter().filter(|r| !r.pass).count();
    match ctx.format {
        Format::Json => ctx.out.write_json("rotate.json", &rows)?,
        _ => {
            let table = csv_table(
                &["pair", "tau", "deviation", "bound", "pass"],
                rows.iter()
                    .map(|r| vec![r.pair.to_string(), r.tau.to_string(), r.deviation.to_string(), r.bound.to_string(), r.pass.to_string()]),
            )?;
            ctx.out.write("rotate.csv", &table)?;
        }
    }
    println!("pairs {} rows {} failures {}", pairs.len(), rows.len(), failures);
    Ok(())
}
