use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use gmtk::cubemaps::convex::central_projection;
use gmtk::cubemaps::{dist_to_cube, retraction_with_collar, Ball, ConvexBody, Ellipsoid, FaceIndex};
use gmtk::cubical::{cubical_complex, CubeFamily, DyadicCube};
use gmtk::deform::{deform_onto_skeleton, purge_unrectifiable, DeformOptions, PurgeOptions};
use gmtk::grassmann::{build_rotation, haar_sample, haar_sample_with, projector_distance, tilt_measure_excess, Plane};
use gmtk::linalg::{operator_norm, Matrix, Vector};
use gmtk::map::{jacobian_error, Affine, SmoothMap};
use gmtk::measure::{four_corner_cantor, SampledSet};
use gmtk::region::Region;
use gmtk::solver::*;
use gmtk::varifold::{
    blowup_residual, blowup_test_functions, isotropic_from, pullback_integrand, radial_distance, slice_study, sunflower_disc,
    DiscreteVarifold, Integrand, IntegrandSpec, Sample, TableSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn v(xs: &[f64]) -> Vector {
    Vector::from_vec(xs.to_vec())
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Vector {
    Vector::from_fn(n, |_, _| rng.random_range(-half..half))
}

fn rotation_bounds() -> Outcome {
    let taus = [0.0, 0.25, 0.5, 0.75, 1.0];
    let h = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_ortho, mut worst_proj, mut pairs) = (0.0f64, 0.0f64, 0);
    for n in 1..=6 {
        for m in 1..=n {
            let id = Matrix::identity(n, n);
            for _ in 0..1000 {
                let s = haar_sample_with(&mut rng, n, m).map_err(fail)?;
                let t = haar_sample_with(&mut rng, n, m).map_err(fail)?;
                let d = projector_distance(&s, &t).map_err(fail)?;
                let r = build_rotation(&s, &t).map_err(fail)?;
                for &tau in &taus {
                    let mt = r.evaluate(tau);
                    worst_ortho = worst_ortho.max((mt.transpose() * &mt - &id).amax());
                    let dev = operator_norm(&(&mt - &id));
                    ensure(dev <= 8.0 * tau * d + 1e-12, || format!("n={n} m={m} tau={tau}: |M-I| {dev} > 8 tau d"))?;
                    let fd = (r.evaluate(tau + h) - r.evaluate(tau - h)) / (2.0 * h);
                    let speed = operator_norm(&fd);
                    ensure(speed <= 8.0 * d * (1.0 + 1e-4) + 1e-9, || format!("n={n} m={m} tau={tau}: |M'| {speed} > 8d"))?;
                }
                let m1 = r.evaluate(1.0);
                worst_proj = worst_proj.max((&m1 * s.projector() * m1.transpose() - t.projector()).amax());
                pairs += 1;
            }
        }
    }
    ensure(worst_ortho <= 1e-10, || format!("orthogonality residual {worst_ortho}"))?;
    ensure(worst_proj <= 1e-9, || format!("projector residual {worst_proj}"))?;
    Ok(format!("{pairs} pairs, orthogonality {worst_ortho:.1e}, projector {worst_proj:.1e}"))
}

fn tilt_sandwich() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0;
    let mut pairs = 0;
    for n in 1..=6 {
        for m in 1..=n {
            for _ in 0..2000 {
                let p = haar_sample_with(&mut rng, n, m).map_err(fail)?;
                let q = haar_sample_with(&mut rng, n, m).map_err(fail)?;
                if !tilt_measure_excess(&p, &q).map_err(fail)?.holds(1e-12) {
                    violations += 1;
                }
                pairs += 1;
            }
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok(format!("{pairs} pairs, 0 violations"))
}

fn retraction_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let eps = 0.2;
    let mut detail = Vec::new();
    for n in [2, 3] {
        let l = retraction_with_collar(n, eps).map_err(fail)?;
        let lip = 16.0 * (n as f64).sqrt();
        let mut sup = 0.0f64;
        for _ in 0..10_000 {
            let x = uniform(&mut rng, n, 1.0 + 2.0 * eps);
            let (y, d) = l.jet(&x).map_err(fail)?;
            let dist = dist_to_cube(&x);
            if dist > eps {
                ensure(y == x && d == Matrix::identity(n, n), || format!("not the identity at {x}"))?;
            }
            ensure((&y - &x).norm() <= eps + 1e-12, || format!("moved {x} by more than eps"))?;
            ensure(dist_to_cube(&y) <= dist + 1e-12, || format!("distance grew at {x}"))?;
            sup = sup.max(operator_norm(&d));
        }
        ensure(sup < lip, || format!("n={n}: jacobian {sup} >= {lip}"))?;
        let faces: Vec<FaceIndex> = FaceIndex::all(n).into_iter().filter(|k| k.dim() < n).collect();
        let per_face = 1000 / faces.len() + 1;
        for kappa in &faces {
            for _ in 0..per_face {
                let f = Vector::from_fn(n, |j, _| match kappa.signs()[j] {
                    0 => rng.random_range(-1.0..1.0),
                    s => s as f64,
                });
                let y = l.value(&f).map_err(fail)?;
                ensure(kappa.face_closure_contains(&y, 1e-12), || format!("{kappa:?} not preserved at {f}"))?;
            }
        }
        detail.push(format!("n={n} sup |Dl| {sup:.3} < {lip:.3}, {} boundary probes", per_face * faces.len()));
    }
    Ok(detail.join("; "))
}

fn central_projection_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (p, t) = central_projection(Arc::new(Ball { n: 3, radius: 1.0 }));
    let mut ball_err = 0.0f64;
    for _ in 0..1000 {
        let x = uniform(&mut rng, 3, 4.0);
        ball_err = ball_err.max((p.value(&x).map_err(fail)? - x.normalize()).amax());
        ball_err = ball_err.max((t.value(&x).map_err(fail)?[0] - 1.0 / x.norm()).abs());
    }
    ensure(ball_err <= 1e-12, || format!("ball closed form off by {ball_err}"))?;
    let body: Arc<dyn ConvexBody> = Arc::new(Ellipsoid::new(vec![2.0, 1.0]).map_err(fail)?);
    let (p, _) = central_projection(body);
    let probes: Vec<Vector> = (0..100)
        .map(|_| loop {
            let x = uniform(&mut rng, 2, 3.0);
            if x.norm() > 0.2 {
                break x;
            }
        })
        .collect();
    let fd = jacobian_error(&p, &probes, 1e-6);
    ensure(fd < 1e-5, || format!("ellipse jacobian error {fd}"))?;
    for x in &probes {
        let bound = p.derivative_bound(x).map_err(fail)?;
        let norm = operator_norm(&p.jacobian(x).map_err(fail)?);
        ensure(norm <= bound * (1.0 + 1e-12), || format!("derivative bound fails at {x}: {norm} > {bound}"))?;
    }
    Ok(format!("ball error {ball_err:.1e}, ellipse fd error {fd:.1e}"))
}

fn rotated(set: &DiscreteVarifold, q: &Matrix, pivot: &Vector) -> DiscreteVarifold {
    let samples = set
        .samples()
        .iter()
        .map(|s| {
            let p = pivot + q * (&s.point - pivot);
            let t = s.plane().unwrap().image(q).unwrap();
            Sample::new(p, t, s.weight)
        })
        .collect();
    set.with_samples(samples)
}

fn deformation_instance() -> Outcome {
    let family = CubeFamily::grid(0, &[0, 0, 0], &[4, 4, 4]);
    let complex = cubical_complex(&family).map_err(fail)?;
    let eps = 0.05;
    let center = v(&[2.1, 1.9, 2.05]);
    let base = sunflower_disc(&center, &Plane::coordinate(3, &[0, 1]), 1.5, 5000).map_err(fail)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let probes: Vec<Vector> = std::iter::repeat_with(|| Vector::from_fn(3, |_, _| rng.random_range(-1.0..5.0)))
        .filter(|x| x.iter().map(|c| (-c).max(c - 4.0).max(0.0).powi(2)).sum::<f64>().sqrt() >= eps)
        .take(1000)
        .collect();
    let mut ratios = Vec::new();
    for seed in 1..=5u64 {
        let q = haar_sample(3, 3, seed).map_err(fail)?;
        let disc = rotated(&base, q.frame(), &center);
        let out = deform_onto_skeleton(&family, &complex, &[disc], 2, eps, &DeformOptions::default()).map_err(fail)?;
        let r = &out.report.sets[0];
        ensure(r.within_skeleton == r.interior_images, || {
            format!("rotation {seed}: {} of {} images within eps/4", r.within_skeleton, r.interior_images)
        })?;
        ensure(r.max_skeleton_distance <= eps / 4.0, || format!("rotation {seed}: distance {}", r.max_skeleton_distance))?;
        ensure(r.mass_ratio.is_finite(), || format!("rotation {seed}: mass ratio {}", r.mass_ratio))?;
        let g1 = out.plan.g1();
        for x in &probes {
            ensure(&g1.value(x).map_err(fail)? == x, || format!("rotation {seed}: g1 moves exterior point {x}"))?;
        }
        ratios.push(r.mass_ratio);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = ratios.iter().map(|r| (r / mean - 1.0).abs()).fold(0.0, f64::max);
    ensure(spread <= 0.2, || format!("mass ratios {ratios:?} spread {spread:.3}"))?;
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    Ok(format!("mass ratios [{}], spread {:.1}%", shown.join(", "), 100.0 * spread))
}

fn slicing() -> Outcome {
    let disc = sunflower_disc(&Vector::zeros(3), &Plane::coordinate(3, &[0, 1]), 1.0, 25_600).map_err(fail)?;
    let rho = radial_distance(Vector::zeros(3));
    let rows = slice_study(&disc, rho.as_ref(), &[0.5], &[0.1, 0.05, 0.025], PI).map_err(fail)?;
    ensure(rows[1].rel_error <= 0.05, || format!("slice mass {} at bin 0.05", rows[1].mass))?;
    for w in rows.windows(2) {
        ensure(w[1].rel_error <= w[0].rel_error || w[1].rel_error <= 1e-12, || {
            format!("error grew from {} to {} under halving", w[0].rel_error, w[1].rel_error)
        })?;
    }
    let tests = blowup_test_functions();
    let residuals = [0.2, 0.1, 0.05]
        .iter()
        .map(|&d| blowup_residual(&disc, rho.clone(), 0.5, d, 0.01, &tests))
        .collect::<gmtk::Result<Vec<f64>>>()
        .map_err(fail)?;
    ensure(residuals.windows(2).all(|w| w[1] < w[0]), || format!("blow-up residuals {residuals:?}"))?;
    Ok(format!(
        "slice mass {:.6} at bin 0.05, blow-up residuals {:.3} {:.3} {:.3}",
        rows[1].mass, residuals[0], residuals[1], residuals[2]
    ))
}

fn unrectifiable_purge() -> Outcome {
    let scale = 1.0 / 64.0;
    let set = four_corner_cantor(6);
    ensure(set.points.len() == 4096, || format!("{} cantor samples", set.points.len()))?;
    let pts = set.points.iter().map(|p| v(&[0.3 + scale * p[0], 0.45 + scale * p[1]])).collect();
    let s_u = isotropic_from(&SampledSet::new(pts, 1, scale * set.resolution)).map_err(fail)?;
    let line = Plane::coordinate(2, &[0]);
    let w = 1.0 / 1024.0;
    let samples = (0..1024).map(|i| Sample::new(v(&[1.1 + (i as f64 + 0.5) * w, 0.3]), line.clone(), w)).collect();
    let s_r = DiscreteVarifold::from_samples(2, 1, samples).map_err(fail)?;
    let region = Region::open_box(vec![-2.0, -2.0], vec![5.0, 3.0]);
    let opts = PurgeOptions {
        resolution: Some(scale / 4096.0),
        ..Default::default()
    };
    let eps = 0.2;
    let p = purge_unrectifiable(&s_r, &s_u, &region, eps, &opts).map_err(fail)?;
    let r = &p.report;
    ensure(r.unrect_ratio <= 0.2, || format!("cantor ratio {}", r.unrect_ratio))?;
    ensure(r.rect_ratio.is_finite(), || format!("segment ratio {}", r.rect_ratio))?;
    ensure(r.max_deviation <= eps, || format!("|Drho - I| {} > eps", r.max_deviation))?;
    Ok(format!(
        "cantor ratio {:.4}, segment ratio (gamma_emp) {:.4}, max |Drho - I| {:.4}",
        r.unrect_ratio, r.rect_ratio, r.max_deviation
    ))
}

fn unit_box(level: i32) -> Arc<GridComplex> {
    let k = 1i64 << level;
    Arc::new(GridComplex::new(level, vec![0, 0, 0], vec![k, k, k]).unwrap())
}

/// Edges of `[0,1]² × {1/2}` at the grid level.
fn square_cycle(level: i32) -> Vec<DyadicCube> {
    let k = 1i64 << level;
    let z = k / 2;
    let mut edges = Vec::new();
    for i in 0..k {
        for (corner, axis) in [([i, 0, z], 0), ([i, k, z], 0), ([0, i, z], 1), ([k, i, z], 1)] {
            edges.push(DyadicCube::new(level, corner.to_vec(), vec![axis]).unwrap());
        }
    }
    edges
}

fn square_problem(level: i32, f: Integrand) -> gmtk::Result<SpanningProblem> {
    let cycle = square_cycle(level);
    SpanningProblem::new(unit_box(level), 2, &cycle, std::slice::from_ref(&cycle), f, MinimizeOptions::default())
}

fn solver_oracle() -> Outcome {
    let mut detail = Vec::new();
    for level in [1, 2] {
        let p = square_problem(level, Integrand::area()).map_err(fail)?;
        let min = minimize(&p).map_err(fail)?;
        let oracle = exhaustive_oracle(&p, 24).map_err(fail)?;
        ensure(min.value == 1.0 && oracle.value == 1.0, || {
            format!("level {level}: minimize {} oracle {}", min.value, oracle.value)
        })?;
        detail.push(format!("1/{}: {} = {} ({:?})", 1 << level, min.value, oracle.value, oracle.method));
    }
    let tilt = Integrand::tilt(Plane::coordinate(3, &[0, 1]), 9.0).map_err(fail)?;
    for level in [1, 2] {
        let min = minimize(&square_problem(level, tilt.clone()).map_err(fail)?).map_err(fail)?;
        ensure(min.chain.cubes().all(|c| c.axes() == [0, 1]), || format!("tilt variant at level {level} uses tilted cells"))?;
    }
    let table = IntegrandSpec::Table(TableSpec {
        lo: vec![0.0; 3],
        hi: vec![1.0; 3],
        shape: vec![2, 2, 2],
        values: vec![1.0, 1.7, 0.6, 1.2, 1.9, 0.8, 1.4, 0.5],
    })
    .build(3, 2)
    .map_err(fail)?;
    let mut gap = 0.0f64;
    for f in [Integrand::area(), table] {
        let p = square_problem(1, f.clone()).map_err(fail)?;
        let scaled = p.rescaled(1, f.clone()).map_err(fail)?;
        let pulled = p.with_integrand(pullback_integrand(Arc::new(Affine::scaling(3, 0.5)), &f)).map_err(fail)?;
        let a = minimize(&scaled).map_err(fail)?.value;
        let b = minimize(&pulled).map_err(fail)?.value;
        let oa = exhaustive_oracle(&scaled, 24).map_err(fail)?.value;
        let ob = exhaustive_oracle(&pulled, 24).map_err(fail)?.value;
        gap = gap.max((a - b).abs()).max((oa - ob).abs());
    }
    let quarter = minimize(&square_problem(1, Integrand::area()).map_err(fail)?.rescaled(1, Integrand::area()).map_err(fail)?)
        .map_err(fail)?
        .value;
    gap = gap.max((quarter - 0.25).abs());
    ensure(gap < 1e-9, || format!("scaling covariance gap {gap}"))?;
    detail.push(format!("tilt variant flat, scaling gap {gap:.1e}"));
    Ok(detail.join(", "))
}

fn density_audit() -> Outcome {
    let p = square_problem(2, Integrand::area()).map_err(fail)?;
    let min = minimize(&p).map_err(fail)?;
    let report = audit_minimizer(&min.chain, p.integrand(), &AuditOptions::default()).map_err(fail)?;
    let (lo, hi) = (report.interior_min.ok_or("no interior ratios")?, report.interior_max.ok_or("no interior ratios")?);
    ensure(lo >= 0.9 * PI && hi <= 1.1 * PI, || format!("interior ratios [{lo}, {hi}]"))?;
    let mut boundary = (f64::INFINITY, f64::NEG_INFINITY, 0);
    for b in report.points.iter().filter(|p| p.kind == PointKind::Boundary) {
        if let (Some(lo), Some(hi)) = (b.min_ratio, b.max_ratio) {
            boundary = (boundary.0.min(lo), boundary.1.max(hi), boundary.2 + 1);
        }
    }
    ensure(boundary.2 > 0, || "no boundary points flagged".into())?;
    ensure(boundary.0 >= 0.9 * PI / 2.0 && boundary.1 <= 1.1 * PI / 2.0, || format!("boundary ratios [{}, {}]", boundary.0, boundary.1))?;

    let mut cells = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            cells.push(DyadicCube::new(2, vec![i, j, 2], vec![0, 1]).map_err(fail)?);
            cells.push(DyadicCube::new(2, vec![2, i, j], vec![1, 2]).map_err(fail)?);
        }
    }
    let pinched = Chain2::from_cubes(unit_box(2), 2, &cells).map_err(fail)?;
    let report = audit_minimizer(&pinched, &Integrand::area(), &AuditOptions::default()).map_err(fail)?;
    let mut junction = (f64::INFINITY, f64::NEG_INFINITY, 0);
    for j in report.points.iter().filter(|p| p.kind == PointKind::Junction) {
        if let (Some(lo), Some(hi)) = (j.min_ratio, j.max_ratio) {
            junction = (junction.0.min(lo), junction.1.max(hi), junction.2 + 1);
        }
    }
    ensure(junction.2 > 0, || "no junction ratios".into())?;
    ensure(junction.0 >= 0.9 * 2.0 * PI && junction.1 <= 1.1 * 2.0 * PI, || format!("junction ratios [{}, {}]", junction.0, junction.1))?;
    Ok(format!(
        "interior [{lo:.4}, {hi:.4}], boundary [{:.4}, {:.4}] at {} points, pinched [{:.4}, {:.4}]",
        boundary.0, boundary.1, boundary.2, junction.0, junction.1
    ))
}

fn gmtk(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_gmtk")).args(args).output().map_err(fail)?;
    ensure(out.status.success(), || {
        format!("gmtk {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })
}

fn files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(fail)? {
        let path = entry.map_err(fail)?.path();
        out.push((path.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&path).map_err(fail)?));
    }
    out.sort();
    Ok(out)
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf, String> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(fail)?;
    Ok(path)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(fail)?;
    let dir = tmp.path();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut planes = String::new();
    for _ in 0..50 {
        let (n, m) = (rng.random_range(2..=5), 1);
        let m = rng.random_range(m..=n);
        let s = haar_sample_with(&mut rng, n, m).map_err(fail)?;
        let t = haar_sample_with(&mut rng, n, m).map_err(fail)?;
        let mut fields = vec![n.to_string(), m.to_string()];
        for p in [&s, &t] {
            let f = p.frame();
            for i in 0..n {
                for j in 0..m {
                    fields.push(format!("{:?}", f[(i, j)]));
                }
            }
        }
        planes.push_str(&fields.join(","));
        planes.push('\n');
    }
    let planes = write(dir, "planes.csv", &planes)?;
    let disc = sunflower_disc(&v(&[1.7, 2.3, 1.9]), &haar_sample(3, 2, 4).map_err(fail)?, 1.0, 600).map_err(fail)?;
    let set = write(dir, "disc.csv", &disc.to_csv().map_err(fail)?)?;
    let cycle = square_cycle(1);
    let spec = ProblemSpec {
        grid_box: GridBox {
            lo: vec![0.0; 3],
            hi: vec![1.0; 3],
        },
        level: 1,
        dim: 2,
        boundary: cycle.clone(),
        generators: vec![cycle],
        integrand: IntegrandSpec::Area {},
        options: MinimizeOptions::default(),
    };
    let problem = write(dir, "problem.json", &serde_json::to_string_pretty(&spec).map_err(fail)?)?;

    let runs: Vec<(&str, Vec<String>)> = vec![
        ("rotate", vec![planes.display().to_string()]),
        ("retract", vec![]),
        ("project", vec![]),
        ("whitney", vec![]),
        ("deform", vec![set.display().to_string()]),
        ("slice", vec![]),
        ("minimize", vec![problem.display().to_string()]),
        ("probe-ellipticity", vec![]),
    ];
    let mut compared = 0;
    for (cmd, inputs) in &runs {
        let mut outputs = Vec::new();
        for rep in ["a", "b"] {
            let out = dir.join(format!("{cmd}-{rep}"));
            let out_s = out.display().to_string();
            let mut args = vec!["--seed", "7", "--out", out_s.as_str(), cmd];
            args.extend(inputs.iter().map(String::as_str));
            gmtk(&args)?;
            outputs.push(files(&out)?);
        }
        ensure(!outputs[0].is_empty(), || format!("{cmd} wrote nothing"))?;
        ensure(outputs[0] == outputs[1], || format!("{cmd} outputs differ between runs"))?;
        compared += outputs[0].len();
    }
    let solution = dir.join("minimize-a").join("solution.json").display().to_string();
    let mut audits = Vec::new();
    for rep in ["a", "b"] {
        let out = dir.join(format!("audit-{rep}"));
        gmtk(&["--seed", "7", "--out", &out.display().to_string(), "audit", &solution])?;
        audits.push(files(&out)?);
    }
    ensure(audits[0] == audits[1] && !audits[0].is_empty(), || "audit outputs differ between runs".into())?;
    compared += audits[0].len();

    let plan = dir.join("deform-a").join("plan.json");
    let config = write(dir, "replay.json", &serde_json::json!({ "plan": plan }).to_string())?;
    let replay = dir.join("deform-replay");
    gmtk(&[
        "--config",
        &config.display().to_string(),
        "--out",
        &replay.display().to_string(),
        "deform",
        &set.display().to_string(),
    ])?;
    let original = std::fs::read(dir.join("deform-a").join("deformed.csv")).map_err(fail)?;
    let replayed = std::fs::read(replay.join("deformed.csv")).map_err(fail)?;
    ensure(original == replayed, || "plan replay changed deformed.csv".into())?;
    Ok(format!("9 commands, {compared} artifacts identical across reruns, plan replay identical"))
}

/// Straight to the stderr handle, past the test harness capture.
fn report(line: String) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 10] = [
        ("rotation bounds", rotation_bounds, Some(Duration::from_secs(10))),
        ("tilt/measure sandwich", tilt_sandwich, Some(Duration::from_secs(5))),
        ("cube retraction contract", retraction_contract, Some(Duration::from_secs(30))),
        ("central projection", central_projection_checks, None),
        ("deformation desk instance", deformation_instance, Some(Duration::from_secs(120))),
        ("slicing", slicing, Some(Duration::from_secs(30))),
        ("unrectifiable purge", unrectifiable_purge, Some(Duration::from_secs(60))),
        ("solver oracle equivalence", solver_oracle, Some(Duration::from_secs(60))),
        ("density-ratio audit", density_audit, Some(Duration::from_secs(30))),
        ("determinism", determinism, None),
    ];
    let mut failed = Vec::new();
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut outcome = check();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(limit)) = (&outcome, limit) {
            if elapsed > limit {
                outcome = Err(format!("took {:.1}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs()));
            }
        }
        match outcome {
            Ok(detail) => report(format!("criterion {:>2} {name}: PASS ({detail}) [{:.2}s]", i + 1, elapsed.as_secs_f64())),
            Err(why) => {
                report(format!("criterion {:>2} {name}: FAIL ({why}) [{:.2}s]", i + 1, elapsed.as_secs_f64()));
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
