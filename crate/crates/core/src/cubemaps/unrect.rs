//! Small rotations in disjoint balls that turn a sampled unrectifiable set
//! so that a rank-deficient map crushes it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{build_rotation, Plane, PlaneRotation};
use crate::linalg::{self, Matrix, Vector};
use crate::map::{check_point, Smoothness, SmoothMap, Support};
use crate::measure::{box_count, CoveringEstimate, SampledSet};
use crate::profile::{compressed_step, COMPRESSED_MAX_SLOPE};
use crate::region::Region;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UnrectOptions {
    /// Number of line directions on the half circle (planar, `m = 1`).
    pub directions: usize,
    /// Number of random candidate planes otherwise.
    pub candidates: usize,
    pub seed: u64,
    /// Relative singular-value threshold of the rank test.
    pub rank_tol: f64,
    /// Required ratio of outer to inner ball radius.
    pub ball_ratio: f64,
    /// Largest ratio of outer to inner radius used when neighbours are far.
    pub ball_cap: f64,
    /// Largest linearization error of `f` allowed on a cluster; defaults to
    /// the sample resolution.
    pub linearization_tol: Option<f64>,
}

impl Default for UnrectOptions {
    fn default() -> Self {
        Self {
            directions: 720,
            candidates: 720,
            seed: 0,
            rank_tol: 1e-9,
            ball_ratio: 1.5,
            ball_cap: 4.0,
            linearization_tol: None,
        }
    }
}

/// One rotated ball: `ρ(x) = a + M(ζ(η))(x − a)` with
/// `η = (outer − |x − a|)/(outer − inner)` clamped to `[0, 1]`.
#[derive(Clone, Debug)]
pub struct PerturbBall {
    pub center: Vector,
    pub inner: f64,
    pub outer: f64,
    pub rotation: PlaneRotation,
    pub samples: usize,
    pub input: CoveringEstimate,
    pub baseline: CoveringEstimate,
    pub image: CoveringEstimate,
}

impl PerturbBall {
    /// Analytic bound on `‖Dρ − I‖` inside the ball.
    pub fn derivative_deviation_bound(&self) -> f64 {
        deviation_bound(self.rotation.max_angle(), self.inner, self.outer)
    }
}

fn deviation_bound(angle: f64, inner: f64, outer: f64) -> f64 {
    2.0 * (0.5 * angle).sin() + angle * COMPRESSED_MAX_SLOPE * outer / (outer - inner)
}

/// Totals of a perturbation run, all at the sample resolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnrectReport {
    pub input: CoveringEstimate,
    pub baseline_image: CoveringEstimate,
    pub image: CoveringEstimate,
}

impl UnrectReport {
    pub fn ratio(&self) -> f64 {
        if self.input.value == 0.0 {
            0.0
        } else {
            self.image.value / self.input.value
        }
    }
}

#[derive(Clone, Debug)]
pub struct UnrectPerturbation {
    n: usize,
    eps: f64,
    balls: Vec<PerturbBall>,
    report: UnrectReport,
}

impl UnrectPerturbation {
    pub fn balls(&self) -> &[PerturbBall] {
        &self.balls
    }

    pub fn report(&self) -> &UnrectReport {
        &self.report
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

impl SmoothMap for UnrectPerturbation {
    fn domain_dim(&self) -> usize {
        self.n
    }

    fn jet(&self, x: &Vector) -> Result<(Vector, Matrix)> {
        check_point(self, x)?;
        for b in &self.balls {
            let rel = x - &b.center;
            let dist = rel.norm();
            if dist >= b.outer {
                continue;
            }
            let width = b.outer - b.inner;
            let eta = ((b.outer - dist) / width).clamp(0.0, 1.0);
            let (tau, dtau) = compressed_step(eta);
            let m = b.rotation.evaluate(tau);
            let value = &b.center + &m * &rel;
            let mut jac = m;
            if dtau != 0.0 && dist > b.inner && dist > 0.0 {
                let grad_eta = &rel * (-1.0 / (dist * width));
                jac += b.rotation.derivative(tau) * &rel * (grad_eta.transpose() * dtau);
            }
            return Ok((value, jac));
        }
        Ok((x.clone(), Matrix::identity(self.n, self.n)))
    }

    fn support(&self) -> Support {
        self.balls.iter().fold(Support::Empty, |acc, b| {
            acc.hull(&Support::Ball {
                center: b.center.iter().cloned().collect(),
                radius: b.outer,
            })
        })
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Finite(2)
    }
}

struct Cluster {
    members: Vec<usize>,
    center: Vector,
    inner: f64,
}

/// Minimum spanning tree edges `(weight, a, b)` by Prim's algorithm.
fn spanning_tree(points: &[Vector]) -> Vec<(f64, usize, usize)> {
    let n = points.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut next_w = f64::INFINITY;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let d = (&points[j] - &points[current]).norm();
            if d < best[j] {
                best[j] = d;
                parent[j] = current;
            }
            if best[j] < next_w || (best[j] == next_w && j < next) {
                next_w = best[j];
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((next_w, parent[next], next));
        current = next;
    }
    edges
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn clusters_below(points: &[Vector], edges: &[(f64, usize, usize)], threshold: f64, resolution: f64) -> Vec<Cluster> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for &(w, a, b) in edges {
        if w < threshold {
            let ra = find(&mut parent, a);
            let rb = find(&mut parent, b);
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let dim = points[0].len();
    let pad = 0.5 * resolution * (dim as f64).sqrt();
    groups
        .into_values()
        .map(|members| {
            let mut lo = points[members[0]].clone();
            let mut hi = lo.clone();
            for &i in &members {
                lo = lo.inf(&points[i]);
                hi = hi.sup(&points[i]);
            }
            let center = (lo + hi) * 0.5;
            let inner = members.iter().map(|&i| (&points[i] - &center).norm()).fold(0.0, f64::max) + pad;
            Cluster { members, center, inner }
        })
        .collect()
}

/// Construct `ρ_ε` for the sampled set `set` (of dimension `m = set.dim`)
/// and a map `f` of rank at most `m` on `region`.
pub fn unrect_perturbation(
    set: &SampledSet,
    f: &dyn SmoothMap,
    region: &Region,
    eps: f64,
    opts: &UnrectOptions,
) -> Result<UnrectPerturbation> {
    if !(eps > 0.0) {
        return Err(Error::param("eps", eps, "must be positive"));
    }
    let n = f.domain_dim();
    let empty = CoveringEstimate {
        resolution: set.resolution,
        boxes: 0,
        dim: set.dim,
        value: 0.0,
    };
    if set.is_empty() {
        return Ok(UnrectPerturbation {
            n,
            eps,
            balls: Vec::new(),
            report: UnrectReport {
                input: empty,
                baseline_image: empty,
                image: empty,
            },
        });
    }
    let m = set.dim;
    let points = &set.points;
    let mut values = Vec::with_capacity(points.len());
    for x in points {
        Error::check_dim("sample point", n, x.len())?;
        if !region.contains(x.as_slice()) {
            return Err(Error::Domain {
                point: x.iter().cloned().collect(),
                reason: "sample lies outside the region",
            });
        }
        let (v, d) = f.jet(x)?;
        check_rank(&d, x, m, opts.rank_tol)?;
        values.push(v);
    }
    let tol = opts.linearization_tol.unwrap_or(set.resolution);
    let edges = spanning_tree(points);
    let mut thresholds: Vec<f64> = edges.iter().map(|e| e.0).collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs());
    let mut levels = vec![f64::INFINITY];
    levels.extend(thresholds);

    let mut chosen = None;
    for &level in &levels {
        let clusters = clusters_below(points, &edges, level, set.resolution);
        if let Some(balls) = admissible_balls(&clusters, points, &values, f, region, opts, tol, m)? {
            chosen = Some((clusters, balls));
            break;
        }
    }
    let Some((clusters, plans)) = chosen else {
        return Err(Error::SearchFailed {
            context: "no cut of the sample into well separated, nearly linear clusters".into(),
            best_ratio: f64::INFINITY,
            limit: opts.ball_ratio,
        });
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut balls = Vec::with_capacity(clusters.len());
    for (cluster, (outer, row_space)) in clusters.iter().zip(plans) {
        let members: Vec<&Vector> = cluster.members.iter().map(|&i| &points[i]).collect();
        let input = box_count(members.iter().copied(), set.resolution, m);
        let baseline = box_count(cluster.members.iter().map(|&i| &values[i]), set.resolution, m);
        let max_angle = eps / (1.0 + COMPRESSED_MAX_SLOPE * outer / (outer - cluster.inner));
        let candidates = candidate_planes(&row_space, max_angle, opts, &mut rng)?;
        let mut best: Option<(usize, f64, PlaneRotation, CoveringEstimate)> = None;
        for cand in candidates {
            let rot = build_rotation(&cand, &row_space)?;
            let angle = rot.max_angle();
            if deviation_bound(angle, cluster.inner, outer) > eps {
                continue;
            }
            let turn = rot.evaluate(1.0);
            let mut img = Vec::with_capacity(members.len());
            for x in &members {
                img.push(f.value(&(&cluster.center + &turn * (*x - &cluster.center)))?);
            }
            let est = box_count(&img, set.resolution, m);
            let better = match &best {
                None => true,
                Some((boxes, a, _, _)) => est.boxes < *boxes || (est.boxes == *boxes && angle < *a),
            };
            if better {
                best = Some((est.boxes, angle, rot, est));
            }
        }
        let Some((_, _, rotation, image)) = best else {
            return Err(Error::SearchFailed {
                context: format!("no admissible direction in the ball at {:?}", cluster.center.as_slice()),
                best_ratio: f64::INFINITY,
                limit: eps,
            });
        };
        balls.push(PerturbBall {
            center: cluster.center.clone(),
            inner: cluster.inner,
            outer,
            rotation,
            samples: members.len(),
            input,
            baseline,
            image,
        });
    }
    let mut rho = UnrectPerturbation {
        n,
        eps,
        balls,
        report: UnrectReport {
            input: set.measure(),
            baseline_image: box_count(&values, set.resolution, m),
            image: empty,
        },
    };
    let mut moved = Vec::with_capacity(points.len());
    for x in points {
        moved.push(f.value(&rho.value(x)?)?);
    }
    rho.report.image = box_count(&moved, set.resolution, m);
    Ok(rho)
}

fn check_rank(d: &Matrix, x: &Vector, allowed: usize, rel_tol: f64) -> Result<usize> {
    let s = linalg::singular_values(d);
    let scale = s.first().copied().unwrap_or(0.0).max(1.0);
    let rank = s.iter().filter(|&&v| v > rel_tol * scale).count();
    if rank > allowed {
        return Err(Error::RankViolation {
            point: x.iter().cloned().collect(),
            rank,
            allowed,
        });
    }
    Ok(rank)
}

/// For each cluster the outer radius and the row space of `Df` at its
/// center, or `None` if some cluster violates the separation or
/// linearization requirements.
fn admissible_balls(
    clusters: &[Cluster],
    points: &[Vector],
    values: &[Vector],
    f: &dyn SmoothMap,
    region: &Region,
    opts: &UnrectOptions,
    tol: f64,
    m: usize,
) -> Result<Option<Vec<(f64, Plane)>>> {
    let (ratio, rank_tol) = (opts.ball_ratio, opts.rank_tol);
    let mut out = Vec::with_capacity(clusters.len());
    for (i, c) in clusters.iter().enumerate() {
        let nearest = clusters
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, o)| (&o.center - &c.center).norm())
            .fold(f64::INFINITY, f64::min);
        let outer = (0.5 * nearest)
            .min(region.dist_to_complement(c.center.as_slice()))
            .min(opts.ball_cap * c.inner);
        if !(outer >= ratio * c.inner) {
            return Ok(None);
        }
        let (fa, da) = f.jet(&c.center)?;
        check_rank(&da, &c.center, m, rank_tol)?;
        for &k in &c.members {
            let lin = &fa + &da * (&points[k] - &c.center);
            if (&values[k] - lin).norm() > tol {
                return Ok(None);
            }
        }
        out.push((outer, row_space(&da, rank_tol)));
    }
    Ok(Some(out))
}

/// Orthogonal complement of the kernel of `d`.
fn row_space(d: &Matrix, rel_tol: f64) -> Plane {
    let n = d.ncols();
    let kernel = linalg::kernel_basis(d, rel_tol);
    if kernel.ncols() == 0 {
        return Plane::full(n);
    }
    Plane::from_columns(&kernel).map(|k| k.complement()).unwrap_or_else(|_| Plane::full(n))
}

fn candidate_planes(target: &Plane, max_angle: f64, opts: &UnrectOptions, rng: &mut ChaCha8Rng) -> Result<Vec<Plane>> {
    let n = target.ambient_dim();
    let k = target.dim();
    if k == 0 || k == n {
        return Ok(vec![target.clone()]);
    }
    if n == 2 && k == 1 {
        let count = opts.directions.max(1);
        return Ok((0..count)
            .map(|i| {
                let th = std::f64::consts::PI * i as f64 / count as f64;
                Plane::from_columns(&Matrix::from_column_slice(2, 1, &[th.cos(), th.sin()])).expect("unit vector")
            })
            .collect());
    }
    let mut out = vec![target.clone()];
    let normal = target.complement();
    for _ in 0..opts.candidates {
        let tilt: f64 = rng.random::<f64>() * max_angle;
        let g = Matrix::from_fn(n - k, k, |_, _| rng.sample::<f64, _>(StandardNormal));
        let g = &g / g.norm().max(f64::MIN_POSITIVE);
        let cols = target.frame() + normal.frame() * g * tilt.tan();
        if let Ok(p) = Plane::from_columns(&cols) {
            out.push(p);
        }
    }
    Ok(out)
}
