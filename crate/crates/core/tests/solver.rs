use std::f64::consts::PI;
use std::sync::Arc;

use gmtk::cubical::DyadicCube;
use gmtk::grassmann::Plane;
use gmtk::map::Affine;
use gmtk::solver::*;
use gmtk::varifold::{pullback_integrand, Integrand, IntegrandSpec, TableSpec};
use gmtk::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

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

fn square_problem(level: i32, f: Integrand, opts: MinimizeOptions) -> SpanningProblem {
    let cycle = square_cycle(level);
    SpanningProblem::new(unit_box(level), 2, &cycle, &[cycle.clone()], f, opts).unwrap()
}

fn flat_filling(level: i32) -> Vec<DyadicCube> {
    let k = 1i64 << level;
    let mut out = Vec::new();
    for i in 0..k {
        for j in 0..k {
            out.push(DyadicCube::new(level, vec![i, j, k / 2], vec![0, 1]).unwrap());
        }
    }
    out
}

#[test]
fn boundary_of_boundary_vanishes_on_a_box() {
    let k = GridComplex::new(1, vec![-1, 0, 0], vec![1, 2, 1]).unwrap();
    for d in 2..=3 {
        let outer = k.boundary_matrix(d - 1);
        let inner = k.boundary_matrix(d);
        for row in &outer {
            for i in 0..k.count(d) {
                let ones = row.iter_ones().filter(|&j| inner[j][i]).count();
                assert_eq!(ones % 2, 0);
            }
        }
        for i in 0..k.count(d) {
            let mut c = k.zero_chain(d);
            c.set(i, true);
            assert!(k.boundary(d - 1, &k.boundary(d, &c)).not_any());
        }
    }
}

#[test]
fn spanning_examples() {
    let p = square_problem(1, Integrand::area(), MinimizeOptions::default());
    let complex = p.complex().clone();
    let full = Chain2::from_cubes(complex.clone(), 2, &flat_filling(1)).unwrap();
    assert!(spans(&full, &p).unwrap());
    assert!(!spans(&Chain2::empty(complex.clone(), 2).unwrap(), &p).unwrap());
    let mut partial = flat_filling(1);
    partial.pop();
    assert!(!spans(&Chain2::from_cubes(complex.clone(), 2, &partial).unwrap(), &p).unwrap());

    let free = SpanningProblem::new(complex.clone(), 2, &square_cycle(1), &[], Integrand::area(), MinimizeOptions::default()).unwrap();
    assert!(spans(&Chain2::empty(complex, 2).unwrap(), &free).unwrap());
}

#[test]
fn generators_must_be_cycles_inside_the_boundary() {
    let complex = unit_box(1);
    let cycle = square_cycle(1);
    let mut open = cycle.clone();
    open.pop();
    let err = SpanningProblem::new(complex.clone(), 2, &cycle, &[open], Integrand::area(), MinimizeOptions::default()).unwrap_err();
    assert_eq!(err, Error::NotACycle { index: 0 });
    let err = SpanningProblem::new(complex, 2, &[], &[cycle], Integrand::area(), MinimizeOptions::default()).unwrap_err();
    assert!(matches!(err, Error::InvalidParameter { name: "generators", .. }));
}

#[test]
fn odd_point_set_cannot_be_spanned_by_curves() {
    let complex = unit_box(1);
    let point = DyadicCube::vertex(1, vec![0, 0, 0]);
    let p = SpanningProblem::new(complex, 1, &[point.clone()], &[vec![point]], Integrand::area(), MinimizeOptions::default()).unwrap();
    assert!(matches!(minimize(&p), Err(Error::Infeasible(_))));
    assert!(matches!(exhaustive_oracle(&p, 24), Err(Error::Infeasible(_))));
}

#[test]
fn half_resolution_square_matches_the_oracle() {
    let p = square_problem(1, Integrand::area(), MinimizeOptions::default());
    let min = minimize(&p).unwrap();
    let oracle = exhaustive_oracle(&p, 24).unwrap();
    assert_eq!(oracle.method, OracleMethod::Enumeration);
    assert_eq!(oracle.dimension, 8);
    assert_eq!(oracle.value, 1.0);
    assert_eq!(min.value, 1.0);
    assert_eq!(min.chain.len(), 4);
    assert!(min.value <= min.initial_value);
    assert!(spans(&min.chain, &p).unwrap());
    assert_eq!(min.chain, oracle.chain);
}

#[test]
fn quarter_resolution_square_matches_the_oracle() {
    let p = square_problem(2, Integrand::area(), MinimizeOptions::default());
    let min = minimize(&p).unwrap();
    let oracle = exhaustive_oracle(&p, 24).unwrap();
    assert_eq!(oracle.method, OracleMethod::Transfer);
    assert_eq!(oracle.value, 1.0);
    assert_eq!(min.value, 1.0);
    assert_eq!(min.chain.len(), 16);
    let flat = Chain2::from_cubes(p.complex().clone(), 2, &flat_filling(2)).unwrap();
    assert_eq!(min.chain, flat);
}

#[test]
fn small_budget_is_reported() {
    let p = square_problem(2, Integrand::area(), MinimizeOptions::default());
    match exhaustive_oracle(&p, 10) {
        Err(Error::BudgetExceeded { dimension, budget }) => {
            assert_eq!(dimension, 64);
            assert_eq!(budget, 10);
        }
        other => panic!("expected a budget error, got {other:?}"),
    }
}

#[test]
fn tilt_penalty_keeps_the_horizontal_cells() {
    let f = Integrand::tilt(Plane::coordinate(3, &[0, 1]), 9.0).unwrap();
    for level in [1, 2] {
        let p = square_problem(level, f.clone(), MinimizeOptions::default());
        let min = minimize(&p).unwrap();
        assert_eq!(min.value, 1.0);
        assert!(min.chain.cubes().all(|c| c.axes() == [0, 1]));
        assert_eq!(exhaustive_oracle(&p, 24).unwrap().value, 1.0);
    }
}

#[test]
fn empty_target_gives_the_empty_chain() {
    let p = SpanningProblem::new(unit_box(1), 2, &square_cycle(1), &[], Integrand::area(), MinimizeOptions::default()).unwrap();
    let min = minimize(&p).unwrap();
    assert!(min.chain.is_empty());
    assert_eq!(min.value, 0.0);
    let oracle = exhaustive_oracle(&p, 0).unwrap();
    assert!(oracle.chain.is_empty());
    assert_eq!(oracle.value, 0.0);
}

#[test]
fn minimize_is_deterministic_and_moves_keep_spanning() {
    let opts = MinimizeOptions {
        seed: 7,
        steps: 600,
        restarts: 2,
        ..MinimizeOptions::default()
    };
    let p = square_problem(2, Integrand::area(), opts);
    let a = minimize(&p).unwrap();
    let b = minimize(&p).unwrap();
    assert_eq!(a.chain, b.chain);
    assert_eq!(a.trace, b.trace);
    assert!(!a.trace.is_empty());

    let complex = p.complex().clone();
    let start = p.initial_witnesses().unwrap();
    let mut replay = vec![start.clone(); p.options.restarts];
    for mv in &a.trace {
        let q = complex.cells(3).iter().position(|c| c.id() == mv.cube).unwrap();
        let w = &mut replay[mv.restart][mv.generator];
        for &f in complex.facets(3, q) {
            let bit = !w[f];
            w.set(f, bit);
        }
        let e = p.chain(p.support_of(&replay[mv.restart])).unwrap();
        assert!(spans(&e, &p).unwrap());
        assert!((p.value(&e) - mv.value).abs() < 1e-9);
    }
}

fn random_cycle_problem(seed: u64) -> SpanningProblem {
    let complex = unit_box(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fill = complex.zero_chain(2);
    for i in 0..complex.count(2) {
        if rng.random_bool(0.2) {
            fill.set(i, true);
        }
    }
    let z = complex.boundary(2, &fill);
    let cycle: Vec<DyadicCube> = complex.cubes_of(1, &z).cloned().collect();
    let table = TableSpec {
        lo: vec![0.0; 3],
        hi: vec![1.0; 3],
        shape: vec![2, 2, 2],
        values: (0..8).map(|_| rng.random_range(0.5..2.0)).collect(),
    };
    let f = IntegrandSpec::Table(table).build(3, 2).unwrap();
    let opts = MinimizeOptions {
        seed,
        steps: 4000,
        ..MinimizeOptions::default()
    };
    SpanningProblem::new(complex, 2, &cycle, &[cycle.clone()], f, opts).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn oracle_never_exceeds_the_minimizer(seed in 0u64..1000) {
        let p = random_cycle_problem(seed);
        let min = minimize(&p).unwrap();
        let oracle = exhaustive_oracle(&p, 24).unwrap();
        prop_assert!(oracle.value <= min.value + 1e-12);
        prop_assert!(spans(&oracle.chain, &p).unwrap());
        prop_assert!(spans(&min.chain, &p).unwrap());
    }

    #[test]
    fn spanning_is_monotone(seed in 0u64..1000) {
        let p = random_cycle_problem(seed);
        let complex = p.complex().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut e = complex.zero_chain(2);
        for i in 0..complex.count(2) {
            if rng.random_bool(0.5) {
                e.set(i, true);
            }
        }
        let mut bigger = e.clone();
        for i in 0..complex.count(2) {
            if rng.random_bool(0.3) {
                bigger.set(i, true);
            }
        }
        let small = p.chain(e).unwrap();
        let large = p.chain(bigger).unwrap();
        if spans(&small, &p).unwrap() {
            prop_assert!(spans(&large, &p).unwrap());
        }
    }

    #[test]
    fn boundary_squares_to_zero(lo in prop::collection::vec(-2i64..2, 3), ext in prop::collection::vec(1i64..3, 3), level in -1i32..3) {
        let hi: Vec<i64> = lo.iter().zip(&ext).map(|(l, e)| l + e).collect();
        let k = GridComplex::new(level, lo, hi).unwrap();
        for d in 2..=3 {
            let mut all = k.zero_chain(d);
            all.fill(true);
            prop_assert!(k.boundary(d - 1, &k.boundary(d, &all)).not_any());
        }
    }
}

#[test]
fn scaling_by_one_half() {
    let p = square_problem(1, Integrand::area(), MinimizeOptions::default());
    let half = p.rescaled(1, Integrand::area()).unwrap();
    let v = minimize(&p).unwrap().value;
    let v_half = minimize(&half).unwrap().value;
    assert!((v_half - 0.25 * v).abs() < 1e-9);

    for seed in [3, 11] {
        let p = random_cycle_problem(seed);
        let f = p.integrand().clone();
        let r = 0.5;
        let scaled = p.rescaled(1, f.clone()).unwrap();
        let pulled = p.with_integrand(pullback_integrand(Arc::new(Affine::scaling(3, r)), &f)).unwrap();
        let a = minimize(&scaled).unwrap().value;
        let b = minimize(&pulled).unwrap().value;
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        let oa = exhaustive_oracle(&scaled, 24).unwrap().value;
        let ob = exhaustive_oracle(&pulled, 24).unwrap().value;
        assert!((oa - ob).abs() < 1e-9, "{oa} vs {ob}");
    }
}

#[test]
fn flat_square_audit() {
    let p = square_problem(2, Integrand::area(), MinimizeOptions::default());
    let min = minimize(&p).unwrap();
    let report = audit_minimizer(&min.chain, p.integrand(), &AuditOptions::default()).unwrap();
    assert_eq!(report.violations, 0);
    assert!((report.mass - 1.0).abs() < 1e-12);
    let lo = report.interior_min.unwrap();
    let hi = report.interior_max.unwrap();
    assert!(lo >= 0.9 * PI && hi <= 1.1 * PI, "{lo} {hi}");
    let boundary: Vec<&AuditPoint> = report.points.iter().filter(|p| p.kind == PointKind::Boundary).collect();
    assert_eq!(boundary.len(), 16);
    let mut checked = 0;
    for b in &boundary {
        assert!(!b.violation);
        if let (Some(lo), Some(hi)) = (b.min_ratio, b.max_ratio) {
            assert!(lo >= 0.9 * PI / 2.0 && hi <= 1.1 * PI / 2.0, "{lo} {hi}");
            checked += 1;
        }
    }
    assert!(checked >= 8);
    for pt in report.points.iter().filter(|p| p.kind == PointKind::Interior) {
        if let Some(t) = pt.tilt_excess {
            assert!(t < 1e-12);
        }
    }
    assert!(report.to_csv().lines().count() > report.points.len());
}

#[test]
fn pinched_chain_reports_double_density() {
    let complex = unit_box(2);
    let mut cells = flat_filling(2);
    for j in 0..4 {
        for k in 0..4 {
            cells.push(DyadicCube::new(2, vec![2, j, k], vec![1, 2]).unwrap());
        }
    }
    let chain = Chain2::from_cubes(complex, 2, &cells).unwrap();
    let report = audit_minimizer(&chain, &Integrand::area(), &AuditOptions::default()).unwrap();
    let junction: Vec<&AuditPoint> = report.points.iter().filter(|p| p.kind == PointKind::Junction).collect();
    assert_eq!(junction.len(), 4);
    let mut checked = 0;
    for j in junction {
        assert_eq!(j.incidence, 4);
        assert!((j.expected - 2.0 * PI).abs() < 1e-12);
        if let (Some(lo), Some(hi)) = (j.min_ratio, j.max_ratio) {
            assert!(lo >= 0.9 * 2.0 * PI && hi <= 1.1 * 2.0 * PI, "{lo} {hi}");
            checked += 1;
        }
    }
    assert!(checked >= 2);
}

#[test]
fn problem_json_round_trip() {
    let spec = ProblemSpec {
        grid_box: GridBox {
            lo: vec![0.0; 3],
            hi: vec![1.0; 3],
        },
        level: 1,
        dim: 2,
        boundary: square_cycle(1),
        generators: vec![square_cycle(1)],
        integrand: IntegrandSpec::Area {},
        options: MinimizeOptions::default(),
    };
    let text = serde_json::to_string(&spec).unwrap();
    let p = SpanningProblem::from_json(&text).unwrap();
    let min = minimize(&p).unwrap();
    let oracle = exhaustive_oracle(&p, 24).unwrap();
    let record = SolutionRecord::new(&p, &min, Some(&oracle));
    assert!(record.oracle.as_ref().unwrap().equal);
    assert_eq!(record.cells, 4);
    let obj = chain_obj(&min.chain).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 4);

    let bad = text.replacen("\"dim\"", "\"dimension\"", 1);
    assert!(matches!(SpanningProblem::from_json(&bad), Err(Error::Parse(_))));
}
