use std::sync::Arc;

use gmtk::cubemaps::convex::central_projection;
use gmtk::cubemaps::*;
use gmtk::linalg::{operator_norm, Matrix, Vector};
use gmtk::map::{jacobian_error, FnMap, Smoothness, SmoothMap, Support};
use gmtk::measure::{four_corner_cantor, SampledSet};
use gmtk::region::Region;
use gmtk::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn v(x: &[f64]) -> Vector {
    Vector::from_vec(x.to_vec())
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Vector {
    Vector::from_fn(n, |_, _| rng.random_range(-half..half))
}

/// A point of the closed face with index `kappa`.
fn face_point(rng: &mut ChaCha8Rng, kappa: &FaceIndex) -> Vector {
    Vector::from_fn(kappa.ambient_dim(), |j, _| match kappa.signs()[j] {
        0 => rng.random_range(-1.0..1.0),
        s => s as f64,
    })
}

/// A point of the region `C_κ` at distance at most `reach` from `Q`.
fn region_point(rng: &mut ChaCha8Rng, kappa: &FaceIndex, reach: f64) -> Vector {
    let n = kappa.ambient_dim();
    let pinned = (n - kappa.dim()).max(1) as f64;
    Vector::from_fn(n, |j, _| match kappa.signs()[j] {
        0 => rng.random_range(-1.0..1.0),
        s => s as f64 * (1.0 + rng.random_range(0.0..reach / pinned.sqrt())),
    })
}

#[test]
fn nearest_point_examples() {
    let (p, k) = nearest_point_cube(&v(&[2.0, 0.5]));
    assert_eq!(p, v(&[1.0, 0.5]));
    assert_eq!(k.signs(), &[1, 0]);
    let (p, k) = nearest_point_cube(&v(&[2.0, 3.0]));
    assert_eq!(p, v(&[1.0, 1.0]));
    assert_eq!(k.signs(), &[1, 1]);
    let x = v(&[0.2, -0.7, 0.99]);
    let (p, k) = nearest_point_cube(&x);
    assert_eq!(p, x);
    assert_eq!(k.dim(), 3);
}

#[test]
fn smooth_retraction_contract() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [2, 3] {
        for eps in [0.05, 0.3, 0.9] {
            let g = smooth_retraction(n, eps).unwrap();
            let mut sup = 0.0f64;
            for _ in 0..10_000 {
                let x = uniform(&mut rng, n, 1.0);
                let d = g.jacobian(&x).unwrap();
                sup = sup.max(operator_norm(&d));
            }
            assert!(sup <= 1.0 + eps + 1e-6, "n={n} eps={eps} sup={sup}");
            let bound = (1.0 + (n as f64).sqrt()) * eps;
            for _ in 0..2000 {
                let x = uniform(&mut rng, n, 1.0 + eps / (n as f64).sqrt());
                let y = g.value(&x).unwrap();
                assert!(y.amax() <= 1.0);
                if dist_to_cube(&x) <= eps {
                    assert!((&y - &x).norm() <= bound + 1e-12);
                }
            }
            for kappa in FaceIndex::all(n) {
                let t = kappa.tangent();
                for _ in 0..50 {
                    let x = region_point(&mut rng, &kappa, 2.0);
                    let y = g.value(&x).unwrap();
                    assert!(kappa.face_closure_contains(&y, 1e-12), "{kappa:?} {x} {y}");
                    let z = t.project(&uniform(&mut rng, n, 3.0));
                    assert!((t.project(&g.value(&z).unwrap()) - g.value(&z).unwrap()).amax() < 1e-12);
                }
            }
        }
    }
    assert!(matches!(smooth_retraction(2, 1.5), Err(Error::InvalidParameter { .. })));
}

#[test]
fn collar_retraction_contract() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in [2, 3] {
        let eps = 0.2;
        let l = retraction_with_collar(n, eps).unwrap();
        let lip = 16.0 * (n as f64).sqrt();
        let mut sup = 0.0f64;
        for _ in 0..10_000 {
            let x = uniform(&mut rng, n, 1.0 + 2.0 * eps);
            let (y, d) = l.jet(&x).unwrap();
            let dist = dist_to_cube(&x);
            if dist > eps {
                assert_eq!(y, x);
                assert_eq!(d, Matrix::identity(n, n));
            }
            assert!((&y - &x).norm() <= eps + 1e-12);
            assert!(dist_to_cube(&y) <= dist + 1e-12);
            sup = sup.max(operator_norm(&d));
        }
        assert!(sup < lip, "sup {sup}");
        let x = v(&vec![1.0 + 2.0 * eps; n]);
        assert_eq!(l.value(&x).unwrap(), x);

        let collar = eps / (16.0 * (n as f64).sqrt());
        for kappa in FaceIndex::all(n) {
            if kappa.dim() == n {
                continue;
            }
            for _ in 0..1000 / (3usize.pow(n as u32) - 1) + 1 {
                let f = face_point(&mut rng, &kappa);
                let y = l.value(&f).unwrap();
                assert!(kappa.face_closure_contains(&y, 1e-12));
                let x = region_point(&mut rng, &kappa, collar);
                let y = l.value(&x).unwrap();
                assert!(kappa.face_closure_contains(&y, 1e-12), "{kappa:?} {x} {y}");
            }
        }
    }
}

#[test]
fn central_projection_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (p, t) = central_projection(Arc::new(Ball { n: 3, radius: 1.0 }));
    for _ in 0..1000 {
        let x = uniform(&mut rng, 3, 4.0);
        assert!((p.value(&x).unwrap() - x.normalize()).amax() <= 1e-12);
        assert!((t.value(&x).unwrap()[0] - 1.0 / x.norm()).abs() <= 1e-12);
    }
    let (_, t2) = central_projection(Arc::new(Ball { n: 2, radius: 2.0 }));
    let x = v(&[0.3, 0.4]);
    assert!((t2.value(&x).unwrap()[0] - 4.0).abs() < 1e-12);
}

#[test]
fn ellipse_projection_matches_finite_differences() {
    let body: Arc<dyn ConvexBody> = Arc::new(Ellipsoid::new(vec![2.0, 1.0]).unwrap());
    let (p, _) = central_projection(body);
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let probes: Vec<Vector> = (0..100)
        .map(|_| loop {
            let x = uniform(&mut rng, 2, 3.0);
            if x.norm() > 0.2 {
                break x;
            }
        })
        .collect();
    assert!(jacobian_error(&p, &probes, 1e-6) < 1e-5);
    for x in &probes {
        let bound = p.derivative_bound(x).unwrap();
        assert!(operator_norm(&p.jacobian(x).unwrap()) <= bound * (1.0 + 1e-12));
    }
    assert!(matches!(p.value(&Vector::zeros(2)), Err(Error::Domain { .. })));
}

#[test]
fn collared_projection_contract() {
    let body: Arc<dyn ConvexBody> = Arc::new(Ellipsoid::new(vec![1.5, 1.0]).unwrap());
    let eps = 0.25;
    let q = collared_projection(body.clone(), eps).unwrap();
    let (p, _) = central_projection(body.clone());
    let dirs: Vec<Vector> = (0..720).map(|i| {
        let a = i as f64 * std::f64::consts::PI / 360.0;
        v(&[a.cos(), a.sin()])
    }).collect();
    let delta = 1.0 / q.obliqueness(&dirs);
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..5000 {
        let x = uniform(&mut rng, 2, 2.0);
        if x.norm() < 1e-3 {
            continue;
        }
        let (y, d) = q.jet(&x).unwrap();
        if !body.contains(&x) {
            assert_eq!(y, x);
            continue;
        }
        let px = p.value(&x).unwrap();
        let s = y.norm() / x.norm();
        assert!(s >= 1.0 - 1e-12);
        assert!((&y - &x * s).amax() < 1e-12);
        assert!((&y - &x).norm() <= (&px - &x).norm() + 1e-12);
        let inner = Ellipsoid::new(vec![1.5 - eps, 1.0 - eps]).unwrap();
        if inner.contains(&x) {
            assert!((&y - &px).amax() < 1e-12);
        }
        assert!(operator_norm(&d) <= 5.0 * px.norm() / x.norm() * delta);
    }
    let ball = collared_projection(Arc::new(Ball { n: 2, radius: 1.0 }), 0.3).unwrap();
    let x = v(&[0.3, 0.0]);
    assert!((ball.value(&x).unwrap() - v(&[1.0, 0.0])).amax() < 1e-12);
}

#[test]
fn punctured_projection_contract() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for (n, a) in [(2, v(&[0.0, 0.0])), (2, v(&[0.3, -0.45])), (3, v(&[-0.2, 0.1, 0.5]))] {
        let eps = 0.2;
        let phi = punctured_cube_projection(&a, eps).unwrap();
        assert!(matches!(phi.value(&a), Err(Error::Domain { .. })));
        let mut probes = Vec::new();
        for _ in 0..4000 {
            let x = uniform(&mut rng, n, 1.0 + 2.0 * eps);
            if (&x - &a).norm() < 1e-3 {
                continue;
            }
            let y = phi.value(&x).unwrap();
            let dist = dist_to_cube(&x);
            if dist >= eps {
                assert_eq!(y, x);
            }
            if x.amax() <= 1.0 {
                assert!((y.amax() - 1.0).abs() < 1e-9, "{x} -> {y}");
                let (_, kappa) = nearest_point_cube(&x);
                if kappa.dim() < n {
                    assert!(kappa.face_closure_contains(&y, 1e-9));
                }
            }
            assert!(dist_to_cube_boundary(&y) <= dist_to_cube_boundary(&x) + 1e-12);
            probes.push(x);
        }
        for kappa in FaceIndex::all(n).into_iter().filter(|k| k.dim() < n) {
            for _ in 0..20 {
                let x = region_point(&mut rng, &kappa, 2.0 * eps);
                assert!(kappa.region_closure_contains(&phi.value(&x).unwrap(), 1e-9));
                let f = face_point(&mut rng, &kappa);
                assert!(kappa.face_closure_contains(&phi.value(&f).unwrap(), 1e-9));
            }
        }
        assert!(jacobian_error(&phi, &probes[..300], 1e-7) < 1e-4);
        let far: Vec<Vector> = probes.iter().filter(|x| x.amax() < 1.0 && (*x - &a).norm() > 0.05).cloned().collect();
        let gamma = phi.gamma_estimate(&far);
        assert!(gamma.is_finite() && gamma > 0.0);
        eprintln!("punctured n={n} a={:?}: empirical Gamma {gamma:.3}", a.as_slice());
    }
    let phi = punctured_cube_projection(&Vector::zeros(2), 0.2).unwrap();
    let y = phi.value(&v(&[0.5, 0.0])).unwrap();
    assert!((y - v(&[1.0, 0.0])).norm() <= 0.2);
    assert!(punctured_cube_projection(&v(&[1.0, 0.0]), 0.1).is_err());
    assert!(punctured_cube_projection(&v(&[0.0, 0.0]), 0.3).is_err());
}

/// `x ↦ e·(x·e)·ψ(|x|)` with `ψ` a smooth cutoff equal to one on the ball of
/// radius 4.
fn rank_one_map(angle: f64) -> FnMap {
    let e = v(&[angle.cos(), angle.sin()]);
    FnMap::new(2, 2, Support::Everywhere, Smoothness::Finite(2), move |x: &Vector| {
        let r = x.norm();
        let (psi, dpsi) = if r <= 4.0 {
            (1.0, 0.0)
        } else {
            let (s, ds) = gmtk::profile::quintic_step((r - 4.0) / 2.0);
            (1.0 - s, -ds / 2.0)
        };
        let s = x.dot(&e);
        let grad = if r > 0.0 { x / r * dpsi * s } else { Vector::zeros(2) };
        let row = &e * psi + grad;
        Ok((&e * (s * psi), &e * row.transpose()))
    })
}

fn rotated_cantor(angle: f64) -> SampledSet {
    let base = four_corner_cantor(6);
    let (c, s) = (angle.cos(), angle.sin());
    let points = base.points.iter().map(|p| v(&[c * p[0] - s * p[1], s * p[0] + c * p[1]])).collect();
    SampledSet::new(points, 1, base.resolution)
}

#[test]
fn unrect_perturbation_crushes_the_cantor_set() {
    let tilt = 1.5f64.to_radians();
    let f = rank_one_map(tilt);
    let set = rotated_cantor(0.0);
    let eps = 0.2;
    let region = Region::Ball { center: vec![0.5, 0.5], radius: 3.0 };
    let rho = unrect_perturbation(&set, &f, &region, eps, &UnrectOptions::default()).unwrap();
    let report = rho.report();
    eprintln!(
        "cantor: input {:.4} baseline {:.4} after {:.4} balls {}",
        report.input.value,
        report.baseline_image.value,
        report.image.value,
        rho.balls().len()
    );
    assert!(report.baseline_image.value > 0.2 * report.input.value);
    assert!(report.ratio() <= 0.2);

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst = 0.0f64;
    for i in 0..10_000 {
        let x = if i % 2 == 0 {
            &set.points[rng.random_range(0..set.points.len())] + uniform(&mut rng, 2, 0.05)
        } else {
            uniform(&mut rng, 2, 1.5).add_scalar(0.5)
        };
        let d = rho.jacobian(&x).unwrap();
        worst = worst.max(operator_norm(&(d - Matrix::identity(2, 2))));
        if !region.contains(x.as_slice()) {
            assert_eq!(rho.value(&x).unwrap(), x);
        }
    }
    assert!(worst <= eps, "worst {worst}");
    let probes: Vec<Vector> = (0..400).map(|_| uniform(&mut rng, 2, 0.6).add_scalar(0.5)).collect();
    assert!(jacobian_error(&rho, &probes, 1e-7) < 1e-5);
}

#[test]
fn unrect_rejects_full_rank_with_the_point() {
    let set = SampledSet::new(vec![v(&[0.1, 0.2]), v(&[0.3, 0.2])], 1, 0.01);
    let f = gmtk::map::Identity { n: 2 };
    match unrect_perturbation(&set, &f, &Region::Whole { n: 2 }, 0.1, &UnrectOptions::default()) {
        Err(Error::RankViolation { point, rank, allowed }) => {
            assert_eq!(point, vec![0.1, 0.2]);
            assert_eq!((rank, allowed), (2, 1));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn unrect_empty_set_is_identity() {
    let set = SampledSet::new(Vec::new(), 1, 0.01);
    let f = rank_one_map(0.3);
    let rho = unrect_perturbation(&set, &f, &Region::Whole { n: 2 }, 0.1, &UnrectOptions::default()).unwrap();
    let x = v(&[0.7, -0.1]);
    assert_eq!(rho.value(&x).unwrap(), x);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn collar_retraction_jacobian_matches(x in prop::collection::vec(-1.6f64..1.6, 3), eps in 0.05f64..0.9) {
        let l = retraction_with_collar(3, eps).unwrap();
        prop_assert!(jacobian_error(&l, &[Vector::from_vec(x)], 1e-7) < 1e-4);
    }

    #[test]
    fn smooth_retraction_is_identity_on_the_small_cube(x in prop::collection::vec(-0.5f64..0.5, 2), eps in 0.01f64..0.4) {
        let g = smooth_retraction(2, eps).unwrap();
        let x = Vector::from_vec(x);
        prop_assert!((g.value(&x).unwrap() - &x).amax() <= eps);
    }

    #[test]
    fn punctured_projection_lands_on_the_boundary(
        a in prop::collection::vec(-0.8f64..0.8, 2),
        x in prop::collection::vec(-1.0f64..1.0, 2),
    ) {
        let a = Vector::from_vec(a);
        let x = Vector::from_vec(x);
        prop_assume!((&x - &a).norm() > 1e-3);
        let phi = punctured_cube_projection(&a, 0.1).unwrap();
        let y = phi.value(&x).unwrap();
        prop_assert!((y.amax() - 1.0).abs() < 1e-9);
    }
}
