use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{volume_factor, Matrix, Vector};
use crate::map::{FnMap, MapRef, Smoothness, SmoothMap, Support};
use crate::profile::ClampedIdentity;
use crate::varifold::discrete::{DiscreteVarifold, Sample, Tangent};
use crate::varifold::functional::{pushforward, HaarOptions};

/// Samples whose coarea factor falls at or below this are dropped.
pub const COAREA_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SliceResult {
    pub t: Vec<f64>,
    pub bin_width: f64,
    pub slice: DiscreteVarifold,
    /// Samples inside the bin that were dropped for a vanishing coarea factor.
    pub dropped: usize,
}

/// `⟨V, f, t⟩` as a bin quotient: samples with `|f(x) − t|_∞ ≤ bin/2`,
/// weighted by `‖Λ_ν Df(x)∘P_S‖ / bin^ν`, tangent `S ∩ ker Df(x)`.
pub fn slice(v: &DiscreteVarifold, f: &dyn SmoothMap, t: &[f64], bin: f64) -> Result<SliceResult> {
    if !(bin > 0.0 && bin.is_finite()) {
        return Err(Error::param("bin", bin, "bin width must be positive"));
    }
    let nu = f.codomain_dim();
    Error::check_dim("slice level", nu, t.len())?;
    Error::check_dim("slice map domain", v.ambient_dim(), f.domain_dim())?;
    if nu > v.dim() {
        return Err(Error::param("nu", nu, "cannot slice by more functions than the dimension"));
    }
    if !v.is_rectifiable() {
        return Err(Error::param("v", "isotropic", "slicing needs tangent samples"));
    }
    let m = v.dim() - nu;
    let scale = bin.powi(nu as i32);
    let mut out = DiscreteVarifold::new(v.ambient_dim(), m)?;
    let mut dropped = 0;
    for s in v.samples() {
        let Tangent::Plane(plane) = &s.tangent else { unreachable!() };
        let (y, d) = f.jet(&s.point)?;
        if (0..nu).any(|i| (y[i] - t[i]).abs() > 0.5 * bin) {
            continue;
        }
        let factor = volume_factor(&(&d * plane.frame()).transpose());
        if factor <= COAREA_TOL {
            dropped += 1;
            continue;
        }
        let cut = plane.intersect_kernel(&d, 1e-9);
        if cut.dim() != m {
            dropped += 1;
            continue;
        }
        out.push(Sample::new(s.point.clone(), cut, s.weight * factor / scale))?;
    }
    Ok(SliceResult {
        t: t.to_vec(),
        bin_width: bin,
        slice: out,
        dropped,
    })
}

/// `K(x) = (s_δ((t − ρ(x))/δ), x)` into `R × R^n`.
pub fn blowup_map(rho: MapRef, t: f64, delta: f64) -> Result<FnMap> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", delta, "must lie in (0, 1)"));
    }
    Error::check_dim("blow-up level function", 1, rho.codomain_dim())?;
    let n = rho.domain_dim();
    let profile = ClampedIdentity::new(delta.min(0.25));
    let smooth = rho.smoothness().min(Smoothness::Finite(1));
    Ok(FnMap::new(n, n + 1, Support::Everywhere, smooth, move |x| {
        let (r, dr) = rho.jet(x)?;
        let (s, ds) = profile.eval((t - r[0]) / delta);
        let mut y = Vector::zeros(n + 1);
        y[0] = s;
        y.rows_mut(1, n).copy_from(x);
        let mut d = Matrix::zeros(n + 1, n);
        for j in 0..n {
            d[(0, j)] = -ds * dr[(0, j)] / delta;
            d[(j + 1, j)] = 1.0;
        }
        Ok((y, d))
    }))
}

/// A position test function on `R × R^n`.
pub type TestFn = fn(f64, &Vector) -> f64;

/// The fixed test functions used by the blow-up check.
pub fn blowup_test_functions() -> [TestFn; 5] {
    [
        |_, _| 1.0,
        |s, _| s,
        |s, x| s * s + x[0] * x[0],
        |s, x| (std::f64::consts::PI * s).cos() * x[1] * x[1],
        |s, x| (-x.norm_squared()).exp() * (1.0 + s),
    ]
}

/// Largest gap over `tests` between `K_δ#V` and the limit
/// `i_0#V↾{ρ>t} + i_1#V↾{ρ<t} + [0,1] × ⟨V,ρ,t⟩`, the slice taken with
/// `slice_bin`.
pub fn blowup_residual(v: &DiscreteVarifold, rho: MapRef, t: f64, delta: f64, slice_bin: f64, tests: &[TestFn]) -> Result<f64> {
    let k = blowup_map(rho.clone(), t, delta)?;
    let pushed = pushforward(&k, v, &HaarOptions::default())?;
    let cut = slice(v, rho.as_ref(), &[t], slice_bin)?.slice;
    let (nodes, weights) = gauss_legendre_unit();
    let mut worst: f64 = 0.0;
    for test in tests {
        let lhs: f64 = pushed
            .samples()
            .iter()
            .map(|s| s.weight * test(s.point[0], &s.point.rows(1, v.ambient_dim()).into_owned()))
            .sum();
        let mut rhs = 0.0;
        for s in v.samples() {
            let r = rho.value(&s.point)?[0];
            if r > t {
                rhs += s.weight * test(0.0, &s.point);
            } else if r < t {
                rhs += s.weight * test(1.0, &s.point);
            }
        }
        for s in cut.samples() {
            for (u, w) in nodes.iter().zip(&weights) {
                rhs += w * s.weight * test(*u, &s.point);
            }
        }
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Eight-point Gauss–Legendre rule on `[0, 1]`.
fn gauss_legendre_unit() -> ([f64; 8], [f64; 8]) {
    let x = [
        -0.960_289_856_497_536_3,
        -0.796_666_477_413_626_7,
        -0.525_532_409_916_329,
        -0.183_434_642_495_649_8,
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    let w = [
        0.101_228_536_290_376_26,
        0.222_381_034_453_374_47,
        0.313_706_645_877_887_3,
        0.362_683_783_378_362,
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_47,
        0.101_228_536_290_376_26,
    ];
    (x.map(|v| 0.5 * (v + 1.0)), w.map(|v| 0.5 * v))
}

/// `x ↦ |x − c|` with its gradient; undefined at `c`.
pub fn radial_distance(center: Vector) -> MapRef {
    let n = center.len();
    Arc::new(FnMap::new(n, 1, Support::Everywhere, Smoothness::Infinite, move |x| {
        let d = x - &center;
        let r = d.norm();
        if r == 0.0 {
            return Err(Error::Domain {
                point: x.iter().cloned().collect(),
                reason: "distance is not differentiable at the center",
            });
        }
        Ok((Vector::from_element(1, r), Matrix::from_row_slice(1, n, (d / r).as_slice())))
    }))
}

/// `x ↦ ⟨u, x⟩`.
pub fn linear_coordinate(u: Vector) -> MapRef {
    let n = u.len();
    Arc::new(FnMap::new(n, 1, Support::Everywhere, Smoothness::Infinite, move |x| {
        Ok((Vector::from_element(1, u.dot(x)), Matrix::from_row_slice(1, n, u.as_slice())))
    }))
}

/// Slice mass for each bin width, with the relative error against `exact`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceStudyRow {
    pub bin: f64,
    pub mass: f64,
    pub rel_error: f64,
}

pub fn slice_study(v: &DiscreteVarifold, f: &dyn SmoothMap, t: &[f64], bins: &[f64], exact: f64) -> Result<Vec<SliceStudyRow>> {
    bins.iter()
        .map(|&bin| {
            let mass = slice(v, f, t, bin)?.slice.mass();
            Ok(SliceStudyRow {
                bin,
                mass,
                rel_error: (mass - exact).abs() / exact.abs().max(f64::MIN_POSITIVE),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::Plane;
    use crate::varifold::discrete::sunflower_disc;

    #[test]
    fn gauss_rule_integrates_degree_fifteen() {
        let (x, w) = gauss_legendre_unit();
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(15)).sum();
        assert!((q - 1.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn blowup_far_from_level_is_an_inclusion() {
        let rho = radial_distance(Vector::zeros(2));
        let k = blowup_map(rho, 0.5, 0.1).unwrap();
        let (y, _) = k.jet(&Vector::from_vec(vec![0.9, 0.0])).unwrap();
        assert_eq!(y.as_slice(), &[0.0, 0.9, 0.0]);
        let (y, _) = k.jet(&Vector::from_vec(vec![0.1, 0.0])).unwrap();
        assert_eq!(y.as_slice(), &[1.0, 0.1, 0.0]);
    }

    #[test]
    fn slice_beyond_support_is_empty() {
        let v = sunflower_disc(&Vector::zeros(3), &Plane::coordinate(3, &[0, 1]), 1.0, 2000).unwrap();
        let r = slice(&v, radial_distance(Vector::zeros(3)).as_ref(), &[2.0], 0.05).unwrap();
        assert!(r.slice.is_empty());
        assert!(slice(&v, radial_distance(Vector::zeros(3)).as_ref(), &[0.5], 0.0).is_err());
    }
}
