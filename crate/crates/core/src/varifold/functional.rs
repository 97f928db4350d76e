use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{haar_sample_with, m_jacobian, Plane};
use crate::map::{MapRef, Smoothness, SmoothMap};
use crate::varifold::discrete::{DiscreteVarifold, Sample, Tangent};
use crate::varifold::integrand::{sup_over_planes, Integrand, SupOptions};

/// Haar sampling used wherever an isotropic sample meets a
/// tangent-dependent evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HaarOptions {
    pub samples: usize,
    pub seed: u64,
}

impl Default for HaarOptions {
    fn default() -> Self {
        Self { samples: 256, seed: 0 }
    }
}

impl HaarOptions {
    /// The shared plane draws.
    pub fn planes(&self, n: usize, m: usize) -> Result<Vec<Plane>> {
        if self.samples == 0 {
            return Err(Error::param("samples", 0, "need at least one Haar sample"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.samples).map(|_| haar_sample_with(&mut rng, n, m)).collect()
    }
}

/// `Φ_F(V)` with the Monte Carlo record of the isotropic part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiValue {
    pub value: f64,
    /// Haar draws used for isotropic samples (0 when there are none).
    pub haar_samples: usize,
    pub std_error: f64,
}

pub fn phi_f(v: &DiscreteVarifold, f: &Integrand, haar: &HaarOptions) -> Result<PhiValue> {
    let mut value = 0.0;
    let mut iso: Vec<&Sample> = Vec::new();
    for s in v.samples() {
        match &s.tangent {
            Tangent::Plane(t) => value += s.weight * f.eval(&s.point, t)?,
            Tangent::Isotropic => iso.push(s),
        }
    }
    if iso.is_empty() || v.dim() == 0 {
        for s in &iso {
            value += s.weight * f.eval(&s.point, &Plane::zero(v.ambient_dim()))?;
        }
        return Ok(PhiValue {
            value,
            haar_samples: 0,
            std_error: 0.0,
        });
    }
    let planes = haar.planes(v.ambient_dim(), v.dim())?;
    let mut totals = Vec::with_capacity(planes.len());
    for t in &planes {
        let mut acc = 0.0;
        for s in &iso {
            acc += s.weight * f.eval(&s.point, t)?;
        }
        totals.push(acc);
    }
    let k = totals.len() as f64;
    let mean = totals.iter().sum::<f64>() / k;
    let var = if totals.len() > 1 {
        totals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    Ok(PhiValue {
        value: value + mean,
        haar_samples: planes.len(),
        std_error: (var / k).sqrt(),
    })
}

/// `Ψ_F = Φ_F(S_r) + Σ_{S_u} weight·sup_T F(x, T)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiValue {
    pub value: f64,
    pub rectifiable: f64,
    pub unrectifiable: f64,
    pub sup_grid: usize,
}

pub fn psi_f(s_r: &DiscreteVarifold, s_u: &DiscreteVarifold, f: &Integrand, sup: &SupOptions) -> Result<PsiValue> {
    Error::check_dim("psi ambient", s_r.ambient_dim(), s_u.ambient_dim())?;
    Error::check_dim("psi dim", s_r.dim(), s_u.dim())?;
    if !s_r.is_rectifiable() {
        return Err(Error::param("s_r", "isotropic", "rectifiable part must carry tangents"));
    }
    if !s_u.is_isotropic() {
        return Err(Error::param("s_u", "tangent", "unrectifiable part must be isotropic"));
    }
    let rectifiable = phi_f(s_r, f, &HaarOptions::default())?.value;
    let mut unrectifiable = 0.0;
    for s in s_u.samples() {
        if s.weight > 0.0 {
            unrectifiable += s.weight * sup_over_planes(f, &s.point, s_u.dim(), sup)?;
        }
    }
    Ok(PsiValue {
        value: rectifiable + unrectifiable,
        rectifiable,
        unrectifiable,
        sup_grid: sup.grid,
    })
}

/// `φ^#F(x, T) = F(φ(x), Dφ(x)[T])·‖Λ_m Dφ(x)∘P_T‖`, zero where `Dφ(x)`
/// drops rank on `T`.
pub fn pullback_integrand(phi: MapRef, f: &Integrand) -> Integrand {
    let inner = f.clone();
    let smooth = f.smoothness().min(match phi.smoothness() {
        Smoothness::Finite(k) => Smoothness::Finite(k.saturating_sub(1)),
        s => s,
    });
    Integrand::new(format!("pullback({})", f.name()), 0.0, f64::INFINITY, smooth, move |x, t| {
        let (y, d) = phi.jet(x)?;
        match t.image(&d) {
            Some(image) => Ok(inner.eval(&y, &image)? * m_jacobian(&d, t)),
            None => Ok(0.0),
        }
    })
    .expect("valid pull-back bounds")
}

/// `φ_#V`: points mapped, tangents `Dφ(x)[T]`, weights times the
/// `m`-Jacobian. Isotropic samples are split over the Haar draws. Samples
/// whose tangent collapses keep weight 0 on a coordinate plane.
pub fn pushforward(phi: &dyn SmoothMap, v: &DiscreteVarifold, haar: &HaarOptions) -> Result<DiscreteVarifold> {
    Error::check_dim("pushforward domain", phi.domain_dim(), v.ambient_dim())?;
    let k = phi.codomain_dim();
    let m = v.dim();
    if m > k {
        return Err(Error::param("m", m, "varifold dimension exceeds the codomain"));
    }
    let planes = if v.is_rectifiable() || m == 0 {
        Vec::new()
    } else {
        haar.planes(v.ambient_dim(), m)?
    };
    let fallback = Plane::coordinate(k, &(0..m).collect::<Vec<_>>());
    let mut out = Vec::with_capacity(v.len());
    let mut image = |y: &crate::linalg::Vector, d: &crate::linalg::Matrix, t: &Plane, w: f64| {
        let sample = match t.image(d) {
            Some(img) => Sample::new(y.clone(), img, w * m_jacobian(d, t)),
            None => Sample::new(y.clone(), fallback.clone(), 0.0),
        };
        out.push(sample);
    };
    for s in v.samples() {
        let (y, d) = phi.jet(&s.point)?;
        match &s.tangent {
            Tangent::Plane(t) => image(&y, &d, t, s.weight),
            Tangent::Isotropic if m == 0 => image(&y, &d, &Plane::zero(v.ambient_dim()), s.weight),
            Tangent::Isotropic => {
                let share = s.weight / planes.len() as f64;
                for t in &planes {
                    image(&y, &d, t, share);
                }
            }
        }
    }
    DiscreteVarifold::from_samples(k, m, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;
    use crate::map::Affine;
    use crate::varifold::discrete::grid_patch;
    use std::sync::Arc;

    #[test]
    fn isotropic_area_has_no_error() {
        let mut v = DiscreteVarifold::new(3, 2).unwrap();
        v.push(Sample::isotropic(Vector::zeros(3), 2.0)).unwrap();
        let p = phi_f(&v, &Integrand::area(), &HaarOptions::default()).unwrap();
        assert_eq!(p.value, 2.0);
        assert_eq!(p.haar_samples, 256);
        assert_eq!(p.std_error, 0.0);
    }

    #[test]
    fn collapse_kills_mass() {
        let v = grid_patch(&Vector::zeros(3), &Plane::coordinate(3, &[0, 1]), 1.0, 4).unwrap();
        let mut a = crate::linalg::Matrix::identity(3, 3);
        a[(1, 1)] = 0.0;
        let phi = Affine::linear(a);
        let out = pushforward(&phi, &v, &HaarOptions::default()).unwrap();
        assert_eq!(out.mass(), 0.0);
        assert_eq!(out.len(), v.len());
        let pulled = pullback_integrand(Arc::new(phi), &Integrand::area());
        assert_eq!(phi_f(&v, &pulled, &HaarOptions::default()).unwrap().value, 0.0);
    }
}
