//! Smooth retractions onto the cube `Q = [−1, 1]^n`.

use crate::cubemaps::face::dist_to_cube;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::map::{check_point, Smoothness, SmoothMap, Support};
use crate::profile::{quintic_step, FlatAtUnitProfile};

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::param("eps", eps, "must lie in (0, 1)"))
    }
}

/// `g = h ∘ f`: the nearest-point projection onto `Q` followed by a
/// coordinatewise profile that is flat at `±1`. Maps `R^n` onto `Q`.
#[derive(Clone, Debug)]
pub struct SmoothRetraction {
    n: usize,
    eps: f64,
    profile: FlatAtUnitProfile,
}

pub fn smooth_retraction(n: usize, eps: f64) -> Result<SmoothRetraction> {
    check_eps(eps)?;
    Ok(SmoothRetraction {
        n,
        eps,
        profile: FlatAtUnitProfile::new(0.9 * eps, eps.min(0.5)),
    })
}

impl SmoothRetraction {
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Upper bound on `‖Dg‖`.
    pub fn lipschitz_bound(&self) -> f64 {
        self.profile.max_slope()
    }

    fn eval(&self, x: &Vector) -> (Vector, Matrix) {
        let mut v = Vector::zeros(self.n);
        let mut d = Matrix::zeros(self.n, self.n);
        for j in 0..self.n {
            let c = x[j].clamp(-1.0, 1.0);
            let (s, ds) = self.profile.eval(c);
            v[j] = s;
            if x[j].abs() < 1.0 {
                d[(j, j)] = ds;
            }
        }
        (v, d)
    }
}

impl SmoothMap for SmoothRetraction {
    fn domain_dim(&self) -> usize {
        self.n
    }

    fn jet(&self, x: &Vector) -> Result<(Vector, Matrix)> {
        check_point(self, x)?;
        Ok(self.eval(x))
    }

    fn support(&self) -> Support {
        Support::Everywhere
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Finite(2)
    }
}

/// Retraction `l` equal to `g` on a collar of `Q` and to the identity beyond
/// distance `eps`:
/// `l(x) = g(x) + (x − g(x))·σ(2δ(x)/ι)` with `δ = max(0, dist(x, Q) − ι/3)`
/// and `ι = eps / (2(1 + √n))`.
#[derive(Clone, Debug)]
pub struct CollarRetraction {
    n: usize,
    eps: f64,
    iota: f64,
    inner: SmoothRetraction,
}

pub fn retraction_with_collar(n: usize, eps: f64) -> Result<CollarRetraction> {
    check_eps(eps)?;
    let iota = eps / (2.0 * (1.0 + (n as f64).sqrt()));
    Ok(CollarRetraction {
        n,
        eps,
        iota,
        inner: smooth_retraction(n, iota)?,
    })
}

impl CollarRetraction {
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Points within this distance of `Q` are mapped onto `∂Q` faces exactly
    /// as `g` maps them.
    pub fn collar_width(&self) -> f64 {
        self.iota / 3.0
    }

    /// The stated Lipschitz bound `16√n`.
    pub fn lipschitz_bound(&self) -> f64 {
        16.0 * (self.n as f64).sqrt()
    }
}

impl SmoothMap for CollarRetraction {
    fn domain_dim(&self) -> usize {
        self.n
    }

    fn jet(&self, x: &Vector) -> Result<(Vector, Matrix)> {
        check_point(self, x)?;
        let dist = dist_to_cube(x);
        let delta = dist - self.iota / 3.0;
        let scale = 2.0 / self.iota;
        if delta * scale >= 1.0 {
            return Ok((x.clone(), Matrix::identity(self.n, self.n)));
        }
        let (g, dg) = self.inner.eval(x);
        if delta <= 0.0 {
            return Ok((g, dg));
        }
        let (w, dw) = quintic_step(delta * scale);
        let grad_dist = (x - x.map(|v| v.clamp(-1.0, 1.0))) / dist;
        let gap = x - &g;
        let value = &g + &gap * w;
        let mut jac = dg * (1.0 - w) + Matrix::identity(self.n, self.n) * w;
        jac += &gap * (grad_dist.transpose() * (dw * scale));
        Ok((value, jac))
    }

    fn support(&self) -> Support {
        Support::cube(&vec![0.0; self.n], 1.0 + self.eps)
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Finite(1)
    }
}
