//! Scalar C² profiles: smoothsteps, ramps and the one-dimensional pieces of
//! the cube maps. Every function returns `(value, derivative)`.

/// Cubic smoothstep `3x² − 2x³` clamped to `[0, 1]`.
pub fn cubic_step(x: f64) -> (f64, f64) {
    if x <= 0.0 {
        (0.0, 0.0)
    } else if x >= 1.0 {
        (1.0, 0.0)
    } else {
        (x * x * (3.0 - 2.0 * x), 6.0 * x * (1.0 - x))
    }
}

/// Quintic smoothstep `6x⁵ − 15x⁴ + 10x³` clamped to `[0, 1]`.
/// First and second derivatives vanish at both ends.
pub fn quintic_step(x: f64) -> (f64, f64) {
    if x <= 0.0 {
        (0.0, 0.0)
    } else if x >= 1.0 {
        (1.0, 0.0)
    } else {
        let x2 = x * x;
        (
            x2 * x * (x * (6.0 * x - 15.0) + 10.0),
            30.0 * x2 * (1.0 - x) * (1.0 - x),
        )
    }
}

/// Maximum slope of [`quintic_step`].
pub const QUINTIC_MAX_SLOPE: f64 = 1.875;

/// Quintic smoothstep compressed into `[1/32, 31/32]`: identically 0 near 0,
/// identically 1 near 1, slope at most 2.
pub fn compressed_step(x: f64) -> (f64, f64) {
    const LO: f64 = 1.0 / 32.0;
    const WIDTH: f64 = 30.0 / 32.0;
    let (v, d) = quintic_step((x - LO) / WIDTH);
    (v, d / WIDTH)
}

/// Maximum slope of [`compressed_step`].
pub const COMPRESSED_MAX_SLOPE: f64 = QUINTIC_MAX_SLOPE * 32.0 / 30.0;

/// Antiderivative of the cubic smoothstep on `[0, 1]`: `x³ − x⁴/2`.
fn cubic_step_integral(x: f64) -> f64 {
    x * x * x - 0.5 * x * x * x * x
}

/// Profile `G` on `[0, ∞)` with `G(0) = 0`, `G'(0) = 0`, `G(u) = u` for
/// `u ≥ 1` and `0 ≤ G' ≤ 1 + overshoot`.
///
/// `G'` rises to `1 + overshoot` on `[0, a]`, stays there, and falls back to 1
/// on `[1/2, 1]`. The width `a` is fixed by `G(1) = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowRamp {
    overshoot: f64,
    rise: f64,
}

impl WindowRamp {
    const FALL: f64 = 0.5;

    /// `overshoot` is clamped to `(0, 1/2]`.
    pub fn new(overshoot: f64) -> Self {
        let overshoot = overshoot.clamp(f64::MIN_POSITIVE, 0.5);
        let rise = 1.5 * overshoot / (1.0 + overshoot);
        Self { overshoot, rise }
    }

    pub fn overshoot(&self) -> f64 {
        self.overshoot
    }

    pub fn eval(&self, u: f64) -> (f64, f64) {
        let top = 1.0 + self.overshoot;
        let a = self.rise;
        let b = Self::FALL;
        if u <= 0.0 {
            (0.0, 0.0)
        } else if u >= 1.0 {
            (u, 1.0)
        } else if u < a {
            let x = u / a;
            (top * a * cubic_step_integral(x), top * cubic_step(x).0)
        } else if u < 1.0 - b {
            (top * (0.5 * a + u - a), top)
        } else {
            let x = (u - (1.0 - b)) / b;
            let base = top * (0.5 * a + 1.0 - b - a);
            (
                base + b * (top * x - self.overshoot * cubic_step_integral(x)),
                top - self.overshoot * cubic_step(x).0,
            )
        }
    }
}

/// Odd profile `s` with `s(t) = t` away from `±1`, `s(±1) = ±1`, `s'(±1) = 0`
/// and `0 ≤ s' ≤ 1 + overshoot`. The windows around `±1` have half width
/// `width < 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatAtUnitProfile {
    width: f64,
    ramp: WindowRamp,
}

impl FlatAtUnitProfile {
    pub fn new(width: f64, overshoot: f64) -> Self {
        Self {
            width,
            ramp: WindowRamp::new(overshoot),
        }
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn max_slope(&self) -> f64 {
        1.0 + self.ramp.overshoot()
    }

    pub fn eval(&self, t: f64) -> (f64, f64) {
        let sign = if t < 0.0 { -1.0 } else { 1.0 };
        let a = t.abs();
        let off = a - 1.0;
        if off.abs() >= self.width {
            return (t, 1.0);
        }
        let (g, dg) = self.ramp.eval(off.abs() / self.width);
        let side = if off < 0.0 { -1.0 } else { 1.0 };
        (sign * (1.0 + side * self.width * g), dg)
    }
}

/// Transition `s_δ` with `s = 0` on `(−∞, 0]`, `s = 1` on `[1, ∞)`,
/// `s(τ) = τ` on `[δ, 1 − δ]` and `0 ≤ s' ≤ 1 + δ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClampedIdentity {
    delta: f64,
    ramp: WindowRamp,
}

impl ClampedIdentity {
    /// `delta` in `(0, 1/2)`.
    pub fn new(delta: f64) -> Self {
        Self {
            delta,
            ramp: WindowRamp::new(delta),
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eval(&self, tau: f64) -> (f64, f64) {
        let d = self.delta;
        if tau <= 0.0 {
            (0.0, 0.0)
        } else if tau >= 1.0 {
            (1.0, 0.0)
        } else if tau < d {
            let (g, dg) = self.ramp.eval(tau / d);
            (d * g, dg)
        } else if tau > 1.0 - d {
            let (g, dg) = self.ramp.eval((1.0 - tau) / d);
            (1.0 - d * g, dg)
        } else {
            (tau, 1.0)
        }
    }
}

/// Ramp from 0 at `lo` to 1 at `hi` whose slope rises smoothly to a plateau
/// and falls back; slope bounded by `1 / ((hi − lo)(1 − shoulder))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlateauRamp {
    lo: f64,
    hi: f64,
    shoulder: f64,
}

impl PlateauRamp {
    pub fn new(lo: f64, hi: f64, shoulder: f64) -> Self {
        Self { lo, hi, shoulder }
    }

    pub fn max_slope(&self) -> f64 {
        1.0 / ((self.hi - self.lo) * (1.0 - self.shoulder))
    }

    pub fn eval(&self, t: f64) -> (f64, f64) {
        let len = self.hi - self.lo;
        let x = (t - self.lo) / len;
        if x <= 0.0 {
            return (0.0, 0.0);
        }
        if x >= 1.0 {
            return (1.0, 0.0);
        }
        let w = self.shoulder;
        let c = 1.0 / (1.0 - w);
        let (v, d) = if x < w {
            (c * w * cubic_step_integral(x / w), c * cubic_step(x / w).0)
        } else if x <= 1.0 - w {
            (c * (0.5 * w + x - w), c)
        } else {
            let y = (1.0 - x) / w;
            (1.0 - c * w * cubic_step_integral(y), c * cubic_step(y).0)
        };
        (v, d / len)
    }
}

/// Radial factor for the collared central projection: `β(t) = 1` for
/// `t ≤ 1`, `β(t) = t` for `t ≥ reach`, and `1 ≤ β(t) ≤ t` in between.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialBlend {
    reach: f64,
}

impl RadialBlend {
    pub fn new(reach: f64) -> Self {
        Self { reach }
    }

    pub fn reach(&self) -> f64 {
        self.reach
    }

    pub fn eval(&self, t: f64) -> (f64, f64) {
        if t <= 1.0 {
            (1.0, 0.0)
        } else if t >= self.reach {
            (t, 1.0)
        } else {
            let span = self.reach - 1.0;
            let v = (t - 1.0) / span;
            let (q, dq) = quintic_step(v);
            (1.0 + (t - 1.0) * q, q + v * dq)
        }
    }
}

/// Smoothed `max(0, u)`: zero for `u ≤ −h`, equal to `u` for `u ≥ h`,
/// slope in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SoftHinge {
    h: f64,
}

impl SoftHinge {
    pub fn new(h: f64) -> Self {
        Self { h }
    }

    pub fn width(&self) -> f64 {
        self.h
    }

    pub fn eval(&self, u: f64) -> (f64, f64) {
        let h = self.h;
        if u <= -h {
            (0.0, 0.0)
        } else if u >= h {
            (u, 1.0)
        } else {
            let z = 0.5 * (u / h + 1.0);
            let z2 = z * z;
            let integral = 2.0 * z2 * z2 * (z2 - 3.0 * z + 2.5);
            (h * integral, quintic_step(z).0)
        }
    }
}
