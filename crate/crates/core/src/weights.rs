//! Weight functions and time schedules for the decay functionals.
//!
//! Every transition layer is built from one smooth step
//! `S(s) = logistic(1/(1-s) - 1/s)` on `(0, 1)`, with `S = 0` for `s <= 0` and
//! `S = 1` for `s >= 1`.

use crate::error::{invalid, Result};
use crate::spectral::{Field, Grid};
use std::sync::Arc;

/// Width of the ramp that moves the exponent of `phi` from `0` to `x`.
const BRIDGE_WIDTH: f64 = 0.5;
/// Inside this distance from an endpoint the step equals its limit to machine precision.
const STEP_EDGE: f64 = 1e-3;
/// Points in the verification grid on `[0, VERIFY_SPAN]`.
pub const VERIFY_POINTS: usize = 20_000;
pub const VERIFY_SPAN: f64 = 50.0;

fn logistic(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Smooth step and its first three derivatives.
pub fn smooth_step(s: f64) -> [f64; 4] {
    if s <= STEP_EDGE {
        return [0.0; 4];
    }
    if s >= 1.0 - STEP_EDGE {
        return [1.0, 0.0, 0.0, 0.0];
    }
    let (a, b) = (1.0 - s, s);
    let v = 1.0 / a - 1.0 / b;
    let v1 = 1.0 / (a * a) + 1.0 / (b * b);
    let v2 = 2.0 / a.powi(3) - 2.0 / b.powi(3);
    let v3 = 6.0 / a.powi(4) + 6.0 / b.powi(4);
    let p = logistic(v);
    let q = logistic(-v);
    let g1 = p * q;
    let g2 = g1 * (q - p);
    let g3 = g1 * (1.0 - 6.0 * p * q);
    [
        p,
        g1 * v1,
        g2 * v1 * v1 + g1 * v2,
        g3 * v1.powi(3) + 3.0 * g2 * v1 * v2 + g1 * v3,
    ]
}

/// `chi`: 0 on `(-inf, 1]`, 1 on `[2, inf)`, increasing between.
pub fn chi(s: f64) -> [f64; 4] {
    smooth_step(s - 1.0)
}

/// `beta`: 1 on `(-inf, -2]`, 0 on `[-1, inf)`, decreasing between.
pub fn beta(s: f64) -> [f64; 4] {
    let [v, d1, d2, d3] = smooth_step(s + 2.0);
    [1.0 - v, -d1, -d2, -d3]
}

/// Cut-off equal to 1 on `[0, 1]` and supported in `(-1, 2)`.
pub fn zeta(x: f64) -> f64 {
    smooth_step(x + 1.0)[0] * (1.0 - smooth_step(x - 1.0)[0])
}

pub fn zeta_n(x: f64, n: i64) -> f64 {
    zeta(x - n as f64)
}

/// Largest `|S^(k)|`, `k = 1, 2, 3`, sampled on `points` nodes of `[0, 1]`.
pub fn step_derivative_maxima(points: usize) -> [f64; 3] {
    let mut out = [0.0f64; 3];
    for i in 0..=points {
        let d = smooth_step(i as f64 / points as f64);
        for k in 0..3 {
            out[k] = out[k].max(d[k + 1].abs());
        }
    }
    out
}

/// The spatial weight `phi` with its primitive `psi`.
///
/// `phi = exp(-r(|x|))` with `r(x) = x S((x - 1)/w)`: `phi = 1` on `[0, 1]` and
/// `phi = e^{-x}` for `x >= 1 + w`.
#[derive(Debug, Clone)]
pub struct WeightProfile {
    psi_two: f64,
    constant: f64,
}

impl WeightProfile {
    /// `r, r', r''` on `x >= 0`.
    fn exponent(x: f64) -> [f64; 3] {
        let [s, s1, s2, _] = smooth_step((x - 1.0) / BRIDGE_WIDTH);
        let w = BRIDGE_WIDTH;
        [x * s, s + x * s1 / w, 2.0 * s1 / w + x * s2 / (w * w)]
    }

    pub fn phi(&self, x: f64) -> f64 {
        phi_raw(x)
    }

    pub fn dphi(&self, x: f64) -> f64 {
        let [_, r1, _] = Self::exponent(x.abs());
        -r1 * phi_raw(x) * x.signum()
    }

    pub fn d2phi(&self, x: f64) -> f64 {
        let [_, r1, r2] = Self::exponent(x.abs());
        (r1 * r1 - r2) * phi_raw(x)
    }

    /// `psi(x) = int_0^x phi`, odd.
    pub fn psi(&self, x: f64) -> f64 {
        let a = x.abs();
        let value = if a <= 1.0 {
            a
        } else if a < 2.0 {
            1.0 + bridge_integral(a)
        } else {
            self.psi_two + (-2.0f64).exp() - (-a).exp()
        };
        value.copysign(x)
    }

    /// `sup psi = lim_{x -> inf} psi(x)`.
    pub fn psi_sup(&self) -> f64 {
        self.psi_two + (-2.0f64).exp()
    }

    /// `||phi||_2`.
    pub fn phi_norm_l2(&self) -> f64 {
        let bridge =
            quadrature::double_exponential::integrate(|x| phi_raw(x).powi(2), 1.0, 2.0, 1e-14).integral;
        (2.0 * (1.0 + bridge + 0.5 * (-4.0f64).exp())).sqrt()
    }

    /// Verified `c` with `|phi'| <= c phi` and `|phi''| <= c phi`.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// `sigma psi(x / sigma)`.
    pub fn psi_sigma(&self, x: f64, sigma: f64) -> f64 {
        sigma * self.psi(x / sigma)
    }

    /// `delta phi(x / delta)`.
    pub fn phi_delta(&self, x: f64, delta: f64) -> f64 {
        delta * self.phi(x / delta)
    }

    /// Checks the profile on `points` nodes of `[0, VERIFY_SPAN]` and returns
    /// the smallest admissible `c`.
    pub fn verify(&self, points: usize) -> Result<f64> {
        let mut c = 0.0f64;
        for i in 0..=points {
            let x = VERIFY_SPAN * i as f64 / points as f64;
            let (p, d1, d2) = (self.phi(x), self.dphi(x), self.d2phi(x));
            let e = (-x).exp();
            let fail = |what: &str| invalid(format!("weight profile: {what} fails at x = {x}"));
            if !(p > 0.0 && p <= 1.0) {
                return Err(fail("0 < phi <= 1"));
            }
            if d1 > 0.0 {
                return Err(fail("phi' <= 0"));
            }
            if x <= 1.0 && p != 1.0 {
                return Err(fail("phi = 1 on [0, 1]"));
            }
            if x >= 2.0 && (p - e).abs() > 1e-15 * e {
                return Err(fail("phi = exp(-x) on [2, inf)"));
            }
            if p < e * (1.0 - 1e-14) || p > 3.0 * e {
                return Err(fail("exp(-x) <= phi <= 3 exp(-x)"));
            }
            if (self.phi(-x) - p).abs() > 0.0 {
                return Err(fail("evenness"));
            }
            c = c.max(d1.abs() / p).max(d2.abs() / p);
        }
        Ok(c)
    }
}

fn phi_raw(x: f64) -> f64 {
    (-WeightProfile::exponent(x.abs())[0]).exp()
}

fn bridge_integral(x: f64) -> f64 {
    quadrature::double_exponential::integrate(phi_raw, 1.0, x, 1e-14).integral
}

/// Builds `phi` and verifies all profile inequalities on a dense grid.
pub fn make_weight_profile() -> Result<WeightProfile> {
    let mut profile = WeightProfile {
        psi_two: 1.0 + bridge_integral(2.0),
        constant: f64::NAN,
    };
    profile.constant = profile.verify(VERIFY_POINTS)?;
    Ok(profile)
}

/// Exponents of the decay schedules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleParams {
    pub b: f64,
    pub m: f64,
    pub q: f64,
    /// Sign of `rho`, `+1` or `-1`.
    pub rho_sign: f64,
    /// Also require `m < 1 - 3b/2`.
    pub corollary: bool,
}

impl ScheduleParams {
    pub fn new(b: f64, m: f64, q: f64, rho_sign: f64, corollary: bool) -> Result<Self> {
        let p = ScheduleParams {
            b,
            m,
            q,
            rho_sign,
            corollary,
        };
        p.validate()?;
        Ok(p)
    }

    fn base_violation(&self) -> Option<String> {
        let (b, m, q) = (self.b, self.m, self.q);
        if !(q > 1.0) {
            return Some(format!("q > 1 violated (q = {q})"));
        }
        let cap = (2.0f64 / 3.0).min(2.0 / (2.0 + q));
        if !(b > 0.0 && b <= cap) {
            return Some(format!("0 < b <= min(2/3, 2/(2+q)) = {cap} violated (b = {b})"));
        }
        if !(m >= 0.0 && m <= 1.0 - b / 2.0) {
            return Some(format!("0 <= m <= 1 - b/2 = {} violated (m = {m})", 1.0 - b / 2.0));
        }
        None
    }

    fn corollary_violation(&self) -> Option<String> {
        let limit = 1.0 - 1.5 * self.b;
        (!(self.m >= 0.0 && self.m < limit))
            .then(|| format!("0 <= m < 1 - 3b/2 = {limit} violated (m = {})", self.m))
    }

    /// Names the constraints that hold for exactly one of the two readings.
    pub fn constraint_report(&self) -> Option<String> {
        match (self.base_violation(), self.corollary_violation()) {
            (None, Some(c)) => Some(format!("base relations hold but corollary relation fails: {c}")),
            (Some(bv), None) => Some(format!("corollary relation holds but base relations fail: {bv}")),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.b, self.m, self.q].iter().all(|v| v.is_finite()) {
            return Err(invalid("schedule exponents must be finite"));
        }
        if self.rho_sign != 1.0 && self.rho_sign != -1.0 {
            return Err(invalid(format!("rho sign must be +1 or -1, got {}", self.rho_sign)));
        }
        if let Some(v) = self.base_violation() {
            return Err(invalid(v));
        }
        if self.corollary {
            if let Some(v) = self.corollary_violation() {
                return Err(invalid(v));
            }
        }
        Ok(())
    }

    /// Earliest admissible time: `t >= 10` and `mu1' > 0`, i.e. `t > e^{1/b}`.
    pub fn min_time(&self) -> f64 {
        10f64.max((1.0 / self.b).exp() * (1.0 + 1e-12))
    }
}

/// `mu, mu1, rho` and their time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedules {
    pub mu: f64,
    pub mu1: f64,
    pub rho: f64,
    pub dmu: f64,
    pub dmu1: f64,
    pub drho: f64,
}

/// `mu1 = t^b / log t`, `mu = t^{1-b} log^2 t`, `rho = +- t^m`.
pub fn schedules(t: f64, params: &ScheduleParams) -> Result<Schedules> {
    let t_min = params.min_time();
    if !(t >= t_min) {
        return Err(invalid(format!("schedules need t >= {t_min}, got {t}")));
    }
    let (b, m) = (params.b, params.m);
    let l = t.ln();
    Ok(Schedules {
        mu: t.powf(1.0 - b) * l * l,
        mu1: t.powf(b) / l,
        rho: params.rho_sign * t.powf(m),
        dmu: t.powf(-b) * l * ((1.0 - b) * l + 2.0),
        dmu1: t.powf(b - 1.0) * (b * l - 1.0) / (l * l),
        drho: params.rho_sign * m * t.powf(m - 1.0),
    })
}

/// Value and derivatives of a space-time weight at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WeightJet {
    pub value: f64,
    pub dx: f64,
    pub dxx: f64,
    pub dxxx: f64,
    pub dt: f64,
}

/// A weight `phi(x, t)` with analytic derivatives.
pub trait SpaceTimeWeight: Send + Sync {
    fn jet(&self, x: f64, t: f64) -> WeightJet;
}

/// Front weights moving with the decay regions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrontSpec {
    /// `chi((x - c1) / (c0 t))`.
    Right { c0: f64, c1: f64 },
    /// `beta((x + c1) / mu(t))`, `mu = c2 t log^{1+eta} t`.
    Left { c1: f64, c2: f64, eta: f64 },
}

impl FrontSpec {
    pub fn right(c0: f64, c1: f64) -> Result<Self> {
        if !(c0 > 0.0 && c0.is_finite() && c1.is_finite()) {
            return Err(invalid(format!("right front needs c0 > 0, got c0 = {c0}, c1 = {c1}")));
        }
        Ok(FrontSpec::Right { c0, c1 })
    }

    pub fn left(c1: f64, c2: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(invalid(format!("left front needs eta > 0, got {eta}")));
        }
        if !(c2 > 0.0 && c2.is_finite() && c1.is_finite()) {
            return Err(invalid(format!("left front needs c2 > 0, got {c2}")));
        }
        Ok(FrontSpec::Left { c1, c2, eta })
    }

    /// Earliest time at which the weight is defined.
    pub fn min_time(&self) -> f64 {
        match self {
            FrontSpec::Right { .. } => 0.0,
            FrontSpec::Left { .. } => 1.0,
        }
    }

    /// Front scale and its time derivative: `c0 t` or `mu(t)`.
    pub fn scale(&self, t: f64) -> (f64, f64) {
        match *self {
            FrontSpec::Right { c0, .. } => (c0 * t, c0),
            FrontSpec::Left { c2, eta, .. } => {
                let l = t.ln();
                (c2 * t * l.powf(1.0 + eta), c2 * l.powf(eta) * (l + 1.0 + eta))
            }
        }
    }

    /// Front position: `c1 + c0 t` for the right front, `-c1 - mu(t)` for the left.
    pub fn edge(&self, t: f64) -> f64 {
        match *self {
            FrontSpec::Right { c1, .. } => c1 + self.scale(t).0,
            FrontSpec::Left { c1, .. } => -c1 - self.scale(t).0,
        }
    }

    pub fn front_weight(&self, x: f64, t: f64) -> Result<WeightJet> {
        if !(t > self.min_time()) {
            return Err(invalid(format!("front weight needs t > {}, got {t}", self.min_time())));
        }
        Ok(self.jet(x, t))
    }
}

impl SpaceTimeWeight for FrontSpec {
    fn jet(&self, x: f64, t: f64) -> WeightJet {
        let (scale, dscale) = self.scale(t);
        let (s, d) = match *self {
            FrontSpec::Right { c1, .. } => {
                let s = (x - c1) / scale;
                (s, chi(s))
            }
            FrontSpec::Left { c1, .. } => {
                let s = (x + c1) / scale;
                (s, beta(s))
            }
        };
        WeightJet {
            value: d[0],
            dx: d[1] / scale,
            dxx: d[2] / (scale * scale),
            dxxx: d[3] / scale.powi(3),
            dt: -d[1] * s * dscale / scale,
        }
    }
}

/// `(1 + tanh((x - center - speed t)/width)) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TanhStep {
    pub center: f64,
    pub width: f64,
    pub speed: f64,
}

impl SpaceTimeWeight for TanhStep {
    fn jet(&self, x: f64, t: f64) -> WeightJet {
        let w = self.width;
        let z = (x - self.center - self.speed * t) / w;
        let th = z.tanh();
        let sech2 = 1.0 - th * th;
        let dx = 0.5 * sech2 / w;
        WeightJet {
            value: 0.5 * (1.0 + th),
            dx,
            dxx: -sech2 * th / (w * w),
            dxxx: sech2 * (2.0 * th * th - sech2) / w.powi(3),
            dt: -self.speed * dx,
        }
    }
}

/// Weight independent of `x` and `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl SpaceTimeWeight for Constant {
    fn jet(&self, _x: f64, _t: f64) -> WeightJet {
        WeightJet {
            value: self.0,
            ..WeightJet::default()
        }
    }
}

/// A weight and its derivatives sampled on a grid at one time.
#[derive(Debug, Clone)]
pub struct SampledWeight {
    pub value: Field,
    pub dx: Field,
    pub dt: Field,
}

pub fn sample_weight(weight: &dyn SpaceTimeWeight, grid: &Arc<Grid>, t: f64) -> Result<SampledWeight> {
    let jets: Vec<WeightJet> = grid.xs().map(|x| weight.jet(x, t)).collect();
    let pick = |f: fn(&WeightJet) -> f64| Field::from_samples(grid, jets.iter().map(f).collect());
    Ok(SampledWeight {
        value: pick(|j| j.value)?,
        dx: pick(|j| j.dx)?,
        dt: pick(|j| j.dt)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn profile() -> WeightProfile {
        make_weight_profile().unwrap()
    }

    /// Central difference of `f` at `x`.
    fn fd(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn step_limits_and_derivatives() {
        assert_eq!(smooth_step(-0.5), [0.0; 4]);
        assert_eq!(smooth_step(1.5), [1.0, 0.0, 0.0, 0.0]);
        assert_relative_eq!(smooth_step(0.5)[0], 0.5);
        assert_relative_eq!(smooth_step(0.5)[1], 2.0, max_relative = 1e-14);
        for &s in &[0.1, 0.3, 0.62, 0.9] {
            let d = smooth_step(s);
            for k in 0..3 {
                let num = fd(|y| smooth_step(y)[k], s, 1e-4);
                assert!((num - d[k + 1]).abs() < 1e-6 * (1.0 + d[k + 1].abs()), "{s} {k}");
            }
        }
        // Clamping is invisible at the edges.
        assert!(smooth_step(STEP_EDGE + 1e-9)[0] < 1e-300);
    }

    #[test]
    fn step_derivative_bounds() {
        let [m1, m2, m3] = step_derivative_maxima(200_000);
        assert!(m1 <= 2.0 + 1e-12);
        assert!((m2 - 9.84).abs() < 0.01, "{m2}");
        assert!((m3 - 110.6).abs() < 0.2, "{m3}");
    }

    #[test]
    fn chi_and_beta_shapes() {
        assert_eq!(chi(1.0)[0], 0.0);
        assert_eq!(chi(2.0)[0], 1.0);
        assert_eq!(beta(-2.0)[0], 1.0);
        assert_eq!(beta(-1.0)[0], 0.0);
        for i in 1..100 {
            let s = 1.0 + i as f64 / 100.0;
            assert!(chi(s)[1] > 0.0);
            assert!(beta(-s)[1] < 0.0);
            assert_relative_eq!(beta(-s)[0], 1.0 - smooth_step(2.0 - s)[0]);
        }
    }

    #[test]
    fn phi_examples() {
        let p = profile();
        assert_eq!(p.phi(0.5), 1.0);
        assert_relative_eq!(p.phi(3.0), (-3.0f64).exp(), max_relative = 1e-15);
        for &x in &[0.3, 1.7, 5.0] {
            assert_eq!(p.phi(-x), p.phi(x));
        }
        assert!(p.constant().is_finite() && p.constant() > 1.0);
    }

    #[test]
    fn phi_derivatives_match_differences() {
        let p = profile();
        for &x in &[-1.8, -1.3, 0.7, 1.1, 1.25, 1.4, 1.6, 3.0] {
            assert!((fd(|y| p.phi(y), x, 1e-4) - p.dphi(x)).abs() < 1e-8, "{x}");
            assert!((fd(|y| p.dphi(y), x, 1e-4) - p.d2phi(x)).abs() < 1e-7, "{x}");
        }
    }

    #[test]
    fn constant_stable_under_refinement() {
        let p = profile();
        let coarse = p.verify(VERIFY_POINTS).unwrap();
        let fine = p.verify(2 * VERIFY_POINTS).unwrap();
        assert!((fine - coarse).abs() / fine < 0.01);
    }

    #[test]
    fn psi_properties() {
        let p = profile();
        assert_eq!(p.psi(0.0), 0.0);
        assert_relative_eq!(p.psi(0.7), 0.7);
        // Continuity across the breakpoint at 2.
        assert!((p.psi(2.0 - 1e-12) - p.psi(2.0)).abs() < 1e-11);
        // psi' = phi.
        for &x in &[0.5, 1.2, 1.5, 1.9, 2.5, 6.0] {
            assert!((fd(|y| p.psi(y), x, 1e-3) - p.phi(x)).abs() < 1e-9, "{x}");
        }
        let mut prev = p.psi(-30.0);
        for i in -299..300 {
            let v = p.psi(i as f64 / 10.0);
            assert!(v > prev);
            assert_eq!(p.psi(-(i as f64) / 10.0), -v);
            prev = v;
        }
        // |psi| <= 1 + 3 int_1^inf e^{-t} dt.
        assert!(p.psi_sup() <= 1.0 + 3.0 / std::f64::consts::E);
    }

    #[test]
    fn scaled_profiles() {
        let p = profile();
        assert_eq!(p.psi_sigma(0.0, 2.0), 0.0);
        assert!(p.psi_sigma(1e3, 2.0) <= 2.0 * (1.0 + 3.0 / std::f64::consts::E));
        assert_eq!(p.phi_delta(0.9, 1.5), 1.5);
        assert_eq!(p.phi_delta(-1.5, 1.5), 1.5);
    }

    #[test]
    fn zeta_cover() {
        assert_eq!(zeta_n(0.5, 0), 1.0);
        assert_eq!(zeta_n(3.0, 0), 0.0);
        assert_eq!(zeta_n(-1.0, 0), 0.0);
        assert_eq!(zeta_n(7.5, 7), 1.0);
        for i in -500..500 {
            let x = i as f64 / 37.0;
            let total: f64 = (-20..20).map(|n| zeta_n(x, n)).sum();
            assert!(total >= 1.0, "{x}");
        }
    }

    #[test]
    fn schedule_formulas() {
        let p = ScheduleParams::new(0.5, 0.2, 1.1, 1.0, false).unwrap();
        let s = schedules(10.0, &p).unwrap();
        assert_relative_eq!(s.mu * s.mu1, 10.0 * 10f64.ln(), max_relative = 1e-12);
        let s = schedules(100.0, &p).unwrap();
        assert_relative_eq!(s.mu1, 10.0 / 100f64.ln(), max_relative = 1e-14);
        assert!(s.dmu1 > 0.0);
        let h = 1e-3;
        let num = |f: fn(&Schedules) -> f64| {
            let at = |t| f(&schedules(t, &p).unwrap());
            (at(100.0 - 2.0 * h) - 8.0 * at(100.0 - h) + 8.0 * at(100.0 + h) - at(100.0 + 2.0 * h)) / (12.0 * h)
        };
        assert_relative_eq!(num(|s| s.mu), s.dmu, max_relative = 1e-9);
        assert_relative_eq!(num(|s| s.mu1), s.dmu1, max_relative = 1e-9);
        assert_relative_eq!(num(|s| s.rho), s.drho, max_relative = 1e-9);
        for e in 2..=6 {
            let t = 10f64.powi(e);
            let s = schedules(t, &p).unwrap();
            let ratio = (s.dmu1 / s.mu1) / (s.dmu / s.mu);
            assert!((0.25..=4.0).contains(&ratio), "{t} {ratio}");
            assert_relative_eq!(s.mu * s.mu1, t * t.ln(), max_relative = 1e-12);
        }
        assert!(schedules(9.0, &p).is_err());
    }

    #[test]
    fn schedules_reject_nonincreasing_mu1() {
        let p = ScheduleParams::new(0.3, 0.0, 1.1, 1.0, false).unwrap();
        let t0 = p.min_time();
        assert!(t0 > 28.0);
        assert!(schedules(20.0, &p).is_err());
        assert!(schedules(t0, &p).unwrap().dmu1 > 0.0);
    }

    #[test]
    fn schedule_validation() {
        assert!(ScheduleParams::new(0.7, 0.0, 1.1, 1.0, false).is_err());
        assert!(ScheduleParams::new(0.0, 0.0, 1.1, 1.0, false).is_err());
        assert!(ScheduleParams::new(0.5, 0.0, 1.0, 1.0, false).is_err());
        // b <= 2/(2+q) binds for large q.
        assert!(ScheduleParams::new(0.6, 0.0, 2.0, 1.0, false).is_err());
        assert!(ScheduleParams::new(0.5, 0.8, 1.1, 1.0, false).is_err());
        assert!(ScheduleParams::new(0.5, 0.1, 1.1, 0.5, false).is_err());
        // m = 0.5 meets m <= 1 - b/2 but not m < 1 - 3b/2.
        let p = ScheduleParams::new(0.4, 0.5, 1.1, 1.0, false).unwrap();
        assert!(p.constraint_report().unwrap().contains("corollary"));
        let err = ScheduleParams::new(0.4, 0.5, 1.1, 1.0, true).unwrap_err();
        assert!(err.to_string().contains("1 - 3b/2"));
        assert!(ScheduleParams::new(0.4, 0.3, 1.1, -1.0, true).is_ok());
    }

    #[test]
    fn right_front() {
        let f = FrontSpec::right(2.0, 1.0).unwrap();
        let t = 5.0;
        assert_eq!(f.front_weight(1.0 + 2.0 * 2.0 * t, t).unwrap().value, 1.0);
        assert_eq!(f.front_weight(1.0 + 2.0 * t, t).unwrap().value, 0.0);
        for i in 0..400 {
            let x = i as f64 * 0.1 - 5.0;
            let j = f.jet(x, t);
            assert!(j.dx >= 0.0 && j.dt <= 0.0);
            assert!((fd(|y| f.jet(x, y).value, t, 1e-4) - j.dt).abs() < 1e-8);
            assert!((fd(|y| f.jet(y, t).value, x, 1e-4) - j.dx).abs() < 1e-8);
            assert!((fd(|y| f.jet(y, t).dx, x, 1e-4) - j.dxx).abs() < 1e-8);
            assert!((fd(|y| f.jet(y, t).dxx, x, 1e-4) - j.dxxx).abs() < 1e-7);
        }
        assert!(FrontSpec::right(0.0, 1.0).is_err());
        assert!(f.front_weight(1.0, 0.0).is_err());
    }

    #[test]
    fn left_front() {
        assert!(FrontSpec::left(1.0, 1.0, 0.0).is_err());
        let f = FrontSpec::left(1.0, 0.5, 0.3).unwrap();
        let t = 4.0;
        let (mu, _) = f.scale(t);
        assert_eq!(f.jet(-1.0 - 2.0 * mu, t).value, 1.0);
        assert_eq!(f.jet(-1.0 - mu, t).value, 0.0);
        for i in 0..400 {
            let x = -40.0 + i as f64 * 0.1;
            let j = f.jet(x, t);
            assert!(j.dx <= 0.0 && j.dt <= 0.0);
            assert!((fd(|y| f.jet(x, y).value, t, 1e-4) - j.dt).abs() < 1e-8);
            assert!((fd(|y| f.jet(y, t).value, x, 1e-4) - j.dx).abs() < 1e-8);
        }
        assert!(f.front_weight(0.0, 1.0).is_err());
    }

    #[test]
    fn tanh_and_constant() {
        let w = TanhStep {
            center: 1.0,
            width: 2.0,
            speed: 0.5,
        };
        for &(x, t) in &[(0.0, 0.0), (3.0, 1.0), (-2.0, 4.0)] {
            let j = w.jet(x, t);
            assert!((fd(|y| w.jet(y, t).value, x, 1e-4) - j.dx).abs() < 1e-9);
            assert!((fd(|y| w.jet(y, t).dx, x, 1e-4) - j.dxx).abs() < 1e-9);
            assert!((fd(|y| w.jet(y, t).dxx, x, 1e-4) - j.dxxx).abs() < 1e-9);
            assert!((fd(|s| w.jet(x, s).value, t, 1e-4) - j.dt).abs() < 1e-9);
        }
        let c = Constant(1.0).jet(3.0, 2.0);
        assert_eq!((c.value, c.dx, c.dt), (1.0, 0.0, 0.0));
        let g = Grid::new(10.0, 16).unwrap();
        let s = sample_weight(&w, &g, 0.0).unwrap();
        assert_relative_eq!(s.value.samples()[8], w.jet(0.0, 0.0).value);
    }
}
