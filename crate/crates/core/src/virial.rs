//! Weighted functionals, regional masses, and the term-by-term virial identity.
//!
//! All integrals are grid quadratures. Regional masses over literal intervals
//! integrate the piecewise-linear interpolant of the integrand, so partial cells
//! at the interval ends are counted exactly.

use std::sync::Arc;

use crate::dynamics::{invariants, ModelSpec, Trajectory};
use crate::error::{invalid, Result};
use crate::spectral::{commutator_half, derivative, frac_deriv, hilbert, norm, Field, Grid};
use crate::weights::{
    make_weight_profile, sample_weight, schedules, FrontSpec, ScheduleParams, SpaceTimeWeight,
    WeightProfile,
};

/// Default exponent standing in for "just below 2/3" in the omega region.
pub const OMEGA_INNER_EXPONENT: f64 = 0.6;
/// Earliest time used by the decay monitors.
pub const DECAY_START: f64 = 10.0;

/// `int_a^b g` for the piecewise-linear interpolant of periodic samples `g`.
///
/// `[a, b]` must lie in `[-L/2, L/2]`.
pub fn interval_integral(grid: &Grid, values: &[f64], a: f64, b: f64) -> Result<f64> {
    let (lo, hi) = (grid.x_min(), grid.x_min() + grid.length());
    let slack = 1e-12 * grid.length();
    if !(a >= lo - slack && b <= hi + slack) {
        return Err(invalid(format!(
            "interval [{a}, {b}] leaves the box [{lo}, {hi}]"
        )));
    }
    if b <= a {
        return Ok(0.0);
    }
    let n = grid.points();
    let dx = grid.dx();
    let first = (((a - lo) / dx).floor().max(0.0)) as usize;
    let last = (((b - lo) / dx).ceil() as usize).min(n);
    let mut total = 0.0;
    for cell in first..last {
        let x0 = lo + cell as f64 * dx;
        let s0 = ((a - x0) / dx).clamp(0.0, 1.0);
        let s1 = ((b - x0) / dx).clamp(0.0, 1.0);
        if s1 <= s0 {
            continue;
        }
        let v0 = values[cell];
        let v1 = values[(cell + 1) % n];
        total += dx * (v0 * (s1 - s0) + 0.5 * (v1 - v0) * (s1 * s1 - s0 * s0));
    }
    Ok(total)
}

/// Clips `[a, b]` to the box; `None` when nothing is left.
fn clip(grid: &Grid, a: f64, b: f64) -> Option<(f64, f64)> {
    let lo = grid.x_min();
    let hi = lo + grid.length();
    let (a, b) = (a.max(lo), b.min(hi));
    (b > a).then_some((a, b))
}

fn powered(u: &Field, p: f64) -> Vec<f64> {
    u.samples().iter().map(|v| v.abs().powf(p)).collect()
}

fn squares(u: &Field) -> Vec<f64> {
    u.samples().iter().map(|v| v * v).collect()
}

/// `int_{|x - sign t^m| < t^b} u^2`.
pub fn regional_mass(u: &Field, t: f64, b: f64, m: f64, sign: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("regional mass needs t > 0, got {t}")));
    }
    let center = sign * t.powf(m);
    let radius = t.powf(b);
    interval_integral(u.grid(), &squares(u), center - radius, center + radius)
}

/// `int_{|x| < t^b} (u^2 + |D^{1/2} u|^2)`.
pub fn regional_half_energy(u: &Field, t: f64, b: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("regional energy needs t > 0, got {t}")));
    }
    let half = frac_deriv(u, 0.5)?;
    let density: Vec<f64> = u
        .samples()
        .iter()
        .zip(half.samples())
        .map(|(a, h)| a * a + h * h)
        .collect();
    let radius = t.powf(b);
    interval_integral(u.grid(), &density, -radius, radius)
}

/// `int |u|^p` beyond a front: `x >= edge` for the right front, `x <= edge` for
/// the left. The half-line is clipped to the box.
pub fn front_mass(u: &Field, t: f64, spec: &FrontSpec, p: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(invalid(format!("front mass exponent must be >= 2, got {p}")));
    }
    if !(t > spec.min_time()) {
        return Err(invalid(format!("front mass needs t > {}, got {t}", spec.min_time())));
    }
    let grid = u.grid();
    let edge = spec.edge(t);
    let range = match spec {
        FrontSpec::Right { .. } => clip(grid, edge, f64::INFINITY),
        FrontSpec::Left { .. } => clip(grid, f64::NEG_INFINITY, edge),
    };
    match range {
        Some((a, b)) => interval_integral(grid, &powered(u, p), a, b),
        None => Ok(0.0),
    }
}

/// Mass over `(-c t log^{1+gamma} t, -c t^e) U (c t^e, C0 t)` with `e = inner_exponent`.
pub fn omega_mass(
    u: &Field,
    t: f64,
    c: f64,
    gamma: f64,
    c0: f64,
    inner_exponent: f64,
) -> Result<f64> {
    if !(t > 1.0 && c > 0.0 && gamma > 0.0 && c0 > 0.0) {
        return Err(invalid("omega region needs t > 1 and positive c, gamma, C0"));
    }
    if !(inner_exponent > 0.0 && inner_exponent < 2.0 / 3.0) {
        return Err(invalid(format!(
            "inner exponent must lie in (0, 2/3), got {inner_exponent}"
        )));
    }
    let grid = u.grid();
    let sq = squares(u);
    let inner = c * t.powf(inner_exponent);
    let outer_left = c * t * t.ln().powf(1.0 + gamma);
    let mut total = 0.0;
    for (a, b) in [(-outer_left, -inner), (inner, c0 * t)] {
        if let Some((a, b)) = clip(grid, a, b) {
            total += interval_integral(grid, &sq, a, b)?;
        }
    }
    Ok(total)
}

/// Descriptor of a monitored region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Ball { b: f64, m: f64, sign: f64 },
    RightFront { c0: f64 },
    LeftFront { c1: f64, eta: f64 },
    Omega { c: f64, gamma: f64, c0: f64 },
}

/// `int u^2` over `region` at time `t`.
pub fn region_mass(u: &Field, t: f64, region: &Region) -> Result<f64> {
    match *region {
        Region::Ball { b, m, sign } => regional_mass(u, t, b, m, sign),
        Region::RightFront { c0 } => front_mass(u, t, &FrontSpec::right(c0, 0.0)?, 2.0),
        Region::LeftFront { c1, eta } => front_mass(u, t, &FrontSpec::left(0.0, c1, eta)?, 2.0),
        Region::Omega { c, gamma, c0 } => omega_mass(u, t, c, gamma, c0, OMEGA_INNER_EXPONENT),
    }
}

/// The weighted functionals `I`, `I_rho` and `J` for fixed exponents and scalings.
#[derive(Debug, Clone)]
pub struct Functionals {
    profile: WeightProfile,
    params: ScheduleParams,
    sigma: f64,
    delta: f64,
}

impl Functionals {
    pub fn new(params: ScheduleParams, sigma: f64, delta: f64) -> Result<Self> {
        params.validate()?;
        if !(sigma > 0.0 && delta > 0.0 && sigma.is_finite() && delta.is_finite()) {
            return Err(invalid(format!(
                "sigma and delta must be positive, got {sigma}, {delta}"
            )));
        }
        Ok(Functionals {
            profile: make_weight_profile()?,
            params,
            sigma,
            delta,
        })
    }

    pub fn params(&self) -> &ScheduleParams {
        &self.params
    }

    pub fn profile(&self) -> &WeightProfile {
        &self.profile
    }

    fn weighted(&self, u: &Field, t: f64, shift: f64, squared: bool) -> Result<f64> {
        let s = schedules(t, &self.params)?;
        let scale_q = s.mu1.powf(self.params.q);
        let p = &self.profile;
        let total: f64 = u
            .grid()
            .xs()
            .zip(u.samples())
            .map(|(x, &v)| {
                let y = x - shift;
                let psi = p.psi_sigma(y / s.mu1, self.sigma);
                if squared {
                    v * v * psi
                } else {
                    v * psi * p.phi_delta(y / scale_q, self.delta)
                }
            })
            .sum();
        Ok(total * u.grid().dx() / s.mu)
    }

    /// `(1/mu) int u psi_sigma(x/mu1) phi_delta(x/mu1^q)`.
    pub fn functional_i(&self, u: &Field, t: f64) -> Result<f64> {
        self.weighted(u, t, 0.0, false)
    }

    /// `functional_i` with both weight arguments shifted by `rho(t)`.
    pub fn functional_i_rho(&self, u: &Field, t: f64) -> Result<f64> {
        let rho = schedules(t, &self.params)?.rho;
        self.weighted(u, t, rho, false)
    }

    /// `(1/mu) int u^2 psi_sigma(x/mu1)`.
    pub fn functional_j(&self, u: &Field, t: f64) -> Result<f64> {
        self.weighted(u, t, 0.0, true)
    }

    /// Cauchy-Schwarz bound `(mu1^{q/2}/mu) ||u||_2 ||psi_sigma||_inf ||phi_delta||_2`.
    pub fn functional_i_bound(&self, u: &Field, t: f64) -> Result<f64> {
        let s = schedules(t, &self.params)?;
        let psi_sup = self.sigma * self.profile.psi_sup();
        let phi_l2 = self.delta.powf(1.5) * self.profile.phi_norm_l2();
        Ok(s.mu1.powf(0.5 * self.params.q) / s.mu * norm(u, 2.0)? * psi_sup * phi_l2)
    }
}

/// Partial integrals `int_{t_0}^{t} M(s) / (s log s) ds` with their reference.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulatorSeries {
    pub times: Vec<f64>,
    pub masses: Vec<f64>,
    pub partial: Vec<f64>,
    /// `M(t_0) (log log t - log log t_0)`: the series for a mass frozen at its initial value.
    pub reference: Vec<f64>,
}

impl AccumulatorSeries {
    /// Trapezoid accumulation over `times` (all `> 1`, increasing).
    pub fn from_masses(times: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if times.len() != masses.len() || times.is_empty() {
            return Err(invalid("need matching, nonempty time and mass series"));
        }
        if times[0] <= 1.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("times must exceed 1 and increase strictly"));
        }
        let density = |i: usize| masses[i] / (times[i] * times[i].ln());
        let mut partial = vec![0.0];
        for i in 1..times.len() {
            let step = 0.5 * (density(i - 1) + density(i)) * (times[i] - times[i - 1]);
            partial.push(partial[i - 1] + step);
        }
        let ll0 = times[0].ln().ln();
        let reference = times.iter().map(|t| masses[0] * (t.ln().ln() - ll0)).collect();
        Ok(AccumulatorSeries {
            times,
            masses,
            partial,
            reference,
        })
    }

    /// `d partial / d log log t` over the last interval.
    pub fn final_slope(&self) -> f64 {
        let n = self.times.len();
        if n < 2 {
            return 0.0;
        }
        let ll = |t: f64| t.ln().ln();
        (self.partial[n - 1] - self.partial[n - 2]) / (ll(self.times[n - 1]) - ll(self.times[n - 2]))
    }

    /// Slope of the frozen-mass reference, `M(t_0)`.
    pub fn reference_slope(&self) -> f64 {
        self.masses[0]
    }
}

/// Decay accumulator over the snapshots with `t >= 10`, ball `|x| < t^b`.
pub fn decay_accumulator(traj: &Trajectory, b: f64) -> Result<AccumulatorSeries> {
    let (times, masses): (Vec<f64>, Vec<f64>) = traj
        .snapshots
        .iter()
        .filter(|s| s.t >= DECAY_START)
        .map(|s| Ok((s.t, regional_mass(&s.field, s.t, b, 0.0, 1.0)?)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    AccumulatorSeries::from_masses(times, masses)
}

/// The five right-hand terms of the weighted-mass identity.
///
/// `d/dt int u^2 phi = A1 + A2 + A3 + A4 + A5` with
/// `A1 = int u_x [H; phi] u_x`, `A2 = -2 int (D^{1/2} u)^2 phi_x`,
/// `A3 = -2 int u D^{1/2}[D^{1/2}; phi_x] u`, `A4 = 2/(k+2) int u^{k+2} phi_x`,
/// `A5 = int u^2 phi_t`.
pub fn virial_terms(
    u: &Field,
    t: f64,
    weight: &dyn SpaceTimeWeight,
    model: ModelSpec,
) -> Result<[f64; 5]> {
    let grid = Arc::clone(u.grid());
    let w = sample_weight(weight, &grid, t)?;
    let k = model.power() as i32;
    let ux = derivative(u, 1)?;
    // [H; phi] u_x without a further derivative: phi need not be periodic.
    let comm = hilbert(&w.value.mul(&ux)?).sub(&w.value.mul(&hilbert(&ux))?)?;
    let a1 = ux.inner(&comm)?;
    let half = frac_deriv(u, 0.5)?;
    let a2 = -2.0 * half.mul(&half)?.inner(&w.dx)?;
    let a3 = -2.0 * u.inner(&commutator_half(&w.dx, u)?)?;
    let dx = grid.dx();
    let a4 = 2.0 / (k + 2) as f64
        * dx
        * u.samples()
            .iter()
            .zip(w.dx.samples())
            .map(|(v, p)| v.powi(k + 2) * p)
            .sum::<f64>();
    let a5 = u.mul(u)?.inner(&w.dt)?;
    Ok([a1, a2, a3, a4, a5])
}

/// `int u^2 phi(., t)`.
pub fn weighted_mass(u: &Field, t: f64, weight: &dyn SpaceTimeWeight) -> Result<f64> {
    let w = sample_weight(weight, u.grid(), t)?;
    u.mul(u)?.inner(&w.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirialBreakdown {
    pub t: f64,
    /// `A1 ..= A5`.
    pub terms: [f64; 5],
    /// Centered fourth-order difference of `int u^2 phi`.
    pub lhs_fd: f64,
    pub residual: f64,
}

impl VirialBreakdown {
    pub fn rhs(&self) -> f64 {
        self.terms.iter().sum()
    }

    pub fn max_term(&self) -> f64 {
        self.terms.iter().fold(0.0f64, |m, a| m.max(a.abs()))
    }

    /// `|residual| / max |A_i|`; the raw residual when every term vanishes.
    pub fn relative_residual(&self) -> f64 {
        let scale = self.max_term();
        if scale > 0.0 {
            self.residual.abs() / scale
        } else {
            self.residual.abs()
        }
    }
}

/// Identity check at snapshot `index`, which needs two neighbours on each side
/// at uniform spacing.
pub fn virial_breakdown(
    traj: &Trajectory,
    index: usize,
    weight: &dyn SpaceTimeWeight,
) -> Result<VirialBreakdown> {
    let snaps = &traj.snapshots;
    if index < 2 || index + 2 >= snaps.len() {
        return Err(invalid(format!(
            "snapshot {index} lacks two neighbours on each side ({} stored)",
            snaps.len()
        )));
    }
    let h = snaps[index + 1].t - snaps[index].t;
    for j in index - 2..index + 2 {
        let gap = snaps[j + 1].t - snaps[j].t;
        if (gap - h).abs() > 1e-9 * h {
            return Err(invalid(format!(
                "non-uniform snapshot spacing near index {index}: {gap} vs {h}"
            )));
        }
    }
    let f = |j: usize| weighted_mass(&snaps[j].field, snaps[j].t, weight);
    let lhs_fd = (f(index - 2)? - 8.0 * f(index - 1)? + 8.0 * f(index + 1)? - f(index + 2)?)
        / (12.0 * h);
    let s = &snaps[index];
    let terms = virial_terms(&s.field, s.t, weight, traj.config.model)?;
    let rhs: f64 = terms.iter().sum();
    Ok(VirialBreakdown {
        t: s.t,
        terms,
        lhs_fd,
        residual: lhs_fd - rhs,
    })
}

/// Every breakdown the trajectory supports.
pub fn virial_series(traj: &Trajectory, weight: &dyn SpaceTimeWeight) -> Result<Vec<VirialBreakdown>> {
    (2..traj.len().saturating_sub(2))
        .map(|i| virial_breakdown(traj, i, weight))
        .collect()
}

/// One row of the decay monitors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRecord {
    pub t: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub mass_ball: f64,
    pub half_energy_ball: f64,
    pub func_i: f64,
    pub func_i_rho: f64,
    pub func_j: f64,
    pub accumulator: f64,
    pub mass_right: f64,
    pub mass_left: f64,
    pub linf: f64,
}

impl DecayRecord {
    pub const HEADER: [&'static str; 13] = [
        "t",
        "I1",
        "I2",
        "I3",
        "mass_ball",
        "half_energy_ball",
        "func_I",
        "func_I_rho",
        "func_J",
        "lemma34_partial",
        "mass_right",
        "mass_left",
        "linf",
    ];

    pub fn values(&self) -> [f64; 13] {
        [
            self.t,
            self.i1,
            self.i2,
            self.i3,
            self.mass_ball,
            self.half_energy_ball,
            self.func_i,
            self.func_i_rho,
            self.func_j,
            self.accumulator,
            self.mass_right,
            self.mass_left,
            self.linf,
        ]
    }
}

/// Front settings for the decay monitors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFronts {
    pub right: FrontSpec,
    pub left: FrontSpec,
}

/// Decay records for every snapshot with `t >= start`, `start >= min_time`.
pub fn decay_records(
    traj: &Trajectory,
    functionals: &Functionals,
    fronts: &DecayFronts,
    start: f64,
) -> Result<Vec<DecayRecord>> {
    let params = *functionals.params();
    let start = start.max(params.min_time());
    let picked: Vec<_> = traj.snapshots.iter().filter(|s| s.t >= start).collect();
    if picked.is_empty() {
        return Err(invalid(format!("no snapshots at or after t = {start}")));
    }
    let masses = picked
        .iter()
        .map(|s| regional_mass(&s.field, s.t, params.b, params.m, params.rho_sign))
        .collect::<Result<Vec<_>>>()?;
    let series = AccumulatorSeries::from_masses(picked.iter().map(|s| s.t).collect(), masses.clone())?;
    picked
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let u = &s.field;
            let inv = invariants(u, traj.config.model);
            Ok(DecayRecord {
                t: s.t,
                i1: inv.mass,
                i2: inv.l2,
                i3: inv.energy,
                mass_ball: masses[i],
                half_energy_ball: regional_half_energy(u, s.t, params.b)?,
                func_i: functionals.functional_i(u, s.t)?,
                func_i_rho: functionals.functional_i_rho(u, s.t)?,
                func_j: functionals.functional_j(u, s.t)?,
                accumulator: series.partial[i],
                mass_right: front_mass(u, s.t, &fronts.right, 2.0)?,
                mass_left: front_mass(u, s.t, &fronts.left, 2.0)?,
                linf: u.max_abs(),
            })
        })
        .collect()
}
