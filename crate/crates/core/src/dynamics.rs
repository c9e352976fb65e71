//! Right-hand side, time stepping, conserved quantities and exact solutions for
//! `u_t = H u_xx - u^k u_x`.
//!
//! Time integration is the integrating-factor RK4 scheme: the linear part has the
//! purely imaginary symbol `i xi |xi|`, so it is propagated exactly by
//! `exp(i xi |xi| dt)` in Fourier space and RK4 only sees the nonlinearity.

use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::snapshot;
use crate::spectral::{
    dealias, dealias_mask, derivative, derivative_symbol, hilbert_symbol, norm, seminorm_hs, Field,
    Grid,
};

/// Samples above this magnitude abort the run.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;
/// Largest admissible ratio of de-aliased-band content to the spectral peak.
pub const SPECTRAL_TAIL_LIMIT: f64 = 1e-8;
/// Largest admissible share of `I_2` estimated to lie outside the box.
pub const BOX_TAIL_LIMIT: f64 = 1e-4;

/// Nonlinearity power `k` of `u^k u_x`; `k = 1` is Benjamin-Ono.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpec {
    power: u32,
}

impl ModelSpec {
    pub fn new(power: u32) -> Result<Self> {
        if power == 0 {
            return Err(invalid("nonlinearity power k must be >= 1"));
        }
        Ok(ModelSpec { power })
    }

    pub fn bo() -> Self {
        ModelSpec { power: 1 }
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    /// `2/(k+2)`: keeps the degree-(k+1) product alias free.
    pub fn dealias_fraction(&self) -> f64 {
        2.0 / (self.power as f64 + 2.0)
    }
}

/// Initial-condition recipe.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Zero,
    Soliton { speed: f64, center: f64 },
    Gaussian { amplitude: f64, width: f64, center: f64 },
    Sum(Vec<InitialCondition>),
    File(PathBuf),
}

impl InitialCondition {
    pub fn build(&self, grid: &Arc<Grid>) -> Result<Field> {
        match self {
            InitialCondition::Zero => Ok(Field::zeros(grid)),
            InitialCondition::Soliton { speed, center } => soliton(grid, *speed, *center),
            InitialCondition::Gaussian {
                amplitude,
                width,
                center,
            } => {
                if !(*width > 0.0) {
                    return Err(invalid(format!("gaussian width must be positive, got {width}")));
                }
                Field::from_fn(grid, |x| {
                    let y = grid.wrap(x - center) / width;
                    amplitude * (-y * y).exp()
                })
            }
            InitialCondition::Sum(parts) => {
                let mut acc = Field::zeros(grid);
                for p in parts {
                    acc = acc.add(&p.build(grid)?)?;
                }
                Ok(acc)
            }
            InitialCondition::File(path) => {
                let (field, _) = snapshot::load(path, Some(grid))?;
                if **field.grid() != **grid {
                    return Err(invalid(format!(
                        "snapshot {} does not match the configured grid",
                        path.display()
                    )));
                }
                Ok(field)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub grid: Arc<Grid>,
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Store a snapshot every `cadence` steps.
    pub cadence: usize,
    pub dealias: f64,
    pub initial: InitialCondition,
}

impl RunConfig {
    pub fn new(
        model: ModelSpec,
        grid: Arc<Grid>,
        dt: f64,
        t_end: f64,
        initial: InitialCondition,
    ) -> Self {
        RunConfig {
            model,
            grid,
            dt,
            t_start: 0.0,
            t_end,
            cadence: 1,
            dealias: model.dealias_fraction(),
            initial,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_start >= 0.0 && self.t_end > self.t_start && self.t_end.is_finite()) {
            return Err(invalid(format!(
                "need t_end > t_start >= 0, got [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        if self.cadence == 0 {
            return Err(invalid("snapshot cadence must be >= 1"));
        }
        if !(self.dealias > 0.0 && self.dealias <= 1.0) {
            return Err(invalid(format!(
                "dealias fraction must be in (0, 1], got {}",
                self.dealias
            )));
        }
        self.step_count().map(|_| ())
    }

    /// Number of steps; `(t_end - t_start)/dt` must be an integer.
    pub fn step_count(&self) -> Result<usize> {
        let span = self.t_end - self.t_start;
        let steps = (span / self.dt).round();
        if steps < 1.0 || (steps * self.dt - span).abs() > 1e-9 * span.max(1.0) {
            return Err(invalid(format!(
                "time span {span} is not an integer multiple of dt = {}",
                self.dt
            )));
        }
        Ok(steps as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Invariants {
    pub mass: f64,
    pub l2: f64,
    pub energy: f64,
}

/// `I_1 = int u`, `I_2 = int u^2`, `I_3 = int (1/2 |D^{1/2} u|^2 - u^{k+2}/((k+1)(k+2)))`.
///
/// The sign of the potential term is the one conserved by `u_t = H u_xx - u^k u_x`.
pub fn invariants(u: &Field, model: ModelSpec) -> Invariants {
    let k = model.power() as i32;
    let dx = u.grid().dx();
    let l2: f64 = dx * u.samples().iter().map(|v| v * v).sum::<f64>();
    let potential: f64 = dx * u.samples().iter().map(|v| v.powi(k + 2)).sum::<f64>()
        / (((k + 1) * (k + 2)) as f64);
    let half = seminorm_hs(u, 0.5).expect("order 1/2 is valid");
    Invariants {
        mass: u.integral(),
        l2,
        energy: 0.5 * half * half - potential,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    pub t: f64,
    pub invariants: Invariants,
}

/// Conserved quantities sampled at the snapshot times.
#[derive(Debug, Clone, Default)]
pub struct ConservationLedger {
    pub rows: Vec<LedgerRow>,
}

impl ConservationLedger {
    fn drift(&self, pick: impl Fn(&Invariants) -> f64) -> f64 {
        let Some(first) = self.rows.first() else {
            return 0.0;
        };
        let reference = pick(&first.invariants);
        let scale = if reference.abs() > 0.0 { reference.abs() } else { 1.0 };
        self.rows
            .iter()
            .map(|r| (pick(&r.invariants) - reference).abs() / scale)
            .fold(0.0, f64::max)
    }

    /// Max relative drift of `I_1` (absolute when `I_1(t_0) = 0`).
    pub fn mass_drift(&self) -> f64 {
        self.drift(|i| i.mass)
    }

    pub fn l2_drift(&self) -> f64 {
        self.drift(|i| i.l2)
    }

    pub fn energy_drift(&self) -> f64 {
        self.drift(|i| i.energy)
    }
}

/// `H u_xx - dealias(u^k u_x)`.
pub fn rhs(u: &Field, model: ModelSpec) -> Result<Field> {
    let grid = Arc::clone(u.grid());
    let linear = crate::spectral::apply_multiplier(u, |j| {
        hilbert_symbol(&grid, j) * derivative_symbol(&grid, j, 2)
    });
    let k = model.power() as i32;
    let ux = derivative(u, 1)?;
    let product = u.zip_with(&ux, |a, b| a.powi(k) * b)?;
    linear.sub(&dealias(&product, model.dealias_fraction())?)
}

/// Integrating-factor RK4 stepper working on spectra in place.
pub struct Stepper {
    grid: Arc<Grid>,
    power: i32,
    dt: f64,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    deriv: Vec<Complex64>,
    mask: Vec<bool>,
    nonlinear: bool,
    scratch: [Vec<Complex64>; 7],
}

impl Stepper {
    pub fn new(grid: &Arc<Grid>, model: ModelSpec, dt: f64, dealias_fraction: f64) -> Result<Self> {
        if !(dt.is_finite() && dt != 0.0) {
            return Err(invalid(format!("dt must be finite and nonzero, got {dt}")));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(invalid(format!(
                "dealias fraction must be in (0, 1], got {dealias_fraction}"
            )));
        }
        let n = grid.points();
        let symbol: Vec<Complex64> = (0..n)
            .map(|j| hilbert_symbol(grid, j) * derivative_symbol(grid, j, 2))
            .collect();
        let half = symbol.iter().map(|s| (s * (0.5 * dt)).exp()).collect();
        let full = symbol.iter().map(|s| (s * dt).exp()).collect();
        let deriv = (0..n).map(|j| derivative_symbol(grid, j, 1)).collect();
        Ok(Stepper {
            grid: Arc::clone(grid),
            power: model.power() as i32,
            dt,
            half,
            full,
            deriv,
            mask: dealias_mask(grid, dealias_fraction),
            nonlinear: true,
            scratch: std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); n]),
        })
    }

    /// Disables the nonlinear term (pure linear propagation).
    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `-dealias(u^k u_x)` in spectral form, written to `out`.
    fn nonlinear_term(
        &mut self,
        v: &[Complex64],
        out: &mut [Complex64],
        watch: Option<f64>,
    ) -> Result<()> {
        if !self.nonlinear {
            out.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            return Ok(());
        }
        let [u, ux, ..] = &mut self.scratch;
        u.copy_from_slice(v);
        for ((d, s), c) in ux.iter_mut().zip(v).zip(&self.deriv) {
            *d = s * c;
        }
        self.grid.inverse_in_place(u);
        self.grid.inverse_in_place(ux);
        if let Some(t) = watch {
            let max_abs = u.iter().fold(0.0f64, |m, c| {
                if c.re.is_finite() {
                    m.max(c.re.abs())
                } else {
                    f64::INFINITY
                }
            });
            if max_abs > BLOW_UP_THRESHOLD {
                return Err(Error::BlowUp { t, max_abs });
            }
        }
        for (a, b) in u.iter_mut().zip(ux.iter()) {
            *a = Complex64::new(a.re.powi(self.power) * b.re, 0.0);
        }
        self.grid.forward_in_place(u);
        for ((o, w), keep) in out.iter_mut().zip(u.iter()).zip(&self.mask) {
            *o = if *keep { -w } else { Complex64::new(0.0, 0.0) };
        }
        Ok(())
    }

    /// Advances the spectrum `v` by one step starting at time `t`.
    pub fn advance(&mut self, v: &mut [Complex64], t: f64) -> Result<()> {
        let n = v.len();
        assert_eq!(n, self.grid.points());
        let dt = self.dt;
        let mut k1 = std::mem::take(&mut self.scratch[2]);
        let mut k2 = std::mem::take(&mut self.scratch[3]);
        let mut k3 = std::mem::take(&mut self.scratch[4]);
        let mut k4 = std::mem::take(&mut self.scratch[5]);
        let mut tmp = std::mem::take(&mut self.scratch[6]);

        let result: Result<()> = (|| {
            self.nonlinear_term(v, &mut k1, Some(t))?;
            for j in 0..n {
                tmp[j] = self.half[j] * (v[j] + 0.5 * dt * k1[j]);
            }
            self.nonlinear_term(&tmp, &mut k2, None)?;
            for j in 0..n {
                tmp[j] = self.half[j] * v[j] + 0.5 * dt * k2[j];
            }
            self.nonlinear_term(&tmp, &mut k3, None)?;
            for j in 0..n {
                tmp[j] = self.full[j] * v[j] + dt * self.half[j] * k3[j];
            }
            self.nonlinear_term(&tmp, &mut k4, None)?;
            for j in 0..n {
                v[j] = self.full[j] * v[j]
                    + dt / 6.0
                        * (self.full[j] * k1[j] + 2.0 * self.half[j] * (k2[j] + k3[j]) + k4[j]);
            }
            Ok(())
        })();

        self.scratch[2] = k1;
        self.scratch[3] = k2;
        self.scratch[4] = k3;
        self.scratch[5] = k4;
        self.scratch[6] = tmp;
        result?;

        if v.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::BlowUp {
                t: t + dt,
                max_abs: f64::INFINITY,
            });
        }
        Ok(())
    }

    /// One step applied to a field.
    pub fn step_field(&mut self, u: &Field, t: f64) -> Result<Field> {
        let mut v = u.spectrum().to_vec();
        self.advance(&mut v, t)?;
        finish_field(&self.grid, v, t + self.dt)
    }
}

fn finish_field(grid: &Arc<Grid>, v: Vec<Complex64>, t: f64) -> Result<Field> {
    let field = Field::from_spectrum(grid, v);
    let max_abs = field.max_abs();
    if !max_abs.is_finite() || max_abs > BLOW_UP_THRESHOLD {
        return Err(Error::BlowUp { t, max_abs });
    }
    Ok(field)
}

/// One integrating-factor RK4 step with the model's default de-aliasing.
pub fn step(u: &Field, dt: f64, model: ModelSpec) -> Result<Field> {
    Stepper::new(u.grid(), model, dt, model.dealias_fraction())?.step_field(u, 0.0)
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub field: Field,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: RunConfig,
    pub snapshots: Vec<Snapshot>,
    pub ledger: ConservationLedger,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectories hold at least one snapshot")
    }

    /// Snapshot closest to time `t`.
    pub fn nearest(&self, t: f64) -> &Snapshot {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .expect("trajectories hold at least one snapshot")
    }

    /// Assembles a trajectory from stored snapshots.
    pub fn from_snapshots(config: RunConfig, snapshots: Vec<Snapshot>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(invalid("trajectory needs at least one snapshot"));
        }
        if snapshots.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(invalid("snapshot times must be strictly increasing"));
        }
        let ledger = ConservationLedger {
            rows: snapshots
                .iter()
                .map(|s| LedgerRow {
                    t: s.t,
                    invariants: invariants(&s.field, config.model),
                })
                .collect(),
        };
        Ok(Trajectory {
            config,
            snapshots,
            ledger,
        })
    }
}

/// Rejects data whose spectrum reaches into the de-aliased band or whose
/// algebraic tail leaves too much of `I_2` outside the box.
pub fn check_resolution(u: &Field, dealias_fraction: f64) -> Result<()> {
    let spectrum = u.spectrum();
    let peak = spectrum.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    if peak == 0.0 {
        return Ok(());
    }
    let mask = dealias_mask(u.grid(), dealias_fraction);
    let tail = spectrum
        .iter()
        .zip(&mask)
        .filter(|(_, keep)| !**keep)
        .fold(0.0f64, |m, (c, _)| m.max(c.norm()));
    if tail / peak >= SPECTRAL_TAIL_LIMIT {
        return Err(Error::UnderResolved(format!(
            "spectral tail {:.3e} of peak exceeds {SPECTRAL_TAIL_LIMIT:e}",
            tail / peak
        )));
    }
    // Assume a 1/x^2 tail past the edge: int_R^inf (e R^2/x^2)^2 dx = e^2 R / 3 per side.
    let samples = u.samples();
    let edge = samples[0].abs().max(samples[samples.len() - 1].abs());
    let radius = 0.5 * u.grid().length();
    let outside = 2.0 * edge * edge * radius / 3.0;
    let l2 = norm(u, 2.0)?.powi(2);
    if outside >= BOX_TAIL_LIMIT * l2 {
        return Err(Error::UnderResolved(format!(
            "estimated mass outside the box {:.3e} of I2 exceeds {BOX_TAIL_LIMIT:e}; enlarge L",
            outside / l2
        )));
    }
    Ok(())
}

/// Integrates `config`, storing snapshots every `cadence` steps and at `t_end`.
pub fn run(config: &RunConfig) -> Result<Trajectory> {
    config.validate()?;
    let grid = Arc::clone(&config.grid);
    let u0 = config.initial.build(&grid)?;
    check_resolution(&u0, config.dealias)?;
    let steps = config.step_count()?;
    let mut stepper = Stepper::new(&grid, config.model, config.dt, config.dealias)?;

    let mut v = u0.spectrum().to_vec();
    let mut snapshots = vec![Snapshot {
        t: config.t_start,
        field: u0,
    }];
    for i in 1..=steps {
        let t_prev = config.t_start + (i - 1) as f64 * config.dt;
        stepper.advance(&mut v, t_prev)?;
        if i % config.cadence == 0 || i == steps {
            let t = config.t_start + i as f64 * config.dt;
            let field = finish_field(&grid, v.clone(), t)?;
            snapshots.push(Snapshot { t, field });
        }
    }
    Trajectory::from_snapshots(config.clone(), snapshots)
}

/// `c * phi(c (x - x0))` with `phi(x) = 4/(1+x^2)`, centered on the nearest periodic image.
pub fn soliton(grid: &Arc<Grid>, speed: f64, center: f64) -> Result<Field> {
    if !(speed.is_finite() && speed > 0.0) {
        return Err(invalid(format!("soliton speed must be positive, got {speed}")));
    }
    Field::from_fn(grid, |x| {
        let y = speed * grid.wrap(x - center);
        speed * 4.0 / (1.0 + y * y)
    })
}

/// `lambda^{1/k} u(lambda x)`, with `u` taken as zero outside the box.
pub fn rescale(u: &Field, lambda: f64, model: ModelSpec) -> Result<Field> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid(format!("scaling factor must be positive, got {lambda}")));
    }
    if lambda == 1.0 {
        return Ok(u.clone());
    }
    let grid = u.grid();
    let amp = lambda.powf(1.0 / model.power() as f64);
    let half = 0.5 * grid.length();
    let points: Vec<f64> = grid.xs().map(|x| lambda * x).collect();
    let values = crate::spectral::trig_interpolate(u, &points);
    let samples = points
        .iter()
        .zip(values)
        .map(|(&y, v)| if y >= -half && y < half { amp * v } else { 0.0 })
        .collect();
    Field::from_samples(grid, samples)
}
