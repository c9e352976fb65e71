//! Fourier-multiplier calculus on a uniform periodic grid.
//!
//! The box is `[-L/2, L/2)` sampled at `x_n = -L/2 + n*dx`. Spectra are
//! stored in FFT order and use the normalization
//!
//! ```text
//! u_hat[j] = (1/N) * sum_n u[n] * exp(-2*pi*i*j*n/N),   u[n] = sum_j u_hat[j] * exp(2*pi*i*j*n/N)
//! ```
//!
//! so that `u` is the trigonometric polynomial `sum_j u_hat[j] e^{i xi_j (x - x_0)}` and
//! Parseval reads `dx * sum |u|^2 = L * sum |u_hat|^2`. Every norm in the crate uses
//! this convention.
//!
//! The Nyquist mode `j = N/2` carries the wavenumber `-pi*N/L`. It has no
//! well-defined sign, so the Hilbert transform and odd-order derivatives send it
//! to zero; even multipliers (`|xi|^s`, even derivatives) keep it.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Uniform periodic grid with cached FFT plans.
pub struct Grid {
    length: f64,
    points: usize,
    dx: f64,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("length", &self.length)
            .field("points", &self.points)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points && self.length == other.length
    }
}

impl Grid {
    /// Builds a grid of `points` samples on a box of length `length`.
    ///
    /// `points` must be a power of two no smaller than 8.
    pub fn new(length: f64, points: usize) -> Result<Arc<Grid>> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "point count must be a power of two >= 8, got {points}"
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(points);
        let inverse = planner.plan_fft_inverse(points);
        let wavenumbers = (0..points)
            .map(|j| 2.0 * PI * signed_index(j, points) as f64 / length)
            .collect();
        Ok(Arc::new(Grid {
            length,
            points,
            dx: length / points as f64,
            wavenumbers,
            forward,
            inverse,
        }))
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Left edge of the box, `-L/2`.
    pub fn x_min(&self) -> f64 {
        -0.5 * self.length
    }

    pub fn x(&self, n: usize) -> f64 {
        self.x_min() + n as f64 * self.dx
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |n| self.x(n))
    }

    /// Wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn nyquist(&self) -> usize {
        self.points / 2
    }

    /// Signed mode number of FFT slot `j`, in `-N/2..N/2`.
    pub fn mode(&self, j: usize) -> i64 {
        signed_index(j, self.points)
    }

    /// Maps `x` onto its periodic image in `[-L/2, L/2)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let l = self.length;
        (x - self.x_min()).rem_euclid(l) + self.x_min()
    }

    /// Normalized forward transform of real samples.
    pub fn forward(&self, samples: &[f64]) -> Vec<Complex64> {
        assert_eq!(samples.len(), self.points);
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.points as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Inverse transform keeping the full complex result.
    pub fn inverse_complex(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(spectrum.len(), self.points);
        let mut buf = spectrum.to_vec();
        self.inverse.process(&mut buf);
        buf
    }

    /// Inverse transform, real part.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<f64> {
        self.inverse_complex(spectrum).into_iter().map(|c| c.re).collect()
    }

    pub(crate) fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
        let scale = 1.0 / self.points as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
    }

    pub(crate) fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
    }
}

fn signed_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Real samples on a [`Grid`] with a lazily computed spectrum.
#[derive(Clone)]
pub struct Field {
    grid: Arc<Grid>,
    samples: Vec<f64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid)
            .field("max_abs", &self.max_abs())
            .finish()
    }
}

impl Field {
    pub fn from_samples(grid: &Arc<Grid>, samples: Vec<f64>) -> Result<Field> {
        if samples.len() != grid.points() {
            return Err(invalid(format!(
                "expected {} samples, got {}",
                grid.points(),
                samples.len()
            )));
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Field {
            grid: Arc::clone(grid),
            samples,
            spectrum: OnceLock::new(),
        })
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Field> {
        Field::from_samples(grid, grid.xs().map(f).collect())
    }

    pub fn zeros(grid: &Arc<Grid>) -> Field {
        Field {
            grid: Arc::clone(grid),
            samples: vec![0.0; grid.points()],
            spectrum: OnceLock::new(),
        }
    }

    /// Builds a field from a spectrum, dropping the (round-off) imaginary part.
    pub fn from_spectrum(grid: &Arc<Grid>, spectrum: Vec<Complex64>) -> Field {
        let samples = grid.inverse(&spectrum);
        Field {
            grid: Arc::clone(grid),
            samples,
            spectrum: OnceLock::new(),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| self.grid.forward(&self.samples))
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Grid quadrature of the samples, `dx * sum u`.
    pub fn integral(&self) -> f64 {
        self.grid.dx() * self.samples.iter().sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        self.integral() / self.grid.length()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: Arc::clone(&self.grid),
            samples: self.samples.iter().map(|&v| f(v)).collect(),
            spectrum: OnceLock::new(),
        }
    }

    pub fn scale(&self, alpha: f64) -> Field {
        self.map(|v| alpha * v)
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &Field, beta: f64) -> Result<Field> {
        self.zip_with(other, |a, b| alpha * a + beta * b)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.combine(1.0, other, -1.0)
    }

    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        same_grid(self, other)?;
        Ok(Field {
            grid: Arc::clone(&self.grid),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            spectrum: OnceLock::new(),
        })
    }

    /// `dx * sum f g`.
    pub fn inner(&self, other: &Field) -> Result<f64> {
        same_grid(self, other)?;
        Ok(self.grid.dx()
            * self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a * b)
                .sum::<f64>())
    }

    /// Largest imaginary part produced by inverting the cached spectrum,
    /// relative to `max |u|`.
    pub fn realness_defect(&self) -> f64 {
        let back = self.grid.inverse_complex(self.spectrum());
        let imag = back.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
        imag / self.max_abs().max(f64::MIN_POSITIVE)
    }
}

pub(crate) fn same_grid(a: &Field, b: &Field) -> Result<()> {
    if Arc::ptr_eq(&a.grid, &b.grid) || *a.grid == *b.grid {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Applies the multiplier `symbol(j)` slot by slot.
pub fn apply_multiplier(f: &Field, symbol: impl Fn(usize) -> Complex64) -> Field {
    let spectrum = f
        .spectrum()
        .iter()
        .enumerate()
        .map(|(j, &c)| c * symbol(j))
        .collect();
    Field::from_spectrum(&f.grid, spectrum)
}

/// Symbol of the Hilbert transform, `-i sgn(xi)`, with the zero and Nyquist
/// modes sent to zero.
pub fn hilbert_symbol(grid: &Grid, j: usize) -> Complex64 {
    if j == 0 || j == grid.nyquist() {
        Complex64::new(0.0, 0.0)
    } else {
        -I * grid.wavenumbers()[j].signum()
    }
}

/// Symbol of `d^n/dx^n`, `(i xi)^n`, with the Nyquist mode dropped for odd `n`.
pub fn derivative_symbol(grid: &Grid, j: usize, n: u32) -> Complex64 {
    if n % 2 == 1 && j == grid.nyquist() {
        return Complex64::new(0.0, 0.0);
    }
    (I * grid.wavenumbers()[j]).powu(n)
}

/// Symbol of `D^s`, `|xi|^s`; `|0|^0 = 1`.
pub fn frac_symbol(grid: &Grid, j: usize, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        grid.wavenumbers()[j].abs().powf(s)
    }
}

pub fn hilbert(f: &Field) -> Field {
    let grid = Arc::clone(f.grid());
    apply_multiplier(f, |j| hilbert_symbol(&grid, j))
}

/// `D^s f` for `s >= 0`.
pub fn frac_deriv(f: &Field, s: f64) -> Result<Field> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(invalid(format!("fractional order must be >= 0, got {s}")));
    }
    let grid = Arc::clone(f.grid());
    Ok(apply_multiplier(f, |j| Complex64::new(frac_symbol(&grid, j, s), 0.0)))
}

/// `d^n f / dx^n` for `n >= 1`.
pub fn derivative(f: &Field, n: u32) -> Result<Field> {
    if n == 0 {
        return Err(invalid("derivative order must be positive"));
    }
    let grid = Arc::clone(f.grid());
    Ok(apply_multiplier(f, |j| derivative_symbol(&grid, j, n)))
}

/// `L^p` norm by grid quadrature, `p` in `[1, inf]`.
pub fn norm(f: &Field, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(invalid(format!("norm exponent must be in [1, inf], got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let dx = f.grid().dx();
    let sum: f64 = if p == 2.0 {
        f.samples().iter().map(|v| v * v).sum()
    } else {
        f.samples().iter().map(|v| v.abs().powf(p)).sum()
    };
    Ok((dx * sum).powf(1.0 / p))
}

/// `||D^s f||_2`, computed from the spectrum via Parseval.
pub fn seminorm_hs(f: &Field, s: f64) -> Result<f64> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(invalid(format!("seminorm order must be >= 0, got {s}")));
    }
    let grid = f.grid();
    let sum: f64 = f
        .spectrum()
        .iter()
        .enumerate()
        .map(|(j, c)| frac_symbol(grid, j, s).powi(2) * c.norm_sqr())
        .sum();
    Ok((grid.length() * sum).sqrt())
}

/// `d^k [H; a] d^m f = d^k ( H(a d^m f) - a H(d^m f) )`.
pub fn commutator_hilbert(a: &Field, f: &Field, k: u32, m: u32) -> Result<Field> {
    if k + m == 0 {
        return Err(invalid("commutator needs k + m >= 1"));
    }
    same_grid(a, f)?;
    let g = if m == 0 { f.clone() } else { derivative(f, m)? };
    let inner = hilbert(&a.mul(&g)?).sub(&a.mul(&hilbert(&g))?)?;
    if k == 0 {
        Ok(inner)
    } else {
        derivative(&inner, k)
    }
}

/// `D^{1/2} [D^{1/2}; a] f = D^{1/2}( D^{1/2}(a f) - a D^{1/2} f )`.
pub fn commutator_half(a: &Field, f: &Field) -> Result<Field> {
    same_grid(a, f)?;
    let inner = frac_deriv(&a.mul(f)?, 0.5)?.sub(&a.mul(&frac_deriv(f, 0.5)?)?)?;
    frac_deriv(&inner, 0.5)
}

/// Zeroes every mode with `|j| > fraction * N/2`.
pub fn dealias(f: &Field, fraction: f64) -> Result<Field> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(invalid(format!("dealias fraction must be in (0, 1], got {fraction}")));
    }
    if fraction == 1.0 {
        return Ok(f.clone());
    }
    let mask = dealias_mask(f.grid(), fraction);
    Ok(apply_multiplier(f, |j| {
        if mask[j] {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// `true` for retained slots.
pub fn dealias_mask(grid: &Grid, fraction: f64) -> Vec<bool> {
    let cutoff = fraction * (grid.points() / 2) as f64;
    (0..grid.points())
        .map(|j| (grid.mode(j).unsigned_abs() as f64) <= cutoff)
        .collect()
}

/// Evaluates the trigonometric interpolant of `f` at arbitrary points
/// (periodically extended).
pub fn trig_interpolate(f: &Field, points: &[f64]) -> Vec<f64> {
    let grid = f.grid();
    let c = f.spectrum();
    let nyq = grid.nyquist();
    points
        .iter()
        .map(|&y| {
            let theta = 2.0 * PI * (y - grid.x_min()) / grid.length();
            let z = Complex64::from_polar(1.0, theta);
            let mut zj = z;
            let mut acc = Complex64::new(0.0, 0.0);
            // Real data: c[N - j] = conj(c[j]).
            for cj in &c[1..nyq] {
                acc += cj * zj;
                zj *= z;
            }
            c[0].re + 2.0 * acc.re + c[nyq].re * (nyq as f64 * theta).cos()
        })
        .collect()
}
