//! Dense Fourier-basis oracles for the commutator operators.
//!
//! These never touch the FFT: coefficients come from a direct O(N^2) DFT and
//! the operators are assembled as explicit kernel matrices acting on the
//! coefficient vector of `f`. Intended for validation at `N <= 512`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::spectral::{derivative_symbol, frac_symbol, hilbert_symbol, same_grid, Field, Grid};

/// Largest grid the dense oracles accept.
pub const MAX_DENSE_POINTS: usize = 512;

/// Direct DFT with the crate's `1/N` forward normalization.
pub fn naive_dft(samples: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    (0..n)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, &v) in samples.iter().enumerate() {
                let angle = -2.0 * PI * ((j * m) % n) as f64 / n as f64;
                acc += v * Complex64::from_polar(1.0, angle);
            }
            acc / n as f64
        })
        .collect()
}

/// Direct inverse DFT, real part.
pub fn naive_idft(spectrum: &[Complex64]) -> Vec<f64> {
    let n = spectrum.len();
    (0..n)
        .map(|m| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, c) in spectrum.iter().enumerate() {
                let angle = 2.0 * PI * ((j * m) % n) as f64 / n as f64;
                acc += c * Complex64::from_polar(1.0, angle);
            }
            acc.re
        })
        .collect()
}

/// Dense `N x N` matrix acting on Fourier coefficients, row-major.
pub struct KernelMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl KernelMatrix {
    pub fn apply(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|j| {
                self.entries[j * self.n..(j + 1) * self.n]
                    .iter()
                    .zip(coeffs)
                    .map(|(k, c)| k * c)
                    .sum()
            })
            .collect()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.n + col]
    }
}

fn check_size(grid: &Grid) -> Result<()> {
    if grid.points() > MAX_DENSE_POINTS {
        return Err(invalid(format!(
            "dense oracle limited to N <= {MAX_DENSE_POINTS}, got {}",
            grid.points()
        )));
    }
    Ok(())
}

/// Kernel `K[j][l] = w_out(j) * (s(j) - s(l)) * a_hat[(j - l) mod N] * w_in(l)`.
fn build(
    grid: &Grid,
    a_hat: &[Complex64],
    w_out: impl Fn(usize) -> Complex64,
    commutand: impl Fn(usize) -> Complex64,
    w_in: impl Fn(usize) -> Complex64,
) -> KernelMatrix {
    let n = grid.points();
    let mut entries = Vec::with_capacity(n * n);
    for j in 0..n {
        let out = w_out(j);
        let sj = commutand(j);
        for l in 0..n {
            let conv = a_hat[(j + n - l) % n];
            entries.push(out * (sj - commutand(l)) * conv * w_in(l));
        }
    }
    KernelMatrix { n, entries }
}

/// Kernel of `d^k [H; a] d^m`.
pub fn hilbert_commutator_matrix(a: &Field, k: u32, m: u32) -> Result<KernelMatrix> {
    let grid = Arc::clone(a.grid());
    check_size(&grid)?;
    let a_hat = naive_dft(a.samples());
    let pow = |j: usize, p: u32| {
        if p == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            derivative_symbol(&grid, j, p)
        }
    };
    Ok(build(
        &grid,
        &a_hat,
        |j| pow(j, k),
        |j| hilbert_symbol(&grid, j),
        |l| pow(l, m),
    ))
}

/// Kernel of `D^{1/2} [D^{1/2}; a]`:
/// `|xi_j|^{1/2} (|xi_j|^{1/2} - |xi_l|^{1/2}) a_hat[j - l]`.
pub fn half_commutator_matrix(a: &Field) -> Result<KernelMatrix> {
    let grid = Arc::clone(a.grid());
    check_size(&grid)?;
    let a_hat = naive_dft(a.samples());
    let half = |j: usize| Complex64::new(frac_symbol(&grid, j, 0.5), 0.0);
    Ok(build(&grid, &a_hat, half, half, |_| Complex64::new(1.0, 0.0)))
}

/// Oracle value of `d^k [H; a] d^m f` on the grid.
pub fn hilbert_commutator_oracle(a: &Field, f: &Field, k: u32, m: u32) -> Result<Vec<f64>> {
    same_grid(a, f)?;
    let mat = hilbert_commutator_matrix(a, k, m)?;
    Ok(naive_idft(&mat.apply(&naive_dft(f.samples()))))
}

/// Oracle value of `D^{1/2} [D^{1/2}; a] f` on the grid.
pub fn half_commutator_oracle(a: &Field, f: &Field) -> Result<Vec<f64>> {
    same_grid(a, f)?;
    let mat = half_commutator_matrix(a)?;
    Ok(naive_idft(&mat.apply(&naive_dft(f.samples()))))
}
