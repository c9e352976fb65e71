//! Randomized checks of the commutator, interpolation and product inequalities.
//!
//! Fourier-side norms use the measure `d xi / (2 pi)` with `a_hat(xi_j) = L c_j`,
//! so `||a_hat'||_{L^1} = sum_j |xi_j| |c_j|` and `||a_hat'||_{L^2} = ||a'||_{L^2}`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::spectral::{
    commutator_half, commutator_hilbert, derivative, norm, same_grid, seminorm_hs, Field, Grid,
};

/// Mass outside the middle third, relative to `I_2`, above which a field is
/// flagged as feeling the periodic wrap.
pub const WRAP_TAIL_LIMIT: f64 = 1e-8;

fn checked_ratio(num: f64, den: f64, what: &str) -> Result<f64> {
    if !(den > 0.0 && den.is_finite()) {
        return Err(invalid(format!("{what}: zero denominator")));
    }
    Ok(num / den)
}

/// Sup of the trigonometric interpolant, sampled on a grid `SUP_OVERSAMPLING`
/// times finer so the value does not depend on where the nodes fall.
pub fn sup_norm(f: &Field) -> Result<f64> {
    let grid = f.grid();
    let n = grid.points();
    let fine = Grid::new(grid.length(), SUP_OVERSAMPLING * n)?;
    let big = fine.points();
    let mut padded = vec![Complex64::new(0.0, 0.0); big];
    for (j, c) in f.spectrum().iter().enumerate() {
        if j == grid.nyquist() {
            padded[n / 2] += 0.5 * c;
            padded[big - n / 2] += 0.5 * c;
        } else {
            let mode = grid.mode(j);
            padded[mode.rem_euclid(big as i64) as usize] = *c;
        }
    }
    Ok(Field::from_spectrum(&fine, padded).max_abs())
}

pub const SUP_OVERSAMPLING: usize = 4;

/// `||d^k [H; a] d^m f||_p / (||d^{k+m} a||_inf ||f||_p)`.
pub fn calderon_ratio(a: &Field, f: &Field, k: u32, m: u32, p: f64) -> Result<f64> {
    let out = commutator_hilbert(a, f, k, m)?;
    let den = sup_norm(&derivative(a, k + m)?)? * norm(f, p)?;
    checked_ratio(norm(&out, p)?, den, "calderon ratio")
}

/// `||f||_3 / (||f||_2^{2/3} ||D^{1/2} f||_2^{1/3})`.
pub fn gns_ratio(f: &Field) -> Result<f64> {
    let half = seminorm_hs(f, 0.5)?;
    let den = norm(f, 2.0)?.powf(2.0 / 3.0) * half.powf(1.0 / 3.0);
    checked_ratio(norm(f, 3.0)?, den, "gns ratio")
}

/// Whether more than `WRAP_TAIL_LIMIT` of `int f^2` lies outside the middle third.
pub fn feels_wrap(f: &Field) -> bool {
    let third = f.grid().length() / 6.0;
    let (inside, total) = f
        .grid()
        .xs()
        .zip(f.samples())
        .fold((0.0, 0.0), |(i, t), (x, v)| {
            let w = v * v;
            (if x.abs() <= third { i + w } else { i }, t + w)
        });
    total > 0.0 && (total - inside) > WRAP_TAIL_LIMIT * total
}

/// `||D^s(fg)||_2 / (||f||_inf ||D^s g||_2 + ||g||_inf ||D^s f||_2)`.
pub fn leibniz_ratio(f: &Field, g: &Field, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(invalid(format!("leibniz order must be positive, got {s}")));
    }
    let num = seminorm_hs(&f.mul(g)?, s)?;
    let den = f.max_abs() * seminorm_hs(g, s)?
        + g.max_abs() * seminorm_hs(f, s)?;
    checked_ratio(num, den, "leibniz ratio")
}

/// `sum_j |xi_j| |c_j|`.
pub fn fourier_l1_of_derivative(a: &Field) -> f64 {
    let grid = a.grid();
    a.spectrum()
        .iter()
        .enumerate()
        .map(|(j, c)| derivative_weight(grid, j) * c.norm())
        .sum()
}

/// `|xi_j|`, zero at Nyquist to match the first-derivative multiplier.
fn derivative_weight(grid: &Grid, j: usize) -> f64 {
    if j == grid.nyquist() {
        0.0
    } else {
        grid.wavenumbers()[j].abs()
    }
}

/// `||D^{1/2}[D^{1/2}; a] f||_2` against `||a_hat'||_1 ||f||_2` and
/// `||a'||_2^{1/2} ||a''||_2^{1/2} ||f||_2`.
pub fn half_comm_ratio(a: &Field, f: &Field) -> Result<(f64, f64)> {
    same_grid(a, f)?;
    let num = norm(&commutator_half(a, f)?, 2.0)?;
    let fl2 = norm(f, 2.0)?;
    let r1 = checked_ratio(num, fourier_l1_of_derivative(a) * fl2, "half commutator ratio 1")?;
    let a1 = norm(&derivative(a, 1)?, 2.0)?;
    let a2 = norm(&derivative(a, 2)?, 2.0)?;
    let r2 = checked_ratio(num, (a1 * a2).sqrt() * fl2, "half commutator ratio 2")?;
    Ok((r1, r2))
}

/// `|xi|^{1/2} ||xi|^{1/2} - |eta|^{1/2}| / |xi - eta|`, `xi != eta`.
pub fn claim_ratio(xi: f64, eta: f64) -> f64 {
    let (sx, se) = (xi.abs().sqrt(), eta.abs().sqrt());
    sx * (sx - se).abs() / (xi - eta).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    /// Geometric; the range must be positive.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaimScan {
    pub supremum: f64,
    pub argmax: (f64, f64),
    pub samples: usize,
}

fn axis(range: (f64, f64), resolution: usize, spacing: Spacing) -> Result<Vec<f64>> {
    let (lo, hi) = range;
    if !(lo < hi && lo.is_finite() && hi.is_finite()) || resolution < 2 {
        return Err(invalid(format!("bad scan axis {range:?} x {resolution}")));
    }
    let step = |i: usize| i as f64 / (resolution - 1) as f64;
    match spacing {
        Spacing::Linear => Ok((0..resolution).map(|i| lo + (hi - lo) * step(i)).collect()),
        Spacing::Log => {
            if lo <= 0.0 {
                return Err(invalid("log-spaced scan needs a positive range"));
            }
            let (a, b) = (lo.ln(), hi.ln());
            Ok((0..resolution).map(|i| (a + (b - a) * step(i)).exp()).collect())
        }
    }
}

/// Supremum of `claim_ratio` over a `resolution x resolution` lattice, diagonal excluded.
pub fn claim_scan(
    xi_range: (f64, f64),
    eta_range: (f64, f64),
    resolution: usize,
    spacing: Spacing,
) -> Result<ClaimScan> {
    let xs = axis(xi_range, resolution, spacing)?;
    let es = axis(eta_range, resolution, spacing)?;
    let best = xs
        .par_iter()
        .map(|&xi| {
            let mut best = (f64::NEG_INFINITY, (xi, xi), 0usize);
            for &eta in &es {
                if xi == eta {
                    continue;
                }
                best.2 += 1;
                let r = claim_ratio(xi, eta);
                if r > best.0 {
                    best = (r, (xi, eta), best.2);
                }
            }
            best
        })
        .reduce(
            || (f64::NEG_INFINITY, (0.0, 0.0), 0),
            |a, b| {
                let count = a.2 + b.2;
                if b.0 > a.0 {
                    (b.0, b.1, count)
                } else {
                    (a.0, a.1, count)
                }
            },
        );
    Ok(ClaimScan {
        supremum: best.0,
        argmax: best.1,
        samples: best.2,
    })
}

/// `||a_hat'||_1` and the split bound `c (R^{1/2} A + R^{-1/2} B)` with
/// `A = ||a'||_2`, `B = ||a''||_2` and the minimizing `R = B / A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Interpolation {
    pub lhs: f64,
    pub a: f64,
    pub b: f64,
    pub r: f64,
}

impl L1Interpolation {
    pub fn rhs(&self, c: f64) -> f64 {
        c * (self.r.sqrt() * self.a + self.b / self.r.sqrt())
    }
}

pub fn fourier_l1_interp(a: &Field) -> Result<L1Interpolation> {
    let a1 = norm(&derivative(a, 1)?, 2.0)?;
    let a2 = norm(&derivative(a, 2)?, 2.0)?;
    if !(a1 > 0.0 && a2 > 0.0) {
        return Err(invalid("interpolation needs a non-constant field"));
    }
    Ok(L1Interpolation {
        lhs: fourier_l1_of_derivative(a),
        a: a1,
        b: a2,
        r: a2 / a1,
    })
}

/// A grid-independent description of a test function.
#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    /// `sum_{j=1}^{M} 2 Re(c_j e^{i xi_j (x - x_min)})`, mean square 1.
    Modes(Vec<Complex64>),
    /// Sum of `amplitude * exp(-1/(1 - ((x - center)/radius)^2))`.
    Bumps(Vec<(f64, f64, f64)>),
}

impl Sample {
    pub fn random_modes(rng: &mut impl Rng, max_mode: usize) -> Sample {
        let mut coeffs: Vec<Complex64> = (0..max_mode)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let power: f64 = 2.0 * coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>();
        let scale = 1.0 / power.sqrt();
        coeffs.iter_mut().for_each(|c| *c *= scale);
        Sample::Modes(coeffs)
    }

    /// One to three bumps inside the middle third of a box of length `length`.
    pub fn random_bumps(rng: &mut impl Rng, length: f64) -> Sample {
        let count = rng.gen_range(1..=3);
        let bumps = (0..count)
            .map(|_| {
                let radius = rng.gen_range(0.03..0.08) * length;
                let center = rng.gen_range(-1.0..1.0) * (length / 6.0 - radius);
                let amplitude = rng.gen_range(-2.0..2.0);
                (center, radius, amplitude)
            })
            .collect();
        Sample::Bumps(bumps)
    }

    pub fn build(&self, grid: &Arc<Grid>) -> Result<Field> {
        match self {
            Sample::Modes(coeffs) => {
                let n = grid.points();
                if coeffs.len() >= grid.nyquist() {
                    return Err(invalid(format!(
                        "{} modes do not fit on {n} points",
                        coeffs.len()
                    )));
                }
                let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
                for (j, c) in coeffs.iter().enumerate() {
                    spectrum[j + 1] = *c;
                    spectrum[n - j - 1] = c.conj();
                }
                Ok(Field::from_spectrum(grid, spectrum))
            }
            Sample::Bumps(bumps) => Field::from_fn(grid, |x| {
                bumps
                    .iter()
                    .map(|&(center, radius, amplitude)| {
                        let s = (x - center) / radius;
                        if s.abs() < 1.0 {
                            amplitude * (-1.0 / (1.0 - s * s)).exp()
                        } else {
                            0.0
                        }
                    })
                    .sum()
            }),
        }
    }
}

/// Settings for the randomized families.
#[derive(Debug, Clone, PartialEq)]
pub struct LabConfig {
    pub length: f64,
    pub points: usize,
    pub family_size: usize,
    pub seed: u64,
    /// `(k, m, p)` triples for the Calderon ratio.
    pub calderon: Vec<(u32, u32, f64)>,
    pub leibniz_order: f64,
    pub claim_resolution: usize,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            length: 64.0,
            points: 256,
            family_size: 50,
            seed: 0,
            calderon: vec![(1, 0, 2.0), (0, 1, 2.0), (1, 1, 2.0), (0, 1, 4.0)],
            leibniz_order: 0.5,
            claim_resolution: 2000,
        }
    }
}

/// A smooth coefficient field and a test function.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyPair {
    pub a: Sample,
    pub f: Sample,
}

/// Seeded pairs: `a` band-limited to `points/8` modes, `f` alternating between
/// band-limited fields and bump sums.
pub fn family(config: &LabConfig) -> Vec<FamilyPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let max_mode = config.points / 8;
    (0..config.family_size)
        .map(|i| {
            let a = Sample::random_modes(&mut rng, max_mode);
            let f = if i % 2 == 0 {
                Sample::random_modes(&mut rng, max_mode)
            } else {
                Sample::random_bumps(&mut rng, config.length)
            };
            FamilyPair { a, f }
        })
        .collect()
}

/// Seeded bump sums for the single-function ratio.
pub fn bump_family(config: &LabConfig) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    (0..config.family_size)
        .map(|_| Sample::random_bumps(&mut rng, config.length))
        .collect()
}

/// One line of the constants report.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantRow {
    pub lemma: String,
    pub family_size: usize,
    pub seed: u64,
    pub constant: f64,
    /// `|max_{2N} - max_N| / max_N`.
    pub refinement_change: f64,
    /// Members flagged by `feels_wrap`.
    pub wrapped: usize,
}

impl ConstantRow {
    pub const HEADER: [&'static str; 6] = [
        "lemma",
        "family_size",
        "seed",
        "empirical_constant",
        "refinement_change",
        "wrap_flags",
    ];
}

fn family_max(
    pairs: &[FamilyPair],
    grid: &Arc<Grid>,
    eval: impl Fn(&Field, &Field) -> Result<f64> + Sync,
) -> Result<f64> {
    let values = pairs
        .par_iter()
        .map(|p| eval(&p.a.build(grid)?, &p.f.build(grid)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

fn refined_row(
    lemma: String,
    config: &LabConfig,
    pairs: &[FamilyPair],
    eval: impl Fn(&Field, &Field) -> Result<f64> + Sync,
) -> Result<ConstantRow> {
    let coarse = Grid::new(config.length, config.points)?;
    let fine = Grid::new(config.length, 2 * config.points)?;
    let c = family_max(pairs, &coarse, &eval)?;
    let f = family_max(pairs, &fine, &eval)?;
    Ok(ConstantRow {
        lemma,
        family_size: pairs.len(),
        seed: config.seed,
        constant: c,
        refinement_change: if c > 0.0 { (f - c).abs() / c } else { 0.0 },
        wrapped: 0,
    })
}

/// Evaluates every ratio over the seeded families.
pub fn run_lab(config: &LabConfig) -> Result<Vec<ConstantRow>> {
    if config.family_size == 0 {
        return Err(invalid("family size must be positive"));
    }
    let pairs = family(config);
    let mut rows = Vec::new();
    for &(k, m, p) in &config.calderon {
        rows.push(refined_row(
            format!("calderon_k{k}_m{m}_p{p}"),
            config,
            &pairs,
            |a, f| calderon_ratio(a, f, k, m, p),
        )?);
    }

    let bumps: Vec<FamilyPair> = bump_family(config)
        .into_iter()
        .map(|f| FamilyPair {
            a: Sample::Bumps(Vec::new()),
            f,
        })
        .collect();
    let mut gns = refined_row("gns".into(), config, &bumps, |_, f| gns_ratio(f))?;
    let coarse = Grid::new(config.length, config.points)?;
    gns.wrapped = bumps
        .iter()
        .map(|p| p.f.build(&coarse).map(|f| feels_wrap(&f)))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|w| *w)
        .count();
    rows.push(gns);

    let s = config.leibniz_order;
    rows.push(refined_row(format!("leibniz_s{s}"), config, &pairs, |a, f| {
        leibniz_ratio(a, f, s)
    })?);
    rows.push(refined_row("half_comm_ratio1".into(), config, &pairs, |a, f| {
        Ok(half_comm_ratio(a, f)?.0)
    })?);
    rows.push(refined_row("half_comm_ratio2".into(), config, &pairs, |a, f| {
        Ok(half_comm_ratio(a, f)?.1)
    })?);
    rows.push(refined_row("l1_interp".into(), config, &pairs, |a, _| {
        let r = fourier_l1_interp(a)?;
        Ok(r.lhs / r.rhs(1.0))
    })?);

    let res = config.claim_resolution;
    let scan = claim_scan((1e-6, 1e3), (1e-6, 1e3), res, Spacing::Log)?;
    let half = claim_scan((1e-6, 1e3), (1e-6, 1e3), (res / 2).max(2), Spacing::Log)?;
    rows.push(ConstantRow {
        lemma: "claim_scan".into(),
        family_size: scan.samples,
        seed: config.seed,
        constant: scan.supremum,
        refinement_change: (scan.supremum - half.supremum).abs() / scan.supremum,
        wrapped: 0,
    });
    Ok(rows)
}

/// Largest deviation between the FFT commutators and their dense oracles,
/// relative to the largest oracle entry.
pub fn oracle_deviation(a: &Field, f: &Field, k: u32, m: u32) -> Result<f64> {
    let rel = |fast: &Field, slow: &[f64]| {
        let scale = slow.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(f64::MIN_POSITIVE);
        fast.samples()
            .iter()
            .zip(slow)
            .fold(0.0f64, |d, (x, y)| d.max((x - y).abs()))
            / scale
    };
    let h = rel(
        &commutator_hilbert(a, f, k, m)?,
        &crate::dense::hilbert_commutator_oracle(a, f, k, m)?,
    );
    let c = rel(&commutator_half(a, f)?, &crate::dense::half_commutator_oracle(a, f)?);
    Ok(h.max(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn periodic(n: usize) -> Arc<Grid> {
        Grid::new(2.0 * PI, n).unwrap()
    }

    fn random_pair(seed: u64, n: usize) -> (Field, Field) {
        let g = periodic(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Sample::random_modes(&mut rng, n / 8).build(&g).unwrap();
        let f = Sample::random_modes(&mut rng, n / 8).build(&g).unwrap();
        (a, f)
    }

    #[test]
    fn band_limited_samples_have_unit_variance() {
        let g = Grid::new(10.0, 128).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = Sample::random_modes(&mut rng, 16);
        let f = s.build(&g).unwrap();
        assert_relative_eq!(norm(&f, 2.0).unwrap().powi(2) / 10.0, 1.0, max_relative = 1e-12);
        assert!(f.mean().abs() < 1e-14);
        // Same function on a finer grid.
        let fine = s.build(&Grid::new(10.0, 256).unwrap()).unwrap();
        assert!((fine.samples()[2] - f.samples()[1]).abs() < 1e-12);
        assert!(s.build(&Grid::new(10.0, 32).unwrap()).is_err());
    }

    #[test]
    fn calderon_examples() {
        let (a, f) = random_pair(1, 128);
        let g = Arc::clone(a.grid());
        let sin = Field::from_fn(&g, f64::sin).unwrap();
        // d [H; sin] f vanishes for zero-mean f; [H; sin] d f does not.
        assert!(calderon_ratio(&sin, &f, 1, 0, 2.0).unwrap() < 1e-12);
        let r = calderon_ratio(&sin, &f, 0, 1, 2.0).unwrap();
        assert!(r.is_finite() && r > 1e-3);
        let r2 = calderon_ratio(&sin, &f.scale(2.0), 0, 1, 2.0).unwrap();
        assert_relative_eq!(r, r2, max_relative = 1e-12);
        let c = Field::from_fn(&g, |_| 3.0).unwrap();
        assert!(calderon_ratio(&c, &f, 1, 0, 2.0).is_err());
        assert!(calderon_ratio(&a, &f, 0, 0, 2.0).is_err());
        // The same band-limited pair on twice the points.
        let fine = periodic(256);
        let lift = |u: &Field| {
            let vals = crate::spectral::trig_interpolate(u, &fine.xs().collect::<Vec<_>>());
            Field::from_samples(&fine, vals).unwrap()
        };
        let coarse = calderon_ratio(&a, &f, 1, 0, 2.0).unwrap();
        let refined = calderon_ratio(&lift(&a), &lift(&f), 1, 0, 2.0).unwrap();
        assert_relative_eq!(coarse, refined, max_relative = 1e-9);
    }

    #[test]
    fn gns_examples() {
        let g = periodic(256);
        let c = Field::from_fn(&g, f64::cos).unwrap();
        let expect = (8.0f64 / 3.0).cbrt() / PI.sqrt();
        // |cos|^3 has kinks, so the L^3 quadrature is only algebraically accurate.
        assert_relative_eq!(gns_ratio(&c).unwrap(), expect, max_relative = 1e-8);
        assert_relative_eq!(gns_ratio(&c.scale(-3.5)).unwrap(), gns_ratio(&c).unwrap(), max_relative = 1e-12);
        assert!(gns_ratio(&Field::from_fn(&g, |_| 2.0).unwrap()).is_err());
    }

    #[test]
    fn wrap_flag() {
        let g = Grid::new(60.0, 512).unwrap();
        let centered = Sample::Bumps(vec![(0.0, 5.0, 1.0)]).build(&g).unwrap();
        assert!(!feels_wrap(&centered));
        let edge = Sample::Bumps(vec![(20.0, 5.0, 1.0)]).build(&g).unwrap();
        assert!(feels_wrap(&edge));
    }

    #[test]
    fn leibniz_examples() {
        let g = periodic(128);
        let c = Field::from_fn(&g, f64::cos).unwrap();
        assert_relative_eq!(leibniz_ratio(&c, &c, 0.5).unwrap(), 2f64.sqrt() / 4.0, max_relative = 1e-12);
        let k = Field::from_fn(&g, |_| 2.0).unwrap();
        let r = leibniz_ratio(&c, &k, 0.5).unwrap();
        assert!(r <= 1.0 + 1e-14, "{r}");
        let (a, f) = random_pair(5, 128);
        let r1 = leibniz_ratio(&a, &f, 0.5).unwrap();
        let r2 = leibniz_ratio(&a.scale(3.0), &f, 0.5).unwrap();
        assert_relative_eq!(r1, r2, max_relative = 1e-12);
    }

    #[test]
    fn half_comm_examples() {
        let g = periodic(128);
        let k = Field::from_fn(&g, |_| 1.0).unwrap();
        let (a, f) = random_pair(9, 128);
        assert!(half_comm_ratio(&k, &f).is_err());
        let (r1, r2) = half_comm_ratio(&a, &f).unwrap();
        assert!(r1 <= 1.0 + 1e-6 && r2.is_finite());
        let (s1, s2) = half_comm_ratio(&a, &f.scale(-4.0)).unwrap();
        assert_relative_eq!(r1, s1, max_relative = 1e-12);
        assert_relative_eq!(r2, s2, max_relative = 1e-12);
    }

    #[test]
    fn claim_examples() {
        assert_relative_eq!(claim_ratio(4.0, 1.0), 2.0 / 3.0, max_relative = 1e-15);
        assert_eq!(claim_ratio(1.0, -1.0), 0.0);
        // Same sign: sqrt(xi) / (sqrt(xi) + sqrt(eta)), tending to 1 as eta -> 0.
        assert!(claim_ratio(1.0, 1e-12) > 1.0 - 1e-5);
        let scan = claim_scan((1e-6, 1e3), (1e-6, 1e3), 400, Spacing::Log).unwrap();
        assert!(scan.supremum <= 1.0 + 1e-6);
        assert!(scan.supremum > 0.999);
        assert_eq!(scan.samples, 400 * 399);
        let signed = claim_scan((-10.0, 10.0), (-10.0, 10.0), 201, Spacing::Linear).unwrap();
        assert!(signed.supremum <= 1.0 + 1e-6);
        assert!(claim_scan((-1.0, 1.0), (0.1, 1.0), 10, Spacing::Log).is_err());
    }

    #[test]
    fn l1_interpolation() {
        let g = periodic(64);
        let s = Field::from_fn(&g, f64::sin).unwrap();
        let r = fourier_l1_interp(&s).unwrap();
        // c_{+-1} = -+ i/2, so the sum is 1; ||cos||_2 = ||sin||_2 = sqrt(pi).
        assert_relative_eq!(r.lhs, 1.0, max_relative = 1e-12);
        assert_relative_eq!(r.a, PI.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(r.b, PI.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(r.r, 1.0, max_relative = 1e-12);
        assert!(r.lhs <= r.rhs(1.0));
        let shifted = fourier_l1_interp(&s.map(|v| v + 5.0)).unwrap();
        assert_relative_eq!(shifted.lhs, r.lhs, max_relative = 1e-12);
        // The optimal R minimizes the bound.
        for r_try in [0.3, 0.9, 1.1, 4.0] {
            let other = L1Interpolation { r: r_try, ..r };
            assert!(other.rhs(1.0) >= r.rhs(1.0));
        }
        assert!(fourier_l1_interp(&Field::zeros(&g)).is_err());
    }

    #[test]
    fn oracle_agreement_small() {
        let (a, f) = random_pair(11, 64);
        assert!(oracle_deviation(&a, &f, 1, 0).unwrap() < 1e-10);
        assert!(oracle_deviation(&a, &f, 0, 2).unwrap() < 1e-10);
    }

    #[test]
    fn oversampled_sup() {
        let g = periodic(16);
        // cos(x + 0.2) peaks halfway between nodes.
        let f = Field::from_fn(&g, |x| (x + 0.2).cos()).unwrap();
        assert!(f.max_abs() < 0.99);
        assert!((sup_norm(&f).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn lab_is_reproducible() {
        let cfg = LabConfig {
            family_size: 6,
            points: 128,
            claim_resolution: 50,
            ..LabConfig::default()
        };
        let a = run_lab(&cfg).unwrap();
        let b = run_lab(&cfg).unwrap();
        assert_eq!(a, b);
        let r1 = a.iter().find(|r| r.lemma == "half_comm_ratio1").unwrap();
        assert!(r1.constant <= 1.0 + 1e-6);
        let gns = a.iter().find(|r| r.lemma == "gns").unwrap();
        assert_eq!(gns.wrapped, 0);
        for row in &a {
            assert!(row.constant.is_finite() && row.refinement_change < 0.02, "{row:?}");
        }
    }
}
