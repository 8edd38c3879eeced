//! Periodic grids and real fields with a Fourier view.
//!
//! Fourier coefficients use the series normalisation
//!
//! ```text
//! û_k = (1/N) Σ_j u_j e^{−i k x_j},     u_j = Σ_k û_k e^{i k x_j},
//! ```
//!
//! with physical wavenumbers `k = 2π m / L`, `m ∈ (−N/2, N/2]`. With this
//! convention `∫₀ᴸ |u|² dx = L Σ_k |û_k|²`, and the Sobolev norm is
//! `‖u‖_{H^s} = (L Σ_k ⟨k⟩^{2s} |û_k|²)^{1/2}`.

mod fft;
pub mod io;
pub mod quadrature;
pub mod weight;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fft::{fft_forward, fft_inverse, Transformer};
pub use quadrature::{Piece, PieceShape, SpectralQuadrature};
pub use weight::WeightFunction;

/// Bound `C` in `‖band_limited_random(.., amplitude)‖_∞ ≤ C · amplitude`.
pub const RANDOM_FIELD_LINF_CONSTANT: f64 = std::f64::consts::SQRT_2;

/// Uniform periodic grid on `[0, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    length: f64,
    points: usize,
}

impl Grid {
    pub fn new(length: f64, points: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::contract(format!(
                "grid length must be > 0, got {length}"
            )));
        }
        if points < 2 || !points.is_multiple_of(2) {
            return Err(Error::contract(format!(
                "grid needs an even number of points ≥ 2, got {points}"
            )));
        }
        Ok(Self { length, points })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.h()
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |j| self.x(j))
    }

    /// Signed mode number of FFT slot `j`; the Nyquist slot maps to `+N/2`.
    pub fn mode(&self, j: usize) -> i64 {
        let n = self.points as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI / self.length * self.mode(j) as f64
    }

    pub fn nyquist_slot(&self) -> usize {
        self.points / 2
    }

    /// Grid over the same interval with `points` samples.
    pub fn with_points(&self, points: usize) -> Result<Self> {
        Self::new(self.length, points)
    }
}

/// Real samples `u(x_j)` on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    samples: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::contract(format!(
                "field has {} samples for a {}-point grid",
                samples.len(),
                grid.len()
            )));
        }
        if let Some(j) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::contract(format!("non-finite sample at index {j}")));
        }
        Ok(Self { grid, samples })
    }

    pub(crate) fn from_vec_unchecked(grid: Grid, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), grid.len());
        Self { grid, samples }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            samples: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            samples: grid.xs().map(f).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, a: f64) -> Field {
        self.map(|v| a * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_vec_unchecked(self.grid, self.samples.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise product; both fields must share a grid.
    pub fn mul(&self, other: &Field) -> Field {
        self.zip(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Field) -> Field {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Field::from_vec_unchecked(
            self.grid,
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Normalised Fourier coefficients `û_k` in FFT order.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let n = self.grid.len() as f64;
        let mut buf: Vec<Complex64> = self
            .samples
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        fft_forward(&mut buf);
        buf.iter_mut().for_each(|c| *c /= n);
        buf
    }

    /// Inverse of [`Field::spectrum`]; the imaginary part is discarded.
    pub fn from_spectrum(grid: Grid, coeffs: &[Complex64]) -> Field {
        assert_eq!(coeffs.len(), grid.len());
        let mut buf = coeffs.to_vec();
        fft_inverse(&mut buf);
        Field::from_vec_unchecked(grid, buf.iter().map(|c| c.re).collect())
    }

    /// `u(x − k h)`.
    pub fn translate_points(&self, k: isize) -> Field {
        let n = self.samples.len() as isize;
        let samples = (0..n)
            .map(|j| self.samples[(j - k).rem_euclid(n) as usize])
            .collect();
        Field::from_vec_unchecked(self.grid, samples)
    }

    /// `u(−x)` on the torus.
    pub fn reflect(&self) -> Field {
        let n = self.samples.len();
        let samples = (0..n).map(|j| self.samples[(n - j) % n]).collect();
        Field::from_vec_unchecked(self.grid, samples)
    }

    /// Trigonometric interpolant resampled on a grid with `points` samples
    /// over the same interval. The Nyquist mode is split symmetrically when
    /// refining and dropped when coarsening.
    pub fn resample(&self, points: usize) -> Result<Field> {
        let target = self.grid.with_points(points)?;
        let coeffs = self.spectrum();
        Ok(Field::from_spectrum(
            target,
            &remap_spectrum(&coeffs, points),
        ))
    }

    /// Largest `|m|` with `|û_m| > tol · max |û|`.
    pub fn bandwidth(&self, tol: f64) -> usize {
        let c = self.spectrum();
        let peak = c.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if peak == 0.0 {
            return 0;
        }
        (0..c.len())
            .filter(|&j| c[j].norm() > tol * peak)
            .map(|j| self.grid.mode(j).unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Ratio of the largest coefficient in the top sixth of the spectrum to
    /// the peak coefficient.
    pub fn spectral_tail(&self) -> f64 {
        let c = self.spectrum();
        let peak = c.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if peak == 0.0 {
            return 0.0;
        }
        let cut = self.grid.len() / 2 * 5 / 6;
        let tail = (0..c.len())
            .filter(|&j| self.grid.mode(j).unsigned_abs() as usize > cut)
            .fold(0.0f64, |m, j| m.max(c[j].norm()));
        tail / peak
    }
}

/// Moves FFT-ordered coefficients onto an FFT-ordered vector of another size.
pub(crate) fn remap_spectrum(coeffs: &[Complex64], points: usize) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut out = vec![Complex64::new(0.0, 0.0); points];
    let half_src = n / 2;
    let half_dst = points / 2;
    let keep = half_src.min(half_dst);
    out[0] = coeffs[0];
    for m in 1..keep {
        out[m] = coeffs[m];
        out[points - m] = coeffs[n - m];
    }
    if points > n {
        // split the source Nyquist coefficient over ±N/2
        let nyq = coeffs[half_src] * 0.5;
        out[half_src] += nyq;
        out[points - half_src] += nyq;
    } else if points == n {
        out[half_src] = coeffs[half_src];
    }
    out
}

/// `∂_x^order u` through the multiplier `(ik)^order`; the Nyquist mode is
/// zeroed for odd orders.
pub fn derivative(u: &Field, order: u32) -> Field {
    if order == 0 {
        return u.clone();
    }
    let grid = *u.grid();
    let mut c = u.spectrum();
    apply_derivative(&grid, &mut c, order);
    Field::from_spectrum(grid, &c)
}

pub(crate) fn apply_derivative(grid: &Grid, coeffs: &mut [Complex64], order: u32) {
    let nyq = grid.nyquist_slot();
    for (j, c) in coeffs.iter_mut().enumerate() {
        if j == nyq && order % 2 == 1 {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        *c *= Complex64::new(0.0, grid.wavenumber(j)).powu(order);
    }
}

/// Trapezoid rule `h Σ u_j` (spectrally accurate for smooth periodic `u`).
pub fn integrate(u: &Field) -> f64 {
    u.grid().h() * u.samples().iter().sum::<f64>()
}

/// `∫₀ᴸ u(x) w(x + shift) dx` by the trapezoid rule on `[0, L]`, closing the
/// periodic field at `x = L` with `u(L) = u(0)` so a weight plateau reaching
/// the right edge is integrated without an end correction error.
///
/// Cutoff weights must keep their ramp inside `[2h, L − 2h]`.
pub fn weighted_integral(u: &Field, w: &WeightFunction, shift: f64) -> Result<f64> {
    let grid = u.grid();
    w.check_window(grid, shift)?;
    let h = grid.h();
    let s = u.samples();
    let interior: f64 = s
        .iter()
        .enumerate()
        .map(|(j, &v)| v * w.value(grid.x(j), shift, 0))
        .sum();
    let closure = 0.5 * s[0] * (w.value(grid.length(), shift, 0) - w.value(0.0, shift, 0));
    Ok(h * (interior + closure))
}

/// `‖u‖_{H^s} = (L Σ_k ⟨k⟩^{2s} |û_k|²)^{1/2}`.
pub fn sobolev_norm(u: &Field, s: f64) -> f64 {
    weighted_spectral_norm(u, |k| (1.0 + k * k).powf(s))
}

/// Homogeneous seminorm `(L Σ_k |k|^{2s} |û_k|²)^{1/2}`.
pub fn sobolev_seminorm(u: &Field, s: f64) -> f64 {
    weighted_spectral_norm(u, |k| if k == 0.0 { 0.0 } else { k.abs().powf(2.0 * s) })
}

fn weighted_spectral_norm(u: &Field, multiplier: impl Fn(f64) -> f64) -> f64 {
    let grid = u.grid();
    let c = u.spectrum();
    let sum: f64 = c
        .iter()
        .enumerate()
        .map(|(j, z)| multiplier(grid.wavenumber(j)) * z.norm_sqr())
        .sum();
    (grid.length() * sum).sqrt()
}

/// Deterministic zero-mean random field with spectrum in `1 ≤ |m| ≤ kmax`.
///
/// `û_m = amplitude (a_m + i b_m) / (2 kmax)` with `a_m, b_m ~ U[−1, 1]`
/// drawn from a ChaCha8 stream, so `‖u‖_∞ ≤ √2 · amplitude`.
pub fn band_limited_random(grid: &Grid, kmax: usize, seed: u64, amplitude: f64) -> Result<Field> {
    if kmax == 0 || 3 * kmax > grid.len() {
        return Err(Error::contract(format!(
            "kmax = {kmax} must satisfy 1 ≤ kmax ≤ N/3 = {}",
            grid.len() / 3
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.len();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    for m in 1..=kmax {
        let a: f64 = rng.gen_range(-1.0..=1.0);
        let b: f64 = rng.gen_range(-1.0..=1.0);
        let z = Complex64::new(a, b) * (amplitude / (2.0 * kmax as f64));
        c[m] = z;
        c[n - m] = z.conj();
    }
    Ok(Field::from_spectrum(*grid, &c))
}

/// Random field multiplied by the trigonometric taper `sin^{2p}(πx/L)`.
///
/// The product stays band-limited (`|m| ≤ base_kmax + p`) and vanishes to
/// order `2p` at the periodic seam, so boundary terms from integrating by
/// parts across `x = 0 ≡ L` drop out.
pub fn tapered_random(
    grid: &Grid,
    base_kmax: usize,
    taper_power: u32,
    seed: u64,
    amplitude: f64,
) -> Result<Field> {
    let base = band_limited_random(grid, base_kmax, seed, amplitude)?;
    let l = grid.length();
    let taper = Field::from_fn(*grid, |x| {
        (std::f64::consts::PI * x / l)
            .sin()
            .powi(2 * taper_power as i32)
    });
    Ok(base.mul(&taper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoffs::CutoffSpec;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn two_pi(n: usize) -> Grid {
        Grid::new(2.0 * PI, n).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(1.0, 7).is_err());
        assert!(Grid::new(0.0, 8).is_err());
        let g = Grid::new(10.0, 8).unwrap();
        assert_eq!(g.h() * 8.0, 10.0);
        assert_eq!(g.mode(4), 4);
        assert_eq!(g.mode(5), -3);
    }

    #[test]
    fn third_derivative_of_cos() {
        let g = two_pi(32);
        let u = Field::from_fn(g, f64::cos);
        let d = derivative(&u, 3);
        for (x, v) in g.xs().zip(d.samples()) {
            assert!((v - x.sin()).abs() < 1e-12, "{}", v - x.sin());
        }
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = Grid::new(5.0, 32).unwrap();
        let u = Field::from_fn(g, |_| 3.5);
        for k in 1..=6 {
            assert!(derivative(&u, k).max_abs() < 1e-12);
        }
    }

    #[test]
    fn multiplier_composition() {
        let g = Grid::new(7.0, 128).unwrap();
        let u = band_limited_random(&g, 32, 4, 1.0).unwrap();
        let a = derivative(&derivative(&u, 1), 2);
        let b = derivative(&u, 3);
        let scale = b.max_abs();
        assert!(a.sub(&b).max_abs() <= 1e-10 * scale);
    }

    #[test]
    fn integrate_examples() {
        let g = Grid::new(10.0, 2048).unwrap();
        let one = Field::from_fn(g, |_| 1.0);
        let w = WeightFunction::cutoff(CutoffSpec::plain(1.0, 1.0).unwrap());
        assert_relative_eq!(
            weighted_integral(&one, &w, 0.0).unwrap(),
            8.5,
            epsilon = 1e-12
        );
        assert_eq!(weighted_integral(&Field::zeros(g), &w, 0.0).unwrap(), 0.0);
        let c = Field::from_fn(two_pi(64), f64::cos);
        assert!(integrate(&c).abs() < 1e-14);
    }

    #[test]
    fn ramp_outside_window_is_rejected() {
        let g = Grid::new(10.0, 256).unwrap();
        let one = Field::from_fn(g, |_| 1.0);
        let w = WeightFunction::cutoff(CutoffSpec::plain(1.0, 1.0).unwrap());
        assert!(matches!(
            weighted_integral(&one, &w, 1.0),
            Err(Error::Support { .. })
        ));
        assert!(matches!(
            weighted_integral(&one, &w, -8.5),
            Err(Error::Support { .. })
        ));
        assert!(weighted_integral(&one, &w, -7.0).is_ok());
    }

    #[test]
    fn sobolev_examples() {
        let c = Field::from_fn(two_pi(64), f64::cos);
        assert_relative_eq!(sobolev_norm(&c, 0.0), PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(
            sobolev_norm(&c, 1.0),
            (2.0 * PI).sqrt(),
            max_relative = 1e-14
        );
        assert_eq!(sobolev_norm(&Field::zeros(two_pi(16)), 3.0), 0.0);
    }

    #[test]
    fn random_field_contract() {
        let g = Grid::new(20.0, 64).unwrap();
        let a = band_limited_random(&g, 8, 11, 2.0).unwrap();
        let b = band_limited_random(&g, 8, 11, 2.0).unwrap();
        assert_eq!(a, b);
        assert!(integrate(&a).abs() < 1e-14);
        assert!(a.max_abs() <= RANDOM_FIELD_LINF_CONSTANT * 2.0);
        let c = a.spectrum();
        for (j, z) in c.iter().enumerate() {
            if g.mode(j).abs() > 8 {
                assert!(z.norm() < 1e-15, "mode {}", g.mode(j));
            }
        }
        assert!(band_limited_random(&g, 22, 0, 1.0).is_err());
        assert!(band_limited_random(&g, 0, 0, 1.0).is_err());
    }

    #[test]
    fn taper_bandwidth_and_seam() {
        let g = Grid::new(20.0, 256).unwrap();
        let u = tapered_random(&g, 36, 4, 3, 1.0).unwrap();
        assert_eq!(u.bandwidth(1e-12), 40);
        assert!(u.samples()[0].abs() < 1e-300);
    }

    #[test]
    fn resample_round_trip() {
        let g = Grid::new(3.0, 32).unwrap();
        let u = band_limited_random(&g, 10, 1, 1.0).unwrap();
        let fine = u.resample(96).unwrap();
        let back = fine.resample(32).unwrap();
        assert!(u.sub(&back).max_abs() < 1e-13);
        // coarse samples reappear on the refined grid
        for j in 0..32 {
            assert!((fine.samples()[3 * j] - u.samples()[j]).abs() < 1e-13);
        }
    }

    #[test]
    fn reflect_and_translate() {
        let g = Grid::new(2.0 * PI, 16).unwrap();
        let u = Field::from_fn(g, f64::sin);
        let r = u.reflect();
        for (x, v) in g.xs().zip(r.samples()) {
            assert!((v + x.sin()).abs() < 1e-14);
        }
        let t = u.translate_points(4);
        for (x, v) in g.xs().zip(t.samples()) {
            assert!((v - (x - PI / 2.0).sin()).abs() < 1e-14);
        }
    }
}
