//! Initial data builders.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cutoffs::CutoffSpec;
use crate::error::{Error, Result};
use crate::solver::benchmarks::{gaussian, kdv_soliton};
use crate::solver::TAIL_WARNING;
use crate::spectral::{Field, Grid};

/// Offset of the tail exponent above `l_break`.
pub const ROUGH_TAIL_OFFSET: f64 = 0.6;
/// Width of the smooth switches of the one-sided data.
const SWITCH_WIDTH: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", content = "params", rename_all = "snake_case")]
pub enum DataSpec {
    Zero,
    /// KdV profile `3c sech²(½√c (x − x0))`.
    Soliton {
        c: f64,
        x0: f64,
    },
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// Smooth Gaussian plus a perturbation with `|û_k| ∝ ⟨k⟩^{−(l_break+0.6)}`
    /// and random phases, cut off left of `x0`.
    SmoothRightRoughLeft {
        l_break: u32,
        x0: f64,
        amplitude: f64,
        center: f64,
        width: f64,
        rough_amplitude: f64,
        seed: u64,
    },
    /// `A cos(ω y) ⟨y⟩^{−(n/2+2)}` with `y = (x − origin)/scale`, switched on
    /// just left of `origin` and off before the seam.
    OneSidedDecay {
        n: u32,
        origin: f64,
        amplitude: f64,
        frequency: f64,
        #[serde(default = "unit_scale")]
        scale: f64,
    },
}

impl DataSpec {
    pub fn id(&self) -> &'static str {
        match self {
            DataSpec::Zero => "zero",
            DataSpec::Soliton { .. } => "soliton",
            DataSpec::Gaussian { .. } => "gaussian",
            DataSpec::SmoothRightRoughLeft { .. } => "smooth_right_rough_left",
            DataSpec::OneSidedDecay { .. } => "one_sided_decay",
        }
    }

    pub fn is_rough(&self) -> bool {
        matches!(self, DataSpec::SmoothRightRoughLeft { .. })
    }
}

pub fn build_data(spec: &DataSpec, grid: &Grid) -> Result<Field> {
    let l = grid.length();
    let u = match *spec {
        DataSpec::Zero => Field::zeros(*grid),
        DataSpec::Soliton { c, x0 } => {
            if !(c > 0.0) {
                return Err(Error::contract("soliton speed must be > 0"));
            }
            kdv_soliton(*grid, c, x0)
        }
        DataSpec::Gaussian {
            amplitude,
            center,
            width,
        } => gaussian(*grid, amplitude, center, width),
        DataSpec::SmoothRightRoughLeft {
            l_break,
            x0,
            amplitude,
            center,
            width,
            rough_amplitude,
            seed,
        } => {
            if !(x0 > 4.0 && x0 < l - 4.0) {
                return Err(Error::contract("x0 must leave room for the cutoffs"));
            }
            let base = gaussian(*grid, amplitude, center, width);
            let rough = power_law_field(
                grid,
                l_break as f64 + ROUGH_TAIL_OFFSET,
                rough_amplitude,
                seed,
            );
            let on = CutoffSpec::plain(2.0, 1.0)?;
            let off = CutoffSpec::plain(x0 - 2.0, 1.0)?;
            let left = Field::from_fn(*grid, |x| on.value(x, 0) * (1.0 - off.value(x, 0)));
            return Ok(base.add(&rough.mul(&left)));
        }
        DataSpec::OneSidedDecay {
            n,
            origin,
            amplitude,
            frequency,
            scale,
        } => {
            if !(scale > 0.0 && origin > 4.0 * scale && origin < l - 8.0) {
                return Err(Error::contract("origin must leave room for the switches"));
            }
            let p = 0.5 * n as f64 + 2.0;
            let w = SWITCH_WIDTH * scale;
            Field::from_fn(*grid, |x| {
                let y = (x - origin) / scale;
                let on = 0.5 * (1.0 + ((x - origin + 1.5 * scale) / w).tanh());
                let off = 0.5 * (1.0 - ((x - (l - 4.0)) / SWITCH_WIDTH).tanh());
                amplitude * (frequency * y).cos() * (1.0 + y * y).powf(-0.5 * p) * on * off
            })
        }
    };
    let tail = u.spectral_tail();
    if tail > TAIL_WARNING {
        return Err(Error::contract(format!(
            "{} data under-resolved: spectral tail {tail:.3e}",
            spec.id()
        )));
    }
    Ok(u)
}

fn unit_scale() -> f64 {
    1.0
}

/// Real field with `|û_m| = a ⟨k_m⟩^{−decay}` for `0 < |m| < N/2`.
fn power_law_field(grid: &Grid, decay: f64, a: f64, seed: u64) -> Field {
    let n = grid.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    for m in 1..n / 2 {
        let k = grid.wavenumber(m);
        let z = Complex64::from_polar(
            a * (1.0 + k * k).powf(-0.5 * decay),
            2.0 * std::f64::consts::PI * rng.gen::<f64>(),
        );
        c[m] = z;
        c[n - m] = z.conj();
    }
    Field::from_spectrum(*grid, &c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{sobolev_norm, weighted_integral, WeightFunction};

    fn rough(n: usize) -> Field {
        let g = Grid::new(40.0, n).unwrap();
        let spec = DataSpec::SmoothRightRoughLeft {
            l_break: 3,
            x0: 20.0,
            amplitude: 0.5,
            center: 28.0,
            width: 2.0,
            rough_amplitude: 0.01,
            seed: 5,
        };
        build_data(&spec, &g).unwrap()
    }

    #[test]
    fn gaussian_is_smooth() {
        let g = Grid::new(40.0, 512).unwrap();
        let u = build_data(
            &DataSpec::Gaussian {
                amplitude: 1.0,
                center: 20.0,
                width: 2.0,
            },
            &g,
        )
        .unwrap();
        for s in 0..=8 {
            assert!(sobolev_norm(&u, s as f64).is_finite());
        }
        let coarse = Grid::new(40.0, 32).unwrap();
        let narrow = DataSpec::Gaussian {
            amplitude: 1.0,
            center: 20.0,
            width: 0.1,
        };
        assert!(build_data(&narrow, &coarse).is_err());
    }

    #[test]
    fn rough_left_smooth_right() {
        let w = WeightFunction::cutoff_with_offset(CutoffSpec::plain(1.0, 1.0).unwrap(), -20.0);
        let windowed_h3 = |u: &Field| {
            (0..=3)
                .map(|m| {
                    let d = crate::spectral::derivative(u, m);
                    weighted_integral(&d.mul(&d), &w, 0.0).unwrap()
                })
                .sum::<f64>()
                .sqrt()
        };
        let g = Grid::new(40.0, 1024).unwrap();
        let base = gaussian(g, 0.5, 28.0, 2.0);
        let u = rough(1024);
        assert!(windowed_h3(&u) <= 10.0 * windowed_h3(&base));
        // increments of the squared H⁴ norm grow like N^{1.8}
        let h4: Vec<f64> = [256, 512, 1024, 2048, 4096]
            .iter()
            .map(|&n| sobolev_norm(&rough(n), 4.0).powi(2))
            .collect();
        let inc: Vec<f64> = h4.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(inc.windows(2).all(|w| w[1] > 2.0 * w[0]), "{h4:?}");
    }

    #[test]
    fn one_sided_decay_converges() {
        let g = Grid::new(40.0, 1024).unwrap();
        let origin = 10.0;
        let u = build_data(
            &DataSpec::OneSidedDecay {
                n: 2,
                origin,
                amplitude: 1.0,
                frequency: 1.0,
                scale: 1.0,
            },
            &g,
        )
        .unwrap();
        let partial = |x_end: f64| {
            g.xs()
                .zip(u.samples())
                .filter(|(x, _)| *x > origin && *x - origin < x_end)
                .map(|(x, v)| (x - origin).powi(2) * v * v)
                .sum::<f64>()
                * g.h()
        };
        let full = partial(20.0);
        assert!((full - partial(16.0)).abs() <= 0.01 * full);
    }

    #[test]
    fn toml_layout() {
        let spec: DataSpec = toml::from_str(
            "id = \"gaussian\"\n[params]\namplitude = 1.0\ncenter = 2.0\nwidth = 3.0\n",
        )
        .unwrap();
        assert_eq!(spec.id(), "gaussian");
        let zero: DataSpec = toml::from_str("id = \"zero\"\n").unwrap();
        assert_eq!(zero, DataSpec::Zero);
    }
}
