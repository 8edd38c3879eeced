//! Weighted energies, smoothing integrals and checks of the weighted-energy
//! identities and auxiliary lemmas.

pub mod identities;
pub mod lemmas;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    derivative, weighted_integral, Field, Grid, SpectralQuadrature, WeightFunction,
};

pub use identities::{
    check_identity, identity_suite, write_residuals_csv, Identity, IdentityResidual,
};
pub use lemmas::{
    check_dyadic_decay, check_energy_lemma, check_linfty_trick, check_sob2,
    manufactured_energy_cases, DyadicReport, EnergyLemmaReport, LinftyReport, Manufactured,
    Sob2Report,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionalKind {
    /// `∫ (∂^l u)² w(x + νt)`.
    Energy { l: u32 },
    /// `∫₀ᵗ ∫ (∂^{l+2} u)² w′(x + ντ)`; the instantaneous value is the rate.
    Smoothing { l: u32 },
    /// `∫ u (∂^{l−1} u)² w(x + νt)`.
    Corrected { l: u32 },
    /// `∫ u³ w(x + νt)`.
    CubicDecay,
    /// `∫ (∂^m u)² w`, with `w` an `xⁿ`-type weight.
    XWeighted { m: u32 },
}

#[derive(Debug, Clone)]
pub struct WeightedFunctional {
    pub id: String,
    pub kind: FunctionalKind,
    pub weight: WeightFunction,
    pub nu: f64,
}

impl WeightedFunctional {
    pub fn new(
        id: impl Into<String>,
        kind: FunctionalKind,
        weight: WeightFunction,
        nu: f64,
    ) -> Result<Self> {
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(Error::contract(format!("ν must be ≥ 0, got {nu}")));
        }
        if let FunctionalKind::Corrected { l: 0 } = kind {
            return Err(Error::contract("corrected energy needs l ≥ 1"));
        }
        if matches!(
            kind,
            FunctionalKind::Energy { .. } | FunctionalKind::Smoothing { .. }
        ) && !weight.nondecreasing()
        {
            return Err(Error::contract(
                "energy and smoothing kinds need a nondecreasing weight",
            ));
        }
        Ok(Self {
            id: id.into(),
            kind,
            weight,
            nu,
        })
    }

    pub fn is_smoothing(&self) -> bool {
        matches!(self.kind, FunctionalKind::Smoothing { .. })
    }

    /// Instantaneous value at time `t` (the rate for the smoothing kind).
    pub fn evaluate(&self, u: &Field, t: f64) -> Result<f64> {
        let shift = self.nu * t;
        let (integrand, order) = match self.kind {
            FunctionalKind::Energy { l } | FunctionalKind::XWeighted { m: l } => {
                let d = derivative(u, l);
                (d.mul(&d), 0)
            }
            FunctionalKind::Smoothing { l } => {
                let d = derivative(u, l + 2);
                (d.mul(&d), 1)
            }
            FunctionalKind::Corrected { l } => {
                let d = derivative(u, l - 1);
                (u.mul(&d).mul(&d), 0)
            }
            FunctionalKind::CubicDecay => (u.mul(u).mul(u), 0),
        };
        if order == 0 {
            weighted_integral(&integrand, &self.weight, shift)
        } else {
            self.weight.check_window(u.grid(), shift)?;
            let grid = u.grid();
            let h = grid.h();
            Ok(h * integrand
                .samples()
                .iter()
                .enumerate()
                .map(|(j, v)| v * self.weight.value(grid.x(j), shift, 1))
                .sum::<f64>())
        }
    }
}

/// Time series of a functional; the smoothing kind is accumulated by the
/// time trapezoid rule and is nondecreasing.
#[derive(Debug, Clone)]
pub struct Tracker {
    pub functional: WeightedFunctional,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    last_rate: Option<(f64, f64)>,
    total: f64,
}

impl Tracker {
    pub fn new(functional: WeightedFunctional) -> Self {
        Self {
            functional,
            times: Vec::new(),
            values: Vec::new(),
            last_rate: None,
            total: 0.0,
        }
    }

    pub fn observe(&mut self, t: f64, u: &Field) -> Result<()> {
        let v = self.functional.evaluate(u, t)?;
        let value = if self.functional.is_smoothing() {
            if let Some((t0, r0)) = self.last_rate {
                self.total += 0.5 * (t - t0) * (r0 + v);
            }
            self.last_rate = Some((t, v));
            self.total
        } else {
            v
        };
        self.times.push(t);
        self.values.push(value);
        Ok(())
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }
}

/// Nodal weights of `w^{(order)}` (or `(w‴)²/w′`) reused across fields.
#[derive(Default)]
pub struct QuadratureCache {
    entries: Vec<(String, Arc<SpectralQuadrature>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum WeightDatum {
    Derivative(usize),
    RatioThird,
}

impl QuadratureCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn get(
        &mut self,
        w: &WeightFunction,
        shift: f64,
        grid: &Grid,
        datum: WeightDatum,
    ) -> Arc<SpectralQuadrature> {
        let key = format!("{w:?}|{shift:e}|{}|{}|{datum:?}", grid.length(), grid.len());
        if let Some((_, q)) = self.entries.iter().find(|(k, _)| *k == key) {
            return q.clone();
        }
        let q = Arc::new(match datum {
            WeightDatum::Derivative(j) => {
                SpectralQuadrature::build(grid, &w.pieces(grid, shift, j), |x| w.value(x, shift, j))
            }
            WeightDatum::RatioThird => {
                SpectralQuadrature::build(grid, &w.pieces(grid, shift, 1), |x| {
                    w.ratio_third(x, shift)
                })
            }
        });
        self.entries.push((key, q.clone()));
        q
    }
}

/// Smallest `M = N·2^j` with `M/2 > degree · bandwidth`.
pub(crate) fn padded_points(n: usize, bandwidth: usize, degree: usize) -> usize {
    let mut m = n;
    while m / 2 <= degree * bandwidth {
        m *= 2;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoffs::CutoffSpec;
    use crate::spectral::Grid;

    fn plain(eps: f64, b: f64) -> WeightFunction {
        WeightFunction::cutoff(CutoffSpec::plain(eps, b).unwrap())
    }

    #[test]
    fn evaluate_examples() {
        let g = Grid::new(10.0, 2048).unwrap();
        let one = Field::from_fn(g, |_| 1.0);
        let e = WeightedFunctional::new("e", FunctionalKind::Energy { l: 0 }, plain(1.0, 1.0), 0.0)
            .unwrap();
        assert!((e.evaluate(&one, 0.0).unwrap() - 8.5).abs() < 1e-12);
        assert_eq!(e.evaluate(&Field::zeros(g), 0.3).unwrap(), 0.0);
        for kind in [
            FunctionalKind::Smoothing { l: 1 },
            FunctionalKind::Corrected { l: 2 },
            FunctionalKind::CubicDecay,
        ] {
            let f = WeightedFunctional::new("z", kind, plain(1.0, 1.0), 0.5).unwrap();
            assert_eq!(f.evaluate(&Field::zeros(g), 0.2).unwrap(), 0.0);
        }
    }

    #[test]
    fn xweighted_bracket() {
        // smooth bump of height 1 on [3, 4]; x² ∈ [9, 16] there
        let g = Grid::new(10.0, 4096).unwrap();
        let bump = Field::from_fn(g, |x| {
            let s = CutoffSpec::plain(3.0, 0.2).unwrap();
            let r = CutoffSpec::plain(3.8, 0.2).unwrap();
            s.eval(x, 0).unwrap() * (1.0 - r.eval(x, 0).unwrap())
        });
        let w = WeightFunction::cutoff(CutoffSpec::weighted(2, 1.0, 1.0).unwrap());
        let f = WeightedFunctional::new("x", FunctionalKind::XWeighted { m: 0 }, w, 0.0).unwrap();
        let v = f.evaluate(&bump, 0.0).unwrap();
        let mass = crate::spectral::integrate(&bump.mul(&bump));
        assert!(v >= 9.0 * mass && v <= 16.0 * mass);
    }

    #[test]
    fn energy_scales_quadratically() {
        let g = Grid::new(20.0, 256).unwrap();
        let u = crate::spectral::band_limited_random(&g, 20, 3, 1.0).unwrap();
        let w = WeightFunction::cutoff_with_offset(CutoffSpec::plain(1.0, 2.0).unwrap(), -8.0);
        let f = WeightedFunctional::new("e", FunctionalKind::Energy { l: 2 }, w, 1.0).unwrap();
        let a = f.evaluate(&u, 0.5).unwrap();
        let b = f.evaluate(&u.scale(3.0), 0.5).unwrap();
        assert!((b - 9.0 * a).abs() <= 1e-12 * b.abs());
    }

    #[test]
    fn translation_covariance() {
        let g = Grid::new(20.0, 256).unwrap();
        let u = crate::spectral::tapered_random(&g, 20, 4, 8, 1.0).unwrap();
        let w = WeightFunction::cutoff_with_offset(CutoffSpec::plain(1.0, 2.0).unwrap(), -8.0);
        let f = WeightedFunctional::new("e", FunctionalKind::Energy { l: 1 }, w, 1.0).unwrap();
        let k = 13;
        let s = k as f64 * g.h();
        let shifted = f.evaluate(&u, s).unwrap();
        let moved = f.evaluate(&u.translate_points(k), 0.0).unwrap();
        assert!((shifted - moved).abs() <= 1e-10 * shifted.abs().max(1.0));
    }

    #[test]
    fn smoothing_tracker_is_monotone() {
        let g = Grid::new(20.0, 128).unwrap();
        let w = WeightFunction::cutoff_with_offset(CutoffSpec::plain(1.0, 2.0).unwrap(), -8.0);
        let f = WeightedFunctional::new("s", FunctionalKind::Smoothing { l: 0 }, w, 1.0).unwrap();
        let mut tr = Tracker::new(f);
        for (i, seed) in (0..5).enumerate() {
            let u = crate::spectral::band_limited_random(&g, 20, seed, 1.0).unwrap();
            tr.observe(0.1 * i as f64, &u).unwrap();
        }
        assert!(tr.is_nondecreasing());
        assert!(tr.values[4] > 0.0);
    }

    #[test]
    fn sign_flag_required() {
        let w = WeightFunction::custom(crate::spectral::weight::CustomWeight::new(
            "f",
            false,
            vec![],
            |_, _| 1.0,
        ));
        assert!(WeightedFunctional::new("e", FunctionalKind::Energy { l: 0 }, w, 0.0).is_err());
    }
}
