//! Pinned solver benchmark problems shared by tests and the acceptance suite.

use crate::error::Result;
use crate::models::{eval_rhs_with, Dealias, Model};
use crate::spectral::{band_limited_random, derivative, integrate, Field, Grid};

use super::{linear_exact, simulate, Scheme, SolverConfig};

pub fn gaussian(grid: Grid, amp: f64, center: f64, width: f64) -> Field {
    Field::from_fn(grid, |x| amp * (-((x - center) / width).powi(2)).exp())
}

/// `3c sech²(½√c (x − x0))`, a travelling wave of `u_t + u_xxx + u u_x = 0`.
pub fn kdv_soliton(grid: Grid, c: f64, x0: f64) -> Field {
    Field::from_fn(grid, |x| {
        3.0 * c / (0.5 * c.sqrt() * (x - x0)).cosh().powi(2)
    })
}

/// Max error of both schemes against [`linear_exact`] at `t = 1`.
pub fn linear_flow_error() -> Result<f64> {
    let g = Grid::new(2.0 * std::f64::consts::PI, 64)?;
    let u0 = band_limited_random(&g, 12, 1, 1.0)?;
    let (a5, a3, a1) = (1.0, -0.5, 0.2);
    let exact = linear_exact(&u0, 1.0, a5, a3, a1);
    let mut worst: f64 = 0.0;
    for scheme in [Scheme::Etdrk4, Scheme::Ifrk4] {
        let cfg = SolverConfig::new(1e-2, 1.0)
            .with_scheme(scheme)
            .with_store(false);
        let tr = simulate(&Model::linear(a5, a3, a1), &u0, &cfg, &mut [])?;
        worst = worst.max(tr.final_state.sub(&exact).max_abs());
    }
    Ok(worst)
}

/// L∞ error of a unit-speed KdV soliton after `t = 1` on `L = 40`, `N = 1024`.
pub fn soliton_transit_error() -> Result<f64> {
    let g = Grid::new(40.0, 1024)?;
    let u0 = kdv_soliton(g, 1.0, 15.0);
    let cfg = SolverConfig::new(1e-3, 1.0).with_store(false);
    let tr = simulate(&Model::kdv(), &u0, &cfg, &mut [])?;
    Ok(tr.final_state.sub(&kdv_soliton(g, 1.0, 16.0)).max_abs())
}

fn order_problem(dt: f64) -> Result<Field> {
    let g = Grid::new(20.0, 32)?;
    let u0 = gaussian(g, 1.0, 10.0, 2.0);
    let cfg = SolverConfig::new(dt, 0.2)
        .with_dealias(Dealias::Padded)
        .with_store(false);
    Ok(simulate(&Model::kdv5(), &u0, &cfg, &mut [])?.final_state)
}

/// Observed ETDRK4 orders on kdv5 for `dt = 1e-3, 5e-4, 2.5e-4` against a
/// `dt/8` reference.
pub fn etdrk4_observed_orders() -> Result<Vec<f64>> {
    let dts = [1e-3, 5e-4, 2.5e-4];
    let reference = order_problem(dts[2] / 8.0)?;
    let errs = dts
        .iter()
        .map(|&dt| Ok(order_problem(dt)?.sub(&reference).max_abs()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

/// `(relative L² drift, absolute mass drift)` for kdv5 on `N = 512`,
/// `dt = 1e-5`, `t_end = 0.1`.
pub fn kdv5_conservation() -> Result<(f64, f64)> {
    let g = Grid::new(40.0, 512)?;
    let u0 = gaussian(g, 1.0, 20.0, 2.0);
    let cfg = SolverConfig::new(1e-5, 0.1)
        .with_dealias(Dealias::Padded)
        .with_store(false);
    let u = simulate(&Model::kdv5(), &u0, &cfg, &mut [])?.final_state;
    let l2_0 = integrate(&u0.mul(&u0));
    let l2 = integrate(&u.mul(&u));
    Ok((
        (l2 - l2_0).abs() / l2_0,
        (integrate(&u) - integrate(&u0)).abs(),
    ))
}

/// Forward run, reflection `x → −x`, forward run, reflection; max error.
pub fn reversibility_error() -> Result<f64> {
    let g = Grid::new(40.0, 256)?;
    let u0 = gaussian(g, 0.5, 20.0, 2.0);
    let cfg = SolverConfig::new(1e-4, 0.05)
        .with_dealias(Dealias::Padded)
        .with_store(false);
    let model = Model::kdv5();
    let fwd = simulate(&model, &u0, &cfg, &mut [])?.final_state;
    let back = simulate(&model, &fwd.reflect(), &cfg, &mut [])?
        .final_state
        .reflect();
    Ok(back.sub(&u0).max_abs())
}

/// Worst relative residual of `∫u·u_t = (2c3 − c2)∫u u_x u_xx` over
/// pseudo-random `(c1, c2, c3)` and fields.
pub fn l2_balance_residual(cases: u64) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    let g = Grid::new(15.0, 128)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for seed in 0..cases {
        let (c1, c2, c3) = (
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
        );
        let u = band_limited_random(&g, 20, seed, 1.0)?;
        let m = Model::general_c(c1, c2, c3);
        let lhs = integrate(&u.mul(&eval_rhs_with(&m, &u, Dealias::Padded)?));
        let t = integrate(&u.mul(&derivative(&u, 1)).mul(&derivative(&u, 2)));
        let want = (2.0 * c3 - c2) * t;
        let scale = ((2.0 * c3 - c2) * t).abs().max(lhs.abs()).max(1e-300);
        worst = worst.max((lhs - want).abs() / scale);
    }
    Ok(worst)
}
