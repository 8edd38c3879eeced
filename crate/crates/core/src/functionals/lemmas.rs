//! Numerical checks of the auxiliary inequalities.

use crate::cutoffs::CutoffSpec;
use crate::error::{Error, Result};
use crate::spectral::{derivative, Field, Grid, WeightFunction};

use super::identities::IdentityResidual;
use super::{padded_points, QuadratureCache, WeightDatum};

/// Slack tolerance of the energy inequality, relative to its largest term.
pub const ENERGY_LEMMA_TOLERANCE: f64 = 1e-8;
/// Largest admissible constant in the L∞ trick.
pub const LINFTY_CONSTANT_BOUND: f64 = 8.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLemmaReport {
    pub times: Vec<f64>,
    /// `RHS − LHS` at each time.
    pub slacks: Vec<f64>,
    pub worst_slack: f64,
    /// Largest absolute term over all times.
    pub scale: f64,
    /// Sides at the time of the worst slack.
    pub residual: IdentityResidual,
}

impl EnergyLemmaReport {
    pub fn holds(&self) -> bool {
        self.worst_slack >= -ENERGY_LEMMA_TOLERANCE * self.scale.max(1.0)
    }
}

/// Space-time data with `u_t − ∂⁵u = F` exactly.
pub struct Manufactured<'a> {
    pub u: &'a dyn Fn(f64, f64) -> f64,
    pub u_t: &'a dyn Fn(f64, f64) -> f64,
    pub forcing: &'a dyn Fn(f64, f64) -> f64,
}

impl Manufactured<'_> {
    /// Largest `|u_t − ∂⁵u − F|` on `grid` at time `t`.
    pub fn defect(&self, grid: &Grid, t: f64) -> f64 {
        let u = Field::from_fn(*grid, |x| (self.u)(x, t));
        let d5 = derivative(&u, 5);
        grid.xs()
            .zip(d5.samples())
            .map(|(x, d)| ((self.u_t)(x, t) - d - (self.forcing)(x, t)).abs())
            .fold(0.0, f64::max)
    }
}

/// Checks, at each time, `d/dt ∫u²ψ + ∫(∂²u)²ψ′ ≤ ∫u²{ψ_t + (3/2)ψ⁽⁵⁾ +
/// (25/16)(ψ‴)²/ψ′} + 2∫uFψ` with `ψ(x, t) = psi(x + νt)`.
pub fn check_energy_lemma(
    data: &Manufactured<'_>,
    grid: &Grid,
    psi: &WeightFunction,
    nu: f64,
    times: &[f64],
) -> Result<EnergyLemmaReport> {
    if times.is_empty() {
        return Err(Error::contract("no sample times"));
    }
    let mut cache = QuadratureCache::new();
    let mut slacks = Vec::with_capacity(times.len());
    let mut scale: f64 = 0.0;
    let mut worst: Option<(f64, f64, f64, f64)> = None;
    for &t in times {
        let shift = nu * t;
        psi.check_sign(grid, shift)?;
        let u = Field::from_fn(*grid, |x| (data.u)(x, t));
        let m = padded_points(grid.len(), u.bandwidth(1e-13).max(1), 2);
        let fine_grid = grid.with_points(m)?;
        psi.check_window(&fine_grid, shift)?;
        let uf = u.resample(m)?;
        let ut = Field::from_fn(fine_grid, |x| (data.u_t)(x, t));
        let f = Field::from_fn(fine_grid, |x| (data.forcing)(x, t));
        let uxx = derivative(&uf, 2);
        let mut rule = |datum| cache.get(psi, shift, &fine_grid, datum);
        let (w0, w1, w5, wr) = (
            rule(WeightDatum::Derivative(0)),
            rule(WeightDatum::Derivative(1)),
            rule(WeightDatum::Derivative(5)),
            rule(WeightDatum::RatioThird),
        );
        let u2 = uf.mul(&uf);
        let lhs_terms = [
            2.0 * w0.integrate(uf.mul(&ut).samples()),
            nu * w1.integrate(u2.samples()),
            w1.integrate(uxx.mul(&uxx).samples()),
        ];
        let rhs_terms = [
            nu * w1.integrate(u2.samples()),
            1.5 * w5.integrate(u2.samples()),
            25.0 / 16.0 * wr.integrate(u2.samples()),
            2.0 * w0.integrate(uf.mul(&f).samples()),
        ];
        let lhs: f64 = lhs_terms.iter().sum();
        let rhs: f64 = rhs_terms.iter().sum();
        let s = lhs_terms
            .iter()
            .chain(&rhs_terms)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        scale = scale.max(s);
        let slack = rhs - lhs;
        if worst.is_none_or(|w| slack < w.0) {
            worst = Some((slack, lhs, rhs, s));
        }
        slacks.push(slack);
    }
    let (worst_slack, lhs, rhs, s) = worst.expect("at least one time");
    Ok(EnergyLemmaReport {
        times: times.to_vec(),
        slacks,
        worst_slack,
        scale,
        residual: IdentityResidual::from_sides("energy_lemma".into(), 0, lhs, rhs, s, "u_t=+d5u+F"),
    })
}

/// Pinned manufactured cases on `[0, 2π)`: `u = e^{−t} cos x` against a
/// travelling cutoff, against a constant weight, and `u ≡ 0`.
pub fn manufactured_energy_cases() -> Result<Vec<(String, EnergyLemmaReport)>> {
    let u = |x: f64, t: f64| (-t).exp() * x.cos();
    let ut = |x: f64, t: f64| -(-t).exp() * x.cos();
    let f = |x: f64, t: f64| (-t).exp() * (x.sin() - x.cos());
    let zero = |_: f64, _: f64| 0.0;
    let cos = Manufactured {
        u: &u,
        u_t: &ut,
        forcing: &f,
    };
    let nothing = Manufactured {
        u: &zero,
        u_t: &zero,
        forcing: &zero,
    };
    let grid = Grid::new(2.0 * std::f64::consts::PI, 64)?;
    let psi = WeightFunction::cutoff_with_offset(CutoffSpec::plain(1.0, 1.0)?, -1.5);
    let times = [0.0, 0.25, 0.5, 1.0];
    Ok(vec![
        (
            "energy_cutoff".into(),
            check_energy_lemma(&cos, &grid, &psi, 0.5, &times)?,
        ),
        (
            "energy_constant".into(),
            check_energy_lemma(&cos, &grid, &WeightFunction::Constant(1.0), 0.0, &times)?,
        ),
        (
            "energy_zero".into(),
            check_energy_lemma(&nothing, &grid, &psi, 0.0, &times)?,
        ),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinftyReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; zero when both vanish.
    pub constant: f64,
    pub pass: bool,
}

/// Measures `C` in `∫|∂^{j1}u ∂^{j2}u ∂^{j3}u| ψ ≤ C · {∫(∂^{1+j1}u)²ψ +
/// ∫(∂^{j1}u)²ψ + ∫(∂^{j1}u)²|ψ′|} · ∫(∂^{j2}u)² ψ(·; ε/5, 4ε/5) +
/// ∫(∂^{j3}u)²ψ`.
pub fn check_linfty_trick(
    u: &Field,
    psi: &WeightFunction,
    j1: u32,
    j2: u32,
    j3: u32,
) -> Result<LinftyReport> {
    let (spec, offset) = match psi {
        WeightFunction::Cutoff { spec, offset } => (*spec, *offset),
        _ => return Err(Error::contract("the L∞ trick needs a cutoff weight")),
    };
    let inner = WeightFunction::cutoff_with_offset(
        CutoffSpec::new(spec.kind, spec.eps / 5.0, 0.8 * spec.eps)?,
        offset,
    );
    let grid = *u.grid();
    let m = padded_points(grid.len(), u.bandwidth(1e-13).max(1), 3).max(4 * grid.len());
    let fine = u.resample(m)?;
    let g = *fine.grid();
    psi.check_window(&g, 0.0)?;
    inner.check_window(&g, 0.0)?;
    let d = |j: u32| derivative(&fine, j);
    let (a, a1, b, c) = (d(j1), d(j1 + 1), d(j2), d(j3));
    let h = g.h();
    let int = |f: &Field, w: &dyn Fn(f64) -> f64| -> f64 {
        h * g.xs().zip(f.samples()).map(|(x, v)| v * w(x)).sum::<f64>()
    };
    let w = |x: f64| psi.value(x, 0.0, 0);
    let wabs = |x: f64| psi.value(x, 0.0, 1).abs();
    let wi = |x: f64| inner.value(x, 0.0, 0);

    let lhs = int(&a.mul(&b).mul(&c).map(f64::abs), &w);
    let first = int(&a1.mul(&a1), &w) + int(&a.mul(&a), &w) + int(&a.mul(&a), &wabs);
    let rhs = first * int(&b.mul(&b), &wi) + int(&c.mul(&c), &w);
    let constant = if lhs == 0.0 {
        0.0
    } else if rhs > 0.0 {
        lhs / rhs
    } else {
        f64::INFINITY
    };
    Ok(LinftyReport {
        lhs,
        rhs,
        constant,
        pass: constant.is_finite() && constant <= LINFTY_CONSTANT_BOUND,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicReport {
    /// Dyadic endpoints `a_j = 2^j` up to `X`.
    pub points: Vec<f64>,
    /// `∫₀^{a_j} f / a_j^α`.
    pub growth: Vec<f64>,
    /// Log-log slope of `∫₀^a f` over the upper half of the dyadic points.
    pub growth_exponent: f64,
    pub hypothesis_holds: bool,
    /// `∫_{a_{j−1}}^{a_j} f/⟨x⟩^{α+ε}` with `a_{−1} = 0`.
    pub pieces: Vec<f64>,
    /// Ratios of consecutive pieces.
    pub ratios: Vec<f64>,
    /// Dyadic point after which every ratio is below one.
    pub x_star: Option<f64>,
    pub weighted_integral: f64,
    pub pass: bool,
}

/// Slack on the fitted growth exponent before the hypothesis counts as violated.
const GROWTH_SLACK: f64 = 0.1;

/// Dyadic-decomposition check for samples `f(k·dx)`, `k = 0..`, on `[0, X]`.
pub fn check_dyadic_decay(samples: &[f64], dx: f64, alpha: f64, eps: f64) -> Result<DyadicReport> {
    if samples.len() < 2 || !(dx > 0.0) || !(eps > 0.0) {
        return Err(Error::contract("need ≥ 2 samples, dx > 0 and ε > 0"));
    }
    let x_end = dx * (samples.len() - 1) as f64;
    if x_end < 4.0 {
        return Err(Error::contract("need X ≥ 4 for a dyadic decomposition"));
    }
    let cumulative = |weight: &dyn Fn(f64) -> f64| -> Vec<f64> {
        let mut acc = vec![0.0; samples.len()];
        for k in 1..samples.len() {
            let (x0, x1) = ((k - 1) as f64 * dx, k as f64 * dx);
            acc[k] =
                acc[k - 1] + 0.5 * dx * (samples[k - 1] * weight(x0) + samples[k] * weight(x1));
        }
        acc
    };
    let at = |acc: &[f64], a: f64| -> f64 {
        let s = a / dx;
        let k = (s.floor() as usize).min(acc.len() - 2);
        let frac = s - k as f64;
        acc[k] + frac * (acc[k + 1] - acc[k])
    };
    let plain = cumulative(&|_| 1.0);
    let weighted = cumulative(&|x| (1.0 + x * x).powf(-0.5 * (alpha + eps)));

    let mut points = Vec::new();
    let mut a = 1.0;
    while a <= x_end * (1.0 + 1e-12) {
        points.push(a.min(x_end));
        a *= 2.0;
    }
    let growth: Vec<f64> = points
        .iter()
        .map(|&a| at(&plain, a) / a.powf(alpha))
        .collect();
    let upper = &points[points.len() / 2..];
    let growth_exponent = if upper.len() >= 2 && at(&plain, upper[0]) > 0.0 {
        let (a0, a1) = (upper[0], upper[upper.len() - 1]);
        (at(&plain, a1) / at(&plain, a0)).ln() / (a1 / a0).ln()
    } else {
        0.0
    };
    let negative = samples.iter().any(|&v| v < 0.0);
    let hypothesis_holds = !negative && growth_exponent <= alpha + GROWTH_SLACK;

    let mut pieces = Vec::with_capacity(points.len());
    let mut prev = 0.0;
    for &a in &points {
        let v = at(&weighted, a);
        pieces.push(v - prev);
        prev = v;
    }
    let ratios: Vec<f64> = pieces
        .windows(2)
        .map(|w| {
            if w[0] > 0.0 {
                w[1] / w[0]
            } else if w[1] > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .collect();
    let mut x_star = None;
    if !ratios.is_empty() {
        let mut first_good = ratios.len();
        while first_good > 0 && ratios[first_good - 1] < 1.0 {
            first_good -= 1;
        }
        if first_good < ratios.len() {
            x_star = Some(points[first_good]);
        }
    }
    let weighted_integral = at(&weighted, x_end);
    Ok(DyadicReport {
        points,
        growth,
        growth_exponent,
        hypothesis_holds,
        pass: hypothesis_holds && x_star.is_some() && weighted_integral.is_finite(),
        pieces,
        ratios,
        x_star,
        weighted_integral,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sob2Report {
    pub sup: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Checks `sup|f| ≤ ∫∫|f_xt| + (1/TL)∫∫|f| + (1/L)∫∫|f_t| + (1/T)∫∫|f_x|` on
/// `[0, L] × [0, T]` with an `n × n` trapezoid grid.
#[allow(clippy::too_many_arguments)]
pub fn check_sob2(
    f: &dyn Fn(f64, f64) -> f64,
    fx: &dyn Fn(f64, f64) -> f64,
    ft: &dyn Fn(f64, f64) -> f64,
    fxt: &dyn Fn(f64, f64) -> f64,
    length: f64,
    time: f64,
    n: usize,
) -> Result<Sob2Report> {
    if n < 2 || !(length > 0.0) || !(time > 0.0) {
        return Err(Error::contract("need n ≥ 2 and a nondegenerate rectangle"));
    }
    let (hx, ht) = (length / (n - 1) as f64, time / (n - 1) as f64);
    let edge = |k: usize| if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
    let mut sup: f64 = 0.0;
    let mut acc = [0.0f64; 4];
    for i in 0..n {
        let x = i as f64 * hx;
        for k in 0..n {
            let t = k as f64 * ht;
            let w = edge(i) * edge(k) * hx * ht;
            let v = f(x, t).abs();
            sup = sup.max(v);
            acc[0] += w * fxt(x, t).abs();
            acc[1] += w * v;
            acc[2] += w * ft(x, t).abs();
            acc[3] += w * fx(x, t).abs();
        }
    }
    let rhs = acc[0] + acc[1] / (time * length) + acc[2] / length + acc[3] / time;
    let slack = rhs - sup;
    Ok(Sob2Report {
        sup,
        rhs,
        slack,
        pass: slack >= -1e-12 * sup.max(1.0),
    })
}
