//! Weighted-energy identities checked as algebraic consequences of the
//! governing equation on arbitrary band-limited fields.
//!
//! The left side is `d/dt ∫ I(u) w(x + νt)` with `u_t` substituted
//! spectrally; the right side is the sum of the displayed terms. Products are
//! formed on a grid fine enough that every integrand is resolved exactly, and
//! integrals against `w^{(j)}` use [`SpectralQuadrature`], so residuals sit
//! at roundoff.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{padded_points, QuadratureCache, WeightDatum};
use crate::error::{Error, Result};
use crate::spectral::{
    derivative, tapered_random, Field, Grid, SpectralQuadrature, WeightFunction,
};

/// Convention of the fifth-order identities.
pub const CONVENTION_KWON: &str = "u_t=+d5u+u*d3u";
/// Convention of the Kato identity.
pub const CONVENTION_KATO: &str = "u_t=-d3u-u*d1u";

/// Fixed gate on relative identity residuals.
pub const IDENTITY_TOLERANCE: f64 = 1e-8;
/// Absolute floor under which a residual counts as converged.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identity {
    /// `d/dt ∫ (∂^k u)² ψ` under KdV.
    Kato { k: u32 },
    /// `d/dt ∫ u (∂u)² χ`.
    KwonL1,
    /// `d/dt ∫ u (∂²u)² χ`.
    KwonL2,
    /// `d/dt ∫ u³ χ_n`.
    Decay { n: u32 },
}

impl Identity {
    /// Identities exercised by the suite.
    pub fn all() -> Vec<Identity> {
        vec![
            Identity::Kato { k: 1 },
            Identity::Kato { k: 2 },
            Identity::Kato { k: 3 },
            Identity::KwonL1,
            Identity::KwonL2,
            Identity::Decay { n: 1 },
            Identity::Decay { n: 2 },
        ]
    }

    pub fn convention(&self) -> &'static str {
        match self {
            Identity::Kato { .. } => CONVENTION_KATO,
            _ => CONVENTION_KWON,
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Identity::Kato { k } => write!(f, "kato_{k}"),
            Identity::KwonL1 => write!(f, "kwon_l1"),
            Identity::KwonL2 => write!(f, "kwon_l2"),
            Identity::Decay { n } => write!(f, "decay_{n}"),
        }
    }
}

impl FromStr for Identity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |rest: &str| {
            rest.parse::<u32>()
                .map_err(|_| Error::Config(format!("bad identity id {s:?}")))
        };
        match s {
            "kwon_l1" => Ok(Identity::KwonL1),
            "kwon_l2" => Ok(Identity::KwonL2),
            _ => {
                if let Some(rest) = s.strip_prefix("kato_") {
                    let k = parse(rest)?;
                    if k == 0 {
                        return Err(Error::Config("kato_k needs k ≥ 1".into()));
                    }
                    Ok(Identity::Kato { k })
                } else if let Some(rest) = s.strip_prefix("decay_") {
                    let n = parse(rest)?;
                    if n == 0 {
                        return Err(Error::Config("decay_n needs n ≥ 1".into()));
                    }
                    Ok(Identity::Decay { n })
                } else {
                    Err(Error::Config(format!("unknown identity id {s:?}")))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub id: String,
    pub seed: u64,
    /// Largest absolute term on either side.
    pub scale: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub convention: String,
}

impl IdentityResidual {
    pub(crate) fn from_sides(
        id: String,
        seed: u64,
        lhs: f64,
        rhs: f64,
        scale: f64,
        convention: &str,
    ) -> Self {
        let abs_residual = (lhs - rhs).abs();
        Self {
            id,
            seed,
            scale,
            abs_residual,
            rel_residual: abs_residual / scale.max(1e-300),
            convention: convention.to_string(),
        }
    }

    pub fn passes(&self) -> bool {
        self.rel_residual <= IDENTITY_TOLERANCE || self.abs_residual <= RESIDUAL_FLOOR
    }
}

/// Signed terms of one side of an identity.
#[derive(Default)]
struct Side {
    terms: Vec<f64>,
}

impl Side {
    fn push(&mut self, v: f64) {
        self.terms.push(v);
    }

    fn total(&self) -> f64 {
        self.terms.iter().sum()
    }

    fn scale(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Derivatives of `u` on the padded grid together with the weight rules.
struct Workspace {
    d: Vec<Field>,
    rules: Vec<std::sync::Arc<SpectralQuadrature>>,
}

impl Workspace {
    fn new(
        u: &Field,
        weight: &WeightFunction,
        cache: &mut QuadratureCache,
        max_derivative: u32,
        max_weight_order: usize,
        degree: usize,
    ) -> Result<Self> {
        let n = u.grid().len();
        let bandwidth = u.bandwidth(1e-13).max(1);
        if 4 * bandwidth > n {
            return Err(Error::contract(format!(
                "field bandwidth {bandwidth} exceeds N/4 = {}",
                n / 4
            )));
        }
        let m = padded_points(n, bandwidth, degree);
        let fine = u.resample(m)?;
        let grid: Grid = *fine.grid();
        weight.check_window(&grid, 0.0)?;
        let d = (0..=max_derivative).map(|j| derivative(&fine, j)).collect();
        let rules = (0..=max_weight_order)
            .map(|j| cache.get(weight, 0.0, &grid, WeightDatum::Derivative(j)))
            .collect();
        Ok(Self { d, rules })
    }

    fn u(&self, j: usize) -> &Field {
        &self.d[j]
    }

    /// `∫ Π fields · w^{(order)}`.
    fn int(&self, fields: &[&Field], order: usize) -> f64 {
        let mut prod = fields[0].clone();
        for f in &fields[1..] {
            prod = prod.mul(f);
        }
        self.rules[order].integrate(prod.samples())
    }
}

/// Residual of `identity` for the field `u` against `weight` translated at
/// speed `nu` (evaluated at `t = 0`).
pub fn check_identity(
    identity: Identity,
    u: &Field,
    weight: &WeightFunction,
    nu: f64,
    cache: &mut QuadratureCache,
) -> Result<IdentityResidual> {
    if let (Identity::Decay { n }, WeightFunction::Cutoff { spec, .. }) = (identity, weight) {
        if spec.weight_power() != n {
            return Err(Error::contract(format!(
                "decay_{n} needs a χ_{n} weight, got power {}",
                spec.weight_power()
            )));
        }
    }
    let (lhs, rhs) = match identity {
        Identity::Kato { k } => kato(k, u, weight, nu, cache)?,
        Identity::KwonL1 => kwon_l1(u, weight, nu, cache)?,
        Identity::KwonL2 => kwon_l2(u, weight, nu, cache)?,
        Identity::Decay { .. } => decay(u, weight, nu, cache)?,
    };
    let scale = lhs.scale().max(rhs.scale());
    Ok(IdentityResidual::from_sides(
        identity.to_string(),
        0,
        lhs.total(),
        rhs.total(),
        scale,
        identity.convention(),
    ))
}

fn kato(
    k: u32,
    u: &Field,
    w: &WeightFunction,
    nu: f64,
    cache: &mut QuadratureCache,
) -> Result<(Side, Side)> {
    let ws = Workspace::new(u, w, cache, k + 3, 3, 3)?;
    let k = k as usize;
    let u0 = ws.u(0);
    let dk = ws.u(k);
    let dk1 = ws.u(k + 1);
    let uux = u0.mul(ws.u(1));
    // ∂^k u_t with u_t = −u_xxx − u u_x
    let dk_ut = ws.u(k + 3).add(&derivative(&uux, k as u32)).scale(-1.0);

    let mut lhs = Side::default();
    lhs.push(2.0 * ws.int(&[dk, &dk_ut], 0));
    lhs.push(3.0 * ws.int(&[dk1, dk1], 1));
    lhs.push(nu * ws.int(&[dk, dk], 1));

    let commutator = derivative(&uux, k as u32).sub(&u0.mul(dk1));
    let mut rhs = Side::default();
    rhs.push(ws.int(&[dk, dk], 3));
    rhs.push(ws.int(&[u0, dk, dk], 1));
    rhs.push(ws.int(&[ws.u(1), dk, dk], 0));
    rhs.push(-2.0 * ws.int(&[dk, &commutator], 0));
    rhs.push(nu * ws.int(&[dk, dk], 1));
    Ok((lhs, rhs))
}

/// `u_t = ∂⁵u + u ∂³u` on the padded grid.
fn kwon_rate(ws: &Workspace) -> Field {
    ws.u(5).add(&ws.u(0).mul(ws.u(3)))
}

fn kwon_l1(
    u: &Field,
    w: &WeightFunction,
    nu: f64,
    cache: &mut QuadratureCache,
) -> Result<(Side, Side)> {
    let ws = Workspace::new(u, w, cache, 5, 5, 4)?;
    let (u0, u1, u2, u3) = (ws.u(0), ws.u(1), ws.u(2), ws.u(3));
    let p = kwon_rate(&ws);
    let p1 = derivative(&p, 1);

    let mut lhs = Side::default();
    lhs.push(ws.int(&[&p, u1, u1], 0));
    lhs.push(2.0 * ws.int(&[u0, u1, &p1], 0));
    lhs.push(nu * ws.int(&[u0, u1, u1], 1));

    let mut rhs = Side::default();
    rhs.push(-5.0 * ws.int(&[u1, u3, u3], 0));
    rhs.push(-5.0 * ws.int(&[u0, u3, u3], 1));
    rhs.push(25.0 / 3.0 * ws.int(&[u2, u2, u2], 1));
    rhs.push(20.0 * ws.int(&[u1, u2, u2], 2));
    rhs.push(5.0 * ws.int(&[u0, u2, u2], 3));
    rhs.push(-10.0 / 3.0 * ws.int(&[u1, u1, u1], 4));
    rhs.push(-ws.int(&[u0, u1, u1], 5));
    rhs.push(4.0 * ws.int(&[u0, u1, u2, u2], 0));
    rhs.push(3.0 * ws.int(&[u0, u0, u2, u2], 1));
    rhs.push(-9.0 / 4.0 * ws.int(&[u1, u1, u1, u1], 1));
    rhs.push(-ws.int(&[u0, u2, u1, u1], 1));
    rhs.push(-4.0 * ws.int(&[u0, u1, u1, u1], 2));
    rhs.push(-ws.int(&[u0, u0, u1, u1], 3));
    rhs.push(nu * ws.int(&[u0, u1, u1], 1));
    Ok((lhs, rhs))
}

fn kwon_l2(
    u: &Field,
    w: &WeightFunction,
    nu: f64,
    cache: &mut QuadratureCache,
) -> Result<(Side, Side)> {
    let ws = Workspace::new(u, w, cache, 5, 5, 4)?;
    let (u0, u1, u2, u3, u4) = (ws.u(0), ws.u(1), ws.u(2), ws.u(3), ws.u(4));
    let p = kwon_rate(&ws);
    let p2 = derivative(&p, 2);

    let mut lhs = Side::default();
    lhs.push(ws.int(&[&p, u2, u2], 0));
    lhs.push(2.0 * ws.int(&[u0, u2, &p2], 0));
    lhs.push(nu * ws.int(&[u0, u2, u2], 1));

    let mut rhs = Side::default();
    rhs.push(-5.0 * ws.int(&[u1, u4, u4], 0));
    rhs.push(-5.0 * ws.int(&[u0, u4, u4], 1));
    rhs.push(5.0 * ws.int(&[u3, u3, u3], 0));
    rhs.push(25.0 * ws.int(&[u2, u3, u3], 1));
    rhs.push(15.0 * ws.int(&[u1, u3, u3], 2));
    rhs.push(5.0 * ws.int(&[u0, u3, u3], 3));
    rhs.push(-25.0 / 3.0 * ws.int(&[u2, u2, u2], 3));
    rhs.push(-5.0 * ws.int(&[u1, u2, u2], 4));
    rhs.push(-ws.int(&[u0, u2, u2], 5));
    rhs.push(2.0 * ws.int(&[u0, u1, u3, u3], 0));
    rhs.push(3.0 * ws.int(&[u0, u0, u3, u3], 1));
    rhs.push(-ws.int(&[u1, u2, u2, u2], 0));
    rhs.push(-3.0 * ws.int(&[u0, u2, u2, u2], 1));
    rhs.push(-2.0 * ws.int(&[u1, u1, u2, u2], 1));
    rhs.push(-4.0 * ws.int(&[u0, u1, u2, u2], 2));
    rhs.push(-ws.int(&[u0, u0, u2, u2], 3));
    rhs.push(nu * ws.int(&[u0, u2, u2], 1));
    Ok((lhs, rhs))
}

fn decay(
    u: &Field,
    w: &WeightFunction,
    nu: f64,
    cache: &mut QuadratureCache,
) -> Result<(Side, Side)> {
    let ws = Workspace::new(u, w, cache, 5, 5, 4)?;
    let (u0, u1, u2) = (ws.u(0), ws.u(1), ws.u(2));
    let p = kwon_rate(&ws);

    let mut lhs = Side::default();
    lhs.push(3.0 * ws.int(&[u0, u0, &p], 0));
    lhs.push(nu * ws.int(&[u0, u0, u0], 1));

    let mut rhs = Side::default();
    rhs.push(-15.0 * ws.int(&[u1, u2, u2], 0));
    rhs.push(-15.0 * ws.int(&[u0, u2, u2], 1));
    rhs.push(15.0 * ws.int(&[u1, u1, u1], 2));
    rhs.push(15.0 * ws.int(&[u0, u1, u1], 3));
    rhs.push(-ws.int(&[u0, u0, u0], 5));
    rhs.push(9.0 * ws.int(&[u0, u1, u1, u1], 0));
    rhs.push(13.5 * ws.int(&[u0, u0, u1, u1], 1));
    rhs.push(-0.75 * ws.int(&[u0, u0, u0, u0], 3));
    rhs.push(nu * ws.int(&[u0, u0, u0], 1));
    Ok((lhs, rhs))
}

/// Pinned setting of the identity suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub length: f64,
    pub points: usize,
    /// Band limit of the untapered random field.
    pub base_kmax: usize,
    /// Power `p` of the seam taper `sin^{2p}(πx/L)`.
    pub taper_power: u32,
    pub amplitude: f64,
    pub eps: f64,
    pub b: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            length: 20.0,
            points: 256,
            base_kmax: 36,
            taper_power: 4,
            amplitude: 1.0,
            eps: 1.0,
            b: 2.0,
        }
    }
}

impl SuiteConfig {
    pub fn with_points(mut self, points: usize) -> Self {
        self.points = points;
        self
    }

    /// Random test field for `seed`, independent of the grid size.
    pub fn field(&self, seed: u64) -> Result<Field> {
        let coarse = Grid::new(self.length, 256.min(self.points))?;
        let u = tapered_random(
            &coarse,
            self.base_kmax,
            self.taper_power,
            seed,
            self.amplitude,
        )?;
        u.resample(self.points)
    }

    /// Weight for `identity` with its ramp centred in the window.
    pub fn weight(&self, identity: Identity) -> Result<WeightFunction> {
        use crate::cutoffs::CutoffSpec;
        let spec = match identity {
            Identity::Decay { n } => CutoffSpec::weighted(n, self.eps, self.b)?,
            _ => CutoffSpec::plain(self.eps, self.b)?,
        };
        let offset = self.eps + 0.5 * self.b - 0.5 * self.length;
        Ok(WeightFunction::cutoff_with_offset(spec, offset))
    }
}

/// Residuals for every identity, seed and `ν ∈ nus`.
pub fn identity_suite(
    identities: &[Identity],
    seeds: &[u64],
    nus: &[f64],
    config: &SuiteConfig,
) -> Result<Vec<IdentityResidual>> {
    let mut cache = QuadratureCache::new();
    let mut out = Vec::new();
    for &id in identities {
        let w = config.weight(id)?;
        for &seed in seeds {
            let u = config.field(seed)?;
            for &nu in nus {
                let mut r = check_identity(id, &u, &w, nu, &mut cache)?;
                r.seed = seed;
                if nus.len() > 1 {
                    r.id = format!("{id}@nu={nu}");
                }
                out.push(r);
            }
        }
    }
    Ok(out)
}

/// CSV with columns `id, seed, scale, abs_residual, rel_residual, convention`.
pub fn write_residuals_csv(path: &Path, rows: &[IdentityResidual]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut text = String::from("id,seed,scale,abs_residual,rel_residual,convention\n");
    for r in rows {
        text.push_str(&format!(
            "{},{},{:e},{:e},{:e},{}\n",
            r.id, r.seed, r.scale, r.abs_residual, r.rel_residual, r.convention
        ));
    }
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in Identity::all() {
            assert_eq!(id.to_string().parse::<Identity>().unwrap(), id);
        }
        assert!("kato_0".parse::<Identity>().is_err());
        assert!("kwon_l3".parse::<Identity>().is_err());
    }

    #[test]
    fn zero_field_has_zero_residual() {
        let cfg = SuiteConfig::default();
        let u = Field::zeros(Grid::new(20.0, 256).unwrap());
        let mut cache = QuadratureCache::new();
        for id in Identity::all() {
            let r = check_identity(id, &u, &cfg.weight(id).unwrap(), 1.0, &mut cache).unwrap();
            assert_eq!(r.abs_residual, 0.0);
            assert!(r.passes());
        }
    }

    #[test]
    fn every_identity_closes() {
        let cfg = SuiteConfig::default();
        let rows = identity_suite(&Identity::all(), &[0, 1], &[0.0, 1.0], &cfg).unwrap();
        for r in &rows {
            assert!(r.rel_residual <= IDENTITY_TOLERANCE, "{r:?}");
            assert!(r.scale > 1e-3, "{r:?}");
        }
    }

    #[test]
    fn wrong_coefficient_is_detected() {
        // the printed 28/3 instead of 25/3 must not close
        let cfg = SuiteConfig::default();
        let u = cfg.field(3).unwrap();
        let w = cfg.weight(Identity::KwonL1).unwrap();
        let mut cache = QuadratureCache::new();
        let (lhs, rhs) = kwon_l1(&u, &w, 0.0, &mut cache).unwrap();
        let ws = Workspace::new(&u, &w, &mut cache, 5, 5, 4).unwrap();
        let extra = ws.int(&[ws.u(2), ws.u(2), ws.u(2)], 1);
        let rel = (lhs.total() - rhs.total() - extra).abs() / lhs.scale().max(rhs.scale());
        assert!(rel > 1e-4);
    }

    #[test]
    fn decay_requires_matching_power() {
        let cfg = SuiteConfig::default();
        let u = cfg.field(0).unwrap();
        let w = cfg.weight(Identity::Decay { n: 1 }).unwrap();
        let mut cache = QuadratureCache::new();
        assert!(check_identity(Identity::Decay { n: 2 }, &u, &w, 0.0, &mut cache).is_err());
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let r = IdentityResidual::from_sides("kwon_l1".into(), 4, 1.0, 1.0, 2.0, CONVENTION_KWON);
        write_residuals_csv(&path, &[r]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "id,seed,scale,abs_residual,rel_residual,convention"
        );
        assert!(lines
            .next()
            .unwrap()
            .starts_with("kwon_l1,4,2e0,0e0,0e0,u_t=+d5u+u*d3u"));
    }
}
