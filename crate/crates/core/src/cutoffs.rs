//! C⁵ cutoff functions built from the degree-11 polynomial
//!
//! ```text
//! ρ(t) = 2772 ∫₀ᵗ y⁵(1−y)⁵ dy = t⁶ p(t),
//! p(t) = 462 − 1980t + 3465t² − 3080t³ + 1386t⁴ − 252t⁵,
//! ```
//!
//! the plain ramp `χ(x; ε, b) = ρ((x−ε)/b)` on `(ε, b+ε)` (0 to the left, 1 to
//! the right) and its polynomially weighted variant `χ_n(x) = xⁿ χ(x)`.
//!
//! All derivatives come from integer coefficient tables; nothing here is
//! differentiated numerically. The boundedness constants attached to these
//! functions are never given in closed form, so [`certify_inequalities`]
//! measures them by grid scan and re-checks each inequality against the
//! measured constant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest derivative order exposed by [`eval_cutoff`].
pub const MAX_ORDER: usize = 5;

/// Relative slack applied when re-verifying an inequality against its
/// measured constant.
pub const SCAN_MARGIN: f64 = 1e-9;

/// Smallest accepted scan resolution (points per unit length).
pub const MIN_RESOLUTION: usize = 1000;

const RHO_COEFFS: [i64; 12] = [0, 0, 0, 0, 0, 0, 462, -1980, 3465, -3080, 1386, -252];

const fn derivative_table() -> [[i64; 12]; 7] {
    let mut table = [[0i64; 12]; 7];
    table[0] = RHO_COEFFS;
    let mut j = 1;
    while j < 7 {
        let mut i = 0;
        while i < 11 {
            table[j][i] = table[j - 1][i + 1] * (i as i64 + 1);
            i += 1;
        }
        j += 1;
    }
    table
}

/// Exact integer coefficient tables of ρ and its first six derivatives.
#[derive(Debug, Clone, Copy)]
pub struct RhoPoly {
    table: [[i64; 12]; 7],
}

/// The ramp polynomial.
pub const RHO: RhoPoly = RhoPoly {
    table: derivative_table(),
};

impl RhoPoly {
    /// Coefficients of `ρ^(order)` in increasing powers of `t`.
    pub fn coefficients(&self, order: usize) -> &[i64; 12] {
        &self.table[order]
    }

    /// Plain Horner evaluation of `ρ^(order)(t)`.
    pub fn eval_raw(&self, t: f64, order: usize) -> f64 {
        self.table[order]
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * t + c as f64)
    }

    /// `ρ^(order)(t)` for `t ∈ [0, 1]`, using `ρ(t) + ρ(1−t) = 1` to evaluate
    /// near `t = 1` from the `t ≈ 0` side, where Horner keeps full relative
    /// accuracy.
    pub fn eval(&self, t: f64, order: usize) -> f64 {
        if t <= 0.5 {
            return self.eval_raw(t, order);
        }
        let mirrored = self.eval_raw(1.0 - t, order);
        match order {
            0 => 1.0 - mirrored,
            j if j % 2 == 1 => mirrored,
            _ => -mirrored,
        }
    }

    /// Closed form of `(ρ‴)²/ρ′ = −277200 t(t−1)(2−9t+9t²)²`.
    pub fn third_ratio_closed_form(t: f64) -> f64 {
        let q = 2.0 - 9.0 * t + 9.0 * t * t;
        -277200.0 * t * (t - 1.0) * q * q
    }

    /// `p(y)` with `ρ(y) = y⁶ p(y)`.
    pub fn p(y: f64) -> f64 {
        RHO_COEFFS[6..]
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * y + c as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CutoffKind {
    Plain,
    Weighted { n: u32 },
}

/// A member of the cutoff family: `χ(·; ε, b)` or `χ_n(·; ε, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    #[serde(flatten)]
    pub kind: CutoffKind,
    pub eps: f64,
    pub b: f64,
}

impl CutoffSpec {
    pub fn plain(eps: f64, b: f64) -> Result<Self> {
        Self::new(CutoffKind::Plain, eps, b)
    }

    pub fn weighted(n: u32, eps: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::contract("weighted cutoff needs n ≥ 1"));
        }
        Self::new(CutoffKind::Weighted { n }, eps, b)
    }

    pub fn new(kind: CutoffKind, eps: f64, b: f64) -> Result<Self> {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::contract(format!(
                "cutoff eps must be ≥ 0, got {eps}"
            )));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::contract(format!(
                "cutoff ramp width must be > 0, got {b}"
            )));
        }
        if let CutoffKind::Weighted { n: 0 } = kind {
            return Err(Error::contract("weighted cutoff needs n ≥ 1"));
        }
        Ok(Self { kind, eps, b })
    }

    /// The ramp interval `[ε, b+ε]`.
    pub fn ramp(&self) -> (f64, f64) {
        (self.eps, self.eps + self.b)
    }

    pub fn weight_power(&self) -> u32 {
        match self.kind {
            CutoffKind::Plain => 0,
            CutoffKind::Weighted { n } => n,
        }
    }

    /// Same family member with `(ε, b) → (ε/3, b+ε)`.
    pub fn expanded(&self) -> Self {
        Self {
            kind: self.kind,
            eps: self.eps / 3.0,
            b: self.b + self.eps,
        }
    }

    /// `χ_{n−1}(·; ε/3, b+ε)`; for `n = 1` this is the plain `χ(·; ε/3, b+ε)`.
    pub fn lowered_expanded(&self, n: u32) -> Self {
        let kind = if n <= 1 {
            CutoffKind::Plain
        } else {
            CutoffKind::Weighted { n: n - 1 }
        };
        Self {
            kind,
            eps: self.eps / 3.0,
            b: self.b + self.eps,
        }
    }

    pub fn eval(&self, x: f64, order: usize) -> Result<f64> {
        eval_cutoff(self, x, order)
    }

    /// Derivative of any order up to 6 without the public order check.
    pub(crate) fn value(&self, x: f64, order: usize) -> f64 {
        match self.kind {
            CutoffKind::Plain => plain(self.eps, self.b, x, order),
            CutoffKind::Weighted { n } => (0..=order)
                .map(|j| {
                    binomial(order, j)
                        * monomial_derivative(n, order - j, x)
                        * plain(self.eps, self.b, x, j)
                })
                .sum(),
        }
    }

    pub fn ratio_third(&self, x: f64) -> f64 {
        ratio_third(self, x)
    }
}

fn plain(eps: f64, b: f64, x: f64, order: usize) -> f64 {
    if x <= eps {
        0.0
    } else if x >= eps + b {
        if order == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        RHO.eval((x - eps) / b, order) / b.powi(order as i32)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `d^m/dx^m xⁿ`.
fn monomial_derivative(n: u32, m: usize, x: f64) -> f64 {
    let n = n as usize;
    if m > n {
        return 0.0;
    }
    let falling: f64 = (0..m).map(|i| (n - i) as f64).product();
    falling * x.powi((n - m) as i32)
}

/// Exact derivative of order `0..=5` of a cutoff.
pub fn eval_cutoff(spec: &CutoffSpec, x: f64, order: usize) -> Result<f64> {
    if order > MAX_ORDER {
        return Err(Error::contract(format!(
            "cutoff derivative order {order} exceeds {MAX_ORDER}"
        )));
    }
    Ok(spec.value(x, order))
}

/// `(χ‴)²/χ′` (or the `χ_n` analogue) with removable singularities resolved.
///
/// For the plain ramp the value is `0` outside the open ramp. For `χ_n`
/// beyond the ramp, where `χ_n = xⁿ`, the exact value
/// `n(n−1)²(n−2)² x^{n−5}` is returned.
pub fn ratio_third(spec: &CutoffSpec, x: f64) -> f64 {
    let (lo, hi) = spec.ramp();
    if x <= lo {
        return 0.0;
    }
    match spec.kind {
        CutoffKind::Plain => {
            if x >= hi {
                return 0.0;
            }
            let t = (x - lo) / spec.b;
            let d1 = RHO.eval(t, 1);
            if d1 <= 0.0 {
                return 0.0;
            }
            let d3 = RHO.eval(t, 3);
            d3 * d3 / d1 / spec.b.powi(5)
        }
        CutoffKind::Weighted { n } => {
            if x >= hi {
                let nf = n as f64;
                let c = nf * (nf - 1.0).powi(2) * (nf - 2.0).powi(2);
                return if c == 0.0 {
                    0.0
                } else {
                    c * x.powi(n as i32 - 5)
                };
            }
            let d1 = spec.value(x, 1);
            if d1 <= 0.0 {
                return 0.0;
            }
            let d3 = spec.value(x, 3);
            d3 * d3 / d1
        }
    }
}

/// Outcome of one measured-constant inequality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupConstantReport {
    pub id: String,
    /// Largest measured constant over all derivative orders in the report.
    pub sup_value: f64,
    /// One measured constant per derivative order (a single entry when the
    /// inequality has no order index).
    pub constants: Vec<f64>,
    /// Points per unit length.
    pub resolution: usize,
    pub margin: f64,
    pub pass: bool,
    /// Location of the largest ratio, or of the first failure.
    pub worst_x: Option<f64>,
    pub detail: Option<String>,
}

struct Scan<'a> {
    id: &'a str,
    resolution: usize,
    points: Vec<f64>,
}

impl Scan<'_> {
    /// Measures `C_j = sup |lhs(x, j)| / rhs(x)` for each order and re-checks
    /// `|lhs| ≤ C_j (1 + margin) rhs` pointwise.
    fn run(
        &self,
        orders: &[usize],
        lhs: impl Fn(f64, usize) -> f64,
        rhs: impl Fn(f64) -> f64,
    ) -> SupConstantReport {
        let mut constants = Vec::with_capacity(orders.len());
        let mut worst = (f64::NEG_INFINITY, None);
        let mut failure: Option<(f64, String)> = None;
        for &j in orders {
            let mut c = 0.0f64;
            for &x in &self.points {
                let (l, r) = (lhs(x, j).abs(), rhs(x));
                if !(l.is_finite() && r.is_finite()) {
                    failure.get_or_insert((x, format!("non-finite value at order {j}")));
                    continue;
                }
                if r > 0.0 {
                    let q = l / r;
                    if q > c {
                        c = q;
                    }
                    if q > worst.0 {
                        worst = (q, Some(x));
                    }
                } else if l > 0.0 {
                    failure.get_or_insert((
                        x,
                        format!("order {j}: |lhs| = {l:e} where the bound vanishes"),
                    ));
                }
            }
            for &x in &self.points {
                let (l, r) = (lhs(x, j).abs(), rhs(x));
                if l > c * (1.0 + SCAN_MARGIN) * r {
                    failure.get_or_insert((x, format!("order {j}: recheck failed")));
                }
            }
            constants.push(c);
        }
        let sup_value = constants.iter().cloned().fold(0.0, f64::max);
        let pass = failure.is_none() && sup_value.is_finite();
        SupConstantReport {
            id: self.id.to_string(),
            sup_value,
            constants,
            resolution: self.resolution,
            margin: SCAN_MARGIN,
            pass,
            worst_x: failure.as_ref().map(|f| f.0).or(worst.1),
            detail: failure.map(|f| f.1),
        }
    }
}

fn grid(lo: f64, hi: f64, resolution: usize) -> Vec<f64> {
    let m = ((hi - lo) * resolution as f64).ceil().max(1.0) as usize;
    (0..=m)
        .map(|i| lo + (hi - lo) * i as f64 / m as f64)
        .collect()
}

/// Measures the boundedness constants of the cutoff family generated by
/// `(spec.eps, spec.b)` and certifies the nine domination inequalities.
///
/// The χ_n inequalities use the spec's own `n`, or `n = 1` for a plain spec.
/// Ramp-only inequalities are scanned on `[ε, b+ε]`; the others on
/// `[ε, ε + 3(b+ε)]`, past which every bound is a comparison of monomials.
pub fn certify_inequalities(
    spec: &CutoffSpec,
    resolution: usize,
) -> Result<Vec<SupConstantReport>> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::contract(format!(
            "scan resolution {resolution} below {MIN_RESOLUTION} points per unit length"
        )));
    }
    if spec.eps <= 0.0 {
        return Err(Error::contract("certification needs ε > 0"));
    }
    let n = spec.weight_power().max(1);
    let base = CutoffSpec::plain(spec.eps, spec.b)?;
    let weighted = CutoffSpec::weighted(n, spec.eps, spec.b)?;
    let expanded_prime = base.expanded();
    let lowered = weighted.lowered_expanded(n);
    let (lo, hi) = base.ramp();
    let far = lo + 3.0 * hi;
    let ramp = |id| Scan {
        id,
        resolution,
        points: grid(lo, hi, resolution),
    };
    let line = |id| Scan {
        id,
        resolution,
        points: grid(lo, far, resolution),
    };
    let all_orders = [1, 2, 3, 4, 5];
    let one = |_x: f64| 1.0;

    let reports = vec![
        ramp("cutoff_ratio").run(&[3], |x, _| base.ratio_third(x), one),
        ramp("cutoff_bounded").run(&all_orders, |x, j| base.value(x, j), one),
        ramp("cutoff_ratio_expanded").run(
            &[3],
            |x, _| base.ratio_third(x),
            |x| expanded_prime.value(x, 1),
        ),
        ramp("cutoff_expanded").run(
            &all_orders,
            |x, j| base.value(x, j),
            |x| expanded_prime.value(x, 1),
        ),
        ramp("cutoff_n_ratio").run(&[3], |x, _| weighted.ratio_third(x), one),
        line("cutoff_n_ratio2").run(
            &[3],
            |x, _| weighted.ratio_third(x),
            |x| 1.0 + weighted.value(x, 0),
        ),
        line("cutoff_n_derivatives").run(
            &all_orders,
            |x, j| weighted.value(x, j),
            |x| 1.0 + weighted.value(x, 0),
        ),
        line("cutoff_n_ratio_to_minus_one").run(
            &[3],
            |x, _| weighted.ratio_third(x),
            |x| lowered.value(x, 0),
        ),
        line("cutoff_n_prime_to_minus_one").run(
            &all_orders,
            |x, j| weighted.value(x, j),
            |x| lowered.value(x, 0),
        ),
    ];
    Ok(reports)
}

/// Certification of a family of cutoffs together with the structural
/// checks on `ρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyCertification {
    /// `(ε, b, n, reports)` per member.
    pub members: Vec<(f64, f64, u32, Vec<SupConstantReport>)>,
    /// Largest deviation of `ρ^{(j)}` from its endpoint values, `j ≤ 5`.
    pub rho_endpoint_error: f64,
    /// Largest relative gap between the closed form of `(ρ‴)²/ρ′` and its
    /// evaluation at 10³ interior points.
    pub ratio_closed_form_error: f64,
    /// Relative spread over `ε` of the `cutoff_ratio` constant at fixed `b`.
    pub eps_spread: f64,
    pub pass: bool,
}

/// Tolerance on the endpoint conditions of `ρ`.
pub const RHO_ENDPOINT_TOLERANCE: f64 = 1e-12;
/// Tolerance on the closed form of `(ρ‴)²/ρ′`.
pub const RATIO_CLOSED_FORM_TOLERANCE: f64 = 1e-10;
/// Tolerance on the `ε`-independence of the `cutoff_ratio` constant.
pub const EPS_SPREAD_TOLERANCE: f64 = 1e-6;

pub fn certify_family(
    pairs: &[(f64, f64)],
    powers: &[u32],
    resolution: usize,
) -> Result<FamilyCertification> {
    let mut members = Vec::new();
    for &(eps, b) in pairs {
        for &n in powers {
            let spec = CutoffSpec::weighted(n, eps, b)?;
            members.push((eps, b, n, certify_inequalities(&spec, resolution)?));
        }
    }
    let mut rho_endpoint_error: f64 = (RHO.eval(0.0, 0)).abs().max((RHO.eval(1.0, 0) - 1.0).abs());
    for j in 1..=MAX_ORDER {
        rho_endpoint_error = rho_endpoint_error
            .max(RHO.eval_raw(0.0, j).abs())
            .max(RHO.eval_raw(1.0, j).abs());
    }
    let mut ratio_closed_form_error: f64 = 0.0;
    for i in 1..1000 {
        let t = i as f64 / 1000.0;
        let d1 = RHO.eval(t, 1);
        let direct = RHO.eval(t, 3).powi(2) / d1;
        let closed = RhoPoly::third_ratio_closed_form(t);
        ratio_closed_form_error =
            ratio_closed_form_error.max((direct - closed).abs() / closed.abs().max(1e-300));
    }
    let mut eps_spread: f64 = 0.0;
    let mut bs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    bs.dedup();
    for b in bs {
        let sups = [0.5, 1.0, 2.0]
            .iter()
            .map(|&eps| {
                let reports = certify_inequalities(&CutoffSpec::plain(eps, b)?, resolution)?;
                Ok(reports
                    .iter()
                    .find(|r| r.id == "cutoff_ratio")
                    .map_or(f64::NAN, |r| r.sup_value))
            })
            .collect::<Result<Vec<f64>>>()?;
        let (lo, hi) = sups
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
        eps_spread = eps_spread.max(hi / lo - 1.0);
    }
    let pass = members.iter().all(|m| m.3.iter().all(|r| r.pass))
        && rho_endpoint_error <= RHO_ENDPOINT_TOLERANCE
        && ratio_closed_form_error <= RATIO_CLOSED_FORM_TOLERANCE
        && eps_spread <= EPS_SPREAD_TOLERANCE;
    Ok(FamilyCertification {
        members,
        rho_endpoint_error,
        ratio_closed_form_error,
        eps_spread,
        pass,
    })
}
