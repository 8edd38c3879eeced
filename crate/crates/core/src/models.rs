//! Dispersive models `u_t = a5 ∂⁵u + a3 ∂³u + a1 ∂u + Σ c ∏ ∂^{p_i} u`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{remap_spectrum, Field, Grid, Transformer};

/// Largest derivative order allowed inside a monomial.
pub const MAX_FACTOR_ORDER: u8 = 3;

/// Relative tolerance for the `c2 = 2 c3` test.
const HAMILTONIAN_TOL: f64 = 1e-12;

/// `coefficient · ∏ ∂^{p} u` over `p ∈ orders`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    #[serde(rename = "c")]
    pub coefficient: f64,
    pub orders: Vec<u8>,
}

impl Monomial {
    pub fn new(coefficient: f64, orders: &[u8]) -> Result<Self> {
        let m = Self {
            coefficient,
            orders: orders.to_vec(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.orders.len() < 2 {
            return Err(Error::contract(
                "monomials must have degree ≥ 2; linear terms belong to a5, a3, a1",
            ));
        }
        if let Some(p) = self.orders.iter().find(|&&p| p > MAX_FACTOR_ORDER) {
            return Err(Error::contract(format!(
                "monomial factor order {p} exceeds {MAX_FACTOR_ORDER}"
            )));
        }
        if !self.coefficient.is_finite() {
            return Err(Error::contract("monomial coefficient must be finite"));
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.orders.len()
    }

    fn sorted_orders(&self) -> Vec<u8> {
        let mut o = self.orders.clone();
        o.sort_unstable();
        o
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    /// Zero modes with `|m| > ⌊(N−1)/3⌋` before and after each product.
    #[default]
    TwoThirds,
    /// Products on a `2N` grid; exact for degree ≤ 3.
    Padded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub name: String,
    pub a5: f64,
    pub a3: f64,
    pub a1: f64,
    pub monomials: Vec<Monomial>,
}

impl Model {
    pub fn new(
        name: impl Into<String>,
        a5: f64,
        a3: f64,
        a1: f64,
        monomials: Vec<Monomial>,
    ) -> Result<Self> {
        for m in &monomials {
            m.validate()?;
        }
        Ok(Self {
            name: name.into(),
            a5,
            a3,
            a1,
            monomials,
        })
    }

    /// `u_t = ∂⁵u − c1 u²u_x − c2 u_x u_xx − c3 u u_xxx`.
    pub fn general_c(c1: f64, c2: f64, c3: f64) -> Self {
        Self {
            name: format!("general_c({c1},{c2},{c3})"),
            a5: 1.0,
            a3: 0.0,
            a1: 0.0,
            monomials: vec![
                mono(-c1, &[0, 0, 1]),
                mono(-c2, &[1, 2]),
                mono(-c3, &[0, 3]),
            ],
        }
    }

    pub fn kdv5() -> Self {
        let mut m = Self::general_c(-30.0, 20.0, 10.0);
        m.name = "kdv5".into();
        m
    }

    pub fn kdv() -> Self {
        Self {
            name: "kdv".into(),
            a5: 0.0,
            a3: -1.0,
            a1: 0.0,
            monomials: vec![mono(-1.0, &[0, 1])],
        }
    }

    pub fn benney() -> Self {
        Self {
            name: "benney".into(),
            a5: -1.0,
            a3: 0.0,
            a1: 0.0,
            monomials: vec![mono(2.0, &[1, 2]), mono(1.0, &[0, 3])],
        }
    }

    pub fn lisher() -> Self {
        Self {
            name: "lisher".into(),
            a5: -1.0,
            a3: 0.0,
            a1: 0.0,
            monomials: vec![
                mono(-1.0, &[0, 1]),
                mono(-1.0, &[0, 0, 1]),
                mono(-1.0, &[1, 2]),
                mono(-1.0, &[0, 3]),
                mono(-1.0, &[0, 1, 2]),
                mono(-1.0, &[0, 0, 3]),
            ],
        }
    }

    /// `u_t + u_x + c1 u u_x + c2 u_xxx + c3 u_x u_xx + c4 u u_xxx + c5 ∂⁵u = 0`.
    pub fn water_wave(c: [f64; 5]) -> Self {
        Self {
            name: format!("water_wave({},{},{},{},{})", c[0], c[1], c[2], c[3], c[4]),
            a5: -c[4],
            a3: -c[1],
            a1: -1.0,
            monomials: vec![
                mono(-c[0], &[0, 1]),
                mono(-c[2], &[1, 2]),
                mono(-c[3], &[0, 3]),
            ],
        }
    }

    pub fn example_xx() -> Self {
        Self {
            name: "example_xx".into(),
            a5: 1.0,
            a3: 0.0,
            a1: 0.0,
            monomials: vec![mono(1.0, &[0, 2])],
        }
    }

    pub fn linear(a5: f64, a3: f64, a1: f64) -> Self {
        Self {
            name: "linear".into(),
            a5,
            a3,
            a1,
            monomials: vec![],
        }
    }

    /// Coefficients summed per distinct (sorted) factor list.
    pub fn merged_monomials(&self) -> Vec<Monomial> {
        let mut out: Vec<Monomial> = Vec::new();
        for m in &self.monomials {
            let key = m.sorted_orders();
            match out.iter_mut().find(|o| o.orders == key) {
                Some(o) => o.coefficient += m.coefficient,
                None => out.push(Monomial {
                    coefficient: m.coefficient,
                    orders: key,
                }),
            }
        }
        out.retain(|m| m.coefficient != 0.0);
        out
    }

    /// `(c1, c2, c3)` if the model has the form of [`Model::general_c`].
    pub fn general_coefficients(&self) -> Option<(f64, f64, f64)> {
        if self.a5 != 1.0 || self.a3 != 0.0 || self.a1 != 0.0 {
            return None;
        }
        let (mut c1, mut c2, mut c3) = (0.0, 0.0, 0.0);
        for m in self.merged_monomials() {
            match m.orders.as_slice() {
                [0, 0, 1] => c1 = -m.coefficient,
                [1, 2] => c2 = -m.coefficient,
                [0, 3] => c3 = -m.coefficient,
                _ => return None,
            }
        }
        Some((c1, c2, c3))
    }

    /// True iff the model has the general form with `c2 = 2 c3`.
    pub fn hamiltonian(&self) -> bool {
        match self.general_coefficients() {
            Some((_, c2, c3)) => {
                (c2 - 2.0 * c3).abs() <= HAMILTONIAN_TOL * c2.abs().max(c3.abs()).max(1.0)
            }
            None => false,
        }
    }

    /// Every term is an exact x-derivative, so `∫ u_t = 0`.
    ///
    /// `example_xx` (`u u_xx`) and `lisher` (`u u_x u_xx`, `u² u_xxx`) are
    /// the catalog exceptions.
    pub fn conserves_mass(&self) -> bool {
        self.merged_monomials().iter().all(|m| {
            matches!(
                m.orders.as_slice(),
                [0, 1] | [0, 0, 1] | [1, 2] | [0, 3] | [0, 0, 0, 1] | [0, 0, 0, 0, 1]
            )
        })
    }

    pub fn max_degree(&self) -> usize {
        self.monomials
            .iter()
            .map(Monomial::degree)
            .max()
            .unwrap_or(0)
    }

    /// `λ(k) = a5 (ik)⁵ + a3 (ik)³ + a1 (ik)`, zero at the Nyquist slot.
    pub fn symbol(&self, grid: &Grid, j: usize) -> Complex64 {
        if j == grid.nyquist_slot() {
            return Complex64::new(0.0, 0.0);
        }
        let k = grid.wavenumber(j);
        Complex64::new(0.0, self.a5 * k.powi(5) - self.a3 * k.powi(3) + self.a1 * k)
    }

    pub fn max_symbol(&self, grid: &Grid) -> f64 {
        (0..grid.len())
            .map(|j| self.symbol(grid, j).norm())
            .fold(0.0, f64::max)
    }
}

fn mono(c: f64, orders: &[u8]) -> Monomial {
    Monomial {
        coefficient: c,
        orders: orders.to_vec(),
    }
}

/// Parses `kdv`, `kdv5`, `benney`, `lisher`, `example_xx`,
/// `general_c(c1,c2,c3)` and `water_wave(c1,..,c5)`.
pub fn catalog(name: &str) -> Result<Model> {
    let name = name.trim();
    let (head, args) = match name.find('(') {
        Some(i) if name.ends_with(')') => {
            let args: std::result::Result<Vec<f64>, _> = name[i + 1..name.len() - 1]
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect();
            (
                &name[..i],
                Some(args.map_err(|_| Error::UnknownModel(name.into()))?),
            )
        }
        Some(_) => return Err(Error::UnknownModel(name.into())),
        None => (name, None),
    };
    match (head, args.as_deref()) {
        ("kdv", None) => Ok(Model::kdv()),
        ("kdv5", None) => Ok(Model::kdv5()),
        ("benney", None) => Ok(Model::benney()),
        ("lisher", None) => Ok(Model::lisher()),
        ("example_xx", None) => Ok(Model::example_xx()),
        ("general_c", Some(&[c1, c2, c3])) => Ok(Model::general_c(c1, c2, c3)),
        ("water_wave", Some(&[c1, c2, c3, c4, c5])) => Ok(Model::water_wave([c1, c2, c3, c4, c5])),
        _ => Err(Error::UnknownModel(name.into())),
    }
}

/// Reusable evaluator of the nonlinear part in Fourier space.
///
/// Coefficients use the normalisation of [`Field::spectrum`].
#[derive(Debug, Clone)]
pub struct NonlinearTerm {
    grid: Grid,
    dealias: Dealias,
    monomials: Vec<Monomial>,
    orders_used: [bool; 4],
    work_points: usize,
    fft: Transformer,
    keep: usize,
    deriv: Vec<Vec<Complex64>>,
    physical: Vec<Vec<f64>>,
    acc: Vec<Complex64>,
}

impl NonlinearTerm {
    pub fn new(model: &Model, grid: &Grid, dealias: Dealias) -> Result<Self> {
        let monomials = model.merged_monomials();
        let max_degree = monomials.iter().map(Monomial::degree).max().unwrap_or(0);
        if dealias == Dealias::Padded && max_degree > 3 {
            return Err(Error::contract(format!(
                "padding by 2 is exact only for degree ≤ 3, model has degree {max_degree}"
            )));
        }
        let mut orders_used = [false; 4];
        for m in &monomials {
            for &p in &m.orders {
                orders_used[p as usize] = true;
            }
        }
        let n = grid.len();
        let work_points = match dealias {
            Dealias::TwoThirds => n,
            Dealias::Padded => 2 * n,
        };
        Ok(Self {
            grid: *grid,
            dealias,
            monomials,
            orders_used,
            work_points,
            fft: Transformer::new(work_points),
            keep: (n - 1) / 3,
            deriv: vec![vec![Complex64::new(0.0, 0.0); work_points]; 4],
            physical: vec![vec![0.0; work_points]; 4],
            acc: vec![Complex64::new(0.0, 0.0); work_points],
        })
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Highest mode kept by the 2/3 rule.
    pub fn kept_modes(&self) -> usize {
        match self.dealias {
            Dealias::TwoThirds => self.keep,
            Dealias::Padded => self.grid.len() / 2 - 1,
        }
    }

    /// Writes `N̂(û)` into `out`.
    pub fn apply(&mut self, uhat: &[Complex64], out: &mut [Complex64]) {
        let n = self.grid.len();
        let zero = Complex64::new(0.0, 0.0);
        if self.monomials.is_empty() {
            out.iter_mut().for_each(|c| *c = zero);
            return;
        }
        let mut masked = uhat.to_vec();
        self.mask(&mut masked);
        for p in 0..4 {
            if !self.orders_used[p] {
                continue;
            }
            let mut d = masked.clone();
            crate::spectral::apply_derivative(&self.grid, &mut d, p as u32);
            let buf = &mut self.deriv[p];
            if self.work_points == n {
                buf.copy_from_slice(&d);
            } else {
                buf.copy_from_slice(&remap_spectrum(&d, self.work_points));
            }
            self.fft.inverse(buf);
            for (x, c) in self.physical[p].iter_mut().zip(buf.iter()) {
                *x = c.re;
            }
        }
        for (j, a) in self.acc.iter_mut().enumerate() {
            let mut s = 0.0;
            for m in &self.monomials {
                let prod: f64 = m
                    .orders
                    .iter()
                    .map(|&p| self.physical[p as usize][j])
                    .product();
                s += m.coefficient * prod;
            }
            *a = Complex64::new(s, 0.0);
        }
        self.fft.forward(&mut self.acc);
        let scale = 1.0 / self.work_points as f64;
        if self.work_points == n {
            for (o, a) in out.iter_mut().zip(&self.acc) {
                *o = a * scale;
            }
        } else {
            let back = remap_spectrum(&self.acc, n);
            for (o, a) in out.iter_mut().zip(back) {
                *o = a * scale;
            }
            out[n / 2] = zero;
        }
        self.mask(out);
    }

    fn mask(&self, c: &mut [Complex64]) {
        if self.dealias != Dealias::TwoThirds {
            return;
        }
        let zero = Complex64::new(0.0, 0.0);
        for (j, z) in c.iter_mut().enumerate() {
            if self.grid.mode(j).unsigned_abs() as usize > self.keep {
                *z = zero;
            }
        }
    }
}

/// `u_t` for the model at `u` with 2/3-rule dealiasing.
pub fn eval_rhs(model: &Model, u: &Field) -> Field {
    eval_rhs_with(model, u, Dealias::TwoThirds).expect("2/3 rule accepts every model")
}

pub fn eval_rhs_with(model: &Model, u: &Field, dealias: Dealias) -> Result<Field> {
    let grid = *u.grid();
    let uhat = u.spectrum();
    let mut nl = NonlinearTerm::new(model, &grid, dealias)?;
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    nl.apply(&uhat, &mut out);
    for (j, o) in out.iter_mut().enumerate() {
        *o += model.symbol(&grid, j) * uhat[j];
    }
    Ok(Field::from_spectrum(grid, &out))
}
