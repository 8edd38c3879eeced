use std::fmt;
use std::sync::Arc;

use crate::cutoffs::{CutoffKind, CutoffSpec};
use crate::error::{Error, Result};

use super::quadrature::{Piece, PieceShape};
use super::Grid;

/// Tolerance on sampled `ψ′` for weights flagged nondecreasing.
pub const SIGN_TOLERANCE: f64 = 1e-12;

type WeightFn = dyn Fn(f64, usize) -> f64 + Send + Sync;

/// A weight `w(y)` sampled as `w(x + shift)` on the grid.
#[derive(Clone)]
pub enum WeightFunction {
    /// `w(y) = χ(y + offset)` (or `χ_n`).
    Cutoff {
        spec: CutoffSpec,
        offset: f64,
    },
    /// A user weight `ψ(y)` with derivatives `ψ^{(j)}(y)` from `eval(y, j)`.
    Custom(CustomWeight),
    Constant(f64),
}

#[derive(Clone)]
pub struct CustomWeight {
    label: String,
    eval: Arc<WeightFn>,
    nondecreasing: bool,
    breakpoints: Vec<f64>,
}

impl CustomWeight {
    /// `breakpoints` mark where `ψ` fails to be smooth, in `y` coordinates.
    pub fn new(
        label: impl Into<String>,
        nondecreasing: bool,
        breakpoints: Vec<f64>,
        eval: impl Fn(f64, usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            eval: Arc::new(eval),
            nondecreasing,
            breakpoints,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFunction::Cutoff { spec, offset } => f
                .debug_struct("Cutoff")
                .field("spec", spec)
                .field("offset", offset)
                .finish(),
            WeightFunction::Custom(c) => f
                .debug_struct("Custom")
                .field("label", &c.label)
                .field("nondecreasing", &c.nondecreasing)
                .finish(),
            WeightFunction::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
        }
    }
}

impl WeightFunction {
    pub fn cutoff(spec: CutoffSpec) -> Self {
        Self::Cutoff { spec, offset: 0.0 }
    }

    pub fn cutoff_with_offset(spec: CutoffSpec, offset: f64) -> Self {
        Self::Cutoff { spec, offset }
    }

    pub fn custom(weight: CustomWeight) -> Self {
        Self::Custom(weight)
    }

    /// Whether `∂ψ ≥ 0` is promised.
    pub fn nondecreasing(&self) -> bool {
        match self {
            WeightFunction::Cutoff { .. } | WeightFunction::Constant(_) => true,
            WeightFunction::Custom(c) => c.nondecreasing,
        }
    }

    /// `∂^order w` at `x + shift`. Cutoff orders above 6 are not supported.
    pub fn value(&self, x: f64, shift: f64, order: usize) -> f64 {
        match self {
            WeightFunction::Cutoff { spec, offset } => spec.value(x + shift + offset, order),
            WeightFunction::Custom(c) => (c.eval)(x + shift, order),
            WeightFunction::Constant(c) => {
                if order == 0 {
                    *c
                } else {
                    0.0
                }
            }
        }
    }

    /// `(w‴)²/w′` at `x + shift`, zero where `w′` vanishes.
    pub fn ratio_third(&self, x: f64, shift: f64) -> f64 {
        match self {
            WeightFunction::Cutoff { spec, offset } => spec.ratio_third(x + shift + offset),
            WeightFunction::Custom(c) => {
                let d1 = (c.eval)(x + shift, 1);
                if d1 > 0.0 {
                    (c.eval)(x + shift, 3).powi(2) / d1
                } else {
                    0.0
                }
            }
            WeightFunction::Constant(_) => 0.0,
        }
    }

    /// Ramp of a cutoff weight in grid coordinates.
    pub fn ramp(&self, shift: f64) -> Option<(f64, f64)> {
        match self {
            WeightFunction::Cutoff { spec, offset } => {
                let (lo, hi) = spec.ramp();
                Some((lo - offset - shift, hi - offset - shift))
            }
            _ => None,
        }
    }

    /// Rejects a cutoff whose ramp leaves `[2h, L − 2h]`.
    pub fn check_window(&self, grid: &Grid, shift: f64) -> Result<()> {
        if let Some((ramp_lo, ramp_hi)) = self.ramp(shift) {
            let lo = 2.0 * grid.h();
            let hi = grid.length() - lo;
            if ramp_lo < lo || ramp_hi > hi {
                return Err(Error::Support {
                    ramp_lo,
                    ramp_hi,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }

    /// Rejects a weight flagged nondecreasing whose sampled `ψ′` dips below
    /// `−SIGN_TOLERANCE` on the grid.
    pub fn check_sign(&self, grid: &Grid, shift: f64) -> Result<()> {
        if !self.nondecreasing() {
            return Err(Error::contract("weight is not flagged nondecreasing"));
        }
        for x in grid.xs() {
            let d = self.value(x, shift, 1);
            if d < -SIGN_TOLERANCE {
                return Err(Error::contract(format!(
                    "weight derivative {d:e} < 0 at x = {x}"
                )));
            }
        }
        Ok(())
    }

    /// Smooth pieces of `∂^order w(· + shift)` on `[0, L]`.
    pub fn pieces(&self, grid: &Grid, shift: f64, order: usize) -> Vec<Piece> {
        let l = grid.length();
        let mut out = Vec::new();
        let mut push = |lo: f64, hi: f64, shape: PieceShape| {
            let (lo, hi) = (lo.max(0.0), hi.min(l));
            if hi > lo {
                out.push(Piece { lo, hi, shape });
            }
        };
        match self {
            WeightFunction::Cutoff { spec, .. } => {
                let (a, c) = self.ramp(shift).expect("cutoff has a ramp");
                push(a, c, PieceShape::Smooth);
                let plateau = match (spec.kind, order) {
                    (CutoffKind::Plain, 0) => PieceShape::Constant(1.0),
                    (CutoffKind::Plain, _) => PieceShape::Zero,
                    (CutoffKind::Weighted { n }, k) if k > n as usize => PieceShape::Zero,
                    (CutoffKind::Weighted { .. }, _) => PieceShape::Smooth,
                };
                push(c, l, plateau);
            }
            WeightFunction::Custom(cw) => {
                let mut cuts: Vec<f64> = cw
                    .breakpoints
                    .iter()
                    .map(|y| y - shift)
                    .filter(|x| *x > 0.0 && *x < l)
                    .collect();
                cuts.sort_by(f64::total_cmp);
                let mut lo = 0.0;
                for x in cuts.into_iter().chain(std::iter::once(l)) {
                    push(lo, x, PieceShape::Smooth);
                    lo = x;
                }
            }
            WeightFunction::Constant(c) => {
                let shape = if order == 0 {
                    PieceShape::Constant(*c)
                } else {
                    PieceShape::Zero
                };
                push(0.0, l, shape);
            }
        }
        out.retain(|p| !matches!(p.shape, PieceShape::Zero));
        out
    }
}
