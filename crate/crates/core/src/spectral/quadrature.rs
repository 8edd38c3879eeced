//! Quadrature that is exact for trigonometric polynomials of degree `< M/2`
//! against a piecewise-smooth weight.
//!
//! For samples `g_j` on an `M`-point grid the rule returns
//! `∫₀ᴸ I[g](x) w(x) dx`, where `I[g]` is the trigonometric interpolant. The
//! nodal weights are `ω_j = (1/M) Σ_m W_m e^{−iκ_m x_j}` with moments
//! `W_m = ∫ e^{iκ_m x} w(x) dx`, computed in closed form on constant pieces
//! and by composite Gauss–Legendre on smooth pieces.

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use super::{fft_forward, Grid};

/// Gauss–Legendre nodes per panel.
const NODES_PER_PANEL: usize = 20;
/// Largest phase `κ_max · width` swept by one panel.
const MAX_PANEL_PHASE: f64 = 8.0;
/// Powers of `e^{iθ}` are recomputed directly every this many modes.
const RESYNC: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PieceShape {
    Zero,
    Constant(f64),
    Smooth,
}

/// `[lo, hi]` in grid coordinates on which the weight has one shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub shape: PieceShape,
}

#[derive(Debug, Clone)]
pub struct SpectralQuadrature {
    grid: Grid,
    nodal: Vec<f64>,
}

impl SpectralQuadrature {
    /// `f` evaluates the weight on its smooth pieces.
    pub fn build(grid: &Grid, pieces: &[Piece], f: impl Fn(f64) -> f64) -> Self {
        let m_pts = grid.len();
        let half = m_pts / 2;
        let base = 2.0 * std::f64::consts::PI / grid.length();
        let mut moments = vec![Complex64::new(0.0, 0.0); half + 1];

        let rule = GaussLegendre::new(NODES_PER_PANEL).expect("valid Gauss-Legendre degree");
        let pairs = rule.as_node_weight_pairs();
        let kmax = base * half as f64;

        for piece in pieces {
            match piece.shape {
                PieceShape::Zero => {}
                PieceShape::Constant(c) => {
                    moments[0] += c * (piece.hi - piece.lo);
                    for (m, w) in moments.iter_mut().enumerate().skip(1) {
                        let k = base * m as f64;
                        let e = Complex64::from_polar(1.0, k * piece.hi)
                            - Complex64::from_polar(1.0, k * piece.lo);
                        *w += c * e / Complex64::new(0.0, k);
                    }
                }
                PieceShape::Smooth => {
                    let width = piece.hi - piece.lo;
                    let panels = ((kmax * width / MAX_PANEL_PHASE).ceil() as usize).max(1);
                    let pw = width / panels as f64;
                    for p in 0..panels {
                        let a = piece.lo + p as f64 * pw;
                        let mid = a + 0.5 * pw;
                        for &(node, weight) in pairs {
                            let x = mid + 0.5 * pw * node;
                            let fw = 0.5 * pw * weight * f(x);
                            if fw == 0.0 {
                                continue;
                            }
                            accumulate(&mut moments, base * x, fw);
                        }
                    }
                }
            }
        }

        let mut v = vec![Complex64::new(0.0, 0.0); m_pts];
        v[0] = moments[0];
        for m in 1..half {
            v[m] = moments[m];
            v[m_pts - m] = moments[m].conj();
        }
        v[half] = Complex64::new(moments[half].re, 0.0);
        fft_forward(&mut v);
        let nodal = v.iter().map(|c| c.re / m_pts as f64).collect();
        Self { grid: *grid, nodal }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn nodal_weights(&self) -> &[f64] {
        &self.nodal
    }

    /// `∫ I[g] w` for samples `g` on the quadrature grid.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        assert_eq!(
            samples.len(),
            self.nodal.len(),
            "sample count differs from quadrature grid"
        );
        samples.iter().zip(&self.nodal).map(|(g, w)| g * w).sum()
    }
}

/// `moments[m] += fw · e^{i m θ}` for all `m`.
fn accumulate(moments: &mut [Complex64], theta: f64, fw: f64) {
    let step = Complex64::from_polar(1.0, theta);
    let mut z = Complex64::new(fw, 0.0);
    for (m, w) in moments.iter_mut().enumerate() {
        if m % RESYNC == 0 && m > 0 {
            z = Complex64::from_polar(fw, theta * m as f64);
        }
        *w += z;
        z *= step;
    }
}
