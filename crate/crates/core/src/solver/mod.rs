//! Exponential integrators for `u_t = L u + N(u)` with a diagonal `L`.
//!
//! Both schemes treat the dispersion exactly in Fourier space, so the time
//! step is limited by the nonlinear term only.

pub mod benchmarks;
pub mod phi;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Dealias, Model, NonlinearTerm};
use crate::spectral::{Field, Grid};

/// Spectral tail ratio above which initial data is flagged as under-resolved.
pub const TAIL_WARNING: f64 = 1e-10;
/// RK4 stability reach along the imaginary axis.
pub const RK4_IMAGINARY_REACH: f64 = 2.8;
/// Fraction of the RK4 reach used by [`stable_dt`].
pub const STABILITY_SAFETY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Etdrk4,
    Ifrk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub dealias: Dealias,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default)]
    pub seam_margin: f64,
    /// Keep strided snapshots in the trajectory.
    #[serde(default = "default_true")]
    pub store: bool,
}

fn default_stride() -> usize {
    1
}

fn default_true() -> bool {
    true
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            scheme: Scheme::Etdrk4,
            dealias: Dealias::TwoThirds,
            stride: 1,
            seam_margin: 0.0,
            store: true,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_dealias(mut self, dealias: Dealias) -> Self {
        self.dealias = dealias;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn with_store(mut self, store: bool) -> Self {
        self.store = store;
        self
    }

    pub fn with_seam_margin(mut self, margin: f64) -> Self {
        self.seam_margin = margin;
        self
    }

    /// Number of steps; `t_end / dt` must be an integer multiple of `stride`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::contract(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::contract(format!(
                "t_end must be > 0, got {}",
                self.t_end
            )));
        }
        if self.stride == 0 {
            return Err(Error::contract("stride must be ≥ 1"));
        }
        let ratio = self.t_end / self.dt;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 * n.max(1.0) || n < 1.0 {
            return Err(Error::contract(format!(
                "t_end / dt = {ratio} is not an integer"
            )));
        }
        let n = n as usize;
        if !n.is_multiple_of(self.stride) {
            return Err(Error::contract(format!(
                "{n} steps are not a multiple of stride {}",
                self.stride
            )));
        }
        Ok(n)
    }

    /// Heuristic nonlinear CFL warnings for `u` under `model`.
    pub fn stability_warnings(&self, model: &Model, u: &Field) -> Vec<String> {
        let rate = nonlinear_rate(model, u, self.dealias);
        let mut out = Vec::new();
        if self.dt * rate > RK4_IMAGINARY_REACH {
            out.push(format!(
                "dt·|∂N| ≈ {:.3e} exceeds the RK4 reach {RK4_IMAGINARY_REACH}",
                self.dt * rate
            ));
        }
        out
    }
}

/// Estimate of the largest rate of the linearised nonlinear term at `u`.
pub fn nonlinear_rate(model: &Model, u: &Field, dealias: Dealias) -> f64 {
    let grid = u.grid();
    let kmax = match dealias {
        Dealias::TwoThirds => (grid.len() - 1) / 3,
        Dealias::Padded => grid.len() / 2 - 1,
    } as f64
        * 2.0
        * std::f64::consts::PI
        / grid.length();
    let amp = u.max_abs();
    model
        .merged_monomials()
        .iter()
        .map(|m| {
            let top = *m.orders.iter().max().unwrap_or(&0) as i32;
            m.coefficient.abs() * amp.powi(m.degree() as i32 - 1) * kmax.powi(top)
        })
        .sum()
}

/// Largest `dt ≤ dt_max` with `dt · rate ≤ safety · reach` and `t_end / dt`
/// an integer multiple of `stride`.
pub fn stable_dt(
    model: &Model,
    u: &Field,
    dealias: Dealias,
    t_end: f64,
    stride: usize,
    dt_max: f64,
) -> f64 {
    let rate = nonlinear_rate(model, u, dealias);
    let raw = if rate > 0.0 {
        (STABILITY_SAFETY * RK4_IMAGINARY_REACH / rate).min(dt_max)
    } else {
        dt_max
    };
    let stride = stride.max(1) as f64;
    let blocks = (t_end / (raw * stride)).ceil().max(1.0);
    t_end / (blocks * stride)
}

/// Strided snapshots of a run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
    pub final_state: Field,
    pub final_time: f64,
    pub steps: usize,
    pub warnings: Vec<String>,
}

/// `û_k(t) = e^{tλ(k)} û_k(0)` with `λ(k) = a5(ik)⁵ + a3(ik)³ + a1(ik)`.
pub fn linear_exact(u0: &Field, t: f64, a5: f64, a3: f64, a1: f64) -> Field {
    if t == 0.0 {
        return u0.clone();
    }
    let model = Model::linear(a5, a3, a1);
    let grid = *u0.grid();
    let mut c = u0.spectrum();
    for (j, z) in c.iter_mut().enumerate() {
        *z *= (model.symbol(&grid, j) * t).exp();
    }
    Field::from_spectrum(grid, &c)
}

/// Per-step coefficient tables and workspaces for one `(model, grid, dt)`.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Grid,
    scheme: Scheme,
    dt: f64,
    nl: NonlinearTerm,
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
    nv: Vec<Complex64>,
    na: Vec<Complex64>,
    nb: Vec<Complex64>,
    nc: Vec<Complex64>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    c: Vec<Complex64>,
}

// stage loops read several coefficient arrays at the same index
#[allow(clippy::needless_range_loop)]
impl Stepper {
    pub fn new(
        model: &Model,
        grid: &Grid,
        dt: f64,
        scheme: Scheme,
        dealias: Dealias,
    ) -> Result<Self> {
        let n = grid.len();
        let nl = NonlinearTerm::new(model, grid, dealias)?;
        let zero = vec![Complex64::new(0.0, 0.0); n];
        let mut s = Self {
            grid: *grid,
            scheme,
            dt,
            nl,
            e: zero.clone(),
            e2: zero.clone(),
            q: zero.clone(),
            f1: zero.clone(),
            f2: zero.clone(),
            f3: zero.clone(),
            nv: zero.clone(),
            na: zero.clone(),
            nb: zero.clone(),
            nc: zero.clone(),
            a: zero.clone(),
            b: zero.clone(),
            c: zero,
        };
        for j in 0..n {
            let z = model.symbol(grid, j) * dt;
            s.e[j] = z.exp();
            s.e2[j] = (z * 0.5).exp();
            s.q[j] = phi::phi1(z * 0.5) * (0.5 * dt);
            let (p1, p2, p3) = phi::phi123(z);
            s.f1[j] = (p1 - 3.0 * p2 + 4.0 * p3) * dt;
            s.f2[j] = (p2 - 2.0 * p3) * dt;
            s.f3[j] = (4.0 * p3 - p2) * dt;
        }
        Ok(s)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances normalised coefficients `v` by one step.
    pub fn step(&mut self, v: &mut [Complex64]) {
        match self.scheme {
            Scheme::Etdrk4 => self.step_etdrk4(v),
            Scheme::Ifrk4 => self.step_ifrk4(v),
        }
    }

    fn step_etdrk4(&mut self, v: &mut [Complex64]) {
        let n = v.len();
        self.nl.apply(v, &mut self.nv);
        for j in 0..n {
            self.a[j] = self.e2[j] * v[j] + self.q[j] * self.nv[j];
        }
        self.nl.apply(&self.a, &mut self.na);
        for j in 0..n {
            self.b[j] = self.e2[j] * v[j] + self.q[j] * self.na[j];
        }
        self.nl.apply(&self.b, &mut self.nb);
        for j in 0..n {
            self.c[j] = self.e2[j] * self.a[j] + self.q[j] * (2.0 * self.nb[j] - self.nv[j]);
        }
        self.nl.apply(&self.c, &mut self.nc);
        for j in 0..n {
            v[j] = self.e[j] * v[j]
                + self.f1[j] * self.nv[j]
                + 2.0 * self.f2[j] * (self.na[j] + self.nb[j])
                + self.f3[j] * self.nc[j];
        }
    }

    fn step_ifrk4(&mut self, v: &mut [Complex64]) {
        let n = v.len();
        let h = self.dt;
        self.nl.apply(v, &mut self.nv);
        for j in 0..n {
            self.a[j] = self.e2[j] * (v[j] + 0.5 * h * self.nv[j]);
        }
        self.nl.apply(&self.a, &mut self.na);
        for j in 0..n {
            self.b[j] = self.e2[j] * v[j] + 0.5 * h * self.na[j];
        }
        self.nl.apply(&self.b, &mut self.nb);
        for j in 0..n {
            self.c[j] = self.e[j] * v[j] + h * self.e2[j] * self.nb[j];
        }
        self.nl.apply(&self.c, &mut self.nc);
        for j in 0..n {
            v[j] = self.e[j] * v[j]
                + h / 6.0
                    * (self.e[j] * self.nv[j]
                        + 2.0 * self.e2[j] * (self.na[j] + self.nb[j])
                        + self.nc[j]);
        }
    }
}

/// One step of `cfg.scheme` from `u`.
pub fn step(u: &Field, model: &Model, cfg: &SolverConfig) -> Result<Field> {
    let mut stepper = Stepper::new(model, u.grid(), cfg.dt, cfg.scheme, cfg.dealias)?;
    let mut v = u.spectrum();
    stepper.step(&mut v);
    let out = Field::from_spectrum(*u.grid(), &v);
    if !out.is_finite() {
        return Err(Error::BlowUp {
            last_good_t: 0.0,
            step: 1,
        });
    }
    Ok(out)
}

/// Called at `t = 0` and after every `stride` steps.
pub type Observer<'a> = dyn FnMut(f64, &Field) -> Result<()> + 'a;

/// Integrates to `cfg.t_end`; times are `step · dt` exactly.
pub fn simulate(
    model: &Model,
    u0: &Field,
    cfg: &SolverConfig,
    observers: &mut [&mut Observer<'_>],
) -> Result<Trajectory> {
    let steps = cfg.steps()?;
    let grid = *u0.grid();
    let mut warnings = cfg.stability_warnings(model, u0);
    let tail = u0.spectral_tail();
    if tail > TAIL_WARNING {
        warnings.push(format!(
            "initial spectral tail {tail:.3e} exceeds {TAIL_WARNING:e}"
        ));
    }
    let mut stepper = Stepper::new(model, &grid, cfg.dt, cfg.scheme, cfg.dealias)?;
    let mut v = u0.spectrum();
    let mut times = Vec::new();
    let mut snapshots = Vec::new();
    let mut seam_peak: f64 = 0.0;
    let mut emit = |t: f64, u: &Field, obs: &mut [&mut Observer<'_>]| -> Result<()> {
        for o in obs.iter_mut() {
            o(t, u)?;
        }
        if cfg.seam_margin > 0.0 {
            seam_peak = seam_peak.max(seam_ratio(u, cfg.seam_margin));
        }
        if cfg.store {
            times.push(t);
            snapshots.push(u.clone());
        }
        Ok(())
    };
    emit(0.0, u0, observers)?;
    let mut last_good_t = 0.0;
    let mut current = u0.clone();
    for s in 1..=steps {
        stepper.step(&mut v);
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::BlowUp {
                last_good_t,
                step: s,
            });
        }
        let t = s as f64 * cfg.dt;
        last_good_t = t;
        if s % cfg.stride == 0 || s == steps {
            current = Field::from_spectrum(grid, &v);
            if s % cfg.stride == 0 {
                emit(t, &current, observers)?;
            }
        }
    }
    if cfg.seam_margin > 0.0 && seam_peak > 1e-8 {
        warnings.push(format!(
            "solution reached the seam: max |u| within {} of x = 0 is {seam_peak:.3e} of the peak",
            cfg.seam_margin
        ));
    }
    Ok(Trajectory {
        times,
        snapshots,
        final_state: current,
        final_time: steps as f64 * cfg.dt,
        steps,
        warnings,
    })
}

/// `max |u|` within `margin` of the seam relative to `max |u|`.
pub fn seam_ratio(u: &Field, margin: f64) -> f64 {
    let peak = u.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    let l = u.grid().length();
    u.grid()
        .xs()
        .zip(u.samples())
        .filter(|(x, _)| *x < margin || *x > l - margin)
        .fold(0.0f64, |m, (_, v)| m.max(v.abs()))
        / peak
}
