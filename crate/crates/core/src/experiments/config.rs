//! TOML experiment configuration.
//!
//! ```toml
//! experiment = "propagation"   # propagation | decay | bootstrap
//! model = "kdv5"
//! seed = 0
//! l = 3                        # derivative order (propagation, decay)
//! n = 0                        # weight power (decay, bootstrap)
//!
//! [grid]
//! L = 40.0
//! N = 1024
//!
//! [solver]
//! t_end = 0.05                 # dt omitted: chosen by the stability rule
//! stride = 20
//!
//! [data]
//! id = "gaussian"
//! [data.params]
//! amplitude = 1.0
//! center = 26.0
//! width = 2.0
//!
//! [window]
//! x0 = 20.0
//! eps = 1.0
//! b = 1.0
//! R = 4.0
//! nu = 0.0
//!
//! [[functionals]]              # optional extras
//! kind = "corrected"
//! l = 2
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cutoffs::CutoffSpec;
use crate::error::{Error, Result};
use crate::functionals::FunctionalKind;
use crate::models::{catalog, Dealias, Model};
use crate::solver::Scheme;
use crate::spectral::{Grid, WeightFunction};

use super::data::DataSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Propagation,
    Decay,
    Bootstrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    /// Fixed step; the stability rule picks one when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    pub t_end: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub dealias: Dealias,
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Upper bound for the stability rule.
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
}

fn default_stride() -> usize {
    10
}

fn default_dt_max() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub x0: f64,
    pub eps: f64,
    pub b: f64,
    /// Right end of the smoothing window relative to `x0`.
    #[serde(rename = "R")]
    pub r: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalEntry {
    #[serde(default)]
    pub id: Option<String>,
    /// `energy | smoothing | corrected | cubic_decay | xweighted`.
    pub kind: String,
    #[serde(default)]
    pub l: u32,
    #[serde(default)]
    pub n: u32,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub nu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub model: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub l: u32,
    #[serde(default)]
    pub n: u32,
    pub grid: GridConfig,
    pub solver: SolverSection,
    pub data: DataSpec,
    pub window: WindowConfig,
    #[serde(default)]
    pub functionals: Vec<FunctionalEntry>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.length, self.grid.points)
    }

    pub fn model(&self) -> Result<Model> {
        catalog(&self.model)
    }

    /// Plain or `χ_n` cutoff placed at `x0`.
    pub fn cutoff(&self, n: u32, eps: f64, b: f64) -> Result<WeightFunction> {
        let spec = if n == 0 {
            CutoffSpec::plain(eps, b)?
        } else {
            CutoffSpec::weighted(n, eps, b)?
        };
        Ok(WeightFunction::cutoff_with_offset(spec, -self.window.x0))
    }

    /// Weight whose derivative lives on the smoothing window `[x0+ε, x0+R]`.
    pub fn smoothing_weight(&self, n: u32) -> Result<WeightFunction> {
        self.cutoff(n, self.window.eps, self.window.r - self.window.eps)
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        self.model()?;
        let w = &self.window;
        if !(w.nu.is_finite() && w.nu >= 0.0) {
            return Err(Error::Config(format!(
                "window.nu must be ≥ 0, got {}",
                w.nu
            )));
        }
        if !(w.r > w.eps) {
            return Err(Error::Config("window.R must exceed window.eps".into()));
        }
        if !(self.solver.t_end > 0.0) || !(self.solver.dt_max > 0.0) || self.solver.stride == 0 {
            return Err(Error::Config(
                "solver.t_end, solver.dt_max and solver.stride must be positive".into(),
            ));
        }
        if let Some(dt) = self.solver.dt {
            crate::solver::SolverConfig::new(dt, self.solver.t_end)
                .with_stride(self.solver.stride)
                .steps()?;
        }
        if self.experiment == ExperimentKind::Bootstrap && self.n == 0 {
            return Err(Error::Config("bootstrap needs n ≥ 1".into()));
        }
        let mut weights = vec![self.cutoff(0, w.eps, w.b)?, self.smoothing_weight(0)?];
        for f in &self.functionals {
            parse_kind(&f.kind, f.l)?;
            weights.push(self.cutoff(f.n, f.eps.unwrap_or(w.eps), f.b.unwrap_or(w.b))?);
        }
        let travel = w.nu * self.solver.t_end;
        for wt in &weights {
            for shift in [0.0, travel] {
                wt.check_window(&grid, shift)?;
            }
        }
        Ok(())
    }
}

pub(crate) fn parse_kind(kind: &str, l: u32) -> Result<FunctionalKind> {
    Ok(match kind {
        "energy" => FunctionalKind::Energy { l },
        "smoothing" => FunctionalKind::Smoothing { l },
        "corrected" => {
            if l == 0 {
                return Err(Error::Config("corrected functional needs l ≥ 1".into()));
            }
            FunctionalKind::Corrected { l }
        }
        "cubic_decay" => FunctionalKind::CubicDecay,
        "xweighted" => FunctionalKind::XWeighted { m: l },
        other => return Err(Error::Config(format!("unknown functional kind {other:?}"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
experiment = "propagation"
model = "kdv5"
l = 2
[grid]
L = 40.0
N = 256
[solver]
t_end = 0.01
[data]
id = "gaussian"
[data.params]
amplitude = 1.0
center = 26.0
width = 2.0
[window]
x0 = 20.0
eps = 1.0
b = 1.0
R = 4.0
nu = 1.0
[[functionals]]
kind = "corrected"
l = 2
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.grid.points, 256);
        assert_eq!(cfg.solver.stride, 10);
        assert_eq!(cfg.functionals.len(), 1);
        let again = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("kdv5", "kdv7")).is_err());
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("x0 = 20.0", "x0 = 38.5")).is_err());
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("nu = 1.0", "nu = 5000.0")).is_err());
        assert!(
            ExperimentConfig::from_toml(&SAMPLE.replace("\"corrected\"", "\"quartic\"")).is_err()
        );
        assert!(ExperimentConfig::from_toml(
            &SAMPLE.replace("t_end = 0.01", "t_end = 0.01\ndt = 0.003")
        )
        .is_err());
        assert!(ExperimentConfig::from_toml(&format!("{SAMPLE}\nbogus = 1\n")).is_err());
    }
}
