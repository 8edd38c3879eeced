//! Propagation, decay and bootstrap runs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{FunctionalKind, Tracker, WeightedFunctional};
use crate::solver::{simulate, stable_dt, Observer, SolverConfig};
use crate::spectral::{sobolev_norm, Field};

use super::bootstrap_schedule;
use super::config::{parse_kind, ExperimentConfig, ExperimentKind};
use super::data::build_data;

/// Required ratio of the global `H^{l+1}` norm to the windowed `H^l` norm on
/// rough data.
pub const ROUGH_CONTRAST: f64 = 1e3;
/// Bootstrap functionals count as bounded below this multiple of their
/// initial value.
pub const BOUNDED_FACTOR: f64 = 10.0;
/// Relative band around golden references.
pub const GOLDEN_FACTOR: f64 = 1.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub id: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Series {
    pub fn sup(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value >= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub experiment: ExperimentKind,
    pub dt: f64,
    pub steps: usize,
    pub series: Vec<Series>,
    /// `sup_t` of every series.
    pub summary: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub failure: Option<String>,
}

impl EnergyReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.checks.iter().all(|c| c.pass)
    }

    pub fn series(&self, id: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.id == id)
    }

    /// Adds one check per golden entry: `1/1.05 ≤ summary/golden ≤ 1.05`.
    pub fn compare_golden(&mut self, golden: &BTreeMap<String, f64>) {
        for (id, &reference) in golden {
            let value = self.summary.get(id).copied().unwrap_or(f64::NAN);
            let ratio = if reference == 0.0 && value == 0.0 {
                1.0
            } else {
                value / reference
            };
            let deviation = if ratio > 0.0 {
                ratio.max(1.0 / ratio)
            } else {
                f64::INFINITY
            };
            self.checks.push(Check::at_most(
                format!("golden:{id}"),
                deviation,
                GOLDEN_FACTOR,
            ));
        }
    }
}

/// Per-snapshot quantity derived from the field and tracked values.
struct Derived {
    kind: DerivedKind,
    series: Series,
}

enum DerivedKind {
    /// `sqrt` of the sum of the listed trackers.
    RootSum(Vec<usize>),
    /// Global discrete Sobolev norm.
    Global(f64),
}

struct Plan {
    trackers: Vec<Tracker>,
    derived: Vec<Derived>,
}

impl Plan {
    fn tracker(&mut self, f: WeightedFunctional) -> usize {
        self.trackers.push(Tracker::new(f));
        self.trackers.len() - 1
    }

    fn derived(&mut self, id: String, kind: DerivedKind) {
        self.derived.push(Derived {
            series: Series {
                id,
                times: Vec::new(),
                values: Vec::new(),
            },
            kind,
        });
    }

    fn observe(&mut self, t: f64, u: &Field) -> Result<()> {
        for tr in &mut self.trackers {
            tr.observe(t, u)?;
        }
        for d in &mut self.derived {
            let v = match &d.kind {
                DerivedKind::RootSum(ix) => ix
                    .iter()
                    .map(|&i| *self.trackers[i].values.last().unwrap())
                    .sum::<f64>()
                    .sqrt(),
                DerivedKind::Global(s) => sobolev_norm(u, *s),
            };
            d.series.times.push(t);
            d.series.values.push(v);
        }
        Ok(())
    }
}

fn plan(cfg: &ExperimentConfig) -> Result<Plan> {
    let w = cfg.window;
    let mut p = Plan {
        trackers: Vec::new(),
        derived: Vec::new(),
    };
    match cfg.experiment {
        ExperimentKind::Propagation => {
            let l = cfg.l;
            let mut energies = Vec::new();
            for m in 0..=l {
                let f = WeightedFunctional::new(
                    format!("energy_m{m}"),
                    FunctionalKind::Energy { l: m },
                    cfg.cutoff(0, w.eps, w.b)?,
                    w.nu,
                )?;
                energies.push(p.tracker(f));
            }
            p.tracker(WeightedFunctional::new(
                format!("smoothing_l{l}"),
                FunctionalKind::Smoothing { l },
                cfg.smoothing_weight(0)?,
                w.nu,
            )?);
            p.derived(format!("windowed_h{l}"), DerivedKind::RootSum(energies));
            p.derived(
                format!("global_h{}", l + 1),
                DerivedKind::Global((l + 1) as f64),
            );
        }
        ExperimentKind::Decay => {
            let (l, n) = (cfg.l, cfg.n);
            for m in 0..=l {
                p.tracker(WeightedFunctional::new(
                    format!("decay1_n{n}_m{m}"),
                    FunctionalKind::XWeighted { m },
                    cfg.cutoff(n, w.eps, w.b)?,
                    w.nu,
                )?);
            }
            p.tracker(WeightedFunctional::new(
                format!("decay2_n{n}_l{l}"),
                FunctionalKind::Smoothing { l },
                cfg.cutoff(n, w.eps, w.b)?,
                w.nu,
            )?);
        }
        ExperimentKind::Bootstrap => {
            let schedule = bootstrap_schedule(cfg.n)?;
            for &(l, n) in &schedule.pairs {
                p.tracker(WeightedFunctional::new(
                    format!("bootstrap_l{l}_n{n}"),
                    FunctionalKind::XWeighted { m: l },
                    cfg.cutoff(n, w.eps, w.b)?,
                    w.nu,
                )?);
            }
            p.tracker(WeightedFunctional::new(
                format!("bootstrap_final_l{}", schedule.final_l),
                FunctionalKind::Energy {
                    l: schedule.final_l,
                },
                cfg.cutoff(0, w.eps, w.b)?,
                w.nu,
            )?);
        }
    }
    for (i, f) in cfg.functionals.iter().enumerate() {
        let kind = parse_kind(&f.kind, f.l)?;
        let id =
            f.id.clone()
                .unwrap_or_else(|| format!("extra{i}_{}_l{}_n{}", f.kind, f.l, f.n));
        p.tracker(WeightedFunctional::new(
            id,
            kind,
            cfg.cutoff(f.n, f.eps.unwrap_or(w.eps), f.b.unwrap_or(w.b))?,
            f.nu.unwrap_or(w.nu),
        )?);
    }
    Ok(p)
}

/// Runs the experiment named in `cfg`; solver blow-up and seam violations
/// are recorded in the report rather than returned.
pub fn run(cfg: &ExperimentConfig) -> Result<EnergyReport> {
    run_full(cfg).map(|(report, _)| report)
}

/// As [`run`], also returning the final state and time when the run completed.
pub fn run_full(cfg: &ExperimentConfig) -> Result<(EnergyReport, Option<(Field, f64)>)> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let model = cfg.model()?;
    let u0 = build_data(&cfg.data, &grid)?;
    let s = cfg.solver;
    let dt = match s.dt {
        Some(dt) => dt,
        None => stable_dt(&model, &u0, s.dealias, s.t_end, s.stride, s.dt_max),
    };
    let solver = SolverConfig::new(dt, s.t_end)
        .with_scheme(s.scheme)
        .with_dealias(s.dealias)
        .with_stride(s.stride)
        .with_store(false);
    let steps = solver.steps()?;
    let mut p = plan(cfg)?;
    let outcome = {
        let mut obs = |t: f64, u: &Field| p.observe(t, u);
        let mut observers: [&mut Observer<'_>; 1] = [&mut obs];
        simulate(&model, &u0, &solver, &mut observers)
    };
    let (warnings, failure, last) = match outcome {
        Ok(tr) => (tr.warnings, None, Some((tr.final_state, tr.final_time))),
        Err(e @ (Error::BlowUp { .. } | Error::Support { .. })) => {
            (Vec::new(), Some(e.to_string()), None)
        }
        Err(e) => return Err(e),
    };

    let mut series: Vec<Series> = p
        .trackers
        .iter()
        .map(|t| Series {
            id: t.functional.id.clone(),
            times: t.times.clone(),
            values: t.values.clone(),
        })
        .collect();
    series.extend(p.derived.into_iter().map(|d| d.series));
    let summary = series.iter().map(|s| (s.id.clone(), s.sup())).collect();

    let mut checks = Vec::new();
    let non_finite = series
        .iter()
        .filter(|s| s.values.iter().any(|v| !v.is_finite()))
        .count();
    checks.push(Check::at_most("finite", non_finite as f64, 0.0));
    for t in &p.trackers {
        if t.functional.is_smoothing() {
            let drops = t.values.windows(2).filter(|w| w[1] < w[0]).count();
            checks.push(Check::at_most(
                format!("nondecreasing:{}", t.functional.id),
                drops as f64,
                0.0,
            ));
        }
    }
    let mut report = EnergyReport {
        experiment: cfg.experiment,
        dt,
        steps,
        series,
        summary,
        checks,
        warnings,
        failure,
    };
    match cfg.experiment {
        ExperimentKind::Propagation if cfg.data.is_rough() => {
            let l = cfg.l;
            let windowed = report
                .series(&format!("windowed_h{l}"))
                .map(Series::sup)
                .unwrap_or(f64::NAN);
            let global = report
                .series(&format!("global_h{}", l + 1))
                .map(Series::min)
                .unwrap_or(f64::NAN);
            report.checks.push(Check::at_least(
                "rough_contrast",
                global / windowed,
                ROUGH_CONTRAST,
            ));
        }
        ExperimentKind::Bootstrap => {
            let mut extra = Vec::new();
            for s in report
                .series
                .iter()
                .filter(|s| s.id.starts_with("bootstrap_"))
            {
                let initial = s.values.first().copied().unwrap_or(0.0).abs();
                let growth = if s.sup() <= 0.0 {
                    0.0
                } else {
                    s.sup() / initial.max(1e-300)
                };
                extra.push(Check::at_most(
                    format!("bounded:{}", s.id),
                    growth,
                    BOUNDED_FACTOR,
                ));
            }
            report.checks.extend(extra);
        }
        _ => {}
    }
    Ok((report, last))
}

fn run_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<EnergyReport> {
    if cfg.experiment != kind {
        return Err(Error::Config(format!(
            "config describes a {:?} run",
            cfg.experiment
        )));
    }
    run(cfg)
}

pub fn run_propagation(cfg: &ExperimentConfig) -> Result<EnergyReport> {
    run_kind(cfg, ExperimentKind::Propagation)
}

pub fn run_decay(cfg: &ExperimentConfig) -> Result<EnergyReport> {
    run_kind(cfg, ExperimentKind::Decay)
}

pub fn run_bootstrap(cfg: &ExperimentConfig) -> Result<EnergyReport> {
    run_kind(cfg, ExperimentKind::Bootstrap)
}
