//! Command-line driver: simulations, certification of the cutoff family,
//! the identity suite, the energy experiments and report merging.
//!
//! Every subcommand writes a manifest with the digests of its outputs and
//! exits with status 0 only when all of its checks pass.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use kdv5lab::cutoffs::{
    certify_family, SupConstantReport, EPS_SPREAD_TOLERANCE, RATIO_CLOSED_FORM_TOLERANCE,
    RHO_ENDPOINT_TOLERANCE,
};
use kdv5lab::experiments::manifest::{write_atomic, MANIFEST_FILE};
use kdv5lab::experiments::{
    merge_reports, run_bootstrap, run_decay, run_full, run_propagation, write_manifest, write_run,
    Check, EnergyReport, ExperimentConfig, ManifestInput, RunManifest,
};
use kdv5lab::functionals::identities::{SuiteConfig, IDENTITY_TOLERANCE, RESIDUAL_FLOOR};
use kdv5lab::functionals::{
    identity_suite, manufactured_energy_cases, write_residuals_csv, Identity,
};
use kdv5lab::spectral::io::write_field;
use kdv5lab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "kdv5lab",
    version,
    about = "Fifth-order KdV numerical laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configured run; writes the final state, report.csv and manifest.json.
    Simulate(SimulateArgs),
    /// Certify the cutoff inequalities over a family of (ε, b, n).
    CheckCutoffs(CutoffArgs),
    /// Residuals of the weighted-energy identities over random fields.
    CheckIdentities(IdentityArgs),
    /// Right-windowed energies and the local smoothing integral.
    Propagation(ExperimentArgs),
    /// Polynomially weighted energies and their smoothing accumulator.
    Decay(ExperimentArgs),
    /// Functionals of the weight-for-derivatives cascade.
    Bootstrap(ExperimentArgs),
    /// Merge CSV reports into one long-format file.
    Report(ReportArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Catalog model overriding the config.
    #[arg(long)]
    model: Option<String>,
    #[arg(long = "L")]
    length: Option<f64>,
    #[arg(long = "N")]
    points: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Serialize)]
struct CutoffArgs {
    /// Ramp starts, paired with `--b` by position.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 1.0])]
    eps: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.0, 2.0])]
    b: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3, 5])]
    n: Vec<u32>,
    /// Sample points per unit length.
    #[arg(long, default_value_t = 10_000)]
    resolution: usize,
    #[arg(long)]
    out: PathBuf,
    /// Manifest path; defaults to the output with a `.manifest.json` suffix.
    #[arg(long)]
    #[serde(skip)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct IdentityArgs {
    /// `all` or a comma list such as `kato_1,kwon_l2,decay_2`.
    #[arg(long, default_value = "all")]
    id: String,
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    #[arg(long = "N", default_value_t = 256)]
    points: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0])]
    nu: Vec<f64>,
    /// Also rerun at 2N and require the residuals to drop.
    #[arg(long)]
    convergence: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Pinned `{series: sup}` references to compare against.
    #[arg(long)]
    golden: Option<PathBuf>,
    /// Write the run's `{series: sup}` summary as a new reference.
    #[arg(long)]
    write_golden: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ReportArgs {
    #[arg(long, num_args = 1.., required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    manifest: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::CheckCutoffs(a) => check_cutoffs(a),
        Command::CheckIdentities(a) => check_identities(a),
        Command::Propagation(a) => experiment(a, run_propagation),
        Command::Decay(a) => experiment(a, run_decay),
        Command::Bootstrap(a) => experiment(a, run_bootstrap),
        Command::Report(a) => report(a),
    };
    match outcome {
        Ok(m) => {
            for c in m.checks.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {}: {:e} against {:e}", c.name, c.value, c.threshold);
            }
            if let Some(f) = &m.failure {
                eprintln!("FAIL run: {f}");
            }
            println!(
                "{}: {}",
                m.experiment,
                if m.passed { "pass" } else { "fail" }
            );
            if m.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn manifest_path(out: &Path, explicit: Option<PathBuf>) -> PathBuf {
    explicit.unwrap_or_else(|| out.with_extension("manifest.json"))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn check(name: impl Into<String>, value: f64, threshold: f64, at_most: bool) -> Check {
    if at_most {
        Check::at_most(name, value, threshold)
    } else {
        Check::at_least(name, value, threshold)
    }
}

fn simulate(a: SimulateArgs) -> Result<RunManifest> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(m) = a.model {
        cfg.model = m;
    }
    if let Some(l) = a.length {
        cfg.grid.length = l;
    }
    if let Some(n) = a.points {
        cfg.grid.points = n;
    }
    if let Some(dt) = a.dt {
        cfg.solver.dt = Some(dt);
    }
    if let Some(t) = a.t_end {
        cfg.solver.t_end = t;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let (report, last) = run_full(&cfg)?;
    let mut manifest = write_run(&a.out, &cfg, &report)?;
    if let Some((u, t)) = last {
        let stem = a.out.join("final");
        write_field(&stem, &u, t)?;
        for ext in ["bin", "json"] {
            let name = format!("final.{ext}");
            let digest = kdv5lab::experiments::manifest::file_digest(&a.out.join(&name))?;
            manifest.outputs.insert(name, digest);
        }
        manifest.experiment = "simulate".into();
        write_json(&a.out.join(MANIFEST_FILE), &manifest)?;
    }
    Ok(manifest)
}

fn check_cutoffs(a: CutoffArgs) -> Result<RunManifest> {
    if a.eps.len() != a.b.len() {
        return Err(Error::Config(
            "--eps and --b need the same number of values".into(),
        ));
    }
    let pairs: Vec<(f64, f64)> = a.eps.iter().copied().zip(a.b.iter().copied()).collect();
    let cert = certify_family(&pairs, &a.n, a.resolution)?;
    let mut rows: Vec<SupConstantReport> = Vec::new();
    let mut checks = Vec::new();
    for (eps, b, n, reports) in &cert.members {
        for r in reports {
            let mut r = r.clone();
            r.id = format!("{}@eps={eps},b={b},n={n}", r.id);
            checks.push(check(
                r.id.clone(),
                if r.pass { 0.0 } else { 1.0 },
                0.0,
                true,
            ));
            rows.push(r);
        }
    }
    checks.push(check(
        "rho_endpoints",
        cert.rho_endpoint_error,
        RHO_ENDPOINT_TOLERANCE,
        true,
    ));
    checks.push(check(
        "rho_ratio_closed_form",
        cert.ratio_closed_form_error,
        RATIO_CLOSED_FORM_TOLERANCE,
        true,
    ));
    checks.push(check(
        "eps_independence",
        cert.eps_spread,
        EPS_SPREAD_TOLERANCE,
        true,
    ));
    write_json(&a.out, &rows)?;
    let summary = rows.iter().map(|r| (r.id.clone(), r.sup_value)).collect();
    write_manifest(
        &manifest_path(&a.out, a.manifest.clone()),
        ManifestInput {
            experiment: "check-cutoffs",
            config: &a,
            seed: 0,
            convention: "",
            tolerances: BTreeMap::from([
                ("rho_endpoint".into(), RHO_ENDPOINT_TOLERANCE),
                ("rho_ratio_closed_form".into(), RATIO_CLOSED_FORM_TOLERANCE),
                ("eps_spread".into(), EPS_SPREAD_TOLERANCE),
            ]),
            outputs: vec![a.out.clone()],
            summary,
            checks,
            warnings: Vec::new(),
        },
    )
}

fn parse_ids(spec: &str) -> Result<Vec<Identity>> {
    if spec == "all" {
        return Ok(Identity::all());
    }
    spec.split(',').map(|s| s.trim().parse()).collect()
}

fn check_identities(a: IdentityArgs) -> Result<RunManifest> {
    let ids = parse_ids(&a.id)?;
    let seeds: Vec<u64> = (0..a.seeds).collect();
    let cfg = SuiteConfig::default().with_points(a.points);
    let mut rows = identity_suite(&ids, &seeds, &a.nu, &cfg)?;
    let mut checks = Vec::new();
    let worst = rows
        .iter()
        .filter(|r| r.abs_residual > RESIDUAL_FLOOR)
        .fold(0.0f64, |m, r| m.max(r.rel_residual));
    checks.push(check(
        "identity_rel_residual",
        worst,
        IDENTITY_TOLERANCE,
        true,
    ));
    if a.convergence {
        let fine = identity_suite(&ids, &seeds, &a.nu, &cfg.with_points(2 * a.points))?;
        let mut slow: f64 = 0.0;
        for (c, f) in rows.iter().zip(&fine) {
            if f.rel_residual > RESIDUAL_FLOOR {
                slow = slow.max(f.rel_residual * 4.0 / c.rel_residual.max(1e-300));
            }
        }
        checks.push(check("refinement_gain", slow, 1.0, true));
    }
    for (name, rep) in manufactured_energy_cases()? {
        checks.push(Check {
            name: name.clone(),
            value: rep.worst_slack,
            threshold: 0.0,
            pass: rep.holds(),
        });
        if name == "energy_constant" {
            checks.push(check(
                "energy_constant_equality",
                rep.residual.abs_residual,
                1e-10,
                true,
            ));
        }
        // inequality rows report the violation max(0, −slack)
        let violation = (-rep.worst_slack).max(0.0);
        let mut row = rep.residual;
        row.id = name;
        row.scale = rep.scale;
        row.abs_residual = violation;
        row.rel_residual = violation / rep.scale.max(1e-300);
        rows.push(row);
    }
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    write_residuals_csv(&a.out, &rows)?;
    let mut summary = BTreeMap::new();
    for r in &rows {
        let e = summary.entry(r.id.clone()).or_insert(0.0f64);
        *e = e.max(r.rel_residual);
    }
    write_manifest(
        &manifest_path(&a.out, a.manifest.clone()),
        ManifestInput {
            experiment: "check-identities",
            config: &a,
            seed: 0,
            convention: "mixed",
            tolerances: BTreeMap::from([
                ("rel_residual".into(), IDENTITY_TOLERANCE),
                ("residual_floor".into(), RESIDUAL_FLOOR),
            ]),
            outputs: vec![a.out.clone()],
            summary,
            checks,
            warnings: Vec::new(),
        },
    )
}

fn experiment(
    a: ExperimentArgs,
    runner: fn(&ExperimentConfig) -> Result<EnergyReport>,
) -> Result<RunManifest> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let mut report = runner(&cfg)?;
    if let Some(path) = &a.write_golden {
        write_json(path, &report.summary)?;
    }
    if let Some(path) = &a.golden {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        let golden: BTreeMap<String, f64> = serde_json::from_str(&text)?;
        report.compare_golden(&golden);
    }
    write_run(&a.out, &cfg, &report)
}

fn report(a: ReportArgs) -> Result<RunManifest> {
    let rows = merge_reports(&a.inputs, &a.out)?;
    write_manifest(
        &manifest_path(&a.out, a.manifest.clone()),
        ManifestInput {
            experiment: "report",
            config: &a,
            seed: 0,
            convention: "",
            tolerances: BTreeMap::new(),
            outputs: vec![a.out.clone()],
            summary: BTreeMap::from([("rows".to_string(), rows as f64)]),
            checks: vec![check("rows", rows as f64, 1.0, false)],
            warnings: Vec::new(),
        },
    )
}
