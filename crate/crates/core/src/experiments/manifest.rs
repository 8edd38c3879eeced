//! Run artifacts: long-format report CSV and a timestamp-free manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::run::{Check, EnergyReport, BOUNDED_FACTOR, GOLDEN_FACTOR, ROUGH_CONTRAST};
use super::CONVENTION;

pub const REPORT_FILE: &str = "report.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config_digest: String,
    pub seed: u64,
    pub code_version: String,
    pub convention: String,
    pub tolerances: BTreeMap<String, f64>,
    pub dt: f64,
    pub steps: usize,
    /// File name to SHA-256 of its bytes.
    pub outputs: BTreeMap<String, String>,
    pub summary: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub failure: Option<String>,
    pub passed: bool,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn file_digest(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path).map_err(|e| Error::io(path, e))?))
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// `t,functional_id,value` rows, series in report order.
pub fn report_csv(report: &EnergyReport) -> String {
    let mut out = String::from("t,functional_id,value\n");
    for s in &report.series {
        for (t, v) in s.times.iter().zip(&s.values) {
            out.push_str(&format!("{t},{},{v}\n", s.id));
        }
    }
    out
}

/// Writes `report.csv` and `manifest.json` into `dir`.
pub fn write_run(dir: &Path, cfg: &ExperimentConfig, report: &EnergyReport) -> Result<RunManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv = report_csv(report);
    let report_path = dir.join(REPORT_FILE);
    write_atomic(&report_path, csv.as_bytes())?;
    let mut outputs = BTreeMap::new();
    outputs.insert(REPORT_FILE.to_string(), sha256_hex(csv.as_bytes()));
    let manifest = RunManifest {
        experiment: format!("{:?}", cfg.experiment).to_lowercase(),
        config_digest: sha256_hex(serde_json::to_string(cfg)?.as_bytes()),
        seed: cfg.seed,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        convention: CONVENTION.to_string(),
        tolerances: tolerances(),
        dt: report.dt,
        steps: report.steps,
        outputs,
        summary: report.summary.clone(),
        checks: report.checks.clone(),
        warnings: report.warnings.clone(),
        failure: report.failure.clone(),
        passed: report.passed(),
    };
    write_atomic(
        &dir.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&manifest)?.as_bytes(),
    )?;
    Ok(manifest)
}

/// Inputs of a manifest for runs that are not energy experiments.
pub struct ManifestInput<'a, C: Serialize> {
    pub experiment: &'a str,
    pub config: &'a C,
    pub seed: u64,
    pub convention: &'a str,
    pub tolerances: BTreeMap<String, f64>,
    /// Files already written; digested by content.
    pub outputs: Vec<PathBuf>,
    pub summary: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

/// Writes the manifest of `input` to `path`; passes when every check does.
pub fn write_manifest<C: Serialize>(
    path: &Path,
    input: ManifestInput<'_, C>,
) -> Result<RunManifest> {
    let mut outputs = BTreeMap::new();
    for p in &input.outputs {
        let name = p
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| p.display().to_string());
        outputs.insert(name, file_digest(p)?);
    }
    let passed = input.checks.iter().all(|c| c.pass);
    let manifest = RunManifest {
        experiment: input.experiment.to_string(),
        config_digest: sha256_hex(serde_json::to_string(input.config)?.as_bytes()),
        seed: input.seed,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        convention: input.convention.to_string(),
        tolerances: input.tolerances,
        dt: 0.0,
        steps: 0,
        outputs,
        summary: input.summary,
        checks: input.checks,
        warnings: input.warnings,
        failure: None,
        passed,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    write_atomic(path, serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    Ok(manifest)
}

fn tolerances() -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("golden_factor".to_string(), GOLDEN_FACTOR),
        ("rough_contrast".to_string(), ROUGH_CONTRAST),
        ("bounded_factor".to_string(), BOUNDED_FACTOR),
    ])
}

/// Merges CSVs into one `t,functional_id,value` file. Long-format inputs are
/// copied; wide inputs with a `t` column are melted, one id per column. Ids
/// are prefixed with the input's file stem when more than one input is given.
pub fn merge_reports(inputs: &[PathBuf], out: &Path) -> Result<usize> {
    let mut text = String::from("t,functional_id,value\n");
    let mut rows = 0;
    for path in inputs {
        let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = body.lines();
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| Error::Config(format!("{} is empty", path.display())))?
            .split(',')
            .map(str::trim)
            .collect();
        let prefix = if inputs.len() > 1 {
            format!(
                "{}:",
                path.file_stem().and_then(|s| s.to_str()).unwrap_or("input")
            )
        } else {
            String::new()
        };
        let t_col = header
            .iter()
            .position(|h| *h == "t")
            .ok_or_else(|| Error::Config(format!("{} has no t column", path.display())))?;
        let long = header == ["t", "functional_id", "value"];
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                return Err(Error::Config(format!(
                    "ragged row in {}: {line}",
                    path.display()
                )));
            }
            if long {
                text.push_str(&format!("{},{prefix}{},{}\n", cells[0], cells[1], cells[2]));
                rows += 1;
            } else {
                for (j, h) in header.iter().enumerate().filter(|(j, _)| *j != t_col) {
                    text.push_str(&format!("{},{prefix}{h},{}\n", cells[t_col], cells[j]));
                    rows += 1;
                }
            }
        }
    }
    write_atomic(out, text.as_bytes())?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::run::Series;
    use crate::experiments::ExperimentKind;

    fn report() -> EnergyReport {
        EnergyReport {
            experiment: ExperimentKind::Propagation,
            dt: 0.5,
            steps: 2,
            series: vec![Series {
                id: "e".into(),
                times: vec![0.0, 0.5],
                values: vec![1.0, 0.25],
            }],
            summary: BTreeMap::from([("e".to_string(), 1.0)]),
            checks: vec![],
            warnings: vec![],
            failure: None,
        }
    }

    #[test]
    fn csv_is_long_format() {
        assert_eq!(
            report_csv(&report()),
            "t,functional_id,value\n0,e,1\n0.5,e,0.25\n"
        );
    }

    #[test]
    fn merge_long_and_wide() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        fs::write(&a, report_csv(&report())).unwrap();
        fs::write(&b, "t,mass,energy\n0,1,2\n1,3,4\n").unwrap();
        let out = dir.path().join("m.csv");
        assert_eq!(merge_reports(&[a, b], &out).unwrap(), 6);
        let text = fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("t,functional_id,value\n0,a:e,1\n"));
        assert!(text.contains("1,b:energy,4\n"));
        let bad = dir.path().join("bad.csv");
        fs::write(&bad, "x,y\n1,2\n").unwrap();
        assert!(merge_reports(&[bad], &out).is_err());
    }

    #[test]
    fn digest_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
