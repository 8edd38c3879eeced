//! Experiment drivers: structure constants, initial data, configuration,
//! runs and their persisted artifacts.

pub mod config;
pub mod data;
pub mod manifest;
pub mod run;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use config::{ExperimentConfig, ExperimentKind};
pub use data::{build_data, DataSpec};
pub use manifest::{merge_reports, write_manifest, write_run, ManifestInput, RunManifest};
pub use run::{
    run, run_bootstrap, run_decay, run_full, run_propagation, Check, EnergyReport, Series,
};

/// Convention recorded in every manifest.
pub const CONVENTION: &str = "u_t=+d5u+u*d3u";

/// Degree of the polynomial dependence on `ν` of the propagation bound at
/// order `l`.
pub fn nu_degree(l: u32) -> Result<u32> {
    const TABLE: [u32; 6] = [1, 1, 2, 2, 4, 8];
    match l {
        0 => Err(Error::contract("nu_degree needs l ≥ 1")),
        1..=6 => Ok(TABLE[l as usize - 1]),
        _ => Ok(8 * (l - 5)),
    }
}

/// Cascade of `(l, n)` pairs trading weight for derivatives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapSchedule {
    pub n: u32,
    pub pairs: Vec<(u32, u32)>,
    pub final_l: u32,
}

pub fn bootstrap_schedule(n: u32) -> Result<BootstrapSchedule> {
    if n == 0 {
        return Err(Error::contract("bootstrap_schedule needs n ≥ 1"));
    }
    Ok(BootstrapSchedule {
        n,
        pairs: (0..=n).map(|k| (2 * k, n - k)).collect(),
        final_l: 2 * n + 1,
    })
}
