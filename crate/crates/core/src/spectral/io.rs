//! Field persistence: a little-endian `f64` column (`<stem>.bin`) with a JSON
//! sidecar `{L, N, t}` (`<stem>.json`), and a two-column CSV export.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Field, Grid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub points: usize,
    pub t: f64,
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

pub fn write_field(stem: &Path, field: &Field, t: f64) -> Result<()> {
    let bin = with_ext(stem, "bin");
    let json = with_ext(stem, "json");
    let bytes: Vec<u8> = field
        .samples()
        .iter()
        .flat_map(|v| v.to_le_bytes())
        .collect();
    fs::write(&bin, bytes).map_err(|e| Error::io(&bin, e))?;
    let sidecar = Sidecar {
        length: field.grid().length(),
        points: field.grid().len(),
        t,
    };
    fs::write(&json, serde_json::to_string_pretty(&sidecar)?).map_err(|e| Error::io(&json, e))
}

pub fn read_field(stem: &Path) -> Result<(Field, f64)> {
    let bin = with_ext(stem, "bin");
    let json = with_ext(stem, "json");
    let text = fs::read_to_string(&json).map_err(|e| Error::io(&json, e))?;
    let sidecar: Sidecar = serde_json::from_str(&text)?;
    let bytes = fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
    if bytes.len() != 8 * sidecar.points {
        return Err(Error::contract(format!(
            "{} holds {} bytes, expected {}",
            bin.display(),
            bytes.len(),
            8 * sidecar.points
        )));
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let grid = Grid::new(sidecar.length, sidecar.points)?;
    Ok((Field::new(grid, samples)?, sidecar.t))
}

/// Rows `x_j,u_j` with a header.
pub fn write_csv(path: &Path, field: &Field) -> Result<()> {
    let mut out = String::from("x,u\n");
    for (x, v) in field.grid().xs().zip(field.samples()) {
        out.push_str(&format!("{x:e},{v:e}\n"));
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::band_limited_random;

    #[test]
    fn binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(12.5, 64).unwrap();
        let u = band_limited_random(&g, 10, 9, 1.0).unwrap();
        let stem = dir.path().join("snap");
        write_field(&stem, &u, 0.25).unwrap();
        let (v, t) = read_field(&stem).unwrap();
        assert_eq!(u, v);
        assert_eq!(t, 0.25);
        let side = fs::read_to_string(dir.path().join("snap.json")).unwrap();
        assert!(side.contains("\"L\"") && side.contains("\"N\""));
    }

    #[test]
    fn csv_has_one_row_per_sample() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(1.0, 8).unwrap();
        let path = dir.path().join("u.csv");
        write_csv(&path, &Field::zeros(g)).unwrap();
        assert_eq!(fs::read_to_string(path).unwrap().lines().count(), 9);
    }
}
