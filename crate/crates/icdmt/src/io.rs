//! File formats: per-point CSV, JSON envelopes and lattice JSON.

use std::fs;
use std::path::{Path, PathBuf};

use icdmt_core::lattice::LatticeSpec;
use icdmt_core::linalg::RMatrix;
use icdmt_core::sim::PePoint;
use serde::{Deserialize, Serialize, Serializer};

use crate::{Error, Result};

/// Overrides the default output directory.
pub const OUT_DIR_ENV: &str = "ICDMT_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "results";

/// `flag`, else `$ICDMT_OUT_DIR`, else `results`.
pub fn out_dir(flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
    }
}

/// `<dir>/<name>.<seed>.csv` and `<dir>/<name>.<seed>.json`.
pub fn data_paths(dir: &Path, name: &str, seed: u64) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("{name}.{seed}.csv")),
        dir.join(format!("{name}.{seed}.json")),
    )
}

#[derive(Serialize)]
struct CsvRow {
    rho_db: f64,
    trials: u64,
    errors: u64,
    pe: f64,
    ci_low: f64,
    ci_high: f64,
    outage_fraction: f64,
}

pub fn write_points<W: std::io::Write>(out: W, points: &[PePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(CsvRow {
            rho_db: p.rho_db,
            trials: p.trials,
            errors: p.errors,
            pe: p.pe,
            ci_low: p.ci_low,
            ci_high: p.ci_high,
            outage_fraction: p.outage_fraction,
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// CSV text for `points`; a header-only table when `points` is empty.
pub fn points_csv(points: &[PePoint]) -> Result<String> {
    if points.is_empty() {
        return Ok("rho_db,trials,errors,pe,ci_low,ci_high,outage_fraction\n".to_owned());
    }
    let mut buf = Vec::new();
    write_points(&mut buf, points)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes the point table and the JSON envelope of one run; returns their paths.
pub fn save_run<T: Serialize>(
    dir: &Path,
    name: &str,
    seed: u64,
    points: &[PePoint],
    envelope: &T,
) -> Result<(PathBuf, PathBuf)> {
    let (csv_path, json_path) = data_paths(dir, name, seed);
    write_text(&csv_path, &points_csv(points)?)?;
    write_json(&json_path, envelope)?;
    Ok((csv_path, json_path))
}

/// JSON form of a lattice: `generator` is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeJson {
    pub dim: usize,
    pub covolume: f64,
    pub generator: Vec<f64>,
}

impl From<&LatticeSpec> for LatticeJson {
    fn from(lat: &LatticeSpec) -> Self {
        Self {
            dim: lat.dim,
            covolume: lat.covolume,
            generator: (0..lat.dim)
                .flat_map(|i| (0..lat.dim).map(move |j| (i, j)))
                .map(|(i, j)| lat.generator[(i, j)])
                .collect(),
        }
    }
}

impl TryFrom<&LatticeJson> for LatticeSpec {
    type Error = Error;

    fn try_from(json: &LatticeJson) -> Result<Self> {
        if json.generator.len() != json.dim * json.dim {
            return Err(Error::Config(format!(
                "lattice generator has {} entries, expected {}",
                json.generator.len(),
                json.dim * json.dim
            )));
        }
        Ok(LatticeSpec::new(RMatrix::from_row_slice(
            json.dim,
            json.dim,
            &json.generator,
        ))?)
    }
}

pub(crate) fn serialize_lattice<S: Serializer>(lat: &LatticeSpec, s: S) -> std::result::Result<S::Ok, S::Error> {
    LatticeJson::from(lat).serialize(s)
}
