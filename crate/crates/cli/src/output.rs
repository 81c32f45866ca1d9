//! Number formatting, CSV rows and atomically written run artifacts.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// `v` rounded to `digits` significant digits, in plain notation for
/// moderate magnitudes and scientific notation otherwise.
pub fn fmt_sig(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if exp < -5 || exp >= digits as i32 {
        return sci;
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let plain = format!("{v:.decimals$}");
    if plain.contains('.') {
        plain.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        plain
    }
}

/// One line of `montecarlo.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub family: String,
    pub ell: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub order: usize,
    pub mean: f64,
    pub std: f64,
    pub trials: u64,
    pub seed: u64,
}

/// One line of `bench.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub algorithm: String,
    pub ell: usize,
    pub reps: usize,
    pub median_seconds: f64,
    pub value_re: f64,
    pub value_im: f64,
}

/// One line of `moment.csv` or `cumulant.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueRow {
    pub state: String,
    pub indices: String,
    pub method: String,
    pub value: f64,
}

pub fn csv_bytes<T: Serialize>(rows: &[T]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Input(format!("csv encoding failed: {e}")))?;
    }
    w.into_inner().map_err(|e| CliError::Input(format!("csv encoding failed: {e}")))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// SHA-256 of the canonical JSON form of `config` (object keys sorted).
pub fn config_digest<T: Serialize>(config: &T) -> String {
    let value = serde_json::to_value(config).expect("configs serialise to JSON");
    let canonical = serde_json::to_vec(&value).expect("JSON values serialise");
    hex::encode(Sha256::digest(&canonical))
}

/// Audit record written next to every output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub seed: Option<u64>,
    pub library_version: String,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_vec_pretty(self).expect("manifests serialise");
        write_atomic(path, &text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(3.0, 12), "3");
        assert_eq!(fmt_sig(0.0, 12), "0");
        assert_eq!(fmt_sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(fmt_sig(-2.0 / 3.0 * 1000.0, 12), "-666.666666667");
        assert_eq!(fmt_sig(1.5e-9, 12), "1.50000000000e-9");
        assert_eq!(fmt_sig(123456789012345.0, 12), "1.23456789012e14");
    }

    #[test]
    fn digest_ignores_key_order() {
        let a: serde_json::Value = serde_json::from_str(r#"{"a": 1, "b": [1, 2]}"#).unwrap();
        let b: serde_json::Value = serde_json::from_str(r#"{"b": [1, 2], "a": 1}"#).unwrap();
        assert_eq!(config_digest(&a), config_digest(&b));
        assert_eq!(config_digest(&a).len(), 64);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let rows = vec![McRow {
            family: "lossy_squeezed(eta=0.5)".into(),
            ell: 8,
            k: 4,
            order: 2,
            mean: 0.1 + 0.2,
            std: 1e-17,
            trials: 10,
            seed: 3,
        }];
        write_atomic(&path, &csv_bytes(&rows).unwrap()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("family,ell,K,order,mean,std,trials,seed\n"));
        assert_eq!(read_csv::<McRow>(&path).unwrap(), rows);
    }
}
