use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::CliError;

pub const MANIFEST_SUFFIX: &str = ".manifest.json";

/// Provenance of one run. Timestamps live here and nowhere else, so the CSV
/// and JSON artifacts stay byte-identical across reruns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config_path: PathBuf,
    /// Hash of every config field that affects the output.
    pub config_hash: String,
    pub graph: String,
    pub alpha: Option<f64>,
    pub seed: u64,
    pub threads: usize,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub runtime_seconds: f64,
    pub csv: PathBuf,
    pub json: PathBuf,
    pub version: String,
    pub passed: bool,
}

impl RunManifest {
    pub fn file_name(experiment: &str) -> String {
        format!("{experiment}{MANIFEST_SUFFIX}")
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let body = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_atomically(&dir.join(Self::file_name(&self.experiment)), body.as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

pub(super) fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomically(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = RunManifest {
            experiment: "two-point".into(),
            config_path: "c.conf".into(),
            config_hash: "ab".into(),
            graph: "p2".into(),
            alpha: None,
            seed: 3,
            threads: 2,
            started_unix: 1,
            finished_unix: 2,
            runtime_seconds: 0.5,
            csv: dir.path().join("two-point.csv"),
            json: dir.path().join("two-point.json"),
            version: "0.1.0".into(),
            passed: true,
        };
        m.write(dir.path()).unwrap();
        let back = RunManifest::read(&dir.path().join("two-point.manifest.json")).unwrap();
        assert_eq!(back, m);
        assert!(!dir.path().join("two-point.manifest.json.tmp").exists());
    }
}
