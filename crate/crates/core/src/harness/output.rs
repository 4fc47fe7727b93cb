use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::ExperimentConfig;
use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Write `rows` to `dir/name` behind two comment lines: the artifact
/// version with the config hash, then the resolved config as JSON.
pub fn write_csv<T: Serialize>(dir: &Path, name: &str, cfg: &ExperimentConfig, rows: &[T]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut file = File::create(&path)?;
    writeln!(file, "# otajam {VERSION} config_sha256={}", cfg.sha256())?;
    writeln!(file, "# config: {}", cfg.to_json_line())?;
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(path)
}

/// Read back a CSV written by [`write_csv`], skipping the comment lines.
pub fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}
