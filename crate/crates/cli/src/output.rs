use crate::error::CliError;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

/// Hex SHA-256 of the canonical JSON form of the resolved configuration.
pub fn config_hash<T: Serialize>(cfg: &T) -> String {
    let text = serde_json::to_string(cfg).expect("config serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// CSV tables sharing one metadata block.
pub struct TableWriter {
    pub dir: PathBuf,
    pub hash: String,
    pub tolerances: BTreeMap<String, f64>,
    pub written: Vec<PathBuf>,
}

impl TableWriter {
    pub fn new(dir: &Path, hash: String) -> Self {
        TableWriter { dir: dir.to_path_buf(), hash, tolerances: BTreeMap::new(), written: Vec::new() }
    }

    pub fn tolerance(&mut self, key: &str, value: f64) -> f64 {
        self.tolerances.insert(key.to_string(), value);
        value
    }

    /// Header row, records in order, then a `#` comment block with the config
    /// hash and every tolerance in effect.
    pub fn write<R: Serialize>(&mut self, name: &str, header: &[&str], rows: &[R]) -> Result<PathBuf, CliError> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.serialize(r)?;
        }
        let mut bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        bytes.extend_from_slice(format!("# config_hash={}\n", self.hash).as_bytes());
        for (k, v) in &self.tolerances {
            bytes.extend_from_slice(format!("# tolerance.{k}={v}\n").as_bytes());
        }
        fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(format!("{name}.csv"));
        fs::write(&path, bytes)?;
        self.written.push(path.clone());
        Ok(path)
    }
}
