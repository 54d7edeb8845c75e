//! In-memory artifacts, written to disk in one single-threaded pass.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// A CSV table with a fixed header. Cells are already formatted.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> anyhow::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }
}

/// Formats a row from heterogeneous displayable values.
#[macro_export]
macro_rules! row {
    ($($v:expr),* $(,)?) => { vec![$($v.to_string()),*] };
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
    pub rows: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    pub files: Vec<Artifact>,
}

impl Artifacts {
    pub fn table(&mut self, name: &str, table: &Table) -> anyhow::Result<()> {
        self.files.push(Artifact { name: name.to_string(), bytes: table.to_csv()?, rows: table.rows.len() });
        Ok(())
    }

    pub fn jsonl(&mut self, name: &str, bytes: Vec<u8>) {
        let rows = bytes.iter().filter(|&&b| b == b'\n').count();
        self.files.push(Artifact { name: name.to_string(), bytes, rows });
    }

    pub fn get(&self, name: &str) -> Option<&Artifact> {
        self.files.iter().find(|a| a.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub rows: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Creates `dir`, refusing to reuse a non-empty directory unless `force`.
pub fn prepare_dir(dir: &Path, force: bool) -> anyhow::Result<()> {
    if dir.exists() {
        let occupied = fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?.next().is_some();
        if occupied && !force {
            bail!("output directory {} already exists and is not empty; pass --force to overwrite", dir.display());
        }
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn write_all(dir: &Path, artifacts: &Artifacts) -> anyhow::Result<Vec<OutputRecord>> {
    let mut records = Vec::new();
    for a in &artifacts.files {
        let path: PathBuf = dir.join(&a.name);
        fs::write(&path, &a.bytes).with_context(|| format!("writing {}", path.display()))?;
        records.push(OutputRecord { file: a.name.clone(), sha256: sha256_hex(&a.bytes), rows: a.rows });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_and_keeps_header_for_empty_tables() {
        let mut t = Table::new(&["a", "b"]);
        assert_eq!(t.to_csv().unwrap(), b"a,b\n");
        t.push(row!["x,y", 1.5]);
        assert_eq!(t.to_csv().unwrap(), b"a,b\n\"x,y\",1.5\n");
    }

    #[test]
    fn refuses_occupied_directory() {
        let dir = tempfile::tempdir().unwrap();
        prepare_dir(dir.path(), false).unwrap();
        fs::write(dir.path().join("f"), b"1").unwrap();
        assert!(prepare_dir(dir.path(), false).is_err());
        prepare_dir(dir.path(), true).unwrap();
    }
}
