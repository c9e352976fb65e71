//! Experiment directories: config copy, manifest, CSV tables.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

use crate::config::LoadedConfig;
use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const OUT_ENV: &str = "BOVIRIAL_OUT";
pub const DEFAULT_OUT_ROOT: &str = "bovirial-out";

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `--out` when given, else `$BOVIRIAL_OUT/<id>` or `bovirial-out/<id>`.
pub fn resolve_out(out: Option<&Path>, id: &str) -> PathBuf {
    match out {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_ROOT))
            .join(id),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Running,
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub command: String,
    pub config_digest: String,
    pub created: String,
    pub status: Status,
    /// Paths relative to the experiment directory.
    pub inventory: Vec<String>,
    pub notes: Vec<String>,
    pub error: Option<String>,
    pub exit_code: i32,
}

/// An experiment directory being written.
#[derive(Debug)]
pub struct Experiment {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

impl Experiment {
    /// Creates `dir`, copies the config bytes verbatim and writes a running manifest.
    pub fn create(dir: &Path, command: &str, config: &LoadedConfig) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(CONFIG_FILE), config.text.as_bytes())?;
        let config_digest = digest(config.text.as_bytes());
        let manifest = Manifest {
            experiment: experiment_id(command, &config_digest),
            command: command.to_string(),
            config_digest,
            created: OffsetDateTime::now_utc()
                .format(&Rfc3339)
                .unwrap_or_else(|_| "unknown".into()),
            status: Status::Running,
            inventory: vec![CONFIG_FILE.to_string()],
            notes: Vec::new(),
            error: None,
            exit_code: 0,
        };
        let exp = Experiment {
            dir: dir.to_path_buf(),
            manifest,
        };
        exp.write_manifest()?;
        Ok(exp)
    }

    /// Reopens a finished directory after checking its manifest.
    pub fn reopen(dir: &Path) -> Result<Self, CliError> {
        let manifest = verify(dir)?;
        Ok(Experiment {
            dir: dir.to_path_buf(),
            manifest,
        })
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    pub fn record(&mut self, rel: &str) {
        if !self.manifest.inventory.iter().any(|p| p == rel) {
            self.manifest.inventory.push(rel.to_string());
        }
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.manifest.notes.push(note.into());
    }

    pub fn write_manifest(&self) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(&self.manifest)?;
        fs::write(self.dir.join(MANIFEST_FILE), text + "\n")?;
        Ok(())
    }

    pub fn finish(mut self, outcome: &Result<(), CliError>) -> Result<(), CliError> {
        match outcome {
            Ok(()) => {
                self.manifest.status = Status::Complete;
                self.manifest.error = None;
                self.manifest.exit_code = 0;
            }
            Err(e) => {
                self.manifest.status = Status::Failed;
                self.manifest.error = Some(e.to_string());
                self.manifest.exit_code = e.exit_code();
            }
        }
        self.write_manifest()
    }

    /// Writes a CSV table and records it in the inventory.
    pub fn write_table(&mut self, rel: &str, table: &Table) -> Result<(), CliError> {
        let path = self.path(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        table.write(&path, rel)?;
        self.record(rel);
        Ok(())
    }
}

pub fn experiment_id(command: &str, config_digest: &str) -> String {
    format!("{command}-{}", &config_digest[..12.min(config_digest.len())])
}

/// Checks the stored config against the manifest digest and, for finished
/// runs, that every inventory entry exists.
pub fn verify(dir: &Path) -> Result<Manifest, CliError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::MissingData(format!("cannot read {}: {e}", path.display())))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Manifest(format!("{}: {e}", path.display())))?;
    let config = fs::read(dir.join(CONFIG_FILE))
        .map_err(|e| CliError::Manifest(format!("stored config missing: {e}")))?;
    let found = digest(&config);
    if found != manifest.config_digest {
        return Err(CliError::Manifest(format!(
            "config digest {found} does not match manifest {}",
            manifest.config_digest
        )));
    }
    if manifest.status == Status::Complete {
        if let Some(missing) = manifest.inventory.iter().find(|p| !dir.join(p).exists()) {
            return Err(CliError::Manifest(format!("inventory entry {missing} is missing")));
        }
    }
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

/// A CSV table with a fixed header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&v| Cell::Num(v)).collect());
    }

    /// Refuses to write NaN or infinities.
    pub fn write(&self, path: &Path, name: &str) -> Result<(), CliError> {
        for row in &self.rows {
            for (cell, column) in row.iter().zip(&self.header) {
                if matches!(cell, Cell::Num(v) if !v.is_finite()) {
                    return Err(CliError::NonFinite {
                        file: name.to_string(),
                        column: column.clone(),
                    });
                }
            }
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| match c {
                Cell::Num(v) => fmt_f64(*v),
                Cell::Int(v) => v.to_string(),
                Cell::Text(s) => s.clone(),
            }))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A CSV file read back as text cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let mut r = csv::ReaderBuilder::new().from_path(path)?;
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<Result<Vec<Vec<String>>, _>>()?;
        Ok(RawTable { header, rows })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parses a numeric column; `None` when absent or not numeric.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column_index(name)?;
        self.rows.iter().map(|r| r.get(j)?.parse().ok()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loaded(text: &str) -> LoadedConfig {
        LoadedConfig {
            config: crate::config::parse(text).unwrap(),
            text: text.to_string(),
            path: PathBuf::from("cfg.toml"),
        }
    }

    #[test]
    fn number_format_has_17_digits() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(-0.1), "-1.0000000000000001e-1");
        let back: f64 = fmt_f64(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn tables_reject_non_finite() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new(&["t", "x"]);
        t.push_numbers(&[0.0, f64::NAN]);
        let err = t.write(&dir.path().join("a.csv"), "a.csv").unwrap_err();
        assert!(matches!(err, CliError::NonFinite { ref column, .. } if column == "x"));
        let mut t = Table::new(&["t"]);
        t.push_numbers(&[f64::INFINITY]);
        assert!(t.write(&dir.path().join("b.csv"), "b.csv").is_err());
    }

    #[test]
    fn tables_round_trip_with_lf_endings() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        let mut t = Table::new(&["lemma", "n", "value"]);
        t.push(vec![Cell::Text("gns".into()), Cell::Int(3), Cell::Num(0.5)]);
        t.write(&path, "a.csv").unwrap();
        let bytes = fs::read(&path).unwrap();
        assert!(!bytes.contains(&b'\r'));
        let raw = RawTable::read(&path).unwrap();
        assert_eq!(raw.header, ["lemma", "n", "value"]);
        assert_eq!(raw.column("value"), Some(vec![0.5]));
        assert_eq!(raw.column("lemma"), None);
    }

    #[test]
    fn manifest_detects_tampering() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = loaded("[model]\npower = 1\n");
        let mut exp = Experiment::create(dir.path(), "run", &cfg).unwrap();
        exp.note("hello");
        exp.finish(&Ok(())).unwrap();
        let m = verify(dir.path()).unwrap();
        assert_eq!(m.status, Status::Complete);
        assert_eq!(m.config_digest, digest(cfg.text.as_bytes()));
        assert_eq!(m.notes, ["hello"]);

        fs::write(dir.path().join(CONFIG_FILE), "[model]\npower = 2\n").unwrap();
        assert!(matches!(verify(dir.path()), Err(CliError::Manifest(_))));
    }

    #[test]
    fn manifest_detects_missing_inventory() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = loaded("");
        let mut exp = Experiment::create(dir.path(), "run", &cfg).unwrap();
        exp.record("ghost.csv");
        exp.finish(&Ok(())).unwrap();
        assert!(matches!(verify(dir.path()), Err(CliError::Manifest(_))));
    }

    #[test]
    fn failed_runs_record_exit_code() {
        let dir = tempfile::tempdir().unwrap();
        let exp = Experiment::create(dir.path(), "run", &loaded("")).unwrap();
        exp.finish(&Err(CliError::Config("bad".into()))).unwrap();
        let m = verify(dir.path()).unwrap();
        assert_eq!(m.status, Status::Failed);
        assert_eq!(m.exit_code, 2);
    }
}
