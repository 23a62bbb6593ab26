//! Artifact writing: JSON reports carry the resolved config and version.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use magberezin::report::{to_json_compact, to_json_string, to_value};
use magberezin::VERSION;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        self != Format::Csv
    }
    pub fn csv(self) -> bool {
        self != Format::Json
    }
}

pub struct Sink {
    pub dir: PathBuf,
    pub format: Format,
    written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(dir: &Path, format: Format) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn record(&mut self, p: PathBuf) {
        self.written.push(p);
    }

    /// Writes `{version, command, config, result}` as `<stem>.json`.
    pub fn report<T: Serialize>(&mut self, stem: &str, command: &str, config: &ExperimentConfig, result: &T) -> Result<()> {
        if !self.format.json() {
            return Ok(());
        }
        let doc = json!({
            "version": VERSION,
            "command": command,
            "config": to_value(config)?,
            "result": to_value(result)?,
        });
        let p = self.path(&format!("{stem}.json"));
        fs::write(&p, to_json_string(&doc)?).with_context(|| format!("writing {}", p.display()))?;
        self.record(p);
        Ok(())
    }

    /// Writes CSV text, preceded by comment lines with the version and the
    /// compact resolved config.
    pub fn csv(&mut self, name: &str, config: &ExperimentConfig, body: &str) -> Result<()> {
        if !self.format.csv() {
            return Ok(());
        }
        let p = self.path(name);
        fs::write(&p, with_header(config, body)?).with_context(|| format!("writing {}", p.display()))?;
        self.record(p);
        Ok(())
    }

    /// Writes a file regardless of format (binary dumps).
    pub fn raw(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))?;
        self.record(p);
        Ok(())
    }
}

pub fn with_header(config: &ExperimentConfig, body: &str) -> Result<String> {
    let cfg: Value = to_value(config)?;
    Ok(format!("# magq {VERSION}\n# config {}\n{body}", to_json_compact(&cfg)?))
}

/// Serializes rows to CSV text with the csv crate.
pub fn csv_text<R: Serialize>(rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
