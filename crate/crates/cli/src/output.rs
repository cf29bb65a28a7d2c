//! Report files. Every file starts with the quantity it holds, the command,
//! the version and the resolved configuration.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Command, RunConfig};
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    quantity: &'a str,
    command: &'a str,
    walklab_version: &'a str,
    config: &'a RunConfig,
    report: &'a T,
}

pub struct Output {
    dir: PathBuf,
    command: Command,
    config: RunConfig,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new(command: Command, config: &RunConfig) -> Result<Self, CliError> {
        let dir = config.out_dir().to_path_buf();
        fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
        Ok(Self {
            dir,
            command,
            config: config.clone(),
            written: Vec::new(),
        })
    }

    /// Replaces the embedded configuration, for parameters resolved late.
    pub fn set_config(&mut self, config: &RunConfig) {
        self.config = config.clone();
    }

    pub fn json<T: Serialize>(&mut self, file: &str, quantity: &str, report: &T) -> Result<(), CliError> {
        let doc = Document {
            quantity,
            command: self.command.name(),
            walklab_version: VERSION,
            config: &self.config,
            report,
        };
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Numeric(e.to_string()))?;
        text.push('\n');
        self.write(file, text.as_bytes())
    }

    pub fn csv(&mut self, file: &str, quantity: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let config = serde_json::to_string(&self.config).map_err(|e| CliError::Numeric(e.to_string()))?;
        let mut buf = Vec::new();
        writeln!(buf, "# quantity: {quantity}").unwrap();
        writeln!(buf, "# command: {}", self.command.name()).unwrap();
        writeln!(buf, "# walklab_version: {VERSION}").unwrap();
        writeln!(buf, "# config: {config}").unwrap();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let csv_err = |e: csv::Error| CliError::Numeric(e.to_string());
            w.write_record(header).map_err(csv_err)?;
            for r in rows {
                w.write_record(r).map_err(csv_err)?;
            }
            w.flush().map_err(|e| CliError::Numeric(e.to_string()))?;
        }
        self.write(file, &buf)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn write(&mut self, file: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(file);
        fs::write(&path, bytes).map_err(|e| io_error(&path, e))?;
        self.written.push(path);
        Ok(())
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("cannot write {}: {e}", path.display()))
}

/// Shortest round-trip form; empty for values that are not finite.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        String::new()
    }
}
