use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;

use crate::error::{input, CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Obj,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Obj => "obj",
        }
    }
}

/// Artifact directory. Every write is recorded for the summary line.
pub struct Out {
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Out {
    pub fn new(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, text: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.written.push(path);
        Ok(())
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| input(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }
}

/// Header plus rows, written with the csv crate.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| input(e.to_string()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| input(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| input(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| input(e.to_string()))
}

pub fn require(format: Format, allowed: &[Format], command: &str) -> CliResult<()> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        Err(input(format!("{command} cannot emit {} output", format.extension())))
    }
}
