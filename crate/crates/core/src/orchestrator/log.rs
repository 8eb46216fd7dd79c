//! Append-only JSON Lines files.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

/// Appends one JSON document per line; without a path it only counts.
#[derive(Debug)]
pub struct JsonLinesLog {
    path: Option<PathBuf>,
    file: Option<File>,
    lines: usize,
}

impl JsonLinesLog {
    pub fn in_memory() -> Self {
        JsonLinesLog { path: None, file: None, lines: 0 }
    }

    /// Opens `path` for appending, creating it if needed.
    pub fn open(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        let lines = if path.exists() { BufReader::new(File::open(&path)?).lines().count() } else { 0 };
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(JsonLinesLog { path: Some(path), file: Some(file), lines })
    }

    pub fn append<T: Serialize>(&mut self, record: &T) -> std::io::Result<()> {
        if let Some(file) = &mut self.file {
            let mut line = serde_json::to_vec(record).map_err(std::io::Error::other)?;
            line.push(b'\n');
            file.write_all(&line)?;
            file.flush()?;
        }
        self.lines += 1;
        Ok(())
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        match &mut self.file {
            Some(file) => file.sync_data(),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.lines
    }

    pub fn is_empty(&self) -> bool {
        self.lines == 0
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }
}

/// Reads every line of a JSON Lines file. A missing file reads as empty.
pub fn read_json_lines<T: DeserializeOwned>(path: impl AsRef<Path>) -> std::io::Result<Vec<T>> {
    let path = path.as_ref();
    if !path.exists() {
        return Ok(Vec::new());
    }
    BufReader::new(File::open(path)?)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| serde_json::from_str(&l?).map_err(std::io::Error::other))
        .collect()
}
