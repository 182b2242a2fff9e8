//! Deterministic file output: CSV with 17-significant-digit floats, '.'
//! decimal separator, and '\n' line endings, plus pretty JSON. All writes go
//! through one serializer so file ordering is stable.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// Lossless text form of a double: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Single-threaded sink for all artifact files of one run.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(CliError::Io)?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn written_files(&self) -> &[String] {
        &self.written
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = to_json(value)?;
        self.write_raw(name, text.as_bytes())
    }

    pub fn write_csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[Vec<f64>],
    ) -> Result<(), CliError> {
        let mut buf = String::new();
        buf.push_str(&header.join(","));
        buf.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
            buf.push_str(&cells.join(","));
            buf.push('\n');
        }
        self.write_raw(name, buf.as_bytes())
    }

    pub fn write_text(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        self.write_raw(name, contents.as_bytes())
    }

    fn write_raw(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(name);
        let mut file = fs::File::create(&path).map_err(CliError::Io)?;
        file.write_all(bytes).map_err(CliError::Io)?;
        self.written.push(name.to_string());
        Ok(())
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Compute(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}
