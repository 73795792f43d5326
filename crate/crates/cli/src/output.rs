//! Writers for run artifacts. Floats in CSV carry 17 significant digits; JSON
//! uses the shortest representation that round-trips.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// Collects the files written by one run, relative to its output directory.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(self.root.join(name), text)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let mut w = BufWriter::new(fs::File::create(self.root.join(name))?);
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            let line: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        w.flush()?;
        self.written.push(name.to_string());
        Ok(())
    }
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6f64.powf(2.0 / 3.0)] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }
}
