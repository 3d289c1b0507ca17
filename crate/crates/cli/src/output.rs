//! Deterministic CSV assembly. Files are built fully in memory and written
//! in one shot, so a failed run never leaves a partial file behind.

use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

pub struct CsvFile {
    buf: String,
}

impl CsvFile {
    pub fn new() -> Self {
        let mut buf = String::new();
        let _ = writeln!(buf, "# resonant {}", env!("CARGO_PKG_VERSION"));
        Self { buf }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.buf, "# {key}: {value}");
        self
    }

    pub fn header(&mut self, columns: &str) -> &mut Self {
        self.meta("columns", columns);
        let _ = writeln!(self.buf, "{columns}");
        self
    }

    pub fn row(&mut self, line: &str) -> &mut Self {
        let _ = writeln!(self.buf, "{line}");
        self
    }

    pub fn write(self, path: &Path) -> Result<(), CliError> {
        if let Err(e) = std::fs::write(path, self.buf.as_bytes()) {
            // never leave a truncated file behind
            let _ = std::fs::remove_file(path);
            return Err(CliError::Io(format!("cannot write {}: {e}", path.display())));
        }
        Ok(())
    }
}

/// Probabilities and grid coordinates: fixed six decimals.
pub fn fix6(x: f64) -> String {
    format!("{x:.6}")
}

/// Exponents, traces, norms: scientific, nine significant digits.
pub fn sci9(x: f64) -> String {
    format!("{x:.8e}")
}
