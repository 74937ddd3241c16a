use std::path::Path;

use crate::{CliError, CliResult, OutputArgs, Units};

pub const WAVENUMBERS_PER_HARTREE: f64 = 219474.6313632;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
    Json,
}

impl OutputArgs {
    /// `--json` or `--csv` if given, otherwise the command's default.
    pub fn format(&self, default: Format) -> Format {
        if self.json {
            Format::Json
        } else if self.csv {
            Format::Csv
        } else {
            default
        }
    }
}

impl Units {
    pub fn convert(self, hartree: f64) -> f64 {
        match self {
            Units::Hartree => hartree,
            Units::Wavenumber => hartree * WAVENUMBERS_PER_HARTREE,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Units::Hartree => "hartree",
            Units::Wavenumber => "cm-1",
        }
    }
}

/// `x` with 12 significant digits.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..12).contains(&mag) {
        format!("{:.*}", (11 - mag).max(0) as usize, x)
    } else {
        format!("{x:.11e}")
    }
}

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::File { path: path.to_path_buf(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// CSV field with separators removed.
pub fn csv_field(s: &str) -> String {
    s.replace([',', '\n'], ";")
}
