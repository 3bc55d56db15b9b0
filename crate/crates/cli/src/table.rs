use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use csv::{Terminator, Writer, WriterBuilder};

use crate::CliError;

pub const REPORT_HEADER: [&str; 9] = ["scheme", "param_json", "i_ps", "signal", "noise", "snr", "snr_db", "snr_oracle", "rel_err"];

/// Shortest round-trip scientific notation; `.` decimal point regardless of
/// locale.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn writer(path: Option<&Path>) -> Result<Writer<Box<dyn Write>>, CliError> {
    let sink: Box<dyn Write> = match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(io::stdout().lock()),
    };
    Ok(WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(sink))
}
