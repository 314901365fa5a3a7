//! CSV files with a `#`-prefixed metadata header.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::{CliError, ExperimentConfig};

pub const TOOL: &str = concat!("sqclock ", env!("CARGO_PKG_VERSION"));

/// Scientific notation with nine significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.8e}")
}

/// Optional value; missing values are written as `nan`.
pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), num)
}

/// Metadata written above every table.
pub struct Header<'a> {
    pub command: &'a str,
    pub config: &'a ExperimentConfig,
    /// `key = value` modeling choices not visible in the configuration.
    pub decisions: Vec<(&'static str, String)>,
    /// Free-form summary lines.
    pub notes: Vec<String>,
}

impl Header<'_> {
    fn write(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "# tool: {TOOL}")?;
        writeln!(out, "# command: {}", self.command)?;
        for (k, v) in &self.decisions {
            writeln!(out, "# decision.{k} = {v}")?;
        }
        for note in &self.notes {
            writeln!(out, "# {note}")?;
        }
        writeln!(out, "# resolved configuration:")?;
        for line in self.config.to_toml().lines() {
            writeln!(out, "#   {line}")?;
        }
        Ok(())
    }
}

/// Write `header`, the column names and `rows` to `dir/name`.
pub fn write_table(
    dir: &Path,
    name: &str,
    header: &Header,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let mut file = BufWriter::new(File::create(dir.join(name))?);
    header.write(&mut file)?;
    let mut csv = csv::Writer::from_writer(file);
    csv.write_record(columns)?;
    for row in rows {
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}
