//! CSV and JSON emitters with `#` metadata headers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

/// Header lines shared by every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub tool: String,
    pub core: String,
    pub command: String,
    pub schema: String,
    pub conventions: String,
    pub preset: Option<String>,
}

impl Meta {
    pub fn new(config: &RunConfig, command: &str, schema: &str) -> Self {
        Self {
            tool: format!("rotcool-cli {}", env!("CARGO_PKG_VERSION")),
            core: format!("rotcool {}", rotcool::VERSION),
            command: command.into(),
            schema: schema.into(),
            conventions: config.numerics.conventions(),
            preset: config.preset.clone(),
        }
    }

    fn lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("# {} ({})", self.tool, self.core),
            format!("# command: {}", self.command),
            format!("# schema: {}", self.schema),
            format!("# conventions: {}", self.conventions),
        ];
        if let Some(p) = &self.preset {
            out.push(format!("# preset: {p}"));
        }
        out
    }
}

/// Twelve significant digits.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.11e}")
    }
}

pub fn write_csv(path: &Path, meta: &Meta, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut file = BufWriter::new(File::create(path)?);
    for line in meta.lines() {
        writeln!(file, "{line}")?;
    }
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, meta: &Meta, body: &T) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        meta: &'a Meta,
        #[serde(flatten)]
        body: &'a T,
    }
    let file = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(file, &Doc { meta, body })?;
    Ok(())
}
