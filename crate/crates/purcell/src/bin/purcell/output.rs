//! Self-describing CSV and JSON writers.
//!
//! Every file starts with `#` header comments carrying the tool version and
//! the effective merged configuration, so re-running the header's settings
//! reproduces the file bit-identically.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use purcell::{Error, Result};

use crate::config::fmt_float;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn open_sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(std::io::stdout().lock())),
        Some(p) => {
            let f = std::fs::File::create(p)
                .map_err(|e| Error::Config(format!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(std::io::BufWriter::new(f)))
        }
    }
}

fn write_header(
    w: &mut dyn Write,
    subcommand: &str,
    echo: &BTreeMap<String, String>,
) -> std::io::Result<()> {
    writeln!(w, "# purcell v{VERSION}")?;
    writeln!(w, "# subcommand = {subcommand}")?;
    for (k, v) in echo {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

/// Writes a CSV with header comments, a column row, and 17-significant-digit
/// numeric cells.
pub fn write_csv(
    path: Option<&Path>,
    subcommand: &str,
    echo: &BTreeMap<String, String>,
    columns: &[String],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<()> {
    let mut w = open_sink(path)?;
    let io = |e: std::io::Error| Error::Config(format!("write failed: {e}"));
    write_header(&mut w, subcommand, echo).map_err(io)?;
    writeln!(w, "{}", columns.join(",")).map_err(io)?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_float(x)).collect();
        writeln!(w, "{}", cells.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

/// Writes a JSON object with the effective config under a `config` key.
pub fn write_json(
    path: Option<&Path>,
    subcommand: &str,
    echo: &BTreeMap<String, String>,
    mut value: serde_json::Value,
) -> Result<()> {
    let obj = value
        .as_object_mut()
        .expect("write_json expects an object value");
    obj.insert("tool".into(), serde_json::json!(format!("purcell v{VERSION}")));
    obj.insert("subcommand".into(), serde_json::json!(subcommand));
    obj.insert("config".into(), serde_json::json!(echo));
    let mut w = open_sink(path)?;
    let io = |e: std::io::Error| Error::Config(format!("write failed: {e}"));
    let text = serde_json::to_string_pretty(&value)
        .map_err(|e| Error::Config(format!("JSON encoding failed: {e}")))?;
    writeln!(w, "{text}").map_err(io)?;
    w.flush().map_err(io)?;
    Ok(())
}

/// CSV-safe column name for a basis-state label.
pub fn label_column(label: &str) -> String {
    label
        .chars()
        .map(|c| match c {
            ',' => '.',
            '+' => 'p',
            '-' => 'm',
            other => other,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_become_csv_safe() {
        assert_eq!(label_column("u+,1+,0"), "up.1p.0");
        assert_eq!(label_column("u,0,1-"), "u.0.1m");
        assert_eq!(label_column("e,0"), "e.0");
    }
}
