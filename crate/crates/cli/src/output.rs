//! Buffered report sink: a provenance header followed by CSV rows or newline-delimited
//! JSON records, written in one piece to a file or stdout.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::Format;
use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "v1";

pub fn build_id() -> String {
    format!("wishart-rd {}", env!("CARGO_PKG_VERSION"))
}

/// Command name and the fully resolved parameter set.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub schema_version: &'static str,
    pub build: String,
    pub command: &'static str,
    pub params: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(command: &'static str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            build: build_id(),
            command,
            params: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.to_owned(), value.to_string());
        self
    }

    pub fn list<T: ToString>(&mut self, key: &str, values: &[T]) -> &mut Self {
        let joined = values.iter().map(T::to_string).collect::<Vec<_>>().join(",");
        self.param(key, joined)
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

pub struct Report {
    format: Format,
    header: Vec<u8>,
    csv: csv::Writer<Vec<u8>>,
}

impl Report {
    /// Starts a report; `columns` is the CSV header row (unused for JSON).
    pub fn new(format: Format, provenance: &Provenance, columns: &[&str]) -> Result<Self, CliError> {
        let mut header = Vec::new();
        let mut csv = csv::Writer::from_writer(Vec::new());
        match format {
            Format::Csv => {
                let mut lines = vec![
                    format!("# schema_version={}", provenance.schema_version),
                    format!("# build={}", provenance.build),
                    format!("# command={}", provenance.command),
                ];
                lines.extend(provenance.params.iter().map(|(k, v)| format!("# param {k}={v}")));
                for line in lines {
                    writeln!(header, "{line}").expect("writing to memory");
                }
                csv.write_record(columns).map_err(internal)?;
            }
            Format::Json => {
                let line = serde_json::to_string(provenance).map_err(internal)?;
                writeln!(header, "{line}").expect("writing to memory");
            }
        }
        Ok(Self { format, header, csv })
    }

    /// Appends one record: `fields` for CSV, `record` for JSON.
    pub fn row<T: Serialize>(&mut self, fields: &[String], record: &T) -> Result<(), CliError> {
        match self.format {
            Format::Csv => self.csv.write_record(fields).map_err(internal),
            Format::Json => {
                let line = serde_json::to_string(record).map_err(internal)?;
                writeln!(self.header, "{line}").expect("writing to memory");
                Ok(())
            }
        }
    }

    pub fn into_bytes(self) -> Result<Vec<u8>, CliError> {
        let mut out = self.header;
        out.extend(self.csv.into_inner().map_err(|e| internal(e.error()))?);
        Ok(out)
    }

    pub fn finish(self, path: Option<&Path>) -> Result<(), CliError> {
        write_bytes(path, &self.into_bytes()?)
    }
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

pub fn write_bytes(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io(format!("cannot write stdout: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_round_trips() {
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(float(f64::NAN), "NaN");
        assert_eq!(opt_float(None), "");
    }

    #[test]
    fn csv_layout() {
        let mut prov = Provenance::new("bounds");
        prov.param("n", 3).param("D", 0.5);
        let mut r = Report::new(Format::Csv, &prov, &["a", "b"]).unwrap();
        r.row(&["1".into(), "x,y".into()], &()).unwrap();
        let text = String::from_utf8(r.into_bytes().unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# schema_version=v1");
        assert_eq!(lines[2], "# command=bounds");
        assert_eq!(lines[3], "# param D=0.5");
        assert_eq!(lines[5], "a,b");
        assert_eq!(lines[6], "1,\"x,y\"");
    }

    #[test]
    fn json_layout() {
        let prov = Provenance::new("verify");
        let mut r = Report::new(Format::Json, &prov, &[]).unwrap();
        r.row(&[], &serde_json::json!({"x": 1})).unwrap();
        let text = String::from_utf8(r.into_bytes().unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let head: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(head["schema_version"], "v1");
        assert_eq!(lines[1], "{\"x\":1}");
    }
}
