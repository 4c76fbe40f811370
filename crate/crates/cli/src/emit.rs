//! CSV and JSON writers. Numbers carry 17 significant digits; the manifest is
//! the resolved configuration, written as `# `-prefixed TOML above the header.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::Value as Json;

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub fn render_csv(manifest: &RunConfig, table: &Table) -> Result<String, CliError> {
    let toml = toml::to_string(manifest).map_err(|e| CliError::Config(e.to_string()))?;
    let mut out = String::new();
    for line in toml.lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            let _ = writeln!(out, "# {line}");
        }
    }
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(v) => format_number(*v),
                Cell::Text(s) => s.clone(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

// JSON has no infinities; non-finite numbers become the strings used in CSV.
fn number(v: f64) -> Json {
    if v.is_finite() {
        Json::from(v)
    } else {
        Json::String(format_number(v))
    }
}

fn toml_to_json(v: &toml::Value) -> Json {
    match v {
        toml::Value::String(s) => Json::String(s.clone()),
        toml::Value::Integer(i) => Json::from(*i),
        toml::Value::Float(f) => number(*f),
        toml::Value::Boolean(b) => Json::Bool(*b),
        toml::Value::Datetime(d) => Json::String(d.to_string()),
        toml::Value::Array(a) => Json::Array(a.iter().map(toml_to_json).collect()),
        toml::Value::Table(t) => Json::Object(t.iter().map(|(k, v)| (k.clone(), toml_to_json(v))).collect()),
    }
}

pub fn render_json(manifest: &RunConfig, table: &Table) -> Result<String, CliError> {
    let manifest = toml::Value::try_from(manifest).map_err(|e| CliError::Config(e.to_string()))?;
    let rows: Vec<Json> = table
        .rows
        .iter()
        .map(|row| {
            Json::Array(
                row.iter()
                    .map(|c| match c {
                        Cell::Num(v) => number(*v),
                        Cell::Text(s) => Json::String(s.clone()),
                    })
                    .collect(),
            )
        })
        .collect();
    let doc = serde_json::json!({
        "manifest": toml_to_json(&manifest),
        "columns": table.columns,
        "rows": rows,
    });
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn render(manifest: &RunConfig, table: &Table, format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => render_csv(manifest, table),
        Format::Json => render_json(manifest, table),
    }
}

pub fn write(dir: &Path, stem: &str, format: Format, text: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{stem}.{}", format.extension()));
    std::fs::write(&path, text)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::manifest_text;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_number(0.1), "1.0000000000000001e-1");
        assert_eq!(format_number(f64::INFINITY), "inf");
        let v = 1.0 / 3.0;
        assert_eq!(format_number(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn empty_table_has_manifest_and_header() {
        let mut m = RunConfig::default();
        m.resolve_common().unwrap();
        let text = render_csv(&m, &Table::new(&["x", "y"])).unwrap();
        assert!(text.starts_with("# [run]"));
        assert!(text.ends_with("x,y\n"));
        assert_eq!(RunConfig::from_toml(&manifest_text(&text)).unwrap(), m);
    }

    #[test]
    fn json_mirrors_csv() {
        let mut m = RunConfig::default();
        m.resolve_common().unwrap();
        let mut t = Table::new(&["x", "status"]);
        t.push(vec![0.5.into(), "ok".into()]);
        t.push(vec![f64::NAN.into(), "supercritical".into()]);
        let doc: Json = serde_json::from_str(&render_json(&m, &t).unwrap()).unwrap();
        assert_eq!(doc["rows"][0][0], 0.5);
        assert_eq!(doc["rows"][1][0], "nan");
        assert_eq!(doc["manifest"]["params"]["beta"], "inf");
        assert_eq!(doc["columns"][1], "status");
    }
}
