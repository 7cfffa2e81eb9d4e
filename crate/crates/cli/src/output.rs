use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::args::{Format, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const BUILD_ID: &str = env!("DEGREELAB_BUILD_ID");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    Null,
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Str(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Null => String::new(),
            Cell::Str(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Str(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(v) => json!(v.to_string()),
            Cell::Bool(v) => json!(v),
            Cell::Str(s) => json!(s),
            Cell::Null => Value::Null,
        }
    }
}

/// A command's result: a table plus an optional nested summary.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Option<Value>,
    /// Preformatted body that replaces the table and the summary in CSV mode.
    pub raw: Option<String>,
}

impl Report {
    pub fn new(columns: &[&'static str]) -> Self {
        Report { columns: columns.to_vec(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, config: &RunConfig) -> String {
        let cfg = serde_json::to_value(config).expect("config serializes");
        match config.format {
            Format::Csv => {
                let mut out = String::new();
                writeln!(out, "# degreelab {VERSION}").unwrap();
                writeln!(out, "# build: {BUILD_ID}").unwrap();
                writeln!(out, "# config: {cfg}").unwrap();
                if let Some(raw) = &self.raw {
                    out.push_str(raw);
                    return out;
                }
                writeln!(out, "{}", self.columns.join(",")).unwrap();
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    writeln!(out, "{}", cells.join(",")).unwrap();
                }
                if let Some(s) = &self.summary {
                    writeln!(out, "# summary: {s}").unwrap();
                }
                out
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let m: Map<String, Value> =
                            self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                        Value::Object(m)
                    })
                    .collect();
                let mut doc = json!({
                    "degreelab": VERSION,
                    "build": BUILD_ID,
                    "config": cfg,
                    "columns": self.columns,
                    "rows": rows,
                });
                if let Some(s) = &self.summary {
                    doc["summary"] = s.clone();
                }
                let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
                text.push('\n');
                text
            }
        }
    }
}

/// Extracts the echoed configuration from a previous output.
pub fn read_config(text: &str) -> Option<RunConfig> {
    if let Some(line) = text.lines().find_map(|l| l.strip_prefix("# config: ")) {
        return serde_json::from_str(line).ok();
    }
    let doc: Value = serde_json::from_str(text).ok()?;
    serde_json::from_value(doc.get("config")?.clone()).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::{Command, GridsArgs};

    fn config(format: Format) -> RunConfig {
        RunConfig {
            seed: 3,
            format,
            timing: false,
            command: Command::Grids(GridsArgs { grid: "circle:4".into(), summary: true }),
        }
    }

    #[test]
    fn csv_quotes_specs_with_commas() {
        assert_eq!(Cell::from("bubble:k=1,lambda=10").csv(), "\"bubble:k=1,lambda=10\"");
        assert_eq!(Cell::from("power:k=3").csv(), "power:k=3");
        assert_eq!(Cell::Null.csv(), "");
        assert_eq!(Cell::from(0.1).csv(), "0.1");
    }

    #[test]
    fn config_round_trips_through_both_formats() {
        for f in [Format::Csv, Format::Json] {
            let mut r = Report::new(&["a", "b"]);
            r.push(vec![1i64.into(), f64::INFINITY.into()]);
            let text = r.render(&config(f));
            let back = read_config(&text).unwrap();
            assert_eq!(serde_json::to_value(back).unwrap(), serde_json::to_value(config(f)).unwrap());
        }
    }
}
