//! Tabular output in CSV or JSON, with numbers printed to 9 significant
//! digits so files are byte-stable across platforms and worker counts.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
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

/// `%.9g`: 9 significant digits, trailing zeros dropped, exponent form
/// outside [1e-5, 1e9).
pub fn fmt_sig(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let m = trim_zeros(mantissa.to_string());
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

/// Rows of numbers under fixed column names.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| fmt_sig(*v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), json_number(*v)))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::Value::Array(rows)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("serializable");
                s.push('\n');
                s
            }
        }
    }
}

/// Number rounded to 9 significant digits; non-finite values become null.
pub fn json_number(v: f64) -> serde_json::Value {
    fmt_sig(v)
        .parse::<f64>()
        .ok()
        .and_then(serde_json::Number::from_f64)
        .map_or(serde_json::Value::Null, serde_json::Value::Number)
}

/// Ordered key/value summary.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub entries: Vec<(String, ReportValue)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReportValue {
    Number(f64),
    Text(String),
    Flag(bool),
}

impl Report {
    pub fn number(&mut self, key: &str, v: f64) {
        self.entries.push((key.into(), ReportValue::Number(v)));
    }

    pub fn text(&mut self, key: &str, v: impl Into<String>) {
        self.entries.push((key.into(), ReportValue::Text(v.into())));
    }

    pub fn flag(&mut self, key: &str, v: bool) {
        self.entries.push((key.into(), ReportValue::Flag(v)));
    }

    pub fn get(&self, key: &str) -> Option<&ReportValue> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn get_number(&self, key: &str) -> Option<f64> {
        match self.get(key)? {
            ReportValue::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let v = match v {
                ReportValue::Number(x) => fmt_sig(*x),
                ReportValue::Text(t) => t.clone(),
                ReportValue::Flag(b) => b.to_string(),
            };
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let obj = self
            .entries
            .iter()
            .map(|(k, v)| {
                let v = match v {
                    ReportValue::Number(x) => json_number(*x),
                    ReportValue::Text(t) => serde_json::Value::String(t.clone()),
                    ReportValue::Flag(b) => serde_json::Value::Bool(*b),
                };
                (k.clone(), v)
            })
            .collect();
        serde_json::Value::Object(obj)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_text(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("serializable");
                s.push('\n');
                s
            }
        }
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}
