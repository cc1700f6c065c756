use crate::error::{CliError, Result};
use clap::ValueEnum;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Units {
    /// SI throughout.
    Si,
    /// pT, kHz and µs.
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
}

/// Physical kind of a column, which fixes its suffix and its pT/kHz/µs scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Plain,
    Count,
    Frequency,
    Time,
    Sensitivity,
    Radians,
    Volts,
}

impl Quantity {
    fn suffix(self, units: Units) -> &'static str {
        match (self, units) {
            (Quantity::Plain | Quantity::Count, _) => "",
            (Quantity::Frequency, Units::Si) => "_hz",
            (Quantity::Frequency, Units::Paper) => "_khz",
            (Quantity::Time, Units::Si) => "_s",
            (Quantity::Time, Units::Paper) => "_us",
            (Quantity::Sensitivity, Units::Si) => "_t_sqrts",
            (Quantity::Sensitivity, Units::Paper) => "_pt_sqrts",
            (Quantity::Radians, _) => "_rad",
            (Quantity::Volts, _) => "_v",
        }
    }

    fn scale(self, units: Units) -> f64 {
        match (self, units) {
            (_, Units::Si) => 1.0,
            (Quantity::Frequency, Units::Paper) => 1e-3,
            (Quantity::Time, Units::Paper) => 1e6,
            (Quantity::Sensitivity, Units::Paper) => 1e12,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Column {
    pub name: String,
    pub quantity: Quantity,
}

pub fn col(name: &str, quantity: Quantity) -> Column {
    Column {
        name: name.to_string(),
        quantity,
    }
}

pub type Row = Vec<Option<f64>>;

/// CSV with `# key=value` provenance lines ahead of the header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Self {
            meta: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self, units: Units) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        let header: Vec<String> = self
            .columns
            .iter()
            .map(|c| format!("{}{}", c.name, c.quantity.suffix(units)))
            .collect();
        let _ = writeln!(out, "{}", header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&self.columns)
                .map(|(cell, c)| match cell {
                    Some(v) if c.quantity == Quantity::Count => format!("{}", v.round() as i64),
                    Some(v) => number(v * c.quantity.scale(units)),
                    None => String::new(),
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Shortest round-trip form, in exponent notation outside `[1e-3, 1e7)`.
pub fn number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-3..1e7).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Writes to `path`, or stdout when absent.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}
