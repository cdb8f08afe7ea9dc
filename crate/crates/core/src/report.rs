//! Tables of effect sizes and rate series in Markdown, CSV and JSON.
//!
//! Effect sizes print with two decimals (half away from zero) and a trailing
//! `*` when the one-sided p-value is below the significance level. Rendering
//! is a pure function of its inputs.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::captions::EmotionRateReport;
use crate::eat::EatResult;
use crate::ratings::GroupRateResult;

pub const DEFAULT_SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cell ({row}, {column}) given twice")]
    DuplicateCell { row: String, column: String },
    #[error("cell ({row}, {column}) is neither present nor marked absent")]
    MissingCell { row: String, column: String },
    #[error("unknown format {0:?} (expected markdown, csv or json)")]
    UnknownFormat(String),
    #[error("nothing to render")]
    Empty,
    #[error("malformed table JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Markdown,
    Csv,
    #[default]
    Json,
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(ReportError::UnknownFormat(s.to_string())),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Markdown => "markdown",
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Effect-size magnitude bands at |d| = 0.2, 0.5, 0.8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Negligible,
    Small,
    Medium,
    Large,
}

impl Band {
    pub fn of(d: f64) -> Self {
        match d.abs() {
            m if m >= 0.8 => Band::Large,
            m if m >= 0.5 => Band::Medium,
            m if m >= 0.2 => Band::Small,
            _ => Band::Negligible,
        }
    }
}

/// Formats `value` with a fixed number of decimals, rounding half away from zero.
pub fn fixed(value: f64, decimals: u32) -> String {
    let scale = 10f64.powi(decimals as i32);
    let scaled = (value * scale).round();
    let negative = scaled < 0.0;
    let units = scaled.abs() as u128;
    let pow = 10u128.pow(decimals);
    let sign = if negative { "-" } else { "" };
    if decimals == 0 {
        format!("{sign}{units}")
    } else {
        format!(
            "{sign}{}.{:0width$}",
            units / pow,
            units % pow,
            width = decimals as usize
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    pub d: f64,
    pub p: f64,
    pub starred: bool,
    pub band: Band,
}

impl ReportCell {
    pub fn new(d: f64, p: f64) -> Self {
        Self::with_significance(d, p, DEFAULT_SIGNIFICANCE)
    }

    pub fn with_significance(d: f64, p: f64, level: f64) -> Self {
        Self {
            d,
            p,
            starred: p < level,
            band: Band::of(d),
        }
    }

    pub fn from_result(result: &EatResult, level: f64) -> Self {
        Self::with_significance(result.d, result.p, level)
    }

    /// `"1.09*"`-style text.
    pub fn text(&self) -> String {
        let mut s = fixed(self.d, 2);
        if self.starred {
            s.push('*');
        }
        s
    }
}

/// Grid of report cells keyed by (row, column), e.g. model × condition.
#[derive(Debug, Clone, PartialEq)]
pub struct EatTable {
    row_header: String,
    rows: Vec<String>,
    columns: Vec<String>,
    cells: BTreeMap<(String, String), Option<ReportCell>>,
}

impl EatTable {
    pub fn new(row_header: impl Into<String>) -> Self {
        Self {
            row_header: row_header.into(),
            rows: Vec::new(),
            columns: Vec::new(),
            cells: BTreeMap::new(),
        }
    }

    fn put(
        &mut self,
        row: &str,
        column: &str,
        cell: Option<ReportCell>,
    ) -> Result<(), ReportError> {
        let key = (row.to_string(), column.to_string());
        if self.cells.contains_key(&key) {
            return Err(ReportError::DuplicateCell {
                row: key.0,
                column: key.1,
            });
        }
        if !self.rows.iter().any(|r| r == row) {
            self.rows.push(row.to_string());
        }
        if !self.columns.iter().any(|c| c == column) {
            self.columns.push(column.to_string());
        }
        self.cells.insert(key, cell);
        Ok(())
    }

    /// Adds a cell. Rows and columns keep first-insertion order.
    pub fn insert(&mut self, row: &str, column: &str, cell: ReportCell) -> Result<(), ReportError> {
        self.put(row, column, Some(cell))
    }

    pub fn mark_absent(&mut self, row: &str, column: &str) -> Result<(), ReportError> {
        self.put(row, column, None)
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn get(&self, row: &str, column: &str) -> Option<&ReportCell> {
        self.cells
            .get(&(row.to_string(), column.to_string()))?
            .as_ref()
    }

    fn grid(&self) -> Result<Vec<Vec<Option<&ReportCell>>>, ReportError> {
        self.rows
            .iter()
            .map(|r| {
                self.columns
                    .iter()
                    .map(|c| {
                        self.cells
                            .get(&(r.clone(), c.clone()))
                            .map(Option::as_ref)
                            .ok_or_else(|| ReportError::MissingCell {
                                row: r.clone(),
                                column: c.clone(),
                            })
                    })
                    .collect()
            })
            .collect()
    }

    /// Parses the JSON rendering back into a table.
    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let doc: TableJson = serde_json::from_str(text)?;
        let mut table = EatTable::new(doc.row_header);
        table.rows = doc.rows;
        table.columns = doc.columns;
        for c in doc.cells {
            let cell = match (c.d, c.p) {
                (Some(d), Some(p)) => Some(ReportCell {
                    d,
                    p,
                    starred: c.starred.unwrap_or(false),
                    band: c.band.unwrap_or(Band::of(d)),
                }),
                _ => None,
            };
            let key = (c.row, c.column);
            if table.cells.insert(key.clone(), cell).is_some() {
                return Err(ReportError::DuplicateCell {
                    row: key.0,
                    column: key.1,
                });
            }
        }
        table.grid()?;
        Ok(table)
    }
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    row_header: String,
    rows: Vec<String>,
    columns: Vec<String>,
    cells: Vec<CellJson>,
}

#[derive(Serialize, Deserialize)]
struct CellJson {
    row: String,
    column: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    starred: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    band: Option<Band>,
    text: String,
}

const ABSENT: &str = "n/a";

pub fn render_eat_table(table: &EatTable, format: Format) -> Result<String, ReportError> {
    let grid = table.grid()?;
    if grid.is_empty() {
        return Err(ReportError::Empty);
    }
    let text = |c: &Option<&ReportCell>| c.map_or_else(|| ABSENT.to_string(), ReportCell::text);
    match format {
        Format::Markdown => {
            let header: Vec<&str> = std::iter::once(table.row_header.as_str())
                .chain(table.columns.iter().map(String::as_str))
                .collect();
            let body: Vec<Vec<String>> = table
                .rows
                .iter()
                .zip(&grid)
                .map(|(r, cells)| {
                    std::iter::once(r.clone())
                        .chain(cells.iter().map(text))
                        .collect()
                })
                .collect();
            Ok(markdown(&header, &body))
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(std::iter::once(&table.row_header).chain(&table.columns))?;
            for (r, cells) in table.rows.iter().zip(&grid) {
                w.write_record(std::iter::once(r.clone()).chain(cells.iter().map(text)))?;
            }
            Ok(finish_csv(w))
        }
        Format::Json => {
            let mut cells = Vec::new();
            for (r, row) in table.rows.iter().zip(&grid) {
                for (c, cell) in table.columns.iter().zip(row) {
                    cells.push(CellJson {
                        row: r.clone(),
                        column: c.clone(),
                        d: cell.map(|x| x.d),
                        p: cell.map(|x| x.p),
                        starred: cell.map(|x| x.starred),
                        band: cell.map(|x| x.band),
                        text: text(cell),
                    });
                }
            }
            let doc = TableJson {
                row_header: table.row_header.clone(),
                rows: table.rows.clone(),
                columns: table.columns.clone(),
                cells,
            };
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
    }
}

/// A series for external plotting.
#[derive(Debug, Clone, Copy)]
pub enum RateSeries<'a> {
    Groups(&'a GroupRateResult),
    Emotions(&'a EmotionRateReport),
}

pub fn render_rate_series(series: RateSeries<'_>, format: Format) -> Result<String, ReportError> {
    let (header, rows, json) = match series {
        RateSeries::Groups(r) => {
            if r.groups.is_empty() {
                return Err(ReportError::Empty);
            }
            let header = vec!["group", "n", "sexualized", "rate_percent"];
            let rows: Vec<Vec<String>> = r
                .groups
                .iter()
                .map(|(k, g)| {
                    vec![
                        k.clone(),
                        g.n.to_string(),
                        g.sexualized.to_string(),
                        g.percent_text(),
                    ]
                })
                .collect();
            let json: Vec<serde_json::Value> = r
                .groups
                .iter()
                .map(|(k, g)| {
                    serde_json::json!({
                        "group": k, "n": g.n, "sexualized": g.sexualized,
                        "rate_percent": g.percent(), "text": g.percent_text(),
                    })
                })
                .collect();
            (header, rows, json)
        }
        RateSeries::Emotions(r) => {
            if r.rates.is_empty() {
                return Err(ReportError::Empty);
            }
            let header = vec!["group", "emotion", "rate_per_1000"];
            let rows = r
                .rates
                .iter()
                .map(|e| {
                    vec![
                        e.group.clone(),
                        e.emotion.clone(),
                        fixed(e.rate_per_1000, 1),
                    ]
                })
                .collect();
            let json = r
                .rates
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "group": e.group, "emotion": e.emotion, "occurrences": e.occurrences,
                        "captions": e.captions, "rate_per_1000": e.rate_per_1000,
                    })
                })
                .collect();
            (header, rows, json)
        }
    };
    match format {
        Format::Markdown => Ok(markdown(&header, &rows)),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&header)?;
            for r in &rows {
                w.write_record(r)?;
            }
            Ok(finish_csv(w))
        }
        Format::Json => {
            let mut doc = serde_json::json!({ "series": json });
            if let RateSeries::Emotions(r) = series {
                doc["min_count"] = r.min_count.into();
                doc["retained_words"] = serde_json::to_value(&r.retained_words)?;
                doc["dropped_words"] = serde_json::to_value(&r.dropped_words)?;
            }
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
    }
}

fn markdown<H: AsRef<str>>(header: &[H], rows: &[Vec<String>]) -> String {
    let escape = |s: &str| s.replace('|', "\\|");
    let mut out = String::new();
    let line = |cells: Vec<String>| format!("| {} |\n", cells.join(" | "));
    out.push_str(&line(header.iter().map(|h| escape(h.as_ref())).collect()));
    out.push_str(&line(header.iter().map(|_| "---".to_string()).collect()));
    for r in rows {
        out.push_str(&line(r.iter().map(|c| escape(c)).collect()));
    }
    out
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory writer");
    String::from_utf8(bytes).expect("csv output is utf-8")
}
