//! Tables and their CSV/JSON rendering.

use serde_json::{json, Map, Value};

/// Output format for every command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// A cell is either a number or a short label.
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

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Num(v as f64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Everything a command emits: the parameters it ran with, a main table,
/// and optionally a summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub params: Vec<(String, Cell)>,
    pub series: Table,
    pub summary: Option<Table>,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    fn to_csv(&self) -> String {
        let mut out = csv_table(&self.series);
        if let Some(summary) = &self.summary {
            out.push('\n');
            out.push_str(&csv_table(summary));
        }
        out
    }

    fn to_json(&self) -> String {
        let mut params = Map::new();
        for (k, v) in &self.params {
            params.insert(k.clone(), cell_json(v));
        }
        let mut doc = Map::new();
        doc.insert("params".into(), Value::Object(params));
        doc.insert("series".into(), table_json(&self.series));
        if let Some(summary) = &self.summary {
            doc.insert("summary".into(), table_json(summary));
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON of plain values");
        text.push('\n');
        text
    }
}

fn csv_table(table: &Table) -> String {
    let mut out = table.columns.join(",");
    out.push('\n');
    for row in &table.rows {
        let line: Vec<String> = row.iter().map(cell_text).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn table_json(table: &Table) -> Value {
    Value::Array(
        table
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, cell) in table.columns.iter().zip(row) {
                    obj.insert(name.clone(), cell_json(cell));
                }
                Value::Object(obj)
            })
            .collect(),
    )
}

fn cell_text(cell: &Cell) -> String {
    match cell {
        Cell::Num(v) => format_number(*v),
        Cell::Text(s) => s.clone(),
    }
}

fn cell_json(cell: &Cell) -> Value {
    match cell {
        Cell::Num(v) if v.is_finite() => {
            let rounded: f64 = format_number(*v).parse().expect("formatted number parses");
            json!(rounded)
        }
        Cell::Num(v) => Value::String(format_number(*v)),
        Cell::Text(s) => Value::String(s.clone()),
    }
}

const SIGNIFICANT: i32 = 12;

/// `%.12g`-style: 12 significant digits, trailing zeros trimmed, exponent
/// form outside `1e-5 ..= 1e12`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // exponent after rounding to the target precision
    let sci = format!("{:.*e}", (SIGNIFICANT - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT).contains(&exp) {
        let decimals = (SIGNIFICANT - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
