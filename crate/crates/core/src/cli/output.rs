//! Tabular output as CSV with a `#` metadata block, or JSON `{meta, data}`.

use std::io::{self, Write};

use serde_json::{Map, Value};

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

/// Twelve significant digits; positional notation for `1e-4 ≤ |v| < 1e12`,
/// scientific otherwise. Trailing zeros are dropped.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    if !(-4..12).contains(&exp) {
        let mut m = mantissa.trim_end_matches('0').to_string();
        if m.ends_with('.') {
            m.pop();
        }
        return format!("{m}e{exp}");
    }
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exp < 0 {
        out.push_str("0.");
        for _ in 0..(-exp - 1) {
            out.push('0');
        }
        out.push_str(digits.trim_end_matches('0'));
    } else {
        let split = exp as usize + 1;
        out.push_str(&digits[..split]);
        let frac = digits[split..].trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
    }
    out
}

impl Cell {
    pub fn to_csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format_number(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Num(v) if v.is_finite() => format_number(*v)
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map(Value::Number)
                .unwrap_or(Value::Null),
            Cell::Num(_) => Value::Null,
            Cell::Bool(v) => Value::Bool(*v),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(k, c)| (k.clone(), c.to_json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Everything needed to reproduce an output file.
#[derive(Debug, Clone)]
pub struct Meta {
    pub command: &'static str,
    pub args: Value,
    /// Extra scalar results listed in the header (e.g. fit coefficients).
    pub results: Vec<(&'static str, Cell)>,
}

impl Meta {
    pub fn new(command: &'static str, args: Value) -> Self {
        Meta {
            command,
            args,
            results: Vec::new(),
        }
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("program".into(), Value::from(env!("CARGO_PKG_NAME")));
        m.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
        m.insert("command".into(), Value::from(self.command));
        m.insert("args".into(), self.args.clone());
        m.insert(
            "units".into(),
            Value::from("rates and detunings in gamma_0, lengths in 1/gamma_0"),
        );
        for (k, v) in &self.results {
            m.insert(k.to_string(), v.to_json());
        }
        Value::Object(m)
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        other => other.to_string(),
    }
}

pub fn write_csv<W: Write + ?Sized>(out: &mut W, meta: &Meta, table: &Table) -> io::Result<()> {
    writeln!(
        out,
        "# {} {}",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION")
    )?;
    writeln!(out, "# command = {}", meta.command)?;
    if let Value::Object(args) = &meta.args {
        for (k, v) in args {
            writeln!(out, "# {k} = {}", scalar_text(v))?;
        }
    }
    writeln!(
        out,
        "# units = rates and detunings in gamma_0, lengths in 1/gamma_0"
    )?;
    for (k, v) in &meta.results {
        writeln!(out, "# {k} = {}", v.to_csv())?;
    }
    let mut w = csv::WriterBuilder::new().from_writer(&mut *out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::to_csv))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write + ?Sized>(out: &mut W, meta: &Meta, data: Value) -> io::Result<()> {
    let doc = serde_json::json!({ "meta": meta.to_json(), "data": data });
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)
}

pub fn write_table<W: Write + ?Sized>(
    out: &mut W,
    format: Format,
    meta: &Meta,
    table: &Table,
) -> io::Result<()> {
    match format {
        Format::Csv => write_csv(out, meta, table),
        Format::Json => write_json(out, meta, table.to_json()),
    }
}
