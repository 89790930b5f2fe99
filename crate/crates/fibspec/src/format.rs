//! Flat tables and their CSV and JSON renderings.
//!
//! Real cells are rendered once, as decimal strings at the run's digit
//! count, so both formats carry identical digits.

use std::io::Write;

use fibspec_core::Real;
use serde_json::Value;

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    /// Decimal text of a real, or `inf`/`-inf`/`NaN`.
    Num(String),
    Int(i128),
    Text(String),
}

impl Cell {
    pub fn real<R: Real>(x: &R, digits: usize) -> Cell {
        Cell::Num(x.to_sci_string(digits))
    }

    fn csv_text(&self) -> String {
        match self {
            Cell::Num(s) | Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(s) => match serde_json::from_str::<serde_json::Number>(s) {
                Ok(n) => Value::Number(n),
                // JSON has no non-finite numbers
                Err(_) => Value::String(s.clone()),
            },
            Cell::Int(i) => serde_json::from_str::<serde_json::Number>(&i.to_string())
                .map(Value::Number)
                .unwrap_or_else(|_| Value::String(i.to_string())),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Header line plus one line per row, LF-terminated.
pub fn write_csv<W: Write>(t: &Table, out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| CliError::Io(e.into());
    w.write_record(&t.columns).map_err(io)?;
    for r in &t.rows {
        w.write_record(r.iter().map(Cell::csv_text)).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// An array of row arrays; column names go in the metadata.
pub fn write_json<W: Write>(t: &Table, mut out: W) -> Result<(), CliError> {
    let rows: Vec<Value> = t.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
    serde_json::to_writer(&mut out, &Value::Array(rows)).map_err(|e| CliError::Io(e.into()))?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_table<W: Write>(t: &Table, format: Format, out: W) -> Result<(), CliError> {
    match format {
        Format::Csv => write_csv(t, out),
        Format::Json => write_json(t, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["lo", "hi", "note"]);
        t.push(vec![Cell::real(&-1.5f64, 4), Cell::Num("inf".into()), Cell::Text("a,b".into())]);
        t.push(vec![Cell::Int(3), Cell::real(&2.0f64, 2), Cell::Text(String::new())]);
        t
    }

    #[test]
    fn csv_is_lf_terminated_and_quoted() {
        let mut buf = Vec::new();
        write_csv(&sample(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "lo,hi,note\n-1.500e0,inf,\"a,b\"\n3,2.0e0,\n");
    }

    #[test]
    fn json_keeps_digits() {
        let mut t = Table::new(&["x"]);
        t.push(vec![Cell::Num("3.3333333333333333333333333333333333333e-1".into())]);
        let mut buf = Vec::new();
        write_json(&t, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "[[3.3333333333333333333333333333333333333e-1]]\n");
        let mut buf = Vec::new();
        write_json(&sample(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "[[-1.500e+0,\"inf\",\"a,b\"],[3,2.0e+0,\"\"]]\n");
    }
}
