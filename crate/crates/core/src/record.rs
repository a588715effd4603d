//! Tabular sweep output with a fixed column order, written as CSV or JSON.

use std::fmt;

use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    TruncationWarning,
    ToleranceFail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::TruncationWarning => "truncation-warning",
            Status::ToleranceFail => "tolerance-fail",
        }
    }

    /// The more severe of two statuses.
    pub fn worst(self, other: Status) -> Status {
        let rank = |s: Status| match s {
            Status::Ok => 0,
            Status::TruncationWarning => 1,
            Status::ToleranceFail => 2,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    /// Not computed for this row; empty in CSV, `null` in JSON.
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Float)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Status> for Cell {
    fn from(s: Status) -> Self {
        Cell::Text(s.as_str().to_string())
    }
}

/// C's `%.9g`.
pub fn fmt_g9(x: f64) -> String {
    const P: i32 = 9;
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..P).contains(&exp) {
        let fixed = format!("{:.*}", (P - 1 - exp) as usize, x);
        strip_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip_zeros(mantissa), sign, exp.abs())
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rows under a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }

    pub fn float(&self, row: usize, name: &str) -> Option<f64> {
        match self.rows.get(row)?.get(self.column(name)?)? {
            Cell::Float(x) => Some(*x),
            _ => None,
        }
    }

    pub fn text(&self, row: usize, name: &str) -> Option<&str> {
        match self.rows.get(row)?.get(self.column(name)?)? {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    /// Whether any row carries the given status.
    pub fn any_status(&self, status: Status) -> bool {
        let Some(col) = self.column("status") else {
            return false;
        };
        self.rows
            .iter()
            .any(|r| matches!(&r[col], Cell::Text(s) if s == status.as_str()))
    }

    /// Header row plus one line per record, LF-terminated.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Array of objects keyed by the header; floats rounded to nine
    /// significant digits.
    pub fn to_json(&self) -> String {
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, cell) in self.header.iter().zip(row) {
                    obj.insert((*name).to_string(), json_cell(cell));
                }
                Value::Object(obj)
            })
            .collect();
        let mut out = serde_json::to_string_pretty(&Value::Array(records)).expect("serializable");
        out.push('\n');
        out
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Float(x) => fmt_g9(*x),
        Cell::Int(n) => n.to_string(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
        Cell::Missing => String::new(),
    }
}

fn json_cell(c: &Cell) -> Value {
    match c {
        Cell::Float(x) => fmt_g9(*x)
            .parse::<f64>()
            .ok()
            .and_then(Number::from_f64)
            .map_or(Value::Null, Value::Number),
        Cell::Int(n) => Value::Number((*n).into()),
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Missing => Value::Null,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g9() {
        let cases = [
            (0.0, "0"),
            (-0.0, "0"),
            (1.0, "1"),
            (0.5, "0.5"),
            (-2.25, "-2.25"),
            (std::f64::consts::PI, "3.14159265"),
            (0.2581271048268164, "0.258127105"),
            (1e-4, "0.0001"),
            (1.234e-5, "1.234e-05"),
            (0.0000807, "8.07e-05"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (999999999.5, "1e+09"),
            (1e100, "1e+100"),
            (0.99999999996, "1"),
            (100.0, "100"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g9(x), want, "{x}");
        }
    }

    #[test]
    fn csv_and_json_share_fields() {
        let mut t = Table::new(vec!["scenario", "gt", "c", "note", "status"]);
        t.push(vec![
            "scenario-a".into(),
            0.1f64.into(),
            Cell::Missing,
            "a,b".into(),
            Status::Ok.into(),
        ]);
        assert_eq!(t.to_csv(), "scenario,gt,c,note,status\nscenario-a,0.1,,\"a,b\",ok\n");
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        let obj = v[0].as_object().unwrap();
        assert_eq!(
            obj.keys().collect::<Vec<_>>(),
            vec!["scenario", "gt", "c", "note", "status"]
        );
        assert_eq!(obj["c"], Value::Null);
        assert_eq!(obj["gt"].as_f64(), Some(0.1));
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn json_rounds_to_nine_digits() {
        let mut t = Table::new(vec!["x"]);
        t.push(vec![std::f64::consts::E.into()]);
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v[0]["x"].as_f64(), Some(2.71828183));
    }

    #[test]
    fn status_queries() {
        let mut t = Table::new(vec!["status"]);
        t.push(vec![Status::TruncationWarning.into()]);
        assert!(t.any_status(Status::TruncationWarning));
        assert!(!t.any_status(Status::ToleranceFail));
        assert_eq!(Status::Ok.worst(Status::ToleranceFail), Status::ToleranceFail);
        assert_eq!(
            Status::ToleranceFail.worst(Status::TruncationWarning),
            Status::ToleranceFail
        );
    }
}
