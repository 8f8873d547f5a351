use serde_json::{Number, Value};

use crate::Format;

/// Significant digits of every number in JSON and CSV output.
pub const REPORT_DIGITS: usize = 12;
/// Significant digits in human-readable text.
pub const TEXT_DIGITS: usize = 6;

/// A rendered command result: the full JSON form, a text summary and, for
/// tabular results, the table behind the CSV form.
#[derive(Debug, Clone)]
pub struct Output {
    pub json: Value,
    pub text: String,
    pub table: Option<Table>,
}

impl Output {
    pub fn new(json: Value, text: String) -> Self {
        Self { json, text, table: None }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

pub(crate) fn text_num(x: f64) -> String {
    let r = round_sig(x, TEXT_DIGITS);
    if r != 0.0 && (r.abs() < 1e-4 || r.abs() >= 1e9) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().and_then(|x| Number::from_f64(round_sig(x, REPORT_DIGITS))) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

fn csv_num(x: f64) -> String {
    let r = round_sig(x, REPORT_DIGITS);
    if r.fract() == 0.0 && r.abs() < 1e15 {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

/// Serializes a result. Object keys are sorted and numbers rounded to
/// [`REPORT_DIGITS`] significant digits, so identical results give
/// identical bytes.
pub fn emit_report(output: &Output, format: Format) -> Result<String, String> {
    match format {
        Format::Json => {
            let mut v = output.json.clone();
            round_json(&mut v);
            let mut s = serde_json::to_string_pretty(&v).map_err(|e| e.to_string())?;
            s.push('\n');
            Ok(s)
        }
        Format::Text => Ok(output.text.clone()),
        Format::Csv => {
            let table = output
                .table
                .as_ref()
                .ok_or_else(|| "csv output is only available for tabular reports (sweep)".to_string())?;
            let mut s = table.header.join(",");
            s.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|&x| csv_num(x)).collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            Ok(s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.749_997_602_3, 6), 0.749_998);
        assert_eq!(round_sig(2.0 / 3.0, 12), 0.666_666_666_667);
        assert_eq!(round_sig(0.0, 12), 0.0);
        assert_eq!(text_num(5.153e-5), "5.153e-5");
        assert_eq!(text_num(5.153e-4), "0.0005153");
        assert_eq!(text_num(0.75), "0.75");
        assert_eq!(csv_num(3.0), "3");
    }

    #[test]
    fn csv_needs_a_table() {
        let o = Output::new(Value::Null, String::new());
        assert!(emit_report(&o, Format::Csv).is_err());
    }
}
