use crate::args::Format;
use pubrules::{Error, Result};
use serde_json::{Map, Value};
use std::io::Write;
use std::path::Path;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// A finished command: the full document plus, for CSV, its main table.
pub struct Output {
    pub doc: Value,
    pub table: Option<Vec<Value>>,
}

fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Rounds every float in place; integers are left alone.
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_sig).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn flatten_into(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, x)| flatten_into(&key(k), x, out)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, x)| flatten_into(&key(&i.to_string()), x, out)),
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn flatten(v: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    flatten_into("", v, &mut out);
    out
}

fn to_csv(output: &Output) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    match &output.table {
        Some(rows) if !rows.is_empty() => {
            let header: Vec<String> = flatten(&rows[0]).into_iter().map(|(k, _)| k).collect();
            w.write_record(&header).map_err(io)?;
            for row in rows {
                let cells: Map<String, Value> =
                    flatten(row).into_iter().map(|(k, v)| (k, Value::String(v))).collect();
                let record: Vec<&str> =
                    header.iter().map(|h| cells.get(h).and_then(Value::as_str).unwrap_or("")).collect();
                w.write_record(&record).map_err(io)?;
            }
        }
        _ => {
            w.write_record(["key", "value"]).map_err(io)?;
            for (k, v) in flatten(&output.doc) {
                w.write_record([k, v]).map_err(io)?;
            }
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub fn render(mut output: Output, format: Format) -> Result<Vec<u8>> {
    round_floats(&mut output.doc);
    if let Some(rows) = output.table.as_mut() {
        rows.iter_mut().for_each(round_floats);
    }
    match format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(&output.doc).map_err(|e| Error::Io(e.to_string()))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => to_csv(&output),
    }
}

pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout().lock().write_all(bytes).map_err(Error::from),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounds_to_twelve_digits() {
        let mut v = json!({"a": 0.1 + 0.2, "b": [1.0 / 3.0], "n": 7});
        round_floats(&mut v);
        assert_eq!(v.to_string(), r#"{"a":0.3,"b":[0.333333333333],"n":7}"#);
    }

    #[test]
    fn csv_tables_and_pairs() {
        let out = Output { doc: json!({"x": {"y": 1.5}}), table: None };
        let text = String::from_utf8(render(out, Format::Csv).unwrap()).unwrap();
        assert_eq!(text, "key,value\nx.y,1.5\n");
        let out = Output { doc: json!({}), table: Some(vec![json!({"a": 1, "b": {"c": null}})]) };
        let text = String::from_utf8(render(out, Format::Csv).unwrap()).unwrap();
        assert_eq!(text, "a,b.c\n1,\n");
    }
}
