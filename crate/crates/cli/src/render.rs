//! Output formats. Text and CSV are renderings of the JSON value.

use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

pub fn render(value: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("JSON value serializes");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut out = String::new();
            text(value, "", &mut out);
            out
        }
        Format::Csv => csv(value),
    }
}

fn scalar(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn cell(value: &Value) -> String {
    if value.is_null() {
        String::new()
    } else {
        scalar(value)
    }
}

fn is_scalar(value: &Value) -> bool {
    !matches!(value, Value::Object(_) | Value::Array(_))
}

fn text(value: &Value, indent: &str, out: &mut String) {
    match value {
        Value::Object(map) => {
            for (key, v) in map {
                if is_scalar(v) {
                    out.push_str(&format!("{indent}{key}: {}\n", scalar(v)));
                } else if matches!(v, Value::Array(a) if a.iter().all(is_scalar)) {
                    let items: Vec<String> = v.as_array().unwrap().iter().map(scalar).collect();
                    out.push_str(&format!("{indent}{key}: [{}]\n", items.join(", ")));
                } else {
                    out.push_str(&format!("{indent}{key}:\n"));
                    text(v, &format!("{indent}  "), out);
                }
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                if is_scalar(v) {
                    out.push_str(&format!("{indent}- {}\n", scalar(v)));
                } else {
                    out.push_str(&format!("{indent}[{i}]\n"));
                    text(v, &format!("{indent}  "), out);
                }
            }
        }
        other => out.push_str(&format!("{indent}{}\n", scalar(other))),
    }
}

fn flatten(value: &Value, path: &str, rows: &mut Vec<(String, String)>) {
    let join = |key: &str| if path.is_empty() { key.to_string() } else { format!("{path}.{key}") };
    match value {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(v, &join(k), rows)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, v)| flatten(v, &join(&i.to_string()), rows)),
        other => rows.push((path.to_string(), cell(other))),
    }
}

/// A `records` array of flat objects becomes a table; anything else becomes
/// `path,value` rows.
fn csv(value: &Value) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let records = value.get("records").and_then(Value::as_array);
    match records {
        Some(records) if !records.is_empty() && records.iter().all(|r| r.as_object().is_some_and(|o| o.values().all(is_scalar))) => {
            let header: Vec<&String> = records[0].as_object().unwrap().keys().collect();
            writer.write_record(header.iter().map(|s| s.as_str())).expect("in-memory write");
            for r in records {
                let obj = r.as_object().unwrap();
                writer
                    .write_record(header.iter().map(|k| obj.get(*k).map(cell).unwrap_or_default()))
                    .expect("in-memory write");
            }
        }
        _ => {
            let mut rows = Vec::new();
            flatten(value, "", &mut rows);
            writer.write_record(["path", "value"]).expect("in-memory write");
            for (p, v) in rows {
                writer.write_record([p, v]).expect("in-memory write");
            }
        }
    }
    String::from_utf8(writer.into_inner().expect("flush to memory")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn text_and_csv_follow_json() {
        let v = json!({"alpha": "7/8", "ok": true, "list": [1, 2], "nested": {"a": null}});
        assert_eq!(render(&v, Format::Text), "alpha: 7/8\nok: true\nlist: [1, 2]\nnested:\n  a: -\n");
        assert_eq!(render(&v, Format::Csv), "path,value\nalpha,7/8\nok,true\nlist.0,1\nlist.1,2\nnested.a,\n");
        let r = json!({"records": [{"set": "00,11", "alpha": "1"}]});
        assert_eq!(render(&r, Format::Csv), "set,alpha\n\"00,11\",1\n");
    }
}
