//! Plain-text rendering of the JSON reports.
//!
//! JSON is the source of truth; this walks the same `Value` the `json`
//! format prints, so both formats always carry identical numbers.

use serde_json::Value;

pub fn render(value: &Value) -> String {
    let mut out = String::new();
    render_into(value, 0, &mut out);
    out
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn render_into(value: &Value, depth: usize, out: &mut String) {
    match value {
        Value::Object(map) => {
            for (key, val) in map {
                indent(depth, out);
                out.push_str(key);
                out.push(':');
                match val {
                    Value::Object(_) => {
                        out.push('\n');
                        render_into(val, depth + 1, out);
                    }
                    Value::Array(items) if items.iter().any(Value::is_object) => {
                        out.push('\n');
                        for (i, item) in items.iter().enumerate() {
                            indent(depth + 1, out);
                            out.push_str(&format!("[{i}]\n"));
                            render_into(item, depth + 2, out);
                        }
                    }
                    _ => {
                        out.push(' ');
                        out.push_str(&scalar(val));
                        out.push('\n');
                    }
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                indent(depth, out);
                out.push_str(&scalar(item));
                out.push('\n');
            }
        }
        other => {
            indent(depth, out);
            out.push_str(&scalar(other));
            out.push('\n');
        }
    }
}

fn scalar(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Array(items) => {
            let inner: Vec<String> = items.iter().map(scalar).collect();
            format!("[{}]", inner.join(", "))
        }
        other => other.to_string(),
    }
}
