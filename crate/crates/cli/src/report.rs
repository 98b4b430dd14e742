//! Deterministic report rendering.
//!
//! Reports are emitted with fixed field order and floats at 17 significant
//! digits, so identical inputs produce byte-identical artifacts suitable for
//! golden-file diffing. (serde_json's shortest-round-trip floats would also
//! be deterministic, but not fixed-width; reports are written by hand
//! instead.)

use std::fmt::Write as _;

/// Ordered JSON value; object keys keep insertion order.
#[derive(Debug, Clone)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Array(Vec<Json>),
    Object(Vec<(&'static str, Json)>),
}

/// 17 significant digits; non-finite values map to JSON null.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn escape(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

fn render_into(value: &Json, indent: usize, out: &mut String) {
    const STEP: &str = "  ";
    match value {
        Json::Null => out.push_str("null"),
        Json::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Json::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Json::Float(x) => out.push_str(&format_float(*x)),
        Json::Str(s) => escape(s, out),
        Json::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&STEP.repeat(indent + 1));
                render_into(item, indent + 1, out);
            }
            out.push('\n');
            out.push_str(&STEP.repeat(indent));
            out.push(']');
        }
        Json::Object(fields) => {
            if fields.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (key, item)) in fields.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&STEP.repeat(indent + 1));
                escape(key, out);
                out.push_str(": ");
                render_into(item, indent + 1, out);
            }
            out.push('\n');
            out.push_str(&STEP.repeat(indent));
            out.push('}');
        }
    }
}

/// Render a report document (trailing newline included).
pub fn render(value: &Json) -> String {
    let mut out = String::new();
    render_into(value, 0, &mut out);
    out.push('\n');
    out
}

/// CSV table with a fixed header; floats at 17 significant digits.
pub fn render_csv(header: &str, rows: &[Vec<f64>]) -> String {
    let mut out = String::with_capacity(rows.len() * 32);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format_float(*v));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_is_fixed_width() {
        assert_eq!(format_float(4.0 / 7.0), "5.7142857142857140e-1");
        assert_eq!(format_float(0.0), "0.0000000000000000e0");
        assert_eq!(format_float(f64::NAN), "null");
    }

    #[test]
    fn rendering_is_deterministic_and_ordered() {
        let doc = Json::Object(vec![
            ("b", Json::Float(1.5)),
            ("a", Json::Int(2)),
            ("list", Json::Array(vec![Json::Bool(true), Json::Null])),
        ]);
        let one = render(&doc);
        let two = render(&doc);
        assert_eq!(one, two);
        let b_pos = one.find("\"b\"").unwrap();
        let a_pos = one.find("\"a\"").unwrap();
        assert!(b_pos < a_pos, "insertion order must be preserved");
    }

    #[test]
    fn csv_header_is_verbatim() {
        let table = render_csv("t,s,H,G,Phi,rhoPhi", &[vec![0.0, 1.0, 0.5, 0.5, 0.5, 0.25]]);
        assert!(table.starts_with("t,s,H,G,Phi,rhoPhi\n"));
        assert_eq!(table.lines().count(), 2);
    }

    #[test]
    fn json_output_parses_back() {
        let doc = Json::Object(vec![
            ("lambda", Json::Float(4.0 / 7.0)),
            ("note", Json::Str("quote \" and backslash \\".into())),
            ("n", Json::Int(256)),
        ]);
        let text = render(&doc);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["n"], serde_json::json!(256));
        assert!((parsed["lambda"].as_f64().unwrap() - 4.0 / 7.0).abs() < 1e-15);
    }
}
