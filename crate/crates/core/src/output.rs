//! Output envelope and its JSON / CSV renderings.
//!
//! JSON objects keep insertion order, and the envelope keys are always
//! `command`, `params`, `results`, `tool_version`. Floats are printed like C's
//! `%.17g`: 17 significant digits with trailing zeros dropped, enough to
//! round-trip every `f64` exactly. Non-finite floats become `null` in JSON.
//!
//! CSV output starts with `# key: value` comment lines echoing the envelope
//! header, followed by one header row and the data rows.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i128),
    Float(f64),
    Str(String),
    Array(Vec<Json>),
    Object(Vec<(String, Json)>),
}

impl From<bool> for Json {
    fn from(v: bool) -> Self {
        Json::Bool(v)
    }
}

impl From<f64> for Json {
    fn from(v: f64) -> Self {
        Json::Float(v)
    }
}

macro_rules! json_from_int {
    ($($t:ty),*) => {$(
        impl From<$t> for Json {
            fn from(v: $t) -> Self {
                Json::Int(v as i128)
            }
        }
    )*};
}
json_from_int!(u64, usize, i64, u32);

impl From<&str> for Json {
    fn from(v: &str) -> Self {
        Json::Str(v.to_string())
    }
}

impl From<String> for Json {
    fn from(v: String) -> Self {
        Json::Str(v)
    }
}

impl<T: Into<Json>> From<Vec<T>> for Json {
    fn from(v: Vec<T>) -> Self {
        Json::Array(v.into_iter().map(Into::into).collect())
    }
}

impl<T: Into<Json>> From<Option<T>> for Json {
    fn from(v: Option<T>) -> Self {
        v.map_or(Json::Null, Into::into)
    }
}

/// Ordered object builder.
#[derive(Debug, Default, Clone)]
pub struct ObjectBuilder(Vec<(String, Json)>);

impl ObjectBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn field(mut self, key: &str, value: impl Into<Json>) -> Self {
        self.0.push((key.to_string(), value.into()));
        self
    }

    pub fn build(self) -> Json {
        Json::Object(self.0)
    }

    pub fn into_fields(self) -> Vec<(String, Json)> {
        self.0
    }
}

/// `%.17g`; `None` for non-finite input.
pub fn format_float(x: f64) -> Option<String> {
    if !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some(if x.is_sign_negative() { "-0" } else { "0" }.to_string());
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        Some(format!("{mantissa}e{sign}{:02}", exp.abs()))
    } else {
        let fixed = format!("{x:.*}", (16 - exp) as usize);
        Some(trim_fraction(&fixed).to_string())
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn is_scalar(v: &Json) -> bool {
    !matches!(v, Json::Array(_) | Json::Object(_))
}

fn write_string(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("strings always serialize"));
}

fn write_json(out: &mut String, value: &Json, indent: usize) {
    match value {
        Json::Null => out.push_str("null"),
        Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Json::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Json::Float(x) => match format_float(*x) {
            Some(s) => out.push_str(&s),
            None => out.push_str("null"),
        },
        Json::Str(s) => write_string(out, s),
        Json::Array(items) if items.iter().all(is_scalar) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_json(out, item, indent);
            }
            out.push(']');
        }
        Json::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                push_indent(out, indent + 1);
                write_json(out, item, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            push_indent(out, indent);
            out.push(']');
        }
        Json::Object(fields) if fields.is_empty() => out.push_str("{}"),
        Json::Object(fields) => {
            out.push_str("{\n");
            for (i, (key, item)) in fields.iter().enumerate() {
                push_indent(out, indent + 1);
                write_string(out, key);
                out.push_str(": ");
                write_json(out, item, indent + 1);
                out.push_str(if i + 1 < fields.len() { ",\n" } else { "\n" });
            }
            push_indent(out, indent);
            out.push('}');
        }
    }
}

fn push_indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

/// Tabular form of a result payload for CSV output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Json>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<Json>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }
}

fn csv_cell(value: &Json) -> String {
    match value {
        Json::Null => String::new(),
        Json::Float(x) => format_float(*x).unwrap_or_else(|| {
            if x.is_nan() {
                "nan".into()
            } else if *x > 0.0 {
                "inf".into()
            } else {
                "-inf".into()
            }
        }),
        Json::Str(s) => s.clone(),
        other => {
            let mut s = String::new();
            write_json(&mut s, other, 0);
            s
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Result of one CLI command together with its fully resolved inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputEnvelope {
    pub command: String,
    pub params: Vec<(String, Json)>,
    pub results: Json,
    pub table: Table,
    pub tool_version: String,
}

impl OutputEnvelope {
    pub fn new(command: &str, params: Vec<(String, Json)>, results: Json, table: Table) -> Self {
        Self {
            command: command.to_string(),
            params,
            results,
            table,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

pub fn serialize(envelope: &OutputEnvelope, format: Format) -> Vec<u8> {
    let mut out = String::new();
    match format {
        Format::Json => {
            let doc = Json::Object(vec![
                ("command".into(), Json::Str(envelope.command.clone())),
                ("params".into(), Json::Object(envelope.params.clone())),
                ("results".into(), envelope.results.clone()),
                (
                    "tool_version".into(),
                    Json::Str(envelope.tool_version.clone()),
                ),
            ]);
            write_json(&mut out, &doc, 0);
            out.push('\n');
        }
        Format::Csv => {
            let _ = writeln!(out, "# command: {}", envelope.command);
            for (key, value) in &envelope.params {
                let _ = writeln!(out, "# {key}: {}", csv_cell(value));
            }
            let _ = writeln!(out, "# tool_version: {}", envelope.tool_version);
            out.push_str(&envelope.table.header.join(","));
            out.push('\n');
            for row in &envelope.table.rows {
                let cells: Vec<String> = row.iter().map(csv_cell).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn floats_follow_percent_17g() {
        // Expected strings from C printf("%.17g").
        let cases = [
            (0.25, "0.25"),
            (0.1, "0.10000000000000001"),
            (1024.0, "1024"),
            (0.42, "0.41999999999999998"),
            (1e-5, "1.0000000000000001e-05"),
            (1e17, "1e+17"),
            (123456789.0, "123456789"),
            (-2.5, "-2.5"),
            (0.0001, "0.0001"),
        ];
        for (x, expect) in cases {
            assert_eq!(format_float(x).unwrap(), expect, "{x}");
        }
        assert_eq!(format_float(f64::INFINITY), None);
    }

    fn sample() -> OutputEnvelope {
        let mut table = Table::new(&["k", "mass"]);
        for (k, m) in [0.25, 0.5, 0.25].into_iter().enumerate() {
            table.row(vec![k.into(), m.into()]);
        }
        OutputEnvelope::new(
            "stationary",
            ObjectBuilder::new()
                .field("n", 2usize)
                .field("p", 0.5)
                .into_fields(),
            ObjectBuilder::new()
                .field("mass", vec![0.25, 0.5, 0.25])
                .build(),
            table,
        )
    }

    #[test]
    fn json_key_order_is_fixed() {
        let text = String::from_utf8(serialize(&sample(), Format::Json)).unwrap();
        let positions: Vec<usize> = [
            "\"command\"",
            "\"params\"",
            "\"results\"",
            "\"tool_version\"",
        ]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(
            serialize(&sample(), Format::Json),
            serialize(&sample(), Format::Json)
        );
    }

    #[test]
    fn csv_shape() {
        let text = String::from_utf8(serialize(&sample(), Format::Csv)).unwrap();
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data, ["k,mass", "0,0.25", "1,0.5", "2,0.25"]);
        assert!(text.starts_with("# command: stationary\n# n: 2\n# p: 0.5\n"));
    }

    #[test]
    fn non_finite_is_null_in_json() {
        let mut out = String::new();
        write_json(&mut out, &Json::from(vec![f64::NEG_INFINITY, 1.0]), 0);
        assert_eq!(out, "[null, 1]");
    }

    proptest! {
        #[test]
        fn json_floats_round_trip(values in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..20)) {
            let env = OutputEnvelope::new("t", vec![], ObjectBuilder::new().field("v", values.clone()).build(), Table::default());
            let parsed: serde_json::Value = serde_json::from_slice(&serialize(&env, Format::Json)).unwrap();
            let back: Vec<f64> = parsed["results"]["v"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
            prop_assert_eq!(back.len(), values.len());
            for x in &values {
                let text = format_float(*x).unwrap();
                prop_assert_eq!(text.parse::<f64>().unwrap().to_bits(), x.to_bits());
            }
            for (a, b) in back.iter().zip(&values) {
                prop_assert_eq!(a.to_bits() == b.to_bits() || (*a == 0.0 && *b == 0.0), true);
            }
        }
    }
}
