//! Flat-record report rendering.
//!
//! Every command emits rows with a fixed, documented set of fields. CSV
//! writes one header line plus one line per row; JSON writes an array of
//! flat objects with the same field names. Floating-point values are
//! rendered identically in both formats with 17 significant digits, so the
//! two encodings of one run carry the same numbers byte for byte.

#[derive(Clone, Copy, PartialEq, Eq, Debug, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug)]
pub enum Field {
    Str(String),
    UInt(u128),
    Float(f64),
    Bool(bool),
    Empty,
}

#[derive(Clone, Debug, Default)]
pub struct Row {
    fields: Vec<(&'static str, Field)>,
}

impl Row {
    pub fn new() -> Self {
        Row::default()
    }

    pub fn str(mut self, key: &'static str, value: impl Into<String>) -> Self {
        self.fields.push((key, Field::Str(value.into())));
        self
    }

    pub fn uint(mut self, key: &'static str, value: u128) -> Self {
        self.fields.push((key, Field::UInt(value)));
        self
    }

    pub fn float(mut self, key: &'static str, value: f64) -> Self {
        self.fields.push((key, Field::Float(value)));
        self
    }

    pub fn bool(mut self, key: &'static str, value: bool) -> Self {
        self.fields.push((key, Field::Bool(value)));
        self
    }

    pub fn empty(mut self, key: &'static str) -> Self {
        self.fields.push((key, Field::Empty));
        self
    }
}

/// 17 significant digits: enough to reproduce any f64 bit-exactly.
pub fn float_repr(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn render(rows: &[Row], format: Format) -> String {
    match format {
        Format::Csv => render_csv(rows),
        Format::Json => render_json(rows),
    }
}

fn render_csv(rows: &[Row]) -> String {
    let mut out = String::new();
    let Some(first) = rows.first() else {
        return out;
    };
    let header: Vec<&str> = first.fields.iter().map(|(k, _)| *k).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert!(row.fields.iter().map(|(k, _)| *k).eq(header.iter().copied()));
        let line: Vec<String> = row.fields.iter().map(|(_, f)| csv_field(f)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn csv_field(field: &Field) -> String {
    match field {
        Field::Str(s) => {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
        Field::UInt(v) => v.to_string(),
        Field::Float(v) => float_repr(*v),
        Field::Bool(v) => v.to_string(),
        Field::Empty => String::new(),
    }
}

fn render_json(rows: &[Row]) -> String {
    let mut out = String::from("[\n");
    for (i, row) in rows.iter().enumerate() {
        let body: Vec<String> = row
            .fields
            .iter()
            .map(|(k, f)| format!("{}:{}", json_string(k), json_field(f)))
            .collect();
        out.push_str(&format!("{{{}}}", body.join(",")));
        out.push_str(if i + 1 < rows.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    out
}

fn json_field(field: &Field) -> String {
    match field {
        Field::Str(s) => json_string(s),
        Field::UInt(v) => v.to_string(),
        // A bare literal like 2.2187500000000000e0 is valid JSON and keeps
        // the rendering identical to the CSV output.
        Field::Float(v) => float_repr(*v),
        Field::Bool(v) => v.to_string(),
        Field::Empty => "null".to_string(),
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_share_float_rendering() {
        let rows = vec![Row::new().str("name", "x").float("value", 71.0 / 32.0)];
        let csv = render(&rows, Format::Csv);
        let json = render(&rows, Format::Json);
        let repr = float_repr(71.0 / 32.0);
        assert!(csv.contains(&repr));
        assert!(json.contains(&repr));
        assert_eq!(repr.parse::<f64>().unwrap(), 71.0 / 32.0);
    }

    #[test]
    fn csv_quotes_fields_with_commas() {
        let rows = vec![Row::new().str("note", "CI [1, 2]").uint("n", 4)];
        let csv = render(&rows, Format::Csv);
        assert!(csv.contains("\"CI [1, 2]\",4"));
    }

    #[test]
    fn json_escapes_quotes() {
        let rows = vec![Row::new().str("note", "say \"hi\"")];
        let json = render(&rows, Format::Json);
        assert!(json.contains("\\\"hi\\\""));
    }
}
