//! Human-readable or `key=value` record output.

use std::fmt::Write;

use clap::ValueEnum;
use mvf_core::formula::render_value;
use mvf_core::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Records,
}

/// Exit status: 0 yes/success, 1 no, 2 unknown, 3 error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Yes,
    No,
    Unknown,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Yes => 0,
            Status::No => 1,
            Status::Unknown => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub query: String,
    pub fields: Vec<(String, String)>,
    pub trace: Vec<String>,
    pub status: Status,
}

impl Report {
    pub fn new(query: impl Into<String>) -> Self {
        Report { query: query.into(), fields: Vec::new(), trace: Vec::new(), status: Status::Yes }
    }

    pub fn field(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    /// An exact value followed by its non-authoritative decimal reading.
    pub fn real(&mut self, key: &str, r: &Real) -> &mut Self {
        self.field(key, render_value(r));
        // adding 0.0 turns -0.0 into 0.0
        self.field(&format!("{}_approx", key), format!("{:.6}", r.to_f64() + 0.0))
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Human => {
                writeln!(out, "{}", self.query).unwrap();
                let width = self.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                for (k, v) in &self.fields {
                    let note = if k.ends_with("_approx") { "  (decimal, non-authoritative)" } else { "" };
                    writeln!(out, "  {:width$}  {}{}", k, v, note, width = width).unwrap();
                }
                if !self.trace.is_empty() {
                    writeln!(out, "  rationale:").unwrap();
                    for t in &self.trace {
                        writeln!(out, "    - {}", t).unwrap();
                    }
                }
            }
            Format::Records => {
                write!(out, "query={}", quote(&self.query)).unwrap();
                for (k, v) in &self.fields {
                    write!(out, " {}={}", k, quote(v)).unwrap();
                }
                if !self.trace.is_empty() {
                    write!(out, " rationale={}", quote(&self.trace.join("; "))).unwrap();
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Bare when the value has no spaces, quotes, `=` or `;`; otherwise
/// double-quoted with backslash escapes.
pub fn quote(v: &str) -> String {
    if !v.is_empty() && !v.chars().any(|c| c.is_whitespace() || c == '"' || c == '=' || c == '\\') {
        return v.to_string();
    }
    let mut s = String::from("\"");
    for c in v.chars() {
        match c {
            '"' => s.push_str("\\\""),
            '\\' => s.push_str("\\\\"),
            '\n' => s.push_str("\\n"),
            c => s.push(c),
        }
    }
    s.push('"');
    s
}
