//! Report rendering and the machine-format parser.
//!
//! HUMAN output prints six significant digits. MACHINE output prints one
//! `key=value` line per field at full precision, parameters under `param.`,
//! followed by a single tab-separated summary line that starts with the
//! subcommand and repeats every field.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Text(String),
    Flag(bool),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Int(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as u64)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Flag(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Text(x)
    }
}

/// Six significant digits.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let e = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&e) {
        format!("{x:.5e}")
    } else {
        format!("{:.*}", (5 - e).max(0) as usize, x)
    }
}

impl Value {
    fn human(&self) -> String {
        match self {
            Value::Float(x) => sig6(*x),
            Value::Int(n) => n.to_string(),
            Value::Text(s) => s.clone(),
            Value::Flag(b) => b.to_string(),
        }
    }

    fn machine(&self) -> String {
        match self {
            // Debug formatting is the shortest string that parses back exactly.
            Value::Float(x) => format!("{x:?}"),
            other => other.human(),
        }
    }
}

#[derive(Debug, Clone)]
struct Section {
    title: String,
    rows: Vec<(String, Value)>,
}

#[derive(Debug, Clone)]
pub struct Report {
    subcommand: String,
    params: Vec<(String, Value)>,
    sections: Vec<Section>,
    notes: Vec<String>,
}

impl Report {
    pub fn new(subcommand: &str) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            params: Vec::new(),
            sections: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.params.push((key.to_string(), value.into()));
        self
    }

    /// Start a new result section; keys are prefixed with its name.
    pub fn section(&mut self, title: &str) -> &mut Self {
        self.sections.push(Section {
            title: title.to_string(),
            rows: Vec::new(),
        });
        self
    }

    pub fn row(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        if self.sections.is_empty() {
            self.section("result");
        }
        let s = self.sections.last_mut().expect("section exists");
        s.rows.push((key.to_string(), value.into()));
        self
    }

    /// Human-readable remark; omitted from MACHINE output.
    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    fn fields(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .params
            .iter()
            .map(|(k, v)| (format!("param.{k}"), v.machine()))
            .collect();
        for s in &self.sections {
            for (k, v) in &s.rows {
                out.push((format!("{}.{k}", s.title), v.machine()));
            }
        }
        out
    }

    pub fn render(&self, machine: bool) -> String {
        let mut out = String::new();
        if machine {
            let fields = self.fields();
            for (k, v) in &fields {
                let _ = writeln!(out, "{k}={v}");
            }
            let _ = write!(out, "{}", self.subcommand);
            for (k, v) in &fields {
                let _ = write!(out, "\t{k}={v}");
            }
            out.push('\n');
            return out;
        }
        let width = self
            .params
            .iter()
            .map(|(k, _)| k.len())
            .chain(
                self.sections
                    .iter()
                    .flat_map(|s| s.rows.iter().map(|(k, _)| k.len())),
            )
            .max()
            .unwrap_or(0)
            + 2;
        let _ = writeln!(out, "seqmon {}", self.subcommand);
        let _ = writeln!(out, "parameters");
        for (k, v) in &self.params {
            let _ = writeln!(out, "  {k:<width$}{}", v.human());
        }
        for s in &self.sections {
            let _ = writeln!(out, "{}", s.title.replace('_', " "));
            for (k, v) in &s.rows {
                let _ = writeln!(out, "  {k:<width$}{}", v.human());
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

/// A parsed MACHINE summary line.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub subcommand: String,
    pub fields: Vec<(String, String)>,
}

impl Summary {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn float(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    /// The run configuration as a config file that reproduces this output.
    pub fn config_text(&self) -> String {
        let mut out = format!("subcommand={}\n", self.subcommand);
        for (k, v) in &self.fields {
            if let Some(name) = k.strip_prefix("param.") {
                let _ = writeln!(out, "{name}={v}");
            }
        }
        out
    }
}

pub fn parse_summary(line: &str) -> Result<Summary, String> {
    let mut parts = line.trim_end_matches('\n').split('\t');
    let subcommand = parts
        .next()
        .filter(|s| !s.is_empty() && !s.contains('='))
        .ok_or_else(|| format!("summary line lacks a subcommand: {line:?}"))?
        .to_string();
    let fields = parts
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| format!("field without '=': {p:?}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Summary { subcommand, fields })
}

/// Parse full MACHINE output, checking that the per-field lines agree with
/// the summary line.
pub fn parse_machine_output(text: &str) -> Result<Summary, String> {
    let lines: Vec<&str> = text.lines().collect();
    let (last, body) = lines.split_last().ok_or("empty output")?;
    let summary = parse_summary(last)?;
    if body.len() != summary.fields.len() {
        return Err(format!(
            "{} field lines but {} summary fields",
            body.len(),
            summary.fields.len()
        ));
    }
    for (line, (k, v)) in body.iter().zip(&summary.fields) {
        let (lk, lv) = line
            .split_once('=')
            .ok_or_else(|| format!("bad line {line:?}"))?;
        if lk != k || lv != v {
            return Err(format!(
                "line {line:?} disagrees with summary field {k}={v}"
            ));
        }
    }
    Ok(summary)
}
