use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// CSV body of serializable rows, header line first.
pub fn csv_table<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let body = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(body).expect("csv of utf-8 fields"))
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub experiment: String,
    pub config: BTreeMap<String, Value>,
    /// `exact`, `sampled`, `witness`, ... per quantity.
    pub modes: BTreeMap<String, String>,
    pub holds: bool,
    pub violations: Vec<String>,
    pub summary: Value,
    /// Per-row CSV body; JSON output carries the rows in `summary`.
    #[serde(skip)]
    pub table: Option<String>,
}

impl Report {
    pub fn new(experiment: &str, config: &impl Serialize) -> Self {
        let config = match serde_json::to_value(config) {
            Ok(Value::Object(m)) => m.into_iter().collect(),
            _ => BTreeMap::new(),
        };
        Report {
            tool: "tsg",
            version: env!("CARGO_PKG_VERSION"),
            core_version: tsg_core::VERSION,
            experiment: experiment.to_string(),
            config,
            modes: BTreeMap::new(),
            holds: true,
            violations: Vec::new(),
            summary: Value::Null,
            table: None,
        }
    }

    pub fn mode(&mut self, key: &str, value: impl ToString) {
        self.modes.insert(key.to_string(), value.to_string());
    }

    pub fn violate(&mut self, what: impl Into<String>) {
        self.holds = false;
        self.violations.push(what.into());
    }

    pub fn violations_from(&mut self, list: impl IntoIterator<Item = String>) {
        for v in list {
            self.violate(v);
        }
    }

    pub fn summary(&mut self, value: &impl Serialize) {
        self.summary = serde_json::to_value(value).unwrap_or(Value::Null);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Header lines `# key: value`, then the table; falls back to JSON when
    /// the experiment has no per-row table.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let Some(table) = &self.table else {
            return Ok(self.to_json());
        };
        let mut out = String::new();
        let line = |k: &str, v: &str| format!("# {k}: {v}\n");
        out += &line("tool", &format!("{} {} (core {})", self.tool, self.version, self.core_version));
        out += &line("experiment", &self.experiment);
        for (k, v) in &self.config {
            out += &line(&format!("config.{k}"), &v.to_string());
        }
        for (k, v) in &self.modes {
            out += &line(&format!("mode.{k}"), v);
        }
        out += &line("holds", &self.holds.to_string());
        for v in &self.violations {
            out += &line("violation", v);
        }
        out += table;
        Ok(out)
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}
