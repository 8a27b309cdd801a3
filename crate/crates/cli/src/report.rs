use std::fmt::Write as _;

use clap::ValueEnum;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Tsv,
}

#[derive(Debug, Error, PartialEq)]
#[error("report line {line}: {message}")]
pub struct ReportParseError {
    pub line: usize,
    pub message: String,
}

/// Ordered key/value report. Checks are stored as `check.<name>` entries with
/// value `pass` or `fail`, so the TSV form is a flat two-column table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        let key = key.into();
        assert!(!key.contains(['\t', '\n']), "report key {key:?}");
        let value = value.to_string().replace(['\t', '\n'], " ");
        self.entries.push((key, value));
        self
    }

    pub fn check(&mut self, name: &str, ok: bool) -> &mut Self {
        self.put(format!("check.{name}"), if ok { "pass" } else { "fail" })
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|(k, v)| !k.starts_with("check.") || v == "pass")
    }

    pub fn render(&self, format: Format) -> String {
        let mut s = String::new();
        match format {
            Format::Tsv => {
                for (k, v) in &self.entries {
                    writeln!(s, "{k}\t{v}").unwrap();
                }
            }
            Format::Text => {
                let w = self.entries.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                for (k, v) in &self.entries {
                    writeln!(s, "{k:<w$}  {v}").unwrap();
                }
            }
        }
        s
    }

    pub fn parse_tsv(text: &str) -> Result<Self, ReportParseError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let (k, v) = line.split_once('\t').ok_or_else(|| ReportParseError {
                line: i + 1,
                message: "expected key<TAB>value".into(),
            })?;
            entries.push((k.to_string(), v.to_string()));
        }
        Ok(Report { entries })
    }
}
