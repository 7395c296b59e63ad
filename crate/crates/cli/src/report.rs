use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};

use crate::cli::Format;

pub const SCHEMA_VERSION: u32 = 1;

/// A command's result in both output shapes plus its pass flag.
pub struct Report {
    pub command: &'static str,
    pub json: Map<String, Value>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &'static str, header: Vec<&'static str>) -> Self {
        Self {
            command,
            json: Map::new(),
            header,
            rows: Vec::new(),
            pass: true,
        }
    }

    pub fn set(&mut self, key: &str, value: impl serde::Serialize) -> Result<()> {
        self.json.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Json => {
                let mut doc = Map::new();
                doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
                doc.insert("command".into(), json!(self.command));
                doc.insert("pass".into(), json!(self.pass));
                doc.extend(self.json.clone());
                let mut out = serde_json::to_vec_pretty(&Value::Object(doc))?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header)?;
                for r in &self.rows {
                    w.write_record(r)?;
                }
                Ok(w.into_inner().context("flushing CSV")?)
            }
        }
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<()> {
        let bytes = self.render(format)?;
        match out {
            Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut stdout = io::stdout().lock();
                stdout.write_all(&bytes)?;
                Ok(stdout.flush()?)
            }
        }
    }
}

/// Shortest round-trip formatting, so reports are byte-stable.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}
