//! Report records: deterministic JSON lines plus a flat CSV summary.
//!
//! Identical config and seed produce byte-identical report bodies; wall time
//! goes to stderr only, so it can never perturb the artifact.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

/// One emitted record: inputs echo plus named numeric outputs.
#[derive(Debug, Serialize)]
pub struct ReportRecord {
    pub schema: &'static str,
    pub config_digest: String,
    pub op: String,
    pub level: usize,
    pub inputs: Value,
    pub outputs: Value,
    pub version: &'static str,
}

impl ReportRecord {
    pub fn new(digest: &str, op: impl Into<String>, level: usize, inputs: Value, outputs: Value) -> Self {
        Self {
            schema: "maxlorentz.report.v1",
            config_digest: digest.to_string(),
            op: op.into(),
            level,
            inputs,
            outputs,
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// FNV-1a hash of the canonical config text; stable across runs.
pub fn config_digest(canonical: &str) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in canonical.as_bytes() {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

/// Collects JSON lines and CSV rows, then writes them to files or stdout.
pub struct Reporter {
    digest: String,
    json_lines: Vec<String>,
    /// Fixed columns: level, metric, value.
    csv_rows: Vec<(usize, String, f64)>,
}

impl Reporter {
    pub fn new(digest: String) -> Self {
        Self { digest, json_lines: Vec::new(), csv_rows: Vec::new() }
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn record(&mut self, op: &str, level: usize, inputs: Value, outputs: Value) {
        // Register every numeric output as a CSV metric row.
        if let Value::Object(map) = &outputs {
            for (key, value) in map {
                if let Some(x) = value.as_f64() {
                    self.csv_rows.push((level, format!("{op}.{key}"), x));
                }
            }
        }
        let record = ReportRecord::new(&self.digest, op, level, inputs, outputs);
        self.json_lines
            .push(serde_json::to_string(&record).expect("record serializes"));
    }

    /// Last recorded value of a metric, matched on the suffix after `op.`.
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.csv_rows
            .iter()
            .rev()
            .find(|(_, m, _)| m == name || m.ends_with(&format!(".{name}")))
            .map(|(_, _, v)| *v)
    }

    pub fn json_body(&self) -> String {
        let mut body = self.json_lines.join("\n");
        if !body.is_empty() {
            body.push('\n');
        }
        body
    }

    pub fn csv_body(&self) -> String {
        let mut out = String::from("level,metric,value\n");
        for (level, metric, value) in &self.csv_rows {
            out.push_str(&format!("{level},{metric},{value}\n"));
        }
        out
    }

    /// Write the JSON lines (and CSV summary when a path is known), or print
    /// the JSON lines to stdout.
    pub fn flush(
        &self,
        json_path: Option<&str>,
        csv_path: Option<&str>,
    ) -> std::io::Result<()> {
        match json_path {
            Some(path) => std::fs::write(path, self.json_body())?,
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(self.json_body().as_bytes())?;
            }
        }
        if let Some(path) = csv_path {
            std::fs::write(path, self.csv_body())?;
        } else if let Some(json) = json_path {
            // CSV summary lands alongside the JSON report by default.
            let sibling = format!("{}.csv", json.trim_end_matches(".jsonl"));
            std::fs::write(sibling, self.csv_body())?;
        }
        Ok(())
    }
}
