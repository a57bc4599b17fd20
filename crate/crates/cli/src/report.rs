//! Report assembly and rendering (text and JSON).

use serde_json::json;
use tensorlint_core::diag::{sort_diagnostics, Diagnostic, Severity};
use tensorlint_core::tensor::ApiStatus;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone)]
pub struct TypeLine {
    pub file: String,
    pub line: u32,
    /// full `file:line: type` line
    pub rendered: String,
    /// just the type portion
    pub type_text: String,
}

#[derive(Debug, Default)]
pub struct Report {
    pub diagnostics: Vec<Diagnostic>,
    pub types: Vec<TypeLine>,
    pub callgraphs: Vec<serde_json::Value>,
    /// per-file verified-API matrix (reshape/conv2d/conv3d/placeholder)
    pub apis: Vec<(String, Vec<(String, ApiStatus)>)>,
    pub errors: usize,
    pub warnings: usize,
    pub infos: usize,
    pub exit_code: i32,
}

impl Report {
    pub fn add_diagnostic(&mut self, d: Diagnostic) {
        self.diagnostics.push(d);
    }

    /// Sorts diagnostics, tallies severities and fixes the exit code.
    /// The exit code is a pure function of the summary and flags: 1 when
    /// errors were found (or warnings, under `--fail-on-error`), 0 otherwise.
    pub fn finish(&mut self, fail_on_error: bool) {
        sort_diagnostics(&mut self.diagnostics);
        self.errors = self.count(Severity::Error);
        self.warnings = self.count(Severity::Warning);
        self.infos = self.count(Severity::Info);
        self.exit_code = if self.errors > 0 || (fail_on_error && self.warnings > 0) {
            1
        } else {
            0
        };
    }

    fn count(&self, severity: Severity) -> usize {
        self.diagnostics.iter().filter(|d| d.severity == severity).count()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for d in &self.diagnostics {
            out.push_str(&d.render());
            out.push('\n');
        }
        for t in &self.types {
            out.push_str(&t.rendered);
            out.push('\n');
        }
        for cg in &self.callgraphs {
            out.push_str(&serde_json::to_string_pretty(cg).expect("callgraph serializes"));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let diagnostics: Vec<serde_json::Value> = self
            .diagnostics
            .iter()
            .map(|d| {
                json!({
                    "code": d.code.as_str(),
                    "severity": d.severity.to_string(),
                    "message": d.message,
                    "file": d.span.file,
                    "line": d.span.line_start,
                    "col": d.span.col_start,
                })
            })
            .collect();
        let mut doc = json!({
            "diagnostics": diagnostics,
            "summary": {"errors": self.errors, "warnings": self.warnings},
        });
        if !self.types.is_empty() {
            doc["types"] = json!(self
                .types
                .iter()
                .map(|t| json!({"file": t.file, "line": t.line, "type": t.type_text}))
                .collect::<Vec<_>>());
        }
        if !self.callgraphs.is_empty() {
            doc["callgraph"] = json!(self.callgraphs);
        }
        doc
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Text => self.render_text(),
            ReportFormat::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }
}
