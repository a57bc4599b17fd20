//! Diagnostics: coded findings with severity and source spans.

use crate::span::SourceSpan;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Stable diagnostic codes. The numeric part is part of the output contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Code {
    /// A checked API call whose tensor argument had no inferred types.
    Ari000UnanalyzedTensorArg,
    /// Reshape target element count differs from the source tensor.
    Ari001ReshapeSizeMismatch,
    /// Reshape target crosses labeled factor boundaries.
    Ari002ReshapeInvalidFactorization,
    /// Convolution input has the wrong rank.
    Ari003ConvRankError,
    /// Convolution spatial dimension labels do not match the expected aliases.
    Ari004ConvLabelMismatch,
    /// Element label of a convolved tensor is not in the numeric label set.
    Ari005ElementNotNumeric,
    /// Reshape wildcard (-1) could not be resolved or was repeated.
    Ari006ReshapeWildcardError,
    /// A tensor estimate exceeded the cardinality cap and was widened to top.
    Ari007WideningApplied,
    /// A call site whose callee could not be resolved to any function.
    Ari008UnresolvedCall,
    /// An input declaration selector matched no program point.
    Ari009UnresolvedDeclarationSelector,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::Ari000UnanalyzedTensorArg => "ARI000",
            Code::Ari001ReshapeSizeMismatch => "ARI001",
            Code::Ari002ReshapeInvalidFactorization => "ARI002",
            Code::Ari003ConvRankError => "ARI003",
            Code::Ari004ConvLabelMismatch => "ARI004",
            Code::Ari005ElementNotNumeric => "ARI005",
            Code::Ari006ReshapeWildcardError => "ARI006",
            Code::Ari007WideningApplied => "ARI007",
            Code::Ari008UnresolvedCall => "ARI008",
            Code::Ari009UnresolvedDeclarationSelector => "ARI009",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
            Severity::Info => f.write_str("info"),
        }
    }
}

/// A single finding, ready for reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: Code,
    pub severity: Severity,
    pub message: String,
    pub span: SourceSpan,
    /// Other locations that explain the finding (e.g. the declaration site).
    pub related: Vec<SourceSpan>,
}

impl Diagnostic {
    pub fn new(code: Code, severity: Severity, message: impl Into<String>, span: SourceSpan) -> Self {
        Diagnostic {
            code,
            severity,
            message: message.into(),
            span,
            related: Vec::new(),
        }
    }

    /// One line in the text report: `file:line:col: severity CODE: message`.
    pub fn render(&self) -> String {
        format!(
            "{}:{}:{}: {} {}: {}",
            self.span.file, self.span.line_start, self.span.col_start, self.severity, self.code, self.message
        )
    }
}

/// Sort key used everywhere diagnostics are emitted: (file, line, col, code).
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        (&a.span.file, a.span.line_start, a.span.col_start, a.code)
            .cmp(&(&b.span.file, b.span.line_start, b.span.col_start, b.code))
    });
}
