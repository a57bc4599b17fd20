//! Source locations attached to AST nodes, IR values and diagnostics.

use std::fmt;

/// A region of a source file, 1-based, inclusive on both ends.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceSpan {
    pub file: String,
    pub line_start: u32,
    pub col_start: u32,
    pub line_end: u32,
    pub col_end: u32,
}

impl SourceSpan {
    pub fn new(file: impl Into<String>, line_start: u32, col_start: u32, line_end: u32, col_end: u32) -> Self {
        let span = SourceSpan {
            file: file.into(),
            line_start,
            col_start,
            line_end,
            col_end,
        };
        debug_assert!(span.is_ordered(), "backwards span: {span:?}");
        span
    }

    /// Zero-width marker at a single point.
    pub fn point(file: impl Into<String>, line: u32, col: u32) -> Self {
        SourceSpan::new(file, line, col, line, col)
    }

    /// Used for synthetic code that has no source (library models, trampolines).
    pub fn synthetic(tag: &str) -> Self {
        SourceSpan::new(format!("<{tag}>"), 1, 1, 1, 1)
    }

    pub fn is_ordered(&self) -> bool {
        self.line_start < self.line_end || (self.line_start == self.line_end && self.col_start <= self.col_end)
    }

    /// True when `inner` lies entirely within `self`. Used by AST well-formedness checks.
    pub fn contains(&self, inner: &SourceSpan) -> bool {
        if self.file != inner.file {
            return false;
        }
        let starts_ok = self.line_start < inner.line_start
            || (self.line_start == inner.line_start && self.col_start <= inner.col_start);
        let ends_ok = self.line_end > inner.line_end
            || (self.line_end == inner.line_end && self.col_end >= inner.col_end);
        starts_ok && ends_ok
    }

    /// Smallest span covering both operands.
    pub fn merge(&self, other: &SourceSpan) -> SourceSpan {
        let (ls, cs) = std::cmp::min(
            (self.line_start, self.col_start),
            (other.line_start, other.col_start),
        );
        let (le, ce) = std::cmp::max((self.line_end, self.col_end), (other.line_end, other.col_end));
        SourceSpan::new(self.file.clone(), ls, cs, le, ce)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line_start, self.col_start)
    }
}
