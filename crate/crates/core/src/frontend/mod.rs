//! Front end: parse a Python-subset source file into an AST and lower it to
//! the IR.

mod lexer;
mod lower;
mod parser;
mod pretty;

pub use lower::{lower_module, ClassInfo, LoweredModule, DYNAMIC_FIELD, MODULE_INIT};
pub use pretty::{print_expr, print_module};

use crate::ast::Module;
use crate::span::SourceSpan;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrontendError {
    #[error("{span}: syntax error: {message}")]
    Syntax { span: SourceSpan, message: String },
    #[error("{span}: unsupported construct: {construct}")]
    UnsupportedConstruct { span: SourceSpan, construct: String },
    #[error("{span}: lowering error: {message}")]
    Lowering { span: SourceSpan, message: String },
}

impl FrontendError {
    pub fn span(&self) -> &SourceSpan {
        match self {
            FrontendError::Syntax { span, .. }
            | FrontendError::UnsupportedConstruct { span, .. }
            | FrontendError::Lowering { span, .. } => span,
        }
    }
}

/// Parses UTF-8 source text into a module AST covering exactly the supported
/// subset. Unsupported syntax yields an error, never a silent skip.
pub fn parse_module(text: &str, path: &str) -> Result<Module, FrontendError> {
    parser::Parser::new(text, path)?.parse_module()
}
