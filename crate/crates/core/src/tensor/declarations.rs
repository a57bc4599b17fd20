//! Input declarations: the programmer-supplied types that seed the tensor
//! estimate, loaded from a JSON sidecar file.

use crate::types::{parse_type, PyType};
use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

/// Where a declared type attaches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    /// The result of every call to a library function (dotted name).
    CallResult { callee: String },
    /// A named parameter of a user function.
    Parameter { function: String, parameter: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputDeclaration {
    pub selector: Selector,
    pub declared_type: PyType,
}

#[derive(Debug, Error)]
pub enum DeclarationError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: declaration {index}: {source}")]
    BadType {
        path: String,
        index: usize,
        source: crate::types::TypeSyntaxError,
    },
}

#[derive(Deserialize)]
struct RawDeclarations {
    declarations: Vec<RawDeclaration>,
}

#[derive(Deserialize)]
struct RawDeclaration {
    selector: RawSelector,
    #[serde(rename = "type")]
    type_text: String,
}

#[derive(Deserialize)]
#[serde(tag = "kind")]
enum RawSelector {
    #[serde(rename = "call-result")]
    CallResult { callee: String },
    #[serde(rename = "parameter")]
    Parameter { function: String, parameter: String },
}

pub fn load_declarations(path: &Path) -> Result<Vec<InputDeclaration>, DeclarationError> {
    let text = std::fs::read_to_string(path).map_err(|source| DeclarationError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_declarations_str(&text, &path.display().to_string())
}

pub fn load_declarations_str(text: &str, path: &str) -> Result<Vec<InputDeclaration>, DeclarationError> {
    let raw: RawDeclarations = serde_json::from_str(text).map_err(|e| DeclarationError::Schema {
        path: path.to_string(),
        message: e.to_string(),
    })?;
    let mut out = Vec::with_capacity(raw.declarations.len());
    for (index, decl) in raw.declarations.into_iter().enumerate() {
        let declared_type = parse_type(&decl.type_text).map_err(|source| DeclarationError::BadType {
            path: path.to_string(),
            index,
            source,
        })?;
        let selector = match decl.selector {
            RawSelector::CallResult { callee } => Selector::CallResult { callee },
            RawSelector::Parameter { function, parameter } => Selector::Parameter { function, parameter },
        };
        out.push(InputDeclaration {
            selector,
            declared_type,
        });
    }
    Ok(out)
}
