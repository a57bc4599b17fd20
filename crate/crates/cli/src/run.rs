//! Pipeline driver: configuration, model/declaration loading, and the
//! analysis of each source file.

use crate::report::Report;
use std::path::{Path, PathBuf};
use tensorlint_core::analysis::{build, Analysis};
use tensorlint_core::diag::Diagnostic;
use tensorlint_core::frontend::{lower_module, parse_module};
use tensorlint_core::model::{bundled_tensorflow_model, load_model, ModelSpec};
use tensorlint_core::tensor::{
    api_matrix, check, dump_types, load_declarations, propagate, render_dump_line, ApiKind,
    InputDeclaration, PropagateOptions, TensorEstimate, WorklistOrder,
};
use tensorlint_core::types::TypeConfig;

/// Environment variable naming a directory prepended to the model search
/// path.
pub const MODEL_DIR_ENV: &str = "TENSORLINT_MODEL_DIR";

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub files: Vec<PathBuf>,
    /// Extra model files; the bundled model is used when empty.
    pub models: Vec<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub dump_types: bool,
    pub dump_callgraph: bool,
    pub fail_on_error: bool,
    pub strict_hw_order: bool,
    /// Overrides the numeric element label set when non-empty.
    pub numeric_labels: Vec<String>,
    pub widen_cap: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            files: Vec::new(),
            models: Vec::new(),
            annotations: None,
            dump_types: false,
            dump_callgraph: false,
            fail_on_error: false,
            strict_hw_order: true,
            numeric_labels: Vec::new(),
            widen_cap: None,
        }
    }
}

/// Configuration and input errors; these exit with status 2.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("no input files")]
    NoInputs,
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] tensorlint_core::model::ModelError),
    #[error(transparent)]
    Declarations(#[from] tensorlint_core::tensor::DeclarationError),
    #[error("{0}")]
    Frontend(#[from] tensorlint_core::frontend::FrontendError),
}

/// The analysis of one file, kept for reporting.
pub struct FileAnalysis {
    pub analysis: Analysis,
    pub estimate: TensorEstimate,
    pub diagnostics: Vec<Diagnostic>,
}

/// Resolves a model path against the `TENSORLINT_MODEL_DIR` search path.
fn resolve_model_path(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    if let Ok(dir) = std::env::var(MODEL_DIR_ENV) {
        let candidate = Path::new(&dir).join(path);
        if candidate.exists() {
            return candidate;
        }
    }
    path.to_path_buf()
}

fn load_models(config: &RunConfig) -> Result<ModelSpec, RunError> {
    if config.models.is_empty() {
        return Ok(bundled_tensorflow_model());
    }
    let mut spec = ModelSpec::empty();
    for path in &config.models {
        let resolved = resolve_model_path(path);
        spec.merge(load_model(&resolved)?);
    }
    Ok(spec)
}

pub fn propagate_options(config: &RunConfig, models: &ModelSpec) -> PropagateOptions {
    let mut type_config = TypeConfig {
        strict_hw_order: config.strict_hw_order,
        conv_output_filters_last: models.filters_last,
        ..TypeConfig::default()
    };
    if !config.numeric_labels.is_empty() {
        type_config.numeric_labels = config.numeric_labels.iter().cloned().collect();
    }
    let mut opts = PropagateOptions {
        config: type_config,
        order: WorklistOrder::Fifo,
        ..PropagateOptions::default()
    };
    if let Some(cap) = config.widen_cap {
        opts.cap = cap.max(1);
    }
    opts
}

/// Runs the full pipeline over every configured file.
pub fn run(config: &RunConfig) -> Result<Report, RunError> {
    if config.files.is_empty() {
        return Err(RunError::NoInputs);
    }
    let models = load_models(config)?;
    let declarations: Vec<InputDeclaration> = match &config.annotations {
        Some(path) => load_declarations(path)?,
        None => Vec::new(),
    };
    let opts = propagate_options(config, &models);

    let mut report = Report::default();
    for file in &config.files {
        let text = std::fs::read_to_string(file).map_err(|source| RunError::Io {
            path: file.display().to_string(),
            source,
        })?;
        let name = file.display().to_string();
        let ast = parse_module(&text, &name)?;
        let lowered = lower_module(&ast)?;
        let analysis = build(&lowered, &models);
        let estimate = propagate(&analysis, &declarations, &opts);
        let diagnostics = check(&analysis, &estimate, &opts);

        for d in &diagnostics {
            report.add_diagnostic(d.clone());
        }
        if config.dump_types {
            let dump = dump_types(&analysis, &estimate);
            for ((file, line), types) in &dump {
                report.types.push(crate::report::TypeLine {
                    file: file.clone(),
                    line: *line,
                    rendered: render_dump_line(file, *line, types),
                    type_text: {
                        let parts: Vec<&str> = types.iter().map(|s| s.as_str()).collect();
                        if parts.len() == 1 {
                            parts[0].to_string()
                        } else {
                            format!("{{{}}}", parts.join(", "))
                        }
                    },
                });
            }
        }
        if config.dump_callgraph {
            report.callgraphs.push(analysis.dump_json());
        }
        let matrix = api_matrix(&analysis, &estimate, &opts);
        report.apis.push((
            name,
            ApiKind::ALL
                .iter()
                .map(|k| (k.as_str().to_string(), matrix[k]))
                .collect(),
        ));
    }
    report.finish(config.fail_on_error);
    Ok(report)
}
