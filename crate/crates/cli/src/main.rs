use clap::{Parser, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use tensorlint::{run, ReportFormat, RunConfig};

/// Whole-program tensor shape checker for Python machine-learning scripts.
#[derive(Parser, Debug)]
#[command(name = "tensorlint", version, about)]
struct Args {
    /// Python source files to analyze (each one as an independent module).
    #[arg(required = true)]
    files: Vec<PathBuf>,

    /// Library model files (JSON); the bundled TensorFlow model by default.
    #[arg(long = "model")]
    model: Vec<PathBuf>,

    /// Input declarations sidecar (JSON).
    #[arg(long)]
    annotations: Option<PathBuf>,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Exit non-zero on warnings as well as errors.
    #[arg(long)]
    fail_on_error: bool,

    /// Print the inferred type for every line that defines a typed value.
    #[arg(long)]
    dump_types: bool,

    /// Print the call graph and points-to sets as JSON.
    #[arg(long)]
    dump_callgraph: bool,

    /// Whether height must precede width in convolution inputs.
    #[arg(long = "hw-order", value_enum, default_value_t = HwOrder::Strict)]
    hw_order: HwOrder,

    /// Comma-separated element labels accepted as numeric.
    #[arg(long = "numeric-labels", value_delimiter = ',')]
    numeric_labels: Vec<String>,

    /// Cardinality cap per estimate before widening to top.
    #[arg(long = "widen-cap")]
    widen_cap: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum HwOrder {
    Strict,
    Loose,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = RunConfig {
        files: args.files,
        models: args.model,
        annotations: args.annotations,
        dump_types: args.dump_types,
        dump_callgraph: args.dump_callgraph,
        fail_on_error: args.fail_on_error,
        strict_hw_order: matches!(args.hw_order, HwOrder::Strict),
        numeric_labels: args.numeric_labels,
        widen_cap: args.widen_cap,
    };
    match run(&config) {
        Ok(report) => {
            let format = match args.format {
                Format::Text => ReportFormat::Text,
                Format::Json => ReportFormat::Json,
            };
            print!("{}", report.render(format));
            ExitCode::from(report.exit_code as u8)
        }
        Err(err) => {
            eprintln!("tensorlint: {err}");
            ExitCode::from(2)
        }
    }
}
