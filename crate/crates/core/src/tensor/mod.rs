//! The tensor estimate: a fixpoint over the dataflow graph that seeds input
//! declarations, propagates types along flow edges (projecting record fields
//! and instantiating symbolic dimensions at call results), applies the
//! per-API transfer functions at tagged call sites, and reports diagnostics.

mod declarations;
mod estimate;

pub use declarations::{load_declarations, DeclarationError, InputDeclaration, Selector};
pub use estimate::{
    api_matrix, check, dump_types, propagate, render_dump_line, ApiKind, ApiStatus, PropagateOptions,
    TensorEstimate, WorklistOrder,
};
