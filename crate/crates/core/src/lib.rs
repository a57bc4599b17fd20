//! Whole-program static analysis that tracks tensor shapes through Python
//! machine-learning scripts.

pub mod analysis;
pub mod ast;
pub mod diag;
pub mod frontend;
pub mod ir;
pub mod model;
pub mod span;
pub mod tensor;
pub mod types;
