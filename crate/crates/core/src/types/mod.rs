//! The tensor type algebra: labeled, sized and product dimensions over
//! tensors, plus records and function types that carry them.
//!
//! Types are kept in a canonical form: nested single-dimension tensors are
//! flattened into one dimension list, `*` products are flattened
//! (associativity), and record fields are unordered.

mod parse;
mod reshape;
mod transfer;

pub use parse::{parse_type, TypeSyntaxError};
pub use reshape::{reshape_apply, ReshapeError};
pub use transfer::{
    conv2d_check, conv3d_check, dense_apply, flatten_apply, placeholder_type, pool2d_apply, ApiError,
    DenseUnits,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A python-level type as tracked by the analysis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PyType {
    Record(BTreeMap<String, PyType>),
    Function {
        params: BTreeMap<String, PyType>,
        result: Box<PyType>,
    },
    Tensor(TensorType),
    Label(String),
    Top,
}

/// A tensor: an ordered dimension list and an element type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TensorType {
    pub dims: Vec<Dim>,
    pub element: Box<PyType>,
}

impl TensorType {
    pub fn new(dims: Vec<Dim>, element: PyType) -> Self {
        TensorType {
            dims,
            element: Box::new(element),
        }
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    /// Total element count; `None` when any dimension is symbolic.
    pub fn total_size(&self) -> Option<u64> {
        self.dims.iter().try_fold(1u64, |acc, d| Some(acc * d.size()?))
    }
}

/// One dimension of a tensor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dim {
    /// Labeled dimension of unknown size, e.g. `batch`.
    Sym(String),
    /// Plain sized dimension.
    Num(u64),
    /// Labeled dimension of known size, e.g. `y(28)`.
    Labeled(String, u64),
    /// An ordered product of factors recording how a flattened dimension
    /// decomposes, e.g. `y(28)*x(28)`. Never nested, always >= 2 factors.
    Product(Vec<Dim>),
}

impl Dim {
    /// Known size of the dimension, if fully determined.
    pub fn size(&self) -> Option<u64> {
        match self {
            Dim::Sym(_) => None,
            Dim::Num(n) => Some(*n),
            Dim::Labeled(_, n) => Some(*n),
            Dim::Product(fs) => fs.iter().try_fold(1u64, |acc, f| Some(acc * f.size()?)),
        }
    }

    /// Label carried by the dimension, when it has exactly one.
    pub fn label(&self) -> Option<&str> {
        match self {
            Dim::Sym(l) | Dim::Labeled(l, _) => Some(l),
            Dim::Num(_) | Dim::Product(_) => None,
        }
    }
}

/// Size of a dimension; `None` when unknown.
pub fn dim_size(d: &Dim) -> Option<u64> {
    d.size()
}

/// Flattens nested tensors and products; idempotent.
pub fn normalize(t: &PyType) -> PyType {
    match t {
        PyType::Record(fields) => PyType::Record(fields.iter().map(|(k, v)| (k.clone(), normalize(v))).collect()),
        PyType::Function { params, result } => PyType::Function {
            params: params.iter().map(|(k, v)| (k.clone(), normalize(v))).collect(),
            result: Box::new(normalize(result)),
        },
        PyType::Tensor(tt) => {
            let mut dims: Vec<Dim> = tt.dims.iter().map(normalize_dim).collect();
            let mut element = normalize(&tt.element);
            // [d1] of [d2, ..., dn] of e  ==  [d1, d2, ..., dn] of e
            while let PyType::Tensor(inner) = element {
                dims.extend(inner.dims);
                element = *inner.element;
            }
            PyType::Tensor(TensorType::new(dims, element))
        }
        PyType::Label(_) | PyType::Top => t.clone(),
    }
}

fn normalize_dim(d: &Dim) -> Dim {
    match d {
        Dim::Product(fs) => {
            let mut flat = Vec::new();
            flatten_factors(fs, &mut flat);
            match flat.len() {
                0 => Dim::Num(1),
                1 => flat.into_iter().next().expect("len checked"),
                _ => Dim::Product(flat),
            }
        }
        other => other.clone(),
    }
}

fn flatten_factors(fs: &[Dim], out: &mut Vec<Dim>) {
    for f in fs {
        match f {
            Dim::Product(inner) => flatten_factors(inner, out),
            other => out.push(other.clone()),
        }
    }
}

/// Structural equality after normalization. Record field order is ignored;
/// labels are significant, so `y(28)` differs from `28` and from `x(28)`,
/// and factor order within a product is meaning.
pub fn type_equal(a: &PyType, b: &PyType) -> bool {
    normalize(a) == normalize(b)
}

// ---------------------------------------------------------------------------
// configuration for the API transfer functions

/// Label alias sets and checking strictness shared by the conv/pool checks.
#[derive(Debug, Clone)]
pub struct TypeConfig {
    pub height_labels: BTreeSet<String>,
    pub width_labels: BTreeSet<String>,
    pub depth_labels: BTreeSet<String>,
    /// Element labels accepted as numeric content.
    pub numeric_labels: BTreeSet<String>,
    /// Height must come before width (and depth before both for conv3d).
    pub strict_hw_order: bool,
    /// Convolution output convention: replace the trailing dimension with the
    /// filter count instead of preserving the input shape.
    pub conv_output_filters_last: bool,
}

impl Default for TypeConfig {
    fn default() -> Self {
        let set = |items: &[&str]| items.iter().map(|s| s.to_string()).collect();
        TypeConfig {
            height_labels: set(&["y", "height", "h"]),
            width_labels: set(&["x", "width", "w"]),
            depth_labels: set(&["z", "depth", "d"]),
            numeric_labels: set(&["channel", "num", "value", "pixel"]),
            strict_hw_order: true,
            conv_output_filters_last: false,
        }
    }
}

// ---------------------------------------------------------------------------
// display (canonical annotation syntax)

impl fmt::Display for PyType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PyType::Record(fields) => {
                f.write_str("{")?;
                for (i, (name, ty)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{name}: {ty}")?;
                }
                f.write_str("}")
            }
            PyType::Function { params, result } => {
                f.write_str("(")?;
                for (i, (name, ty)) in params.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{name}: {ty}")?;
                }
                write!(f, ") -> {result}")
            }
            PyType::Tensor(t) => {
                f.write_str("tensor[")?;
                for (i, d) in t.dims.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{d}")?;
                }
                f.write_str("]")?;
                match t.element.as_ref() {
                    PyType::Label(l) => write!(f, " of {l}"),
                    // only labels are expressible after `of`; anything else
                    // renders as the irrelevant type
                    _ => f.write_str(" of top"),
                }
            }
            PyType::Label(l) => f.write_str(l),
            PyType::Top => f.write_str("top"),
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::Sym(l) => f.write_str(l),
            Dim::Num(n) => write!(f, "{n}"),
            Dim::Labeled(l, n) => write!(f, "{l}({n})"),
            Dim::Product(fs) => {
                for (i, part) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    write!(f, "{part}")?;
                }
                Ok(())
            }
        }
    }
}

// small constructors used throughout the tests
pub fn sym(l: &str) -> Dim {
    Dim::Sym(l.to_string())
}

pub fn num(n: u64) -> Dim {
    Dim::Num(n)
}

pub fn labeled(l: &str, n: u64) -> Dim {
    Dim::Labeled(l.to_string(), n)
}

pub fn product(fs: Vec<Dim>) -> Dim {
    Dim::Product(fs)
}

pub fn tensor(dims: Vec<Dim>, element: &str) -> PyType {
    PyType::Tensor(TensorType::new(dims, PyType::Label(element.to_string())))
}

pub fn record(fields: Vec<(&str, PyType)>) -> PyType {
    PyType::Record(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}
