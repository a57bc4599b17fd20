//! Per-API type rules for the modeled TensorFlow surface: convolutions,
//! pooling, flatten, dense and placeholder.

use super::{Dim, PyType, TensorType, TypeConfig};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApiError {
    #[error("expected a rank-{want} tensor, found rank {got}")]
    Rank { got: usize, want: usize },
    #[error("dimension {position} is labeled {got:?}, expected one of {wanted:?}")]
    Label {
        /// 1-based dimension index.
        position: usize,
        got: String,
        wanted: Vec<String>,
    },
    #[error("element label {element:?} is not a numeric label")]
    ElementNotNumeric { element: String },
    #[error("placeholder shape has no dimensions")]
    PlaceholderRankZero,
}

fn check_numeric_element(t: &TensorType, cfg: &TypeConfig) -> Result<(), ApiError> {
    match t.element.as_ref() {
        PyType::Label(l) if cfg.numeric_labels.contains(l) => Ok(()),
        PyType::Label(l) => Err(ApiError::ElementNotNumeric { element: l.clone() }),
        other => Err(ApiError::ElementNotNumeric {
            element: other.to_string(),
        }),
    }
}

/// Checks one spatial dimension's label against an alias set. Unlabeled
/// dimensions carry no information to contradict, so they pass.
fn check_spatial_label(
    dim: &Dim,
    position: usize,
    expected: &std::collections::BTreeSet<String>,
    relaxed: Option<&std::collections::BTreeSet<String>>,
) -> Result<(), ApiError> {
    let Some(label) = dim.label() else {
        return Ok(());
    };
    let ok = expected.contains(label) || relaxed.is_some_and(|r| r.contains(label));
    if ok {
        Ok(())
    } else {
        let mut wanted: Vec<String> = expected.iter().cloned().collect();
        if let Some(r) = relaxed {
            wanted.extend(r.iter().cloned());
        }
        Err(ApiError::Label {
            position,
            got: label.to_string(),
            wanted,
        })
    }
}

fn conv_output(input: &TensorType, filters: Option<u64>, cfg: &TypeConfig) -> TensorType {
    if cfg.conv_output_filters_last {
        let mut dims = input.dims.clone();
        let last = dims.len() - 1;
        dims[last] = match filters {
            Some(n) => Dim::Num(n),
            None => Dim::Sym("filters".to_string()),
        };
        TensorType {
            dims,
            element: input.element.clone(),
        }
    } else {
        input.clone()
    }
}

/// 2-D convolution: rank 4 with height/width in the middle dimensions and a
/// numeric element.
pub fn conv2d_check(input: &TensorType, filters: Option<u64>, cfg: &TypeConfig) -> Result<TensorType, ApiError> {
    if input.rank() != 4 {
        return Err(ApiError::Rank {
            got: input.rank(),
            want: 4,
        });
    }
    let relaxed = (!cfg.strict_hw_order).then_some(());
    check_spatial_label(
        &input.dims[1],
        2,
        &cfg.height_labels,
        relaxed.map(|_| &cfg.width_labels),
    )?;
    check_spatial_label(
        &input.dims[2],
        3,
        &cfg.width_labels,
        relaxed.map(|_| &cfg.height_labels),
    )?;
    check_numeric_element(input, cfg)?;
    Ok(conv_output(input, filters, cfg))
}

/// 3-D convolution: rank 5 with depth/height/width in dimensions 2..4.
pub fn conv3d_check(input: &TensorType, filters: Option<u64>, cfg: &TypeConfig) -> Result<TensorType, ApiError> {
    if input.rank() != 5 {
        return Err(ApiError::Rank {
            got: input.rank(),
            want: 5,
        });
    }
    let spatial = [
        (&input.dims[1], 2, &cfg.depth_labels),
        (&input.dims[2], 3, &cfg.height_labels),
        (&input.dims[3], 4, &cfg.width_labels),
    ];
    let mut all: std::collections::BTreeSet<String> = cfg.depth_labels.clone();
    all.extend(cfg.height_labels.iter().cloned());
    all.extend(cfg.width_labels.iter().cloned());
    for (dim, position, expected) in spatial {
        if cfg.strict_hw_order {
            check_spatial_label(dim, position, expected, None)?;
        } else {
            check_spatial_label(dim, position, &all, None)?;
        }
    }
    check_numeric_element(input, cfg)?;
    Ok(conv_output(input, filters, cfg))
}

/// Max pooling: divides the spatial sizes by the stride, keeping labels. The
/// returned flag reports a non-divisible size that was floored.
pub fn pool2d_apply(
    input: &TensorType,
    _pool: Option<u64>,
    stride: Option<u64>,
    cfg: &TypeConfig,
) -> Result<(TensorType, bool), ApiError> {
    if input.rank() != 4 {
        return Err(ApiError::Rank {
            got: input.rank(),
            want: 4,
        });
    }
    check_numeric_element(input, cfg)?;
    let Some(stride) = stride.filter(|s| *s > 0) else {
        return Ok((input.clone(), false));
    };
    let mut floored = false;
    let mut dims = input.dims.clone();
    for dim in dims.iter_mut().take(3).skip(1) {
        *dim = match dim {
            Dim::Labeled(l, n) => {
                floored |= *n % stride != 0;
                Dim::Labeled(l.clone(), *n / stride)
            }
            Dim::Num(n) => {
                floored |= *n % stride != 0;
                Dim::Num(*n / stride)
            }
            Dim::Product(_) => match dim.size() {
                Some(n) => {
                    floored |= n % stride != 0;
                    Dim::Num(n / stride)
                }
                None => dim.clone(),
            },
            Dim::Sym(_) => dim.clone(),
        };
    }
    Ok((
        TensorType {
            dims,
            element: input.element.clone(),
        },
        floored,
    ))
}

/// Flatten to rank 2: the leading dimension is kept and the rest collapse
/// into one product with known size-1 factors dropped.
pub fn flatten_apply(input: &TensorType) -> Result<TensorType, ApiError> {
    if input.rank() < 2 {
        return Err(ApiError::Rank {
            got: input.rank(),
            want: 2,
        });
    }
    let mut factors = Vec::new();
    for d in &input.dims[1..] {
        match d {
            Dim::Product(fs) => factors.extend(fs.iter().cloned()),
            other => factors.push(other.clone()),
        }
    }
    factors.retain(|f| f.size() != Some(1));
    let tail = match factors.len() {
        0 => Dim::Num(1),
        1 => factors.into_iter().next().expect("len checked"),
        _ => Dim::Product(factors),
    };
    Ok(TensorType {
        dims: vec![input.dims[0].clone(), tail],
        element: input.element.clone(),
    })
}

/// Unit count for a dense layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DenseUnits {
    Known(u64),
    /// Unknown count carried by a named variable; the name becomes the
    /// symbolic output dimension.
    Named(String),
    Unknown,
}

/// Fully connected layer on a rank-2 tensor: replaces the feature dimension
/// with the unit count.
pub fn dense_apply(input: &TensorType, units: &DenseUnits) -> Result<TensorType, ApiError> {
    if input.rank() != 2 {
        return Err(ApiError::Rank {
            got: input.rank(),
            want: 2,
        });
    }
    let out_dim = match units {
        DenseUnits::Known(n) => Dim::Num(*n),
        DenseUnits::Named(name) => Dim::Sym(name.clone()),
        DenseUnits::Unknown => Dim::Sym("?units".to_string()),
    };
    Ok(TensorType {
        dims: vec![input.dims[0].clone(), out_dim],
        element: input.element.clone(),
    })
}

/// An unspecified tensor of the given shape: unknown entries become fresh
/// symbolic dimensions `?1`, `?2`, ... numbered per shape.
pub fn placeholder_type(shape: &[Option<i64>], element: PyType) -> Result<TensorType, ApiError> {
    if shape.is_empty() {
        return Err(ApiError::PlaceholderRankZero);
    }
    let mut fresh = 0usize;
    let dims = shape
        .iter()
        .map(|entry| match entry {
            Some(n) if *n > 0 => Dim::Num(*n as u64),
            Some(0) => Dim::Num(0),
            _ => {
                fresh += 1;
                Dim::Sym(format!("?{fresh}"))
            }
        })
        .collect();
    Ok(TensorType::new(dims, element))
}
