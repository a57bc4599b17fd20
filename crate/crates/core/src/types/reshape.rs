//! Reshape compatibility: whether a tensor type can be reshaped to a target
//! shape, and the resulting type with labels carried over.
//!
//! The source dimensions are flattened into an ordered factor sequence
//! (products expand into their factors). Target entries are then matched
//! left to right:
//!
//! * `-1` matches one symbolic factor, keeping its label; with no symbolic
//!   factors it is resolved numerically from the element count.
//! * an integer may consume one factor of equal known size (inheriting its
//!   label), a run of consecutive factors whose sizes multiply to it (the
//!   result is their product), or a sub-factorization of a single unlabeled
//!   sized factor. Labeled factors are never split, and no target may group
//!   parts of two factors.
//! * `1` may also be inserted freely; it leaves the element count unchanged.
//!
//! Success requires all factors consumed and all targets matched, with the
//! element counts equal where known.

use super::{normalize, Dim, PyType, TensorType};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReshapeError {
    #[error("cannot reshape {src_total} elements into {target_total}")]
    SizeMismatch { src_total: u64, target_total: u64 },
    #[error("target entry {target_entry} does not align with the factor boundaries (factor {at_factor})")]
    InvalidFactorization { target_entry: i64, at_factor: usize },
    #[error("more than one -1 wildcard in the target shape")]
    MultipleWildcards,
    #[error("the -1 wildcard cannot be resolved to a whole dimension size")]
    WildcardUnresolvable,
}

#[derive(Debug, Clone, PartialEq)]
enum Target {
    Wild,
    Size(u64),
}

/// Applies `reshape` with the given target shape (`None` entries mean `-1`).
pub fn reshape_apply(src: &TensorType, shape: &[Option<i64>]) -> Result<TensorType, ReshapeError> {
    let src_norm = match normalize(&PyType::Tensor(src.clone())) {
        PyType::Tensor(t) => t,
        _ => unreachable!("normalizing a tensor yields a tensor"),
    };
    let factors = flatten_to_factors(&src_norm.dims);

    // classify target entries
    let mut targets = Vec::with_capacity(shape.len());
    let mut wildcards = 0usize;
    for (i, entry) in shape.iter().enumerate() {
        match entry {
            None | Some(-1) => {
                wildcards += 1;
                targets.push(Target::Wild);
            }
            Some(n) if *n > 0 => targets.push(Target::Size(*n as u64)),
            Some(bad) => {
                return Err(ReshapeError::InvalidFactorization {
                    target_entry: *bad,
                    at_factor: i,
                })
            }
        }
    }
    if wildcards > 1 {
        return Err(ReshapeError::MultipleWildcards);
    }

    let has_sym = factors.iter().any(|f| f.size().is_none());
    let known_src: u64 = factors.iter().filter_map(|f| f.size()).product();
    let known_target: u64 = targets
        .iter()
        .filter_map(|t| match t {
            Target::Size(n) => Some(*n),
            Target::Wild => None,
        })
        .product();

    if !has_sym {
        if wildcards == 1 {
            // resolve -1 numerically
            if known_target == 0 || !known_src.is_multiple_of(known_target) {
                return Err(ReshapeError::WildcardUnresolvable);
            }
            let value = known_src / known_target;
            for t in targets.iter_mut() {
                if matches!(t, Target::Wild) {
                    *t = Target::Size(value);
                }
            }
        } else if known_src != known_target {
            return Err(ReshapeError::SizeMismatch {
                src_total: known_src,
                target_total: known_target,
            });
        }
    } else if wildcards == 1 && known_src != known_target {
        // the wildcard absorbs the symbolic factor; the known parts must agree
        return Err(ReshapeError::SizeMismatch {
            src_total: known_src,
            target_total: known_target,
        });
    }

    // where each original dimension's factor run starts, so exact matches
    // reproduce the source structure (identity reshapes stay identities)
    let mut dim_starts: Vec<Option<(usize, Dim)>> = vec![None; factors.len() + 1];
    {
        let mut at = 0usize;
        for d in &src_norm.dims {
            let len = match d {
                Dim::Product(fs) => fs.len(),
                _ => 1,
            };
            dim_starts[at] = Some((len, d.clone()));
            at += len;
        }
    }

    let mut best_failure = (0usize, 0usize);
    let mut out = Vec::new();
    if match_targets(&targets, &factors, &dim_starts, 0, 0, None, &mut out, &mut best_failure) {
        Ok(TensorType::new(out, (*src.element).clone()))
    } else {
        let entry = match targets.get(best_failure.0) {
            Some(Target::Size(n)) => *n as i64,
            Some(Target::Wild) | None => -1,
        };
        Err(ReshapeError::InvalidFactorization {
            target_entry: entry,
            at_factor: best_failure.1,
        })
    }
}

fn flatten_to_factors(dims: &[Dim]) -> Vec<Dim> {
    let mut out = Vec::new();
    for d in dims {
        match d {
            Dim::Product(fs) => out.extend(fs.iter().cloned()),
            other => out.push(other.clone()),
        }
    }
    out
}

/// Backtracking matcher. `split_rem` carries the remaining quotient of a
/// partially consumed unlabeled factor.
#[allow(clippy::too_many_arguments)]
fn match_targets(
    targets: &[Target],
    factors: &[Dim],
    dim_starts: &[Option<(usize, Dim)>],
    ti: usize,
    fi: usize,
    split_rem: Option<u64>,
    out: &mut Vec<Dim>,
    best_failure: &mut (usize, usize),
) -> bool {
    if ti > best_failure.0 {
        *best_failure = (ti, fi);
    }
    if ti == targets.len() {
        return fi == factors.len() && split_rem.is_none();
    }
    match &targets[ti] {
        Target::Wild => {
            // symbolic wildcard: consume exactly the symbolic factor here
            if split_rem.is_none() {
                if let Some(f @ Dim::Sym(_)) = factors.get(fi) {
                    out.push(f.clone());
                    if match_targets(targets, factors, dim_starts, ti + 1, fi + 1, None, out, best_failure) {
                        return true;
                    }
                    out.pop();
                }
            }
            false
        }
        Target::Size(n) => {
            let n = *n;
            // (a0) a whole original dimension of equal size, preferred so an
            // exact target reproduces the source structure
            if split_rem.is_none() {
                if let Some(Some((len, dim))) = dim_starts.get(fi) {
                    if *len >= 2 && dim.size() == Some(n) {
                        out.push(dim.clone());
                        if match_targets(targets, factors, dim_starts, ti + 1, fi + len, None, out, best_failure) {
                            return true;
                        }
                        out.pop();
                    }
                }
            }
            // (a) one factor of equal known size, label inherited
            if split_rem.is_none() {
                if let Some(f) = factors.get(fi) {
                    if f.size() == Some(n) {
                        out.push(f.clone());
                        if match_targets(targets, factors, dim_starts, ti + 1, fi + 1, None, out, best_failure) {
                            return true;
                        }
                        out.pop();
                    }
                }
            }
            // (b) a run of consecutive factors multiplying to n
            if split_rem.is_none() {
                let mut prod: u64 = 1;
                let mut j = fi;
                while let Some(size) = factors.get(j).and_then(|f| f.size()) {
                    prod = match prod.checked_mul(size) {
                        Some(p) => p,
                        None => break,
                    };
                    j += 1;
                    if j - fi >= 2 && prod == n {
                        out.push(Dim::Product(factors[fi..j].to_vec()));
                        if match_targets(targets, factors, dim_starts, ti + 1, j, None, out, best_failure) {
                            return true;
                        }
                        out.pop();
                    }
                }
            }
            // (c) sub-factorization of a single unlabeled sized factor
            let current = match split_rem {
                Some(rem) => Some(rem),
                None => match factors.get(fi) {
                    Some(Dim::Num(m)) => Some(*m),
                    _ => None,
                },
            };
            if let Some(m) = current {
                if n > 0 && m % n == 0 && m != n {
                    let rem = m / n;
                    out.push(Dim::Num(n));
                    let ok = if rem == 1 {
                        match_targets(targets, factors, dim_starts, ti + 1, fi + 1, None, out, best_failure)
                    } else {
                        match_targets(targets, factors, dim_starts, ti + 1, fi, Some(rem), out, best_failure)
                    };
                    if ok {
                        return true;
                    }
                    out.pop();
                }
                // finishing a split (rem == n) consumes the factor
                if split_rem == Some(n) {
                    out.push(Dim::Num(n));
                    if match_targets(targets, factors, dim_starts, ti + 1, fi + 1, None, out, best_failure) {
                        return true;
                    }
                    out.pop();
                }
            }
            // (d) a 1 may be inserted freely
            if n == 1 {
                out.push(Dim::Num(1));
                if match_targets(targets, factors, dim_starts, ti + 1, fi, split_rem, out, best_failure) {
                    return true;
                }
                out.pop();
            }
            false
        }
    }
}
