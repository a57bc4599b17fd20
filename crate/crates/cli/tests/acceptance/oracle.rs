//! Brute-force reshape oracle: enumerates every legal factor
//! grouping/splitting for a target shape and returns all valid result
//! dimension lists. Written independently of the checker so the two can be
//! compared; only the rules below are shared:
//!
//! 1. source dimensions flatten into an ordered factor sequence;
//! 2. `-1` resolves numerically when no factor is symbolic, otherwise it
//!    consumes exactly one symbolic factor at its position (label kept);
//! 3. a target integer may consume one factor of equal known size, a run of
//!    two or more consecutive wholly-known factors whose sizes multiply to
//!    it, or divide into a single unlabeled sized factor step by step;
//! 4. `1` may also be inserted without consuming anything;
//! 5. every factor must be consumed and every target matched.

use std::collections::BTreeSet;
use tensorlint_core::types::{Dim, TensorType};

#[derive(Debug, Clone, PartialEq, Eq)]
enum T {
    Wild,
    Size(u64),
}

/// All valid result dimension lists for the reshape, empty when invalid.
pub fn enumerate_reshapes(src: &TensorType, shape: &[Option<i64>]) -> BTreeSet<Vec<Dim>> {
    let mut factors = Vec::new();
    for d in &src.dims {
        match d {
            Dim::Product(fs) => factors.extend(fs.iter().cloned()),
            other => factors.push(other.clone()),
        }
    }

    let mut wilds = 0;
    let mut targets = Vec::new();
    for e in shape {
        match e {
            None | Some(-1) => {
                wilds += 1;
                targets.push(T::Wild);
            }
            Some(n) if *n > 0 => targets.push(T::Size(*n as u64)),
            Some(_) => return BTreeSet::new(),
        }
    }
    if wilds > 1 {
        return BTreeSet::new();
    }

    let has_sym = factors.iter().any(|f| matches!(f, Dim::Sym(_)));
    if !has_sym && wilds == 1 {
        let total: u64 = factors.iter().map(|f| f.size().expect("no syms")).product();
        let others: u64 = targets
            .iter()
            .filter_map(|t| match t {
                T::Size(n) => Some(*n),
                T::Wild => None,
            })
            .product();
        if others == 0 || !total.is_multiple_of(others) {
            return BTreeSet::new();
        }
        let v = total / others;
        for t in targets.iter_mut() {
            if *t == T::Wild {
                *t = T::Size(v);
            }
        }
    }

    let mut solutions = BTreeSet::new();
    search(&targets, &factors, 0, 0, None, &mut Vec::new(), &mut solutions);
    solutions
}

/// Exhaustive search over every applicable rule at every step.
fn search(
    targets: &[T],
    factors: &[Dim],
    ti: usize,
    fi: usize,
    rem: Option<u64>,
    acc: &mut Vec<Dim>,
    solutions: &mut BTreeSet<Vec<Dim>>,
) {
    if ti == targets.len() {
        if fi == factors.len() && rem.is_none() {
            solutions.insert(acc.clone());
        }
        return;
    }
    match &targets[ti] {
        T::Wild => {
            if rem.is_none() {
                if let Some(f @ Dim::Sym(_)) = factors.get(fi) {
                    acc.push(f.clone());
                    search(targets, factors, ti + 1, fi + 1, None, acc, solutions);
                    acc.pop();
                }
            }
        }
        T::Size(n) => {
            let n = *n;
            // one factor of equal known size
            if rem.is_none() {
                if let Some(f) = factors.get(fi) {
                    if f.size() == Some(n) {
                        acc.push(f.clone());
                        search(targets, factors, ti + 1, fi + 1, None, acc, solutions);
                        acc.pop();
                    }
                }
            }
            // every run of >= 2 consecutive known factors
            if rem.is_none() {
                for j in fi + 2..=factors.len() {
                    let sizes: Option<Vec<u64>> = factors[fi..j].iter().map(|f| f.size()).collect();
                    let Some(sizes) = sizes else { break };
                    let prod: u64 = sizes.iter().product();
                    if prod == n {
                        acc.push(Dim::Product(factors[fi..j].to_vec()));
                        search(targets, factors, ti + 1, j, None, acc, solutions);
                        acc.pop();
                    }
                }
            }
            // sub-factorization of one unlabeled sized factor
            let m = match rem {
                Some(r) => Some(r),
                None => match factors.get(fi) {
                    Some(Dim::Num(m)) => Some(*m),
                    _ => None,
                },
            };
            if let Some(m) = m {
                if n > 0 && m % n == 0 {
                    if m == n && rem.is_some() {
                        // the split finishes exactly
                        acc.push(Dim::Num(n));
                        search(targets, factors, ti + 1, fi + 1, None, acc, solutions);
                        acc.pop();
                    }
                    if m != n {
                        let r = m / n;
                        acc.push(Dim::Num(n));
                        if r == 1 {
                            search(targets, factors, ti + 1, fi + 1, None, acc, solutions);
                        } else {
                            search(targets, factors, ti + 1, fi, Some(r), acc, solutions);
                        }
                        acc.pop();
                    }
                }
            }
            // free insertion of a 1
            if n == 1 {
                acc.push(Dim::Num(1));
                search(targets, factors, ti + 1, fi, rem, acc, solutions);
                acc.pop();
            }
        }
    }
}
