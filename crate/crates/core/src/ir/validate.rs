//! Structural validation of IR functions: SSA single-definition, def-use
//! dominance, and site-id uniqueness. Violations are returned as data.

use super::{BlockId, IRFunction, InstrKind, Terminator, ValueId};
use crate::span::SourceSpan;
use std::collections::{HashMap, HashSet};

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub message: String,
    pub span: SourceSpan,
}

/// Returns every SSA/def-use/site-id violation; an empty list means ok.
pub fn validate(f: &IRFunction) -> Vec<Violation> {
    let mut violations = Vec::new();
    fn report(violations: &mut Vec<Violation>, message: String, span: &SourceSpan) {
        violations.push(Violation {
            message,
            span: span.clone(),
        });
    }

    let num_values = f.values.len() as u32;
    let in_range = |v: ValueId| v.0 < num_values;

    // definition points: value -> block (params live in a virtual pre-entry)
    let mut def_block: HashMap<ValueId, Option<BlockId>> = HashMap::new();
    // position of defs within their block, for intra-block ordering
    let mut def_pos: HashMap<ValueId, usize> = HashMap::new();

    for &p in &f.params {
        if def_block.insert(p, None).is_some() {
            report(&mut violations, format!("{p} defined more than once (parameter)"), &f.span);
        }
    }
    for (bi, block) in f.blocks.iter().enumerate() {
        let bid = BlockId(bi as u32);
        for phi in &block.phis {
            if !in_range(phi.def) {
                report(&mut violations, format!("{} out of range", phi.def), &phi.span);
                continue;
            }
            if def_block.insert(phi.def, Some(bid)).is_some() {
                report(&mut violations, format!("{} defined more than once", phi.def), &phi.span);
            }
            def_pos.insert(phi.def, 0);
        }
        for (ii, instr) in block.instrs.iter().enumerate() {
            if let Some(def) = instr.kind.def() {
                if !in_range(def) {
                    report(&mut violations, format!("{def} out of range"), &instr.span);
                    continue;
                }
                if def_block.insert(def, Some(bid)).is_some() {
                    report(&mut violations, format!("{def} defined more than once"), &instr.span);
                }
                def_pos.insert(def, ii + 1);
            }
        }
    }

    // site uniqueness
    let mut sites = HashSet::new();
    for block in &f.blocks {
        for instr in &block.instrs {
            let site = match &instr.kind {
                InstrKind::New { site, .. } | InstrKind::Invoke { site, .. } => Some(*site),
                _ => None,
            };
            if let Some(site) = site {
                if !sites.insert(site) {
                    report(&mut violations, format!("site id {} not unique within {}", site.0, f.name), &instr.span);
                }
            }
        }
    }

    // CFG sanity
    let num_blocks = f.blocks.len() as u32;
    for (bi, block) in f.blocks.iter().enumerate() {
        let check_target = |t: BlockId, violations: &mut Vec<Violation>| {
            if t.0 >= num_blocks {
                violations.push(Violation {
                    message: format!("bb{bi} jumps to missing {t}"),
                    span: f.span.clone(),
                });
            }
        };
        match &block.term {
            Terminator::Goto(t) => check_target(*t, &mut violations),
            Terminator::Branch { then_bb, else_bb, .. } => {
                check_target(*then_bb, &mut violations);
                check_target(*else_bb, &mut violations);
            }
            Terminator::Return { .. } => {}
        }
    }
    if !violations.is_empty() {
        return violations;
    }

    let reachable = reachable_blocks(f);
    let dom = dominators(f);
    let dominates = |a: BlockId, b: BlockId| -> bool {
        // walk the idom chain upward from b
        let mut cur = b;
        loop {
            if cur == a {
                return true;
            }
            match dom[cur.0 as usize] {
                Some(parent) if parent != cur => cur = parent,
                _ => return false,
            }
        }
    };

    // a use at (block, pos) is ok if the def is a param, or defined earlier in
    // the same block, or in a strictly dominating block
    let use_ok = |v: ValueId, block: BlockId, pos: usize| -> bool {
        match def_block.get(&v) {
            None => false,
            Some(None) => true, // parameter
            Some(Some(db)) => {
                if *db == block {
                    def_pos[&v] < pos || (def_pos[&v] == pos && false)
                } else {
                    dominates(*db, block)
                }
            }
        }
    };

    for (bi, block) in f.blocks.iter().enumerate() {
        let bid = BlockId(bi as u32);
        if !reachable[bi] {
            // dead code after a return is preserved by lowering but carries
            // no def-use obligations
            continue;
        }
        for phi in &block.phis {
            for (pred, v) in &phi.args {
                if !def_block.contains_key(v) {
                    report(&mut violations, format!("{} used by phi but never defined", v), &phi.span);
                } else if !use_ok(*v, *pred, usize::MAX) {
                    report(&mut violations, 
                        format!("{} (phi operand from {pred}) is not available at the end of {pred}", v),
                        &phi.span,
                    );
                }
            }
        }
        for (ii, instr) in block.instrs.iter().enumerate() {
            for v in instr.kind.uses() {
                if !def_block.contains_key(&v) {
                    report(&mut violations, format!("{v} used but never defined"), &instr.span);
                } else if !use_ok(v, bid, ii + 1) {
                    report(&mut violations, format!("{v} used before its definition dominates the use"), &instr.span);
                }
            }
        }
        if let Terminator::Return { value, span } = &block.term {
            if !def_block.contains_key(value) {
                report(&mut violations, format!("{value} returned but never defined"), span);
            } else if !use_ok(*value, bid, usize::MAX) {
                report(&mut violations, format!("{value} returned before its definition dominates the return"), span);
            }
        }
        if let Terminator::Branch { cond, .. } = &block.term {
            if !def_block.contains_key(cond) {
                report(&mut violations, format!("{cond} used as branch condition but never defined"), &f.span);
            }
        }
    }

    violations
}

fn reachable_blocks(f: &IRFunction) -> Vec<bool> {
    let mut reachable = vec![false; f.blocks.len()];
    let mut stack = vec![BlockId(0)];
    while let Some(b) = stack.pop() {
        if std::mem::replace(&mut reachable[b.0 as usize], true) {
            continue;
        }
        match &f.blocks[b.0 as usize].term {
            Terminator::Goto(t) => stack.push(*t),
            Terminator::Branch { then_bb, else_bb, .. } => {
                stack.push(*then_bb);
                stack.push(*else_bb);
            }
            Terminator::Return { .. } => {}
        }
    }
    reachable
}

/// Immediate dominators by the standard iterative data-flow algorithm;
/// entry's idom is itself.
fn dominators(f: &IRFunction) -> Vec<Option<BlockId>> {
    let n = f.blocks.len();
    let preds = f.predecessors();
    // reverse postorder
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut stack = vec![(BlockId(0), false)];
    while let Some((b, processed)) = stack.pop() {
        if processed {
            order.push(b);
            continue;
        }
        if seen[b.0 as usize] {
            continue;
        }
        seen[b.0 as usize] = true;
        stack.push((b, true));
        match &f.blocks[b.0 as usize].term {
            Terminator::Goto(t) => stack.push((*t, false)),
            Terminator::Branch { then_bb, else_bb, .. } => {
                stack.push((*then_bb, false));
                stack.push((*else_bb, false));
            }
            Terminator::Return { .. } => {}
        }
    }
    order.reverse();
    let rpo_index: HashMap<BlockId, usize> = order.iter().enumerate().map(|(i, b)| (*b, i)).collect();

    let mut idom: Vec<Option<BlockId>> = vec![None; n];
    idom[0] = Some(BlockId(0));
    let mut changed = true;
    while changed {
        changed = false;
        for &b in order.iter().skip(1) {
            let mut new_idom: Option<BlockId> = None;
            for &p in &preds[b.0 as usize] {
                if idom[p.0 as usize].is_none() {
                    continue;
                }
                new_idom = Some(match new_idom {
                    None => p,
                    Some(cur) => intersect(cur, p, &idom, &rpo_index),
                });
            }
            if let Some(ni) = new_idom {
                if idom[b.0 as usize] != Some(ni) {
                    idom[b.0 as usize] = Some(ni);
                    changed = true;
                }
            }
        }
    }
    idom
}

fn intersect(a: BlockId, b: BlockId, idom: &[Option<BlockId>], rpo: &HashMap<BlockId, usize>) -> BlockId {
    let mut x = a;
    let mut y = b;
    while x != y {
        while rpo[&x] > rpo[&y] {
            x = idom[x.0 as usize].expect("processed blocks have idoms");
        }
        while rpo[&y] > rpo[&x] {
            y = idom[y.0 as usize].expect("processed blocks have idoms");
        }
    }
    x
}
