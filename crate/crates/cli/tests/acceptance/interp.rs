//! A concrete reference interpreter for straight-line IR programs, used as
//! the soundness oracle for the pointer analysis: every object a variable
//! holds in the single concrete execution must appear in the computed
//! points-to set.

use rand::rngs::StdRng;
use rand::Rng;
use std::collections::BTreeMap;
use tensorlint_core::analysis::{build, AbstractObject, Analysis};
use tensorlint_core::frontend::LoweredModule;
use tensorlint_core::ir::{
    AllocKind, FunctionBuilder, FunctionKind, IRFunction, InstrKind, Literal, SiteId, Terminator,
    ValueId,
};
use tensorlint_core::model::ModelSpec;
use tensorlint_core::span::SourceSpan;

const FIELDS: [&str; 3] = ["f", "g", "h"];

/// Generates a straight-line function of at most `max_len` instructions over
/// news, copies, and field reads/writes.
pub fn generate_program(rng: &mut StdRng, max_len: usize) -> IRFunction {
    let span = SourceSpan::point("gen.py", 1, 1);
    let mut b = FunctionBuilder::new("<module>", FunctionKind::ModuleInit, span.clone());
    let mut defined: Vec<ValueId> = Vec::new();

    // start from one object so loads/stores have something to target
    let site = b.fresh_site();
    let first = b.fresh(None, span.clone());
    b.emit(
        InstrKind::New {
            def: first,
            alloc: AllocKind::Object,
            site,
        },
        span.clone(),
    );
    defined.push(first);

    let len = rng.gen_range(1..=max_len.saturating_sub(2).max(1));
    for _ in 0..len {
        let choice = rng.gen_range(0..100);
        if choice < 30 {
            let site = b.fresh_site();
            let def = b.fresh(None, span.clone());
            b.emit(
                InstrKind::New {
                    def,
                    alloc: AllocKind::Object,
                    site,
                },
                span.clone(),
            );
            defined.push(def);
        } else if choice < 50 {
            let src = defined[rng.gen_range(0..defined.len())];
            let def = b.fresh(None, span.clone());
            b.emit(InstrKind::Assign { def, src }, span.clone());
            defined.push(def);
        } else if choice < 75 {
            let obj = defined[rng.gen_range(0..defined.len())];
            let value = defined[rng.gen_range(0..defined.len())];
            let field = FIELDS[rng.gen_range(0..FIELDS.len())].to_string();
            b.emit(InstrKind::PutField { obj, field, value }, span.clone());
        } else if choice < 95 {
            let obj = defined[rng.gen_range(0..defined.len())];
            let field = FIELDS[rng.gen_range(0..FIELDS.len())].to_string();
            let def = b.fresh(None, span.clone());
            b.emit(InstrKind::GetField { def, obj, field }, span.clone());
            defined.push(def);
        } else {
            let def = b.fresh(None, span.clone());
            b.emit(
                InstrKind::Const {
                    def,
                    lit: Literal::Int(rng.gen_range(0..100)),
                },
                span.clone(),
            );
            defined.push(def);
        }
    }
    let ret = defined[rng.gen_range(0..defined.len())];
    b.terminate_current(Terminator::Return { value: ret, span });
    b.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Concrete {
    /// Object identity: the site id of the `New` that created it (each site
    /// executes once in a straight-line program).
    Obj(SiteId),
    Int,
    Unbound,
}

/// Executes the single path of a straight-line function, returning what each
/// variable concretely holds.
pub fn interpret(f: &IRFunction) -> BTreeMap<ValueId, Concrete> {
    let mut env: BTreeMap<ValueId, Concrete> = BTreeMap::new();
    let mut heap: BTreeMap<(SiteId, String), Concrete> = BTreeMap::new();
    assert_eq!(f.blocks.len(), 1, "oracle interpreter handles straight-line code only");
    for instr in &f.blocks[0].instrs {
        match &instr.kind {
            InstrKind::New { def, site, .. } => {
                env.insert(*def, Concrete::Obj(*site));
            }
            InstrKind::Assign { def, src } => {
                let v = env.get(src).copied().unwrap_or(Concrete::Unbound);
                env.insert(*def, v);
            }
            InstrKind::Const { def, .. } => {
                env.insert(*def, Concrete::Int);
            }
            InstrKind::PutField { obj, field, value } => {
                if let Some(Concrete::Obj(site)) = env.get(obj) {
                    let v = env.get(value).copied().unwrap_or(Concrete::Unbound);
                    heap.insert((*site, field.clone()), v);
                }
            }
            InstrKind::GetField { def, obj, field } => {
                let v = match env.get(obj) {
                    Some(Concrete::Obj(site)) => heap
                        .get(&(*site, field.clone()))
                        .copied()
                        .unwrap_or(Concrete::Unbound),
                    _ => Concrete::Unbound,
                };
                env.insert(*def, v);
            }
            other => panic!("generator never emits {other:?}"),
        }
    }
    env
}

/// Checks that the abstract points-to sets over-approximate the concrete
/// execution. Returns a description of the first unsoundness found.
pub fn check_soundness(f: &IRFunction, analysis: &Analysis) -> Result<(), String> {
    let concrete = interpret(f);
    let fid = analysis.program.lookup(&f.name).expect("function registered");
    for (v, value) in concrete {
        let Concrete::Obj(site) = value else { continue };
        let pts = analysis
            .graph
            .points_to(&analysis.program, fid, v)
            .map_err(|e| e.to_string())?;
        let covered = pts.iter().any(
            |o| matches!(o, AbstractObject::AllocSite { site: s, .. } if *s == site),
        );
        if !covered {
            return Err(format!(
                "{v} concretely holds the object from site {} but the analysis found {pts:?}",
                site.0
            ));
        }
    }
    Ok(())
}

pub fn analyze_straight_line(f: IRFunction) -> Analysis {
    let lowered = LoweredModule {
        functions: vec![f],
        classes: vec![],
    };
    build(&lowered, &ModelSpec::empty())
}
