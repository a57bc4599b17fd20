//! Deterministic textual form of IR functions, used in golden tests.

use super::{AllocKind, Callee, IRFunction, InstrKind, Terminator};
use std::fmt::Write;

pub fn pretty_print(f: &IRFunction) -> String {
    let mut out = String::new();
    let params: Vec<String> = f
        .params
        .iter()
        .map(|p| match f.value_name(*p) {
            Some(n) => format!("{p}({n})"),
            None => format!("{p}"),
        })
        .collect();
    let _ = write!(out, "func {} ({})", f.name, params.join(", "));
    if let Some(c) = &f.declared_class {
        let _ = write!(out, " class {c}");
    }
    out.push('\n');
    for (bi, block) in f.blocks.iter().enumerate() {
        let _ = writeln!(out, "bb{bi}:");
        for phi in &block.phis {
            let args: Vec<String> = phi.args.iter().map(|(b, v)| format!("{b}: {v}")).collect();
            let _ = writeln!(out, "  {} = phi [{}]", phi.def, args.join(", "));
        }
        for instr in &block.instrs {
            let _ = writeln!(out, "  {}", render_instr(&instr.kind));
        }
        match &block.term {
            Terminator::Goto(t) => {
                let _ = writeln!(out, "  goto {t}");
            }
            Terminator::Branch { cond, then_bb, else_bb } => {
                let _ = writeln!(out, "  branch {cond} ? {then_bb} : {else_bb}");
            }
            Terminator::Return { value, .. } => {
                let _ = writeln!(out, "  return {value}");
            }
        }
    }
    out
}

fn render_instr(kind: &InstrKind) -> String {
    match kind {
        InstrKind::Const { def, lit } => format!("{def} = const {lit}"),
        InstrKind::Assign { def, src } => format!("{def} = {src}"),
        InstrKind::BinOp { def, op, lhs, rhs } => format!("{def} = binop {} {lhs} {rhs}", op.as_str()),
        InstrKind::New { def, alloc, site } => format!("{def} = new {} @{}", render_alloc(alloc), site.0),
        InstrKind::GetField { def, obj, field } => format!("{def} = getfield {obj} .{field}"),
        InstrKind::PutField { obj, field, value } => format!("putfield {obj} .{field} <- {value}"),
        InstrKind::Invoke { def, callee, args, kwargs, site } => {
            let mut parts: Vec<String> = args.iter().map(|a| a.to_string()).collect();
            parts.extend(kwargs.iter().map(|(k, v)| format!("{k}={v}")));
            let target = match callee {
                Callee::Value(v) => v.to_string(),
                Callee::Import(m) => format!("import({m})"),
                Callee::Globals => "globals()".to_string(),
                Callee::Static(name) => format!("static {name}"),
            };
            format!("{def} = invoke {target} ({}) @{}", parts.join(", "), site.0)
        }
    }
}

fn render_alloc(alloc: &AllocKind) -> String {
    match alloc {
        AllocKind::Object => "object".to_string(),
        AllocKind::Dict => "dict".to_string(),
        AllocKind::List => "list".to_string(),
        AllocKind::ShapeList(elems) => {
            let parts: Vec<String> = elems
                .iter()
                .map(|e| match e {
                    Some(n) => n.to_string(),
                    None => "None".to_string(),
                })
                .collect();
            format!("shapelist [{}]", parts.join(", "))
        }
        AllocKind::Instance(c) => format!("instance {c}"),
        AllocKind::ModelInstance(c) => format!("model {c}"),
        AllocKind::Module(m) => format!("module {m}"),
        AllocKind::Function(f) => format!("function {f}"),
        AllocKind::Class(c) => format!("class {c}"),
        AllocKind::BoundMethod { method, receiver } => format!("boundmethod {method} recv {receiver}"),
    }
}

#[cfg(test)]
mod tests {
    use crate::ir::*;
    use crate::span::SourceSpan;

    #[test]
    fn const_and_getfield_render() {
        let span = SourceSpan::synthetic("test");
        let mut b = FunctionBuilder::new("f", FunctionKind::Source, span.clone());
        let v1 = b.fresh(None, span.clone());
        let v2 = b.fresh(None, span.clone());
        let v3 = b.fresh(None, span.clone());
        b.emit(InstrKind::Const { def: v1, lit: Literal::Int(42) }, span.clone());
        b.emit(InstrKind::Assign { def: v2, src: v1 }, span.clone());
        b.emit(
            InstrKind::GetField {
                def: v3,
                obj: v2,
                field: "images".into(),
            },
            span.clone(),
        );
        b.terminate_current(Terminator::Return { value: v3, span });
        let text = pretty_print(&b.finish());
        assert!(text.contains("v0 = const 42"));
        assert!(text.contains("v2 = getfield v1 .images"));
    }
}
