//! AST pretty-printer. Re-parsing its output reproduces the same AST
//! (structurally, spans aside), which is checked by a property test.

use crate::ast::*;
use std::fmt::Write;

pub fn print_module(m: &Module) -> String {
    let mut out = String::new();
    for stmt in &m.body {
        print_stmt(&mut out, stmt, 0);
    }
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn print_block(out: &mut String, body: &[Stmt], level: usize) {
    if body.is_empty() {
        indent(out, level);
        out.push_str("pass\n");
    } else {
        for stmt in body {
            print_stmt(out, stmt, level);
        }
    }
}

fn print_stmt(out: &mut String, stmt: &Stmt, level: usize) {
    indent(out, level);
    match &stmt.kind {
        StmtKind::FunctionDef { name, params, body } => {
            let ps: Vec<&str> = params.iter().map(|p| p.name.as_str()).collect();
            let _ = writeln!(out, "def {}({}):", name, ps.join(", "));
            print_block(out, body, level + 1);
        }
        StmtKind::ClassDef { name, base, body } => {
            match base {
                Some(b) => {
                    let _ = writeln!(out, "class {name}({b}):");
                }
                None => {
                    let _ = writeln!(out, "class {name}:");
                }
            }
            print_block(out, body, level + 1);
        }
        StmtKind::If { test, then_body, else_body } => {
            let _ = writeln!(out, "if {}:", print_expr(test));
            print_block(out, then_body, level + 1);
            if !else_body.is_empty() {
                indent(out, level);
                out.push_str("else:\n");
                print_block(out, else_body, level + 1);
            }
        }
        StmtKind::While { test, body } => {
            let _ = writeln!(out, "while {}:", print_expr(test));
            print_block(out, body, level + 1);
        }
        StmtKind::With { context, alias, body } => {
            match alias {
                Some(a) => {
                    let _ = writeln!(out, "with {} as {}:", print_expr(context), a);
                }
                None => {
                    let _ = writeln!(out, "with {}:", print_expr(context));
                }
            }
            print_block(out, body, level + 1);
        }
        StmtKind::Return { value } => match value {
            Some(v) => {
                let _ = writeln!(out, "return {}", print_expr(v));
            }
            None => out.push_str("return\n"),
        },
        StmtKind::Assign { target, value } => {
            let _ = writeln!(out, "{} = {}", print_expr(target), print_expr(value));
        }
        StmtKind::AugAssign { target, op, value } => {
            let _ = writeln!(out, "{} {}= {}", print_expr(target), op.as_str(), print_expr(value));
        }
        StmtKind::ExprStmt { value } => {
            let _ = writeln!(out, "{}", print_expr(value));
        }
        StmtKind::Import { names } => {
            let parts: Vec<String> = names
                .iter()
                .map(|(m, a)| match a {
                    Some(a) => format!("{m} as {a}"),
                    None => m.clone(),
                })
                .collect();
            let _ = writeln!(out, "import {}", parts.join(", "));
        }
        StmtKind::ImportFrom { module, names } => {
            let parts: Vec<String> = names
                .iter()
                .map(|(n, a)| match a {
                    Some(a) => format!("{n} as {a}"),
                    None => n.clone(),
                })
                .collect();
            let _ = writeln!(out, "from {} import {}", module, parts.join(", "));
        }
        StmtKind::Pass => out.push_str("pass\n"),
    }
}

pub fn print_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Name(n) => n.clone(),
        ExprKind::Constant(c) => print_constant(c),
        ExprKind::Call { callee, args, kwargs } => {
            let mut parts: Vec<String> = args.iter().map(print_expr).collect();
            parts.extend(kwargs.iter().map(|(k, v)| format!("{}={}", k, print_expr(v))));
            format!("{}({})", print_receiver(callee), parts.join(", "))
        }
        ExprKind::Attribute { value, attr } => format!("{}.{}", print_receiver(value), attr),
        ExprKind::Subscript { value, index } => format!("{}[{}]", print_receiver(value), print_expr(index)),
        ExprKind::BinOp { op, left, right } => {
            format!("({} {} {})", print_expr(left), op.as_str(), print_expr(right))
        }
        ExprKind::Compare { op, left, right } => {
            format!("({} {} {})", print_expr(left), op.as_str(), print_expr(right))
        }
        ExprKind::ListLit(items) => {
            let parts: Vec<String> = items.iter().map(print_expr).collect();
            format!("[{}]", parts.join(", "))
        }
        ExprKind::TupleLit(items) => match items.len() {
            0 => "()".to_string(),
            1 => format!("({},)", print_expr(&items[0])),
            _ => {
                let parts: Vec<String> = items.iter().map(print_expr).collect();
                format!("({})", parts.join(", "))
            }
        },
        ExprKind::DictLit(pairs) => {
            let parts: Vec<String> = pairs
                .iter()
                .map(|(k, v)| format!("{}: {}", print_expr(k), print_expr(v)))
                .collect();
            format!("{{{}}}", parts.join(", "))
        }
    }
}

/// Numeric receivers of `.`, `[` or `(` need parentheses: `0.a` lexes as a
/// float literal and `-1[a]` as a negated subscript.
fn print_receiver(e: &Expr) -> String {
    let text = print_expr(e);
    match e.kind {
        ExprKind::Constant(Constant::Int(_)) | ExprKind::Constant(Constant::Float(_)) => format!("({text})"),
        _ => text,
    }
}

fn print_constant(c: &Constant) -> String {
    match c {
        Constant::Int(v) if *v < 0 => format!("-{}", v.unsigned_abs()),
        Constant::Int(v) => v.to_string(),
        Constant::Float(v) => {
            let s = format!("{v}");
            if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
                s
            } else {
                format!("{s}.0")
            }
        }
        Constant::Str(s) => format!("{s:?}"),
        Constant::Bool(true) => "True".to_string(),
        Constant::Bool(false) => "False".to_string(),
        Constant::None => "None".to_string(),
    }
}
