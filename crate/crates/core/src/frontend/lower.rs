//! AST → IR lowering.
//!
//! Produces one synthetic module-init function for the top-level statements
//! plus one IRFunction per function definition and method. Imports become
//! static calls to the model's import function; attribute and subscript
//! accesses become field reads/writes; `if`/`while` lower to branch
//! structure with explicit phis at joins.

use crate::ast::*;
use crate::frontend::FrontendError;
use crate::ir::{
    AllocKind, Callee, FunctionBuilder, FunctionKind, IRFunction, InstrKind, Literal, OpKind, Phi,
    Terminator, ValueId,
};
use crate::span::SourceSpan;
use std::collections::{BTreeMap, BTreeSet};

/// Name reserved for dynamic (non-constant) field keys.
pub const DYNAMIC_FIELD: &str = "*";
/// Qualified name of the synthetic module-init function.
pub const MODULE_INIT: &str = "<module>";

#[derive(Debug, Clone)]
pub struct ClassInfo {
    pub name: String,
    /// method name -> qualified IR function name (`Class.method`)
    pub methods: Vec<(String, String)>,
    pub span: SourceSpan,
}

#[derive(Debug)]
pub struct LoweredModule {
    pub functions: Vec<IRFunction>,
    pub classes: Vec<ClassInfo>,
}

pub fn lower_module(ast: &Module) -> Result<LoweredModule, FrontendError> {
    let mut out = LoweredModule {
        functions: Vec::new(),
        classes: Vec::new(),
    };

    // collect nested definitions first so the init function can reference them
    let mut init = Lowerer::new(MODULE_INIT, FunctionKind::ModuleInit, ast.span.clone(), true);
    for stmt in &ast.body {
        lower_definitions(stmt, None, &mut out)?;
    }
    init.lower_body(&ast.body)?;
    init.finish_return_none(&ast.span);
    out.functions.insert(0, init.builder.finish());
    Ok(out)
}

/// Hoists function and class definitions into standalone IR functions.
fn lower_definitions(stmt: &Stmt, class: Option<&str>, out: &mut LoweredModule) -> Result<(), FrontendError> {
    match &stmt.kind {
        StmtKind::FunctionDef { name, params, body } => {
            let qualified = match class {
                Some(c) => format!("{c}.{name}"),
                None => name.clone(),
            };
            let mut lowerer = Lowerer::new(&qualified, FunctionKind::Source, stmt.span.clone(), false);
            if class.is_none() {
                // callee slot for plain functions; methods use param 0 as self
                lowerer.builder.add_param(None, stmt.span.clone());
            }
            for p in params {
                let v = lowerer.builder.add_param(Some(p.name.clone()), p.span.clone());
                lowerer.env.insert(p.name.clone(), v);
            }
            lowerer.builder.declared_class = class.map(str::to_string);
            lowerer.lower_body(body)?;
            lowerer.finish_return_none(&stmt.span);
            out.functions.push(lowerer.builder.finish());
            Ok(())
        }
        StmtKind::ClassDef { name, body, .. } => {
            if class.is_some() {
                return Err(FrontendError::UnsupportedConstruct {
                    span: stmt.span.clone(),
                    construct: "nested class".to_string(),
                });
            }
            let mut methods = Vec::new();
            for inner in body {
                match &inner.kind {
                    StmtKind::FunctionDef { name: mname, .. } => {
                        methods.push((mname.clone(), format!("{name}.{mname}")));
                        lower_definitions(inner, Some(name), out)?;
                    }
                    StmtKind::Pass => {}
                    // class docstrings are discarded
                    StmtKind::ExprStmt { value } if matches!(value.kind, ExprKind::Constant(Constant::Str(_))) => {}
                    _ => {
                        return Err(FrontendError::UnsupportedConstruct {
                            span: inner.span.clone(),
                            construct: "class-level statement".to_string(),
                        })
                    }
                }
            }
            out.classes.push(ClassInfo {
                name: name.clone(),
                methods,
                span: stmt.span.clone(),
            });
            Ok(())
        }
        // definitions guarded by module-level control flow are still hoisted
        StmtKind::If { then_body, else_body, .. } => {
            for s in then_body.iter().chain(else_body) {
                lower_definitions(s, class, out)?;
            }
            Ok(())
        }
        StmtKind::While { body, .. } | StmtKind::With { body, .. } => {
            for s in body {
                lower_definitions(s, class, out)?;
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

struct Lowerer {
    builder: FunctionBuilder,
    env: BTreeMap<String, ValueId>,
    globals: ValueId,
    /// whether top-level name bindings are mirrored into the globals object
    at_module_level: bool,
    terminated: bool,
}

type LResult<T> = Result<T, FrontendError>;

impl Lowerer {
    fn new(name: &str, kind: FunctionKind, span: SourceSpan, at_module_level: bool) -> Self {
        let mut builder = FunctionBuilder::new(name, kind, span.clone());
        // globals handle in the entry block so it dominates every use
        let globals = builder.fresh(None, span.clone());
        let site = builder.fresh_site();
        builder.emit(
            InstrKind::Invoke {
                def: globals,
                callee: Callee::Globals,
                args: vec![],
                kwargs: vec![],
                site,
            },
            span,
        );
        Lowerer {
            builder,
            env: BTreeMap::new(),
            globals,
            at_module_level,
            terminated: false,
        }
    }

    fn finish_return_none(&mut self, span: &SourceSpan) {
        if !self.terminated {
            let none = self.constant(Literal::None, span.clone());
            self.builder.terminate_current(Terminator::Return {
                value: none,
                span: span.clone(),
            });
        }
    }

    fn constant(&mut self, lit: Literal, span: SourceSpan) -> ValueId {
        let def = self.builder.fresh(None, span.clone());
        self.builder.emit(InstrKind::Const { def, lit }, span);
        def
    }

    fn lower_body(&mut self, body: &[Stmt]) -> LResult<()> {
        for stmt in body {
            if self.terminated {
                // unreachable statements after a return; keep lowering into a
                // fresh block so nothing is silently dropped
                let dead = self.builder.new_block();
                self.builder.switch_to(dead);
                self.terminated = false;
            }
            self.lower_stmt(stmt)?;
        }
        Ok(())
    }

    fn lower_stmt(&mut self, stmt: &Stmt) -> LResult<()> {
        match &stmt.kind {
            StmtKind::FunctionDef { name, .. } => {
                if !self.at_module_level {
                    return Err(FrontendError::UnsupportedConstruct {
                        span: stmt.span.clone(),
                        construct: "nested definition".to_string(),
                    });
                }
                // body already hoisted; materialize the function object here
                let qualified = name.clone();
                let site = self.builder.fresh_site();
                let def = self.builder.fresh(Some(name.clone()), stmt.span.clone());
                self.builder.emit(
                    InstrKind::New {
                        def,
                        alloc: AllocKind::Function(qualified),
                        site,
                    },
                    stmt.span.clone(),
                );
                self.bind(name, def, &stmt.span);
                Ok(())
            }
            StmtKind::ClassDef { name, .. } => {
                if !self.at_module_level {
                    return Err(FrontendError::UnsupportedConstruct {
                        span: stmt.span.clone(),
                        construct: "nested definition".to_string(),
                    });
                }
                let site = self.builder.fresh_site();
                let def = self.builder.fresh(Some(name.clone()), stmt.span.clone());
                self.builder.emit(
                    InstrKind::New {
                        def,
                        alloc: AllocKind::Class(name.clone()),
                        site,
                    },
                    stmt.span.clone(),
                );
                self.bind(name, def, &stmt.span);
                Ok(())
            }
            StmtKind::If { test, then_body, else_body } => self.lower_if(test, then_body, else_body, &stmt.span),
            StmtKind::While { test, body } => self.lower_while(test, body, &stmt.span),
            StmtKind::With { context, alias, body } => {
                let ctx = self.lower_expr(context)?;
                if let Some(name) = alias {
                    self.bind(name, ctx, &stmt.span);
                }
                // context-manager protocol not modeled; body runs exactly once
                self.lower_body(body)
            }
            StmtKind::Return { value } => {
                let v = match value {
                    Some(e) => self.lower_expr(e)?,
                    None => self.constant(Literal::None, stmt.span.clone()),
                };
                self.builder.terminate_current(Terminator::Return {
                    value: v,
                    span: stmt.span.clone(),
                });
                self.terminated = true;
                Ok(())
            }
            StmtKind::Assign { target, value } => {
                let v = self.lower_expr(value)?;
                self.lower_assign_to(target, v)
            }
            StmtKind::AugAssign { target, op, value } => {
                let current = self.lower_expr(target)?;
                let rhs = self.lower_expr(value)?;
                let def = self.builder.fresh(None, stmt.span.clone());
                self.builder.emit(
                    InstrKind::BinOp {
                        def,
                        op: OpKind::Arith(*op),
                        lhs: current,
                        rhs,
                    },
                    stmt.span.clone(),
                );
                self.lower_assign_to(target, def)
            }
            StmtKind::ExprStmt { value } => {
                self.lower_expr(value)?;
                Ok(())
            }
            StmtKind::Import { names } => {
                for (module, alias) in names {
                    let (local, module_to_import) = match alias {
                        Some(a) => (a.clone(), module.clone()),
                        None => {
                            let first = module.split('.').next().expect("dotted name is non-empty").to_string();
                            (first.clone(), first)
                        }
                    };
                    let def = self.emit_import(&module_to_import, &stmt.span, Some(local.clone()));
                    self.bind(&local, def, &stmt.span);
                }
                Ok(())
            }
            StmtKind::ImportFrom { module, names } => {
                let module_obj = self.emit_import(module, &stmt.span, None);
                for (name, alias) in names {
                    let local = alias.clone().unwrap_or_else(|| name.clone());
                    let def = self.builder.fresh(Some(local.clone()), stmt.span.clone());
                    self.builder.emit(
                        InstrKind::GetField {
                            def,
                            obj: module_obj,
                            field: name.clone(),
                        },
                        stmt.span.clone(),
                    );
                    self.bind(&local, def, &stmt.span);
                }
                Ok(())
            }
            StmtKind::Pass => Ok(()),
        }
    }

    fn emit_import(&mut self, module: &str, span: &SourceSpan, name: Option<String>) -> ValueId {
        let site = self.builder.fresh_site();
        let def = self.builder.fresh(name, span.clone());
        self.builder.emit(
            InstrKind::Invoke {
                def,
                callee: Callee::Import(module.to_string()),
                args: vec![],
                kwargs: vec![],
                site,
            },
            span.clone(),
        );
        def
    }

    /// Binds a simple name, mirroring module-level bindings into the globals
    /// object so other functions can read them.
    fn bind(&mut self, name: &str, value: ValueId, span: &SourceSpan) {
        self.env.insert(name.to_string(), value);
        if self.at_module_level {
            self.builder.emit(
                InstrKind::PutField {
                    obj: self.globals,
                    field: name.to_string(),
                    value,
                },
                span.clone(),
            );
        }
    }

    fn lower_assign_to(&mut self, target: &Expr, value: ValueId) -> LResult<()> {
        match &target.kind {
            ExprKind::Name(name) => {
                // keep the source variable name on the defining instruction
                let v = if self.builder.values[value.0 as usize].name.is_none() {
                    self.builder.values[value.0 as usize].name = Some(name.clone());
                    value
                } else if self.builder.values[value.0 as usize].name.as_deref() == Some(name.as_str()) {
                    value
                } else {
                    let def = self.builder.fresh(Some(name.clone()), target.span.clone());
                    self.builder.emit(InstrKind::Assign { def, src: value }, target.span.clone());
                    def
                };
                self.bind(name, v, &target.span);
                Ok(())
            }
            ExprKind::Attribute { value: obj, attr } => {
                let obj = self.lower_expr(obj)?;
                self.builder.emit(
                    InstrKind::PutField {
                        obj,
                        field: attr.clone(),
                        value,
                    },
                    target.span.clone(),
                );
                Ok(())
            }
            ExprKind::Subscript { value: obj, index } => {
                let field = self.subscript_field(index)?;
                let obj = self.lower_expr(obj)?;
                self.builder.emit(
                    InstrKind::PutField {
                        obj,
                        field,
                        value,
                    },
                    target.span.clone(),
                );
                Ok(())
            }
            _ => Err(FrontendError::Lowering {
                span: target.span.clone(),
                message: "invalid assignment target survived parsing".to_string(),
            }),
        }
    }

    /// Constant string keys are field accesses; constant ints address tuple
    /// slots; anything dynamic collapses to the summary field.
    fn subscript_field(&mut self, index: &Expr) -> LResult<String> {
        Ok(match &index.kind {
            ExprKind::Constant(Constant::Str(s)) => s.clone(),
            ExprKind::Constant(Constant::Int(i)) => i.to_string(),
            _ => {
                // evaluate for effect, then use the dynamic-key summary field
                self.lower_expr(index)?;
                DYNAMIC_FIELD.to_string()
            }
        })
    }

    fn lower_if(&mut self, test: &Expr, then_body: &[Stmt], else_body: &[Stmt], span: &SourceSpan) -> LResult<()> {
        let cond = self.lower_expr(test)?;
        let then_bb = self.builder.new_block();
        let else_bb = self.builder.new_block();
        self.builder.terminate_current(Terminator::Branch {
            cond,
            then_bb,
            else_bb,
        });

        let env_before = self.env.clone();

        self.builder.switch_to(then_bb);
        self.terminated = false;
        self.lower_body(then_body)?;
        let then_end = self.builder.current_block();
        let then_terminated = self.terminated;
        let env_then = self.env.clone();

        self.env = env_before.clone();
        self.builder.switch_to(else_bb);
        self.terminated = false;
        self.lower_body(else_body)?;
        let else_end = self.builder.current_block();
        let else_terminated = self.terminated;
        let env_else = self.env.clone();

        match (then_terminated, else_terminated) {
            (true, true) => {
                // control never reaches past the if
                self.env = env_before;
                self.terminated = true;
                Ok(())
            }
            (true, false) => {
                let merge = self.builder.new_block();
                self.builder.set_term(else_end, Terminator::Goto(merge));
                self.builder.switch_to(merge);
                self.env = env_else;
                self.terminated = false;
                Ok(())
            }
            (false, true) => {
                let merge = self.builder.new_block();
                self.builder.set_term(then_end, Terminator::Goto(merge));
                self.builder.switch_to(merge);
                self.env = env_then;
                self.terminated = false;
                Ok(())
            }
            (false, false) => {
                let merge = self.builder.new_block();
                self.builder.set_term(then_end, Terminator::Goto(merge));
                self.builder.set_term(else_end, Terminator::Goto(merge));

                let mut names: BTreeSet<&String> = BTreeSet::new();
                names.extend(env_then.keys());
                names.extend(env_else.keys());
                let mut merged = BTreeMap::new();
                let mut phis = Vec::new();
                for name in names {
                    let tv = env_then.get(name).copied();
                    let ev = env_else.get(name).copied();
                    // a name missing on one side stands for "maybe unbound";
                    // a None constant in that branch is its stand-in
                    let tv = match tv {
                        Some(v) => v,
                        None => {
                            self.builder.switch_to(then_end);
                            let v = self.constant(Literal::None, span.clone());
                            self.builder.set_term(then_end, Terminator::Goto(merge));
                            v
                        }
                    };
                    let ev = match ev {
                        Some(v) => v,
                        None => {
                            self.builder.switch_to(else_end);
                            let v = self.constant(Literal::None, span.clone());
                            self.builder.set_term(else_end, Terminator::Goto(merge));
                            v
                        }
                    };
                    if tv == ev {
                        merged.insert(name.clone(), tv);
                    } else {
                        let def = self.builder.fresh(Some(name.clone()), span.clone());
                        phis.push(Phi {
                            def,
                            args: vec![(then_end, tv), (else_end, ev)],
                            span: span.clone(),
                        });
                        merged.insert(name.clone(), def);
                    }
                }
                for phi in phis {
                    self.builder.add_phi(merge, phi);
                }
                self.builder.switch_to(merge);
                self.env = merged;
                self.terminated = false;
                Ok(())
            }
        }
    }

    fn lower_while(&mut self, test: &Expr, body: &[Stmt], span: &SourceSpan) -> LResult<()> {
        let assigned = assigned_names(body);

        // entry-side operands for loop phis; names never bound before the
        // loop get a None constant as their entry value
        let mut entry_ops: BTreeMap<String, ValueId> = BTreeMap::new();
        for name in &assigned {
            let v = match self.env.get(name) {
                Some(v) => *v,
                None => self.constant(Literal::None, span.clone()),
            };
            entry_ops.insert(name.clone(), v);
        }
        let entry_end = self.builder.current_block();
        let header = self.builder.new_block();
        self.builder.set_term(entry_end, Terminator::Goto(header));
        self.builder.switch_to(header);

        let mut phi_defs: BTreeMap<String, ValueId> = BTreeMap::new();
        for name in &assigned {
            let def = self.builder.fresh(Some(name.clone()), span.clone());
            phi_defs.insert(name.clone(), def);
            self.env.insert(name.clone(), def);
        }

        let cond = self.lower_expr(test)?;
        let body_bb = self.builder.new_block();
        let exit_bb = self.builder.new_block();
        let header_end = self.builder.current_block();
        self.builder.set_term(header_end, Terminator::Branch {
            cond,
            then_bb: body_bb,
            else_bb: exit_bb,
        });

        self.builder.switch_to(body_bb);
        self.terminated = false;
        self.lower_body(body)?;
        let body_end = self.builder.current_block();
        let body_terminated = self.terminated;
        if !body_terminated {
            self.builder.set_term(body_end, Terminator::Goto(header));
        }

        // install phis now that the back-edge values are known
        for name in &assigned {
            let mut args = vec![(entry_end, entry_ops[name])];
            if !body_terminated {
                args.push((body_end, self.env[name]));
            }
            self.builder.add_phi(
                header,
                Phi {
                    def: phi_defs[name],
                    args,
                    span: span.clone(),
                },
            );
        }

        for name in &assigned {
            self.env.insert(name.clone(), phi_defs[name]);
        }
        self.builder.switch_to(exit_bb);
        self.terminated = false;
        Ok(())
    }

    fn lower_expr(&mut self, e: &Expr) -> LResult<ValueId> {
        match &e.kind {
            ExprKind::Name(name) => {
                if let Some(v) = self.env.get(name) {
                    Ok(*v)
                } else {
                    // free variable: read from the module's globals object
                    let def = self.builder.fresh(Some(name.clone()), e.span.clone());
                    self.builder.emit(
                        InstrKind::GetField {
                            def,
                            obj: self.globals,
                            field: name.clone(),
                        },
                        e.span.clone(),
                    );
                    Ok(def)
                }
            }
            ExprKind::Constant(c) => {
                let lit = match c {
                    Constant::Int(v) => Literal::Int(*v),
                    Constant::Float(v) => Literal::Float(*v),
                    Constant::Str(s) => Literal::Str(s.clone()),
                    Constant::Bool(b) => Literal::Bool(*b),
                    Constant::None => Literal::None,
                };
                Ok(self.constant(lit, e.span.clone()))
            }
            ExprKind::Call { callee, args, kwargs } => {
                let callee_v = self.lower_expr(callee)?;
                let mut arg_vs = Vec::with_capacity(args.len());
                for a in args {
                    arg_vs.push(self.lower_expr(a)?);
                }
                let mut kw_vs = Vec::with_capacity(kwargs.len());
                for (k, v) in kwargs {
                    kw_vs.push((k.clone(), self.lower_expr(v)?));
                }
                let site = self.builder.fresh_site();
                let def = self.builder.fresh(None, e.span.clone());
                self.builder.emit(
                    InstrKind::Invoke {
                        def,
                        callee: Callee::Value(callee_v),
                        args: arg_vs,
                        kwargs: kw_vs,
                        site,
                    },
                    e.span.clone(),
                );
                Ok(def)
            }
            ExprKind::Attribute { value, attr } => {
                let obj = self.lower_expr(value)?;
                let def = self.builder.fresh(None, e.span.clone());
                self.builder.emit(
                    InstrKind::GetField {
                        def,
                        obj,
                        field: attr.clone(),
                    },
                    e.span.clone(),
                );
                Ok(def)
            }
            ExprKind::Subscript { value, index } => {
                let field = self.subscript_field(index)?;
                let obj = self.lower_expr(value)?;
                let def = self.builder.fresh(None, e.span.clone());
                self.builder.emit(InstrKind::GetField { def, obj, field }, e.span.clone());
                Ok(def)
            }
            ExprKind::BinOp { op, left, right } => {
                let lhs = self.lower_expr(left)?;
                let rhs = self.lower_expr(right)?;
                let def = self.builder.fresh(None, e.span.clone());
                self.builder.emit(
                    InstrKind::BinOp {
                        def,
                        op: OpKind::Arith(*op),
                        lhs,
                        rhs,
                    },
                    e.span.clone(),
                );
                Ok(def)
            }
            ExprKind::Compare { op, left, right } => {
                let lhs = self.lower_expr(left)?;
                let rhs = self.lower_expr(right)?;
                let def = self.builder.fresh(None, e.span.clone());
                self.builder.emit(
                    InstrKind::BinOp {
                        def,
                        op: OpKind::Cmp(*op),
                        lhs,
                        rhs,
                    },
                    e.span.clone(),
                );
                Ok(def)
            }
            ExprKind::ListLit(items) => {
                if let Some(elems) = shape_list_elements(items) {
                    let site = self.builder.fresh_site();
                    let def = self.builder.fresh(None, e.span.clone());
                    self.builder.emit(
                        InstrKind::New {
                            def,
                            alloc: AllocKind::ShapeList(elems),
                            site,
                        },
                        e.span.clone(),
                    );
                    Ok(def)
                } else {
                    let vals: Vec<ValueId> = items
                        .iter()
                        .map(|i| self.lower_expr(i))
                        .collect::<LResult<_>>()?;
                    let site = self.builder.fresh_site();
                    let def = self.builder.fresh(None, e.span.clone());
                    self.builder.emit(
                        InstrKind::New {
                            def,
                            alloc: AllocKind::List,
                            site,
                        },
                        e.span.clone(),
                    );
                    for (i, v) in vals.iter().enumerate() {
                        self.builder.emit(
                            InstrKind::PutField {
                                obj: def,
                                field: i.to_string(),
                                value: *v,
                            },
                            e.span.clone(),
                        );
                    }
                    Ok(def)
                }
            }
            ExprKind::TupleLit(items) => {
                let vals: Vec<ValueId> = items
                    .iter()
                    .map(|i| self.lower_expr(i))
                    .collect::<LResult<_>>()?;
                let site = self.builder.fresh_site();
                let def = self.builder.fresh(None, e.span.clone());
                self.builder.emit(
                    InstrKind::New {
                        def,
                        alloc: AllocKind::Object,
                        site,
                    },
                    e.span.clone(),
                );
                for (i, v) in vals.iter().enumerate() {
                    self.builder.emit(
                        InstrKind::PutField {
                            obj: def,
                            field: i.to_string(),
                            value: *v,
                        },
                        e.span.clone(),
                    );
                }
                Ok(def)
            }
            ExprKind::DictLit(pairs) => {
                let mut stores = Vec::with_capacity(pairs.len());
                for (k, v) in pairs {
                    let field = match &k.kind {
                        ExprKind::Constant(Constant::Str(s)) => s.clone(),
                        ExprKind::Constant(Constant::Int(i)) => i.to_string(),
                        _ => {
                            self.lower_expr(k)?;
                            DYNAMIC_FIELD.to_string()
                        }
                    };
                    let value = self.lower_expr(v)?;
                    stores.push((field, value));
                }
                let site = self.builder.fresh_site();
                let def = self.builder.fresh(None, e.span.clone());
                self.builder.emit(
                    InstrKind::New {
                        def,
                        alloc: AllocKind::Dict,
                        site,
                    },
                    e.span.clone(),
                );
                for (field, value) in stores {
                    self.builder.emit(
                        InstrKind::PutField {
                            obj: def,
                            field,
                            value,
                        },
                        e.span.clone(),
                    );
                }
                Ok(def)
            }
        }
    }
}

/// A list literal whose elements are all integer constants or None lowers to
/// a shape list; the analysis treats it as a reshape/placeholder shape value.
fn shape_list_elements(items: &[Expr]) -> Option<Vec<Option<i64>>> {
    let mut elems = Vec::with_capacity(items.len());
    for item in items {
        match &item.kind {
            ExprKind::Constant(Constant::Int(v)) => elems.push(Some(*v)),
            ExprKind::Constant(Constant::None) => elems.push(None),
            _ => return None,
        }
    }
    Some(elems)
}

/// Names assigned anywhere in a statement list (for loop phi placement).
fn assigned_names(body: &[Stmt]) -> BTreeSet<String> {
    let mut names = BTreeSet::new();
    collect_assigned(body, &mut names);
    names
}

fn collect_assigned(body: &[Stmt], names: &mut BTreeSet<String>) {
    for stmt in body {
        match &stmt.kind {
            StmtKind::Assign { target, .. } | StmtKind::AugAssign { target, .. } => {
                if let ExprKind::Name(n) = &target.kind {
                    names.insert(n.clone());
                }
            }
            StmtKind::If { then_body, else_body, .. } => {
                collect_assigned(then_body, names);
                collect_assigned(else_body, names);
            }
            StmtKind::While { body, .. } => collect_assigned(body, names),
            StmtKind::With { alias, body, .. } => {
                if let Some(a) = alias {
                    names.insert(a.clone());
                }
                collect_assigned(body, names);
            }
            StmtKind::FunctionDef { name, .. } | StmtKind::ClassDef { name, .. } => {
                names.insert(name.clone());
            }
            StmtKind::Import { names: ns } => {
                for (module, alias) in ns {
                    let local = alias
                        .clone()
                        .unwrap_or_else(|| module.split('.').next().unwrap_or(module).to_string());
                    names.insert(local);
                }
            }
            StmtKind::ImportFrom { names: ns, .. } => {
                for (name, alias) in ns {
                    names.insert(alias.clone().unwrap_or_else(|| name.clone()));
                }
            }
            StmtKind::Return { .. } | StmtKind::ExprStmt { .. } | StmtKind::Pass => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_module;
    use crate::ir::validate;

    fn lower(src: &str) -> LoweredModule {
        let ast = parse_module(src, "t.py").unwrap();
        lower_module(&ast).unwrap()
    }

    fn validate_all(m: &LoweredModule) {
        for f in &m.functions {
            let violations = validate(f);
            assert!(violations.is_empty(), "{}: {:?}", f.name, violations);
        }
    }

    #[test]
    fn import_lowers_to_static_call() {
        let m = lower("import tensorflow as tf\n");
        let init = &m.functions[0];
        let text = crate::ir::pretty_print(init);
        assert!(text.contains("invoke import(tensorflow)"), "{text}");
        validate_all(&m);
    }

    #[test]
    fn subscript_read_is_field_access() {
        let m = lower("x = x_dict['images']\n");
        let text = crate::ir::pretty_print(&m.functions[0]);
        assert!(text.contains(".images"), "{text}");
        validate_all(&m);
    }

    #[test]
    fn if_join_produces_phi() {
        let m = lower("if c:\n    a = 1\nelse:\n    a = 2\nb = a\n");
        let init = &m.functions[0];
        let has_phi = init.blocks.iter().any(|b| !b.phis.is_empty());
        assert!(has_phi, "{}", crate::ir::pretty_print(init));
        validate_all(&m);
    }

    #[test]
    fn early_return_branch_needs_no_phi() {
        let m = lower("def f(mode, a):\n    if mode == 1:\n        return a\n    b = a\n    return b\n");
        validate_all(&m);
    }

    #[test]
    fn while_loop_has_header_phi_and_validates() {
        let m = lower("i = 0\nwhile i < 10:\n    i = i + 1\nj = i\n");
        let init = &m.functions[0];
        let has_phi = init.blocks.iter().any(|b| !b.phis.is_empty());
        assert!(has_phi);
        validate_all(&m);
    }

    #[test]
    fn shape_list_literal_detected() {
        let m = lower("s = [-1, 28, 28, 1]\n");
        let text = crate::ir::pretty_print(&m.functions[0]);
        assert!(text.contains("shapelist [-1, 28, 28, 1]"), "{text}");
    }

    #[test]
    fn mixed_list_is_not_a_shape_list() {
        let m = lower("s = [a, 2]\n");
        let text = crate::ir::pretty_print(&m.functions[0]);
        assert!(text.contains("= new list"), "{text}");
    }

    #[test]
    fn methods_take_self_as_param_zero() {
        let m = lower("class Foo(object):\n    def foo(self, a):\n        return a\n");
        let foo = m.functions.iter().find(|f| f.name == "Foo.foo").unwrap();
        assert_eq!(foo.params.len(), 2);
        assert_eq!(foo.value_name(foo.params[0]), Some("self"));
        assert_eq!(m.classes.len(), 1);
        assert_eq!(m.classes[0].methods.len(), 1);
        validate_all(&m);
    }

    #[test]
    fn plain_functions_have_callee_slot() {
        let m = lower("def f(a, b):\n    return a\n");
        let f = m.functions.iter().find(|f| f.name == "f").unwrap();
        assert_eq!(f.params.len(), 3);
        assert_eq!(f.value_name(f.params[0]), None);
        assert_eq!(f.value_name(f.params[1]), Some("a"));
    }

    #[test]
    fn global_read_goes_through_globals_object() {
        let m = lower("x = 1\ndef f():\n    return x\n");
        let f = m.functions.iter().find(|f| f.name == "f").unwrap();
        let text = crate::ir::pretty_print(f);
        assert!(text.contains("getfield v0 .x"), "{text}");
        validate_all(&m);
    }

    #[test]
    fn unreachable_code_after_return_is_kept() {
        let m = lower("def f():\n    return 1\n    x = 2\n");
        let f = m.functions.iter().find(|f| f.name == "f").unwrap();
        let instrs: usize = f.blocks.iter().map(|b| b.instrs.len()).sum();
        assert!(instrs >= 3, "{}", crate::ir::pretty_print(f));
    }
}
