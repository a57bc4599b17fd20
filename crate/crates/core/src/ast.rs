//! Abstract syntax tree for the supported Python subset.
//!
//! The subset covers module statements, function and class definitions,
//! assignments (including attribute/subscript targets), keyword-argument
//! calls, `if`/`while`/`with`/`return`, imports, list/dict/tuple literals,
//! arithmetic and comparison operators, and constants. Anything else is
//! rejected by the parser with an `UnsupportedConstruct` error.

use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq)]
pub struct Module {
    pub body: Vec<Stmt>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    FunctionDef {
        name: String,
        params: Vec<Param>,
        body: Vec<Stmt>,
    },
    ClassDef {
        name: String,
        /// At most one base name; it carries no semantics for the analysis.
        base: Option<String>,
        body: Vec<Stmt>,
    },
    If {
        test: Expr,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
    },
    While {
        test: Expr,
        body: Vec<Stmt>,
    },
    With {
        context: Expr,
        alias: Option<String>,
        body: Vec<Stmt>,
    },
    Return {
        value: Option<Expr>,
    },
    Assign {
        target: Expr,
        value: Expr,
    },
    AugAssign {
        target: Expr,
        op: BinOpKind,
        value: Expr,
    },
    /// Expression evaluated for effect (usually a call).
    ExprStmt {
        value: Expr,
    },
    Import {
        /// (dotted module path, optional alias)
        names: Vec<(String, Option<String>)>,
    },
    ImportFrom {
        module: String,
        /// (imported name, optional alias)
        names: Vec<(String, Option<String>)>,
    },
    Pass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Name(String),
    Constant(Constant),
    /// `f(a, b, kw=c)`
    Call {
        callee: Box<Expr>,
        args: Vec<Expr>,
        kwargs: Vec<(String, Expr)>,
    },
    Attribute {
        value: Box<Expr>,
        attr: String,
    },
    Subscript {
        value: Box<Expr>,
        index: Box<Expr>,
    },
    BinOp {
        op: BinOpKind,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    Compare {
        op: CmpOpKind,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    ListLit(Vec<Expr>),
    TupleLit(Vec<Expr>),
    DictLit(Vec<(Expr, Expr)>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Constant {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOpKind {
    Add,
    Sub,
    Mul,
    Div,
    FloorDiv,
    Mod,
    Pow,
}

impl BinOpKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BinOpKind::Add => "+",
            BinOpKind::Sub => "-",
            BinOpKind::Mul => "*",
            BinOpKind::Div => "/",
            BinOpKind::FloorDiv => "//",
            BinOpKind::Mod => "%",
            BinOpKind::Pow => "**",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOpKind {
    Eq,
    NotEq,
    Lt,
    LtEq,
    Gt,
    GtEq,
}

impl CmpOpKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CmpOpKind::Eq => "==",
            CmpOpKind::NotEq => "!=",
            CmpOpKind::Lt => "<",
            CmpOpKind::LtEq => "<=",
            CmpOpKind::Gt => ">",
            CmpOpKind::GtEq => ">=",
        }
    }
}

impl Module {
    /// Checks that every node's span is contained within its parent's span.
    pub fn spans_nested(&self) -> bool {
        fn stmt_ok(s: &Stmt, parent: &SourceSpan) -> bool {
            if !parent.contains(&s.span) {
                return false;
            }
            let children_ok = |body: &[Stmt]| body.iter().all(|c| stmt_ok(c, &s.span));
            match &s.kind {
                StmtKind::FunctionDef { body, .. } | StmtKind::ClassDef { body, .. } => children_ok(body),
                StmtKind::If { test, then_body, else_body } => {
                    expr_ok(test, &s.span) && children_ok(then_body) && children_ok(else_body)
                }
                StmtKind::While { test, body } => expr_ok(test, &s.span) && children_ok(body),
                StmtKind::With { context, body, .. } => expr_ok(context, &s.span) && children_ok(body),
                StmtKind::Return { value } => value.as_ref().is_none_or(|v| expr_ok(v, &s.span)),
                StmtKind::Assign { target, value } => expr_ok(target, &s.span) && expr_ok(value, &s.span),
                StmtKind::AugAssign { target, value, .. } => expr_ok(target, &s.span) && expr_ok(value, &s.span),
                StmtKind::ExprStmt { value } => expr_ok(value, &s.span),
                StmtKind::Import { .. } | StmtKind::ImportFrom { .. } | StmtKind::Pass => true,
            }
        }
        fn expr_ok(e: &Expr, parent: &SourceSpan) -> bool {
            if !parent.contains(&e.span) {
                return false;
            }
            match &e.kind {
                ExprKind::Name(_) | ExprKind::Constant(_) => true,
                ExprKind::Call { callee, args, kwargs } => {
                    expr_ok(callee, &e.span)
                        && args.iter().all(|a| expr_ok(a, &e.span))
                        && kwargs.iter().all(|(_, v)| expr_ok(v, &e.span))
                }
                ExprKind::Attribute { value, .. } => expr_ok(value, &e.span),
                ExprKind::Subscript { value, index } => expr_ok(value, &e.span) && expr_ok(index, &e.span),
                ExprKind::BinOp { left, right, .. } | ExprKind::Compare { left, right, .. } => {
                    expr_ok(left, &e.span) && expr_ok(right, &e.span)
                }
                ExprKind::ListLit(items) | ExprKind::TupleLit(items) => items.iter().all(|i| expr_ok(i, &e.span)),
                ExprKind::DictLit(pairs) => pairs.iter().all(|(k, v)| expr_ok(k, &e.span) && expr_ok(v, &e.span)),
            }
        }
        self.body.iter().all(|s| stmt_ok(s, &self.span))
    }
}
