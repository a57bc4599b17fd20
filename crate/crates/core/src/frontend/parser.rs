//! Recursive-descent parser producing the subset AST.
//!
//! Out-of-subset syntax is reported as `UnsupportedConstruct` with the
//! construct's name; malformed input is a `Syntax` error. Nothing is
//! silently skipped.

use crate::ast::*;
use crate::frontend::lexer::{Lexer, Tok, Token};
use crate::frontend::FrontendError;
use crate::span::SourceSpan;

pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    file: String,
}

type PResult<T> = Result<T, FrontendError>;

impl Parser {
    pub fn new(text: &str, file: &str) -> PResult<Self> {
        let tokens = Lexer::new(text, file).tokenize()?;
        Ok(Parser {
            tokens,
            pos: 0,
            file: file.to_string(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_span(&self) -> SourceSpan {
        self.tokens[self.pos].span.clone()
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn at_op(&self, op: &str) -> bool {
        matches!(self.peek(), Tok::Op(o) if *o == op)
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Keyword(k) if *k == kw)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.at_op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> PResult<SourceSpan> {
        if self.at_op(op) {
            Ok(self.bump().span)
        } else {
            Err(self.syntax(format!("expected {:?}, found {}", op, describe(self.peek()))))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<SourceSpan> {
        if self.at_kw(kw) {
            Ok(self.bump().span)
        } else {
            Err(self.syntax(format!("expected keyword {:?}, found {}", kw, describe(self.peek()))))
        }
    }

    fn expect_name(&mut self) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Name(n) => {
                let t = self.bump();
                Ok((n, t.span))
            }
            other => Err(self.syntax(format!("expected identifier, found {}", describe(&other)))),
        }
    }

    fn expect_newline(&mut self) -> PResult<()> {
        if self.eat_op(";") {
            // allow a trailing semicolon before the newline
        }
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            other => Err(self.syntax(format!("expected end of line, found {}", describe(other)))),
        }
    }

    fn syntax(&self, message: String) -> FrontendError {
        FrontendError::Syntax {
            span: self.peek_span(),
            message,
        }
    }

    fn unsupported(&self, construct: &str, span: SourceSpan) -> FrontendError {
        FrontendError::UnsupportedConstruct {
            span,
            construct: construct.to_string(),
        }
    }

    pub fn parse_module(mut self) -> PResult<Module> {
        let mut body = Vec::new();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Newline => {
                    self.bump();
                }
                _ => body.push(self.parse_statement()?),
            }
        }
        let span = match (body.first(), body.last()) {
            (Some(f), Some(l)) => f.span.merge(&l.span),
            _ => SourceSpan::point(&self.file, 1, 1),
        };
        Ok(Module { body, span })
    }

    fn parse_statement(&mut self) -> PResult<Stmt> {
        let span = self.peek_span();
        match self.peek().clone() {
            Tok::Keyword("def") => self.parse_def(),
            Tok::Keyword("class") => self.parse_class(),
            Tok::Keyword("if") => self.parse_if(),
            Tok::Keyword("while") => self.parse_while(),
            Tok::Keyword("with") => self.parse_with(),
            Tok::Keyword("return") => self.parse_return(),
            Tok::Keyword("import") => self.parse_import(),
            Tok::Keyword("from") => self.parse_import_from(),
            Tok::Keyword("pass") => {
                self.bump();
                self.expect_newline()?;
                Ok(Stmt { kind: StmtKind::Pass, span })
            }
            Tok::Op("@") => Err(self.unsupported("decorator", span)),
            Tok::Keyword(kw @ ("for" | "try" | "lambda" | "yield" | "global" | "nonlocal" | "del" | "raise" | "assert" | "break" | "continue")) => {
                Err(self.unsupported(kw, span))
            }
            _ => self.parse_simple_statement(),
        }
    }

    fn parse_def(&mut self) -> PResult<Stmt> {
        let start = self.expect_kw("def")?;
        let (name, _) = self.expect_name()?;
        self.expect_op("(")?;
        let mut params = Vec::new();
        while !self.at_op(")") {
            let (pname, pspan) = self.expect_name()?;
            if self.at_op("=") {
                return Err(self.unsupported("default parameter value", self.peek_span()));
            }
            if self.at_op("*") {
                return Err(self.unsupported("starred parameter", self.peek_span()));
            }
            params.push(Param { name: pname, span: pspan });
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op(")")?;
        self.expect_op(":")?;
        let body = self.parse_suite()?;
        let span = body.last().map(|s| start.merge(&s.span)).unwrap_or(start);
        Ok(Stmt {
            kind: StmtKind::FunctionDef { name, params, body },
            span,
        })
    }

    fn parse_class(&mut self) -> PResult<Stmt> {
        let start = self.expect_kw("class")?;
        let (name, _) = self.expect_name()?;
        let mut base = None;
        if self.eat_op("(") {
            if !self.at_op(")") {
                let (b, bspan) = self.expect_name()?;
                if self.at_op(",") {
                    return Err(self.unsupported("multiple inheritance", bspan));
                }
                base = Some(b);
            }
            self.expect_op(")")?;
        }
        self.expect_op(":")?;
        let body = self.parse_suite()?;
        let span = body.last().map(|s| start.merge(&s.span)).unwrap_or(start);
        Ok(Stmt {
            kind: StmtKind::ClassDef { name, base, body },
            span,
        })
    }

    fn parse_if(&mut self) -> PResult<Stmt> {
        let start = if self.at_kw("if") {
            self.expect_kw("if")?
        } else {
            self.expect_kw("elif")?
        };
        let test = self.parse_expr()?;
        self.expect_op(":")?;
        let then_body = self.parse_suite()?;
        let mut else_body = Vec::new();
        if self.at_kw("elif") {
            else_body.push(self.parse_if()?);
        } else if self.at_kw("else") {
            self.bump();
            self.expect_op(":")?;
            else_body = self.parse_suite()?;
        }
        let end = else_body
            .last()
            .map(|s| s.span.clone())
            .or_else(|| then_body.last().map(|s| s.span.clone()))
            .unwrap_or_else(|| start.clone());
        Ok(Stmt {
            kind: StmtKind::If { test, then_body, else_body },
            span: start.merge(&end),
        })
    }

    fn parse_while(&mut self) -> PResult<Stmt> {
        let start = self.expect_kw("while")?;
        let test = self.parse_expr()?;
        self.expect_op(":")?;
        let body = self.parse_suite()?;
        let span = body.last().map(|s| start.merge(&s.span)).unwrap_or(start);
        Ok(Stmt {
            kind: StmtKind::While { test, body },
            span,
        })
    }

    fn parse_with(&mut self) -> PResult<Stmt> {
        let start = self.expect_kw("with")?;
        let context = self.parse_expr()?;
        let mut alias = None;
        if self.at_kw("as") {
            self.bump();
            let (name, _) = self.expect_name()?;
            alias = Some(name);
        }
        if self.at_op(",") {
            return Err(self.unsupported("multiple context managers", self.peek_span()));
        }
        self.expect_op(":")?;
        let body = self.parse_suite()?;
        let span = body.last().map(|s| start.merge(&s.span)).unwrap_or(start);
        Ok(Stmt {
            kind: StmtKind::With { context, alias, body },
            span,
        })
    }

    fn parse_return(&mut self) -> PResult<Stmt> {
        let start = self.expect_kw("return")?;
        let value = if matches!(self.peek(), Tok::Newline | Tok::Eof) {
            None
        } else {
            Some(self.parse_expr()?)
        };
        self.expect_newline()?;
        let span = value.as_ref().map(|v| start.merge(&v.span)).unwrap_or(start);
        Ok(Stmt {
            kind: StmtKind::Return { value },
            span,
        })
    }

    fn parse_import(&mut self) -> PResult<Stmt> {
        let start = self.expect_kw("import")?;
        let mut names = Vec::new();
        loop {
            let module = self.parse_dotted_name()?;
            let alias = if self.at_kw("as") {
                self.bump();
                Some(self.expect_name()?.0)
            } else {
                None
            };
            names.push((module, alias));
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_newline()?;
        Ok(Stmt {
            kind: StmtKind::Import { names },
            span: start,
        })
    }

    fn parse_import_from(&mut self) -> PResult<Stmt> {
        let start = self.expect_kw("from")?;
        if self.at_op(".") {
            return Err(self.unsupported("relative import", self.peek_span()));
        }
        let module = self.parse_dotted_name()?;
        self.expect_kw("import")?;
        if self.at_op("*") {
            return Err(self.unsupported("wildcard import", self.peek_span()));
        }
        let mut names = Vec::new();
        loop {
            let (name, _) = self.expect_name()?;
            let alias = if self.at_kw("as") {
                self.bump();
                Some(self.expect_name()?.0)
            } else {
                None
            };
            names.push((name, alias));
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_newline()?;
        Ok(Stmt {
            kind: StmtKind::ImportFrom { module, names },
            span: start,
        })
    }

    fn parse_dotted_name(&mut self) -> PResult<String> {
        let (mut name, _) = self.expect_name()?;
        while self.at_op(".") {
            self.bump();
            let (part, _) = self.expect_name()?;
            name.push('.');
            name.push_str(&part);
        }
        Ok(name)
    }

    /// assignment, augmented assignment, or a bare expression statement
    fn parse_simple_statement(&mut self) -> PResult<Stmt> {
        let first = self.parse_expr()?;
        let stmt = if self.at_op("=") {
            self.bump();
            self.check_assign_target(&first)?;
            let value = self.parse_expr()?;
            if self.at_op("=") {
                return Err(self.unsupported("chained assignment", self.peek_span()));
            }
            let span = first.span.merge(&value.span);
            Stmt {
                kind: StmtKind::Assign { target: first, value },
                span,
            }
        } else if let Tok::Op(op @ ("+=" | "-=" | "*=" | "/=")) = self.peek() {
            let kind = match *op {
                "+=" => BinOpKind::Add,
                "-=" => BinOpKind::Sub,
                "*=" => BinOpKind::Mul,
                _ => BinOpKind::Div,
            };
            self.bump();
            self.check_assign_target(&first)?;
            let value = self.parse_expr()?;
            let span = first.span.merge(&value.span);
            Stmt {
                kind: StmtKind::AugAssign { target: first, op: kind, value },
                span,
            }
        } else {
            let span = first.span.clone();
            Stmt {
                kind: StmtKind::ExprStmt { value: first },
                span,
            }
        };
        self.expect_newline()?;
        Ok(stmt)
    }

    fn check_assign_target(&self, e: &Expr) -> PResult<()> {
        match &e.kind {
            ExprKind::Name(_) | ExprKind::Attribute { .. } | ExprKind::Subscript { .. } => Ok(()),
            ExprKind::TupleLit(_) | ExprKind::ListLit(_) => {
                Err(self.unsupported("destructuring assignment", e.span.clone()))
            }
            _ => Err(FrontendError::Syntax {
                span: e.span.clone(),
                message: "invalid assignment target".to_string(),
            }),
        }
    }

    fn parse_suite(&mut self) -> PResult<Vec<Stmt>> {
        if matches!(self.peek(), Tok::Newline) {
            self.bump();
            match self.peek() {
                Tok::Indent => {
                    self.bump();
                }
                other => return Err(self.syntax(format!("expected indented block, found {}", describe(other)))),
            }
            let mut body = Vec::new();
            loop {
                match self.peek() {
                    Tok::Dedent => {
                        self.bump();
                        break;
                    }
                    Tok::Eof => break,
                    Tok::Newline => {
                        self.bump();
                    }
                    _ => body.push(self.parse_statement()?),
                }
            }
            Ok(body)
        } else {
            // single-statement suite on the same line
            Ok(vec![self.parse_simple_statement()?])
        }
    }

    // -- expressions ------------------------------------------------------

    fn parse_expr(&mut self) -> PResult<Expr> {
        self.parse_comparison()
    }

    fn parse_comparison(&mut self) -> PResult<Expr> {
        let left = self.parse_arith()?;
        let op = match self.peek() {
            Tok::Op("==") => Some(CmpOpKind::Eq),
            Tok::Op("!=") => Some(CmpOpKind::NotEq),
            Tok::Op("<") => Some(CmpOpKind::Lt),
            Tok::Op("<=") => Some(CmpOpKind::LtEq),
            Tok::Op(">") => Some(CmpOpKind::Gt),
            Tok::Op(">=") => Some(CmpOpKind::GtEq),
            Tok::Keyword(kw @ ("in" | "is" | "not" | "and" | "or")) => {
                return Err(self.unsupported(&format!("operator {kw}"), self.peek_span()));
            }
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let right = self.parse_arith()?;
            let span = left.span.merge(&right.span);
            Ok(Expr {
                kind: ExprKind::Compare {
                    op,
                    left: Box::new(left),
                    right: Box::new(right),
                },
                span,
            })
        } else {
            Ok(left)
        }
    }

    fn parse_arith(&mut self) -> PResult<Expr> {
        let mut left = self.parse_term()?;
        loop {
            let op = match self.peek() {
                Tok::Op("+") => BinOpKind::Add,
                Tok::Op("-") => BinOpKind::Sub,
                _ => break,
            };
            self.bump();
            let right = self.parse_term()?;
            let span = left.span.merge(&right.span);
            left = Expr {
                kind: ExprKind::BinOp {
                    op,
                    left: Box::new(left),
                    right: Box::new(right),
                },
                span,
            };
        }
        Ok(left)
    }

    fn parse_term(&mut self) -> PResult<Expr> {
        let mut left = self.parse_unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op("*") => BinOpKind::Mul,
                Tok::Op("/") => BinOpKind::Div,
                Tok::Op("//") => BinOpKind::FloorDiv,
                Tok::Op("%") => BinOpKind::Mod,
                Tok::Op("**") => BinOpKind::Pow,
                _ => break,
            };
            self.bump();
            let right = self.parse_unary()?;
            let span = left.span.merge(&right.span);
            left = Expr {
                kind: ExprKind::BinOp {
                    op,
                    left: Box::new(left),
                    right: Box::new(right),
                },
                span,
            };
        }
        Ok(left)
    }

    /// Unary minus is folded into numeric literals; on anything else it is
    /// outside the subset.
    fn parse_unary(&mut self) -> PResult<Expr> {
        if self.at_op("-") {
            let minus = self.bump().span;
            match self.peek().clone() {
                Tok::Int(v) => {
                    let t = self.bump();
                    return Ok(Expr {
                        kind: ExprKind::Constant(Constant::Int(-v)),
                        span: minus.merge(&t.span),
                    });
                }
                Tok::Float(v) => {
                    let t = self.bump();
                    return Ok(Expr {
                        kind: ExprKind::Constant(Constant::Float(-v)),
                        span: minus.merge(&t.span),
                    });
                }
                _ => return Err(self.unsupported("unary minus on non-literal", minus)),
            }
        }
        self.parse_postfix()
    }

    fn parse_postfix(&mut self) -> PResult<Expr> {
        let mut expr = self.parse_atom()?;
        loop {
            if self.at_op(".") {
                self.bump();
                let (attr, aspan) = self.expect_name()?;
                let span = expr.span.merge(&aspan);
                expr = Expr {
                    kind: ExprKind::Attribute {
                        value: Box::new(expr),
                        attr,
                    },
                    span,
                };
            } else if self.at_op("(") {
                expr = self.parse_call(expr)?;
            } else if self.at_op("[") {
                self.bump();
                let index = self.parse_expr()?;
                if self.at_op(":") {
                    return Err(self.unsupported("slice", self.peek_span()));
                }
                let close = self.expect_op("]")?;
                let span = expr.span.merge(&close);
                expr = Expr {
                    kind: ExprKind::Subscript {
                        value: Box::new(expr),
                        index: Box::new(index),
                    },
                    span,
                };
            } else {
                break;
            }
        }
        Ok(expr)
    }

    fn parse_call(&mut self, callee: Expr) -> PResult<Expr> {
        self.expect_op("(")?;
        let mut args = Vec::new();
        let mut kwargs: Vec<(String, Expr)> = Vec::new();
        while !self.at_op(")") {
            if self.at_op("*") || self.at_op("**") {
                return Err(self.unsupported("starred argument", self.peek_span()));
            }
            // keyword argument: NAME '=' expr
            let is_kw = matches!(self.peek(), Tok::Name(_)) && matches!(self.tokens.get(self.pos + 1).map(|t| &t.tok), Some(Tok::Op("=")));
            if is_kw {
                let (name, _) = self.expect_name()?;
                self.expect_op("=")?;
                let value = self.parse_expr()?;
                kwargs.push((name, value));
            } else {
                if !kwargs.is_empty() {
                    return Err(self.syntax("positional argument after keyword argument".to_string()));
                }
                args.push(self.parse_expr()?);
            }
            if !self.eat_op(",") {
                break;
            }
        }
        let close = self.expect_op(")")?;
        let span = callee.span.merge(&close);
        Ok(Expr {
            kind: ExprKind::Call {
                callee: Box::new(callee),
                args,
                kwargs,
            },
            span,
        })
    }

    fn parse_atom(&mut self) -> PResult<Expr> {
        let span = self.peek_span();
        match self.peek().clone() {
            Tok::Name(n) => {
                let t = self.bump();
                Ok(Expr {
                    kind: ExprKind::Name(n),
                    span: t.span,
                })
            }
            Tok::Int(v) => {
                let t = self.bump();
                Ok(Expr {
                    kind: ExprKind::Constant(Constant::Int(v)),
                    span: t.span,
                })
            }
            Tok::Float(v) => {
                let t = self.bump();
                Ok(Expr {
                    kind: ExprKind::Constant(Constant::Float(v)),
                    span: t.span,
                })
            }
            Tok::Str(s) => {
                let t = self.bump();
                Ok(Expr {
                    kind: ExprKind::Constant(Constant::Str(s)),
                    span: t.span,
                })
            }
            Tok::Keyword("True") => {
                let t = self.bump();
                Ok(Expr {
                    kind: ExprKind::Constant(Constant::Bool(true)),
                    span: t.span,
                })
            }
            Tok::Keyword("False") => {
                let t = self.bump();
                Ok(Expr {
                    kind: ExprKind::Constant(Constant::Bool(false)),
                    span: t.span,
                })
            }
            Tok::Keyword("None") => {
                let t = self.bump();
                Ok(Expr {
                    kind: ExprKind::Constant(Constant::None),
                    span: t.span,
                })
            }
            Tok::Keyword(kw @ ("lambda" | "yield" | "not")) => Err(self.unsupported(kw, span)),
            Tok::Op("(") => self.parse_paren_or_tuple(),
            Tok::Op("[") => self.parse_list(),
            Tok::Op("{") => self.parse_dict(),
            other => Err(self.syntax(format!("expected expression, found {}", describe(&other)))),
        }
    }

    fn parse_paren_or_tuple(&mut self) -> PResult<Expr> {
        let open = self.expect_op("(")?;
        if self.at_op(")") {
            let close = self.bump().span;
            return Ok(Expr {
                kind: ExprKind::TupleLit(Vec::new()),
                span: open.merge(&close),
            });
        }
        let first = self.parse_expr()?;
        if self.at_kw("for") {
            return Err(self.unsupported("generator expression", self.peek_span()));
        }
        if self.at_op(",") {
            let mut items = vec![first];
            while self.eat_op(",") {
                if self.at_op(")") {
                    break;
                }
                items.push(self.parse_expr()?);
            }
            let close = self.expect_op(")")?;
            Ok(Expr {
                kind: ExprKind::TupleLit(items),
                span: open.merge(&close),
            })
        } else {
            self.expect_op(")")?;
            Ok(first)
        }
    }

    fn parse_list(&mut self) -> PResult<Expr> {
        let open = self.expect_op("[")?;
        let mut items = Vec::new();
        while !self.at_op("]") {
            let item = self.parse_expr()?;
            if self.at_kw("for") {
                return Err(self.unsupported("list comprehension", self.peek_span()));
            }
            items.push(item);
            if !self.eat_op(",") {
                break;
            }
        }
        let close = self.expect_op("]")?;
        Ok(Expr {
            kind: ExprKind::ListLit(items),
            span: open.merge(&close),
        })
    }

    fn parse_dict(&mut self) -> PResult<Expr> {
        let open = self.expect_op("{")?;
        let mut pairs = Vec::new();
        while !self.at_op("}") {
            let key = self.parse_expr()?;
            self.expect_op(":")?;
            let value = self.parse_expr()?;
            if self.at_kw("for") {
                return Err(self.unsupported("dict comprehension", self.peek_span()));
            }
            pairs.push((key, value));
            if !self.eat_op(",") {
                break;
            }
        }
        let close = self.expect_op("}")?;
        Ok(Expr {
            kind: ExprKind::DictLit(pairs),
            span: open.merge(&close),
        })
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Name(n) => format!("identifier {n:?}"),
        Tok::Int(v) => format!("integer {v}"),
        Tok::Float(v) => format!("float {v}"),
        Tok::Str(_) => "string literal".to_string(),
        Tok::Keyword(k) => format!("keyword {k:?}"),
        Tok::Op(o) => format!("{o:?}"),
        Tok::Newline => "end of line".to_string(),
        Tok::Indent => "indent".to_string(),
        Tok::Dedent => "dedent".to_string(),
        Tok::Eof => "end of file".to_string(),
    }
}
